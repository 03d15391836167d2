#include "ovl/kernels.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>

namespace ovl {

bool platform_supports_vector() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("sse4.1");
#else
    return false;
#endif
}

const KernelTable& select_impl(KernelRequest request) {
    const KernelTable* vec = vector_kernels();
    switch (request) {
        case KernelRequest::Scalar: return scalar_kernels();
        case KernelRequest::Vector:
            if (vec && platform_supports_vector()) return *vec;
            std::fprintf(stderr,
                         "kernels: vector level requested but unavailable, "
                         "falling back to scalar\n");
            return scalar_kernels();
        case KernelRequest::Auto:
            return (vec && platform_supports_vector()) ? *vec : scalar_kernels();
    }
    return scalar_kernels();
}

namespace {

using Clock = std::chrono::steady_clock;

struct Fixture {
    std::vector<Sample> src;
    std::vector<Sample> dst_a, dst_b;
    std::mt19937_64 rng;
    int bit_depth = 10;

    explicit Fixture(uint64_t seed) : rng(seed) {}

    Sample sample() { return Sample(rng() & 0x3FF); }
    void fill(std::vector<Sample>& v, size_t n) {
        v.resize(n);
        for (auto& s : v) s = sample();
    }
};

template <typename Run>
double time_ns_per_call(Run run, int iters) {
    auto t0 = Clock::now();
    for (int i = 0; i < iters; ++i) run();
    auto t1 = Clock::now();
    return double(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()) /
           iters;
}

// Runs one slot comparison: generate inputs, run both impls, compare.
template <typename Gen>
SlotReport run_slot(const std::string& name, int trials, uint64_t seed, Gen gen) {
    SlotReport r;
    r.slot = name;
    r.trials = uint64_t(trials);
    double ta = 0, tb = 0;
    for (int t = 0; t < trials; ++t) {
        uint64_t s = seed + uint64_t(t) * 0x9E3779B97F4A7C15ull;
        auto [equal, na, nb] = gen(s);
        ta += na;
        tb += nb;
        if (!equal) {
            if (r.mismatches == 0) r.first_bad_seed = s;
            ++r.mismatches;
        }
    }
    r.ns_per_call_a = ta / trials;
    r.ns_per_call_b = tb / trials;
    r.throughput_ratio = tb > 0 ? ta / tb : 0;
    return r;
}

struct RunResult {
    bool equal;
    double na, nb;
};

} // namespace

std::vector<SlotReport> verify_equivalence(const KernelTable& a, const KernelTable& b,
                                           int trials, uint64_t seed) {
    std::vector<SlotReport> out;
    const int kTimeIters = 16;

    auto mc_slot = [&](const char* name, McFn fa, McFn fb, int taps, int fx, int fy) {
        out.push_back(run_slot(name, trials, seed, [&](uint64_t s) -> RunResult {
            Fixture f(s);
            int w = 8 + int(f.rng() % 3) * 4, h = 8 + int(f.rng() % 3) * 4;
            int center = taps == 8 ? 3 : 1;
            ptrdiff_t stride = w + taps + 8;
            f.fill(f.src, size_t(stride) * (h + taps + 8));
            const Sample* src = f.src.data() + ptrdiff_t(center + 2) * stride + center + 2;
            f.dst_a.assign(size_t(w) * h, 0);
            f.dst_b.assign(size_t(w) * h, 0);
            double na = time_ns_per_call(
                [&] { fa(src, stride, f.dst_a.data(), w, w, h, fx, fy, 10); }, kTimeIters);
            double nb = time_ns_per_call(
                [&] { fb(src, stride, f.dst_b.data(), w, w, h, fx, fy, 10); }, kTimeIters);
            return {f.dst_a == f.dst_b, na, nb};
        }));
    };

    static const char* kMcNames[4] = {"copy", "h", "v", "hv"};
    for (int route = 0; route < 4; ++route) {
        int fx = (route & 1) ? 2 : 0, fy = (route & 2) ? 3 : 0;
        mc_slot(("mc_luma_" + std::string(kMcNames[route])).c_str(), a.mc_luma[route],
                b.mc_luma[route], 8, fx, fy);
    }
    for (int route = 0; route < 4; ++route) {
        int fx = (route & 1) ? 5 : 0, fy = (route & 2) ? 3 : 0;
        mc_slot(("mc_chroma_" + std::string(kMcNames[route])).c_str(), a.mc_chroma[route],
                b.mc_chroma[route], 4, fx, fy);
    }

    out.push_back(run_slot("bipred_blend", trials, seed, [&](uint64_t s) -> RunResult {
        Fixture f(s);
        int n = 64 + int(f.rng() % 64);
        std::vector<Sample> p0, p1;
        f.fill(p0, size_t(n));
        f.fill(p1, size_t(n));
        f.dst_a.assign(size_t(n), 0);
        f.dst_b.assign(size_t(n), 0);
        double na = time_ns_per_call([&] { a.bipred_blend(p0.data(), p1.data(), f.dst_a.data(), n); },
                                     kTimeIters);
        double nb = time_ns_per_call([&] { b.bipred_blend(p0.data(), p1.data(), f.dst_b.data(), n); },
                                     kTimeIters);
        return {f.dst_a == f.dst_b, na, nb};
    }));

    out.push_back(run_slot("idct8x8", trials, seed, [&](uint64_t s) -> RunResult {
        std::mt19937_64 rng(s);
        int16_t coeff[64], ra[64], rb[64];
        for (auto& c : coeff) c = int16_t(int32_t(rng() % 16384) - 8192);
        double na = time_ns_per_call([&] { a.idct8x8(coeff, ra); }, kTimeIters);
        double nb = time_ns_per_call([&] { b.idct8x8(coeff, rb); }, kTimeIters);
        return {std::memcmp(ra, rb, sizeof ra) == 0, na, nb};
    }));

    out.push_back(run_slot("dequant", trials, seed, [&](uint64_t s) -> RunResult {
        std::mt19937_64 rng(s);
        int16_t lv[64], ca[64], cb[64];
        for (auto& l : lv) l = int16_t(int32_t(rng() % 512) - 256);
        int32_t scale = quant_scale(int(1 + rng() % 51));
        double na = time_ns_per_call([&] { a.dequant(lv, ca, 64, scale); }, kTimeIters);
        double nb = time_ns_per_call([&] { b.dequant(lv, cb, 64, scale); }, kTimeIters);
        return {std::memcmp(ca, cb, sizeof ca) == 0, na, nb};
    }));

    auto alf_slot = [&](const char* name, AlfRowFn fa, AlfRowFn fb, int npairs) {
        out.push_back(run_slot(name, trials, seed, [&](uint64_t s) -> RunResult {
            Fixture f(s);
            int w = 32 + int(f.rng() % 97);
            ptrdiff_t stride = w + 16;
            f.fill(f.src, size_t(stride) * 16);
            const Sample* src = f.src.data() + 8 * stride + 8;
            std::vector<int16_t> coeffs(size_t(npairs), 0);
            for (auto& c : coeffs) c = int16_t(int32_t(f.rng() % 41) - 20);
            f.dst_a.assign(size_t(w), 0);
            f.dst_b.assign(size_t(w), 0);
            double na = time_ns_per_call(
                [&] { fa(src, stride, f.dst_a.data(), w, coeffs.data(), 10); }, kTimeIters);
            double nb = time_ns_per_call(
                [&] { fb(src, stride, f.dst_b.data(), w, coeffs.data(), 10); }, kTimeIters);
            return {f.dst_a == f.dst_b, na, nb};
        }));
    };
    alf_slot("alf_7x7", a.alf_luma_row, b.alf_luma_row, 12);
    alf_slot("alf_5x5", a.alf_chroma_row, b.alf_chroma_row, 6);

    out.push_back(run_slot("alf_classify", trials, seed, [&](uint64_t s) -> RunResult {
        Fixture f(s);
        ptrdiff_t stride = 24;
        f.fill(f.src, size_t(stride) * 24);
        const Sample* src = f.src.data() + 8 * stride + 8;
        uint32_t act_a = 0, act_b = 0;
        int ca = 0, cb = 0;
        double na = time_ns_per_call([&] { ca = a.alf_classify(src, stride, &act_a); },
                                     kTimeIters);
        double nb = time_ns_per_call([&] { cb = b.alf_classify(src, stride, &act_b); },
                                     kTimeIters);
        return {ca == cb && act_a == act_b, na, nb};
    }));

    out.push_back(run_slot("sao_band", trials, seed, [&](uint64_t s) -> RunResult {
        Fixture f(s);
        int w = 32 + int(f.rng() % 97);
        f.fill(f.src, size_t(w));
        int8_t offs[4];
        for (auto& o : offs) o = int8_t(int32_t(f.rng() % 15) - 7);
        int start = int(f.rng() % 29);
        f.dst_a.assign(size_t(w), 0);
        f.dst_b.assign(size_t(w), 0);
        double na = time_ns_per_call(
            [&] { a.sao_band(f.src.data(), f.dst_a.data(), w, offs, start, 10); },
            kTimeIters);
        double nb = time_ns_per_call(
            [&] { b.sao_band(f.src.data(), f.dst_b.data(), w, offs, start, 10); },
            kTimeIters);
        return {f.dst_a == f.dst_b, na, nb};
    }));

    for (int dir = 0; dir < 4; ++dir) {
        out.push_back(run_slot("sao_edge_" + std::to_string(dir), trials, seed,
                               [&, dir](uint64_t s) -> RunResult {
            Fixture f(s);
            int w = 32 + int(f.rng() % 97);
            ptrdiff_t stride = w + 8;
            f.fill(f.src, size_t(stride) * 8);
            const Sample* src = f.src.data() + 4 * stride + 4;
            int8_t offs[4];
            for (auto& o : offs) o = int8_t(int32_t(f.rng() % 15) - 7);
            f.dst_a.assign(size_t(w), 0);
            f.dst_b.assign(size_t(w), 0);
            double na = time_ns_per_call(
                [&] { a.sao_edge[dir](src, stride, f.dst_a.data(), w, offs, 10); },
                kTimeIters);
            double nb = time_ns_per_call(
                [&] { b.sao_edge[dir](src, stride, f.dst_b.data(), w, offs, 10); },
                kTimeIters);
            return {f.dst_a == f.dst_b, na, nb};
        }));
    }

    auto intra_slot = [&](const char* name, auto fa, auto fb) {
        out.push_back(run_slot(name, trials, seed, [&](uint64_t s) -> RunResult {
            Fixture f(s);
            int size = 8 << (f.rng() % 3);
            std::vector<Sample> top, left;
            f.fill(top, size_t(size) + 1);
            f.fill(left, size_t(size) + 1);
            f.dst_a.assign(size_t(size) * size, 0);
            f.dst_b.assign(size_t(size) * size, 0);
            double na = time_ns_per_call(
                [&] { fa(f.dst_a.data(), size, size, top.data(), left.data()); }, kTimeIters);
            double nb = time_ns_per_call(
                [&] { fb(f.dst_b.data(), size, size, top.data(), left.data()); }, kTimeIters);
            return {f.dst_a == f.dst_b, na, nb};
        }));
    };
    intra_slot("intra_dc", a.intra_dc, b.intra_dc);
    intra_slot("intra_planar", a.intra_planar, b.intra_planar);

    return out;
}

bool all_equivalent(const std::vector<SlotReport>& reports) {
    for (const auto& r : reports)
        if (r.mismatches != 0) return false;
    return true;
}

} // namespace ovl
