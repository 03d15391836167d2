// Benchmark harness: per-(sequence, qp, threads) decoding fps with speedup
// vs 1 thread and peak accounted memory, median of N repeats. Also hosts the
// kernel microbenchmark / equivalence check.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>

#include "ovl/pipeline.hpp"

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    ovl::check(in.good(), ovl::ErrorCode::Io, "cannot open " + path);
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                                std::istreambuf_iterator<char>());
}

struct Cell {
    double fps = 0;
    size_t peak_mem = 0;
};

Cell run_cell(const std::vector<uint8_t>& stream, int threads, ovl::KernelRequest kernels,
              int repeats) {
    std::vector<double> fps;
    Cell cell;
    for (int r = 0; r < repeats; ++r) {
        ovl::DecoderOptions opts;
        opts.threads = threads;
        opts.kernels = kernels;
        auto t0 = std::chrono::steady_clock::now();
        ovl::DecodeStats stats = ovl::run_decode(stream, opts, {});
        auto t1 = std::chrono::steady_clock::now();
        fps.push_back(double(stats.frames) /
                      std::chrono::duration<double>(t1 - t0).count());
        cell.peak_mem = stats.peak_bytes_total;
    }
    std::sort(fps.begin(), fps.end());
    cell.fps = fps[fps.size() / 2];
    return cell;
}

std::string basename_of(const std::string& path) {
    auto slash = path.find_last_of('/');
    auto s = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = s.find_last_of('.');
    return dot == std::string::npos ? s : s.substr(0, dot);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ovbench - decoding speed / memory suite"};
    std::vector<std::string> inputs;
    std::vector<int> threads{1, 2, 4};
    int repeats = 3;
    std::string out_path = "bench.csv", kernels = "auto", micro_path;
    int micro_trials = 2000;
    app.add_option("--inputs,-i", inputs, "pre-encoded .ovl streams");
    app.add_option("--threads,-t", threads, "thread counts");
    app.add_option("--repeats", repeats, "runs per cell (median reported)");
    app.add_option("--kernels", kernels, "scalar | vector | auto")
        ->check(CLI::IsMember({"scalar", "vector", "auto"}));
    app.add_option("--out,-o", out_path, "bench CSV path");
    app.add_option("--microbench", micro_path, "kernel microbenchmark CSV path");
    app.add_option("--micro-trials", micro_trials, "microbenchmark trials per slot");
    CLI11_PARSE(app, argc, argv);

    ovl::KernelRequest kreq = kernels == "scalar"
                                  ? ovl::KernelRequest::Scalar
                                  : (kernels == "vector" ? ovl::KernelRequest::Vector
                                                         : ovl::KernelRequest::Auto);

    try {
        if (!micro_path.empty()) {
            const ovl::KernelTable* vec = ovl::vector_kernels();
            ovl::check(vec && ovl::platform_supports_vector(), ovl::ErrorCode::InternalState,
                       "vector kernels unavailable on this platform");
            auto reports = ovl::verify_equivalence(ovl::scalar_kernels(), *vec, micro_trials);
            std::ofstream mb(micro_path);
            mb << "slot,impl,ns_per_call,ratio\n";
            bool ok = true;
            for (const auto& r : reports) {
                mb << r.slot << ",scalar," << r.ns_per_call_a << ",1.0\n";
                mb << r.slot << ",vector," << r.ns_per_call_b << ','
                   << r.throughput_ratio << '\n';
                if (r.mismatches) {
                    ok = false;
                    std::fprintf(stderr,
                                 "equivalence-failure: slot=%s mismatches=%llu seed=%llu\n",
                                 r.slot.c_str(), (unsigned long long)r.mismatches,
                                 (unsigned long long)r.first_bad_seed);
                }
            }
            std::printf("microbench: %zu slots -> %s (%s)\n", reports.size(),
                        micro_path.c_str(), ok ? "all bit-exact" : "MISMATCHES");
            if (!ok) return 4;
        }

        if (!inputs.empty()) {
            std::ofstream out(out_path);
            out << "sequence,qp,threads,fps,speedup,peak_mem_bytes\n";
            for (const auto& path : inputs) {
                auto stream = read_file(path);
                ovl::StreamParser parser(stream);
                int qp = 0;
                {
                    ovl::StreamParser p2(stream);
                    if (auto f = p2.next_frame()) qp = f->header.qp;
                }
                double base_fps = 0;
                for (int n : threads) {
                    Cell c = run_cell(stream, n, kreq, repeats);
                    if (n == threads.front()) base_fps = c.fps;
                    double speedup = base_fps > 0 ? c.fps / base_fps : 0;
                    out << basename_of(path) << ',' << qp << ',' << n << ',' << c.fps
                        << ',' << speedup << ',' << c.peak_mem << '\n';
                    std::printf("%-24s qp %2d  %2d th.  %8.2f fps  speedup %.2f  mem %.1f MB\n",
                                basename_of(path).c_str(), qp, n, c.fps, speedup,
                                double(c.peak_mem) / 1e6);
                }
            }
            std::printf("wrote %s\n", out_path.c_str());
        }
    } catch (const ovl::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
