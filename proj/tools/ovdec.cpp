// Decoder CLI. Compiled twice: `ovdec` against the release core and
// `ovprofile` against the instrumented core (OVL_PROFILE), which adds the
// per-stage complexity report.
#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <optional>

#include "ovl/pipeline.hpp"
#include "ovl/profile.hpp"

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    ovl::check(in.good(), ovl::ErrorCode::Io, "cannot open " + path);
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                                std::istreambuf_iterator<char>());
}

uint64_t checksum_update(uint64_t h, const std::vector<ovl::Sample>& plane) {
    for (ovl::Sample s : plane) h = (h ^ s) * 0x100000001B3ull;
    return h;
}

} // namespace

int main(int argc, char** argv) {
#if OVL_PROFILE
    CLI::App app{"ovprofile - instrumented decoder with per-stage complexity report"};
#else
    CLI::App app{"ovdec - stream decoder"};
#endif
    std::string input, output, kernels = "auto", trace_path, mem_path, profile_path;
    int threads = 1;
    int64_t watchdog_ms = 0;
    app.add_option("--input,-i", input, "input .ovl stream")->required();
    app.add_option("--output,-o", output, "decoded .y4m (optional)");
    app.add_option("--threads,-t", threads, "decoding threads")->check(CLI::Range(1, 64));
    app.add_option("--kernels", kernels, "scalar | vector | auto")
        ->check(CLI::IsMember({"scalar", "vector", "auto"}));
    app.add_option("--trace", trace_path, "event timeline CSV");
    app.add_option("--mem-report", mem_path, "memory accounting CSV");
    app.add_option("--watchdog-ms", watchdog_ms, "stall watchdog (0 = off)");
#if OVL_PROFILE
    app.add_option("--profile", profile_path, "per-stage share CSV");
#else
    app.add_option("--profile", profile_path,
                   "per-stage share CSV (requires the instrumented build; use ovprofile)");
#endif
    CLI11_PARSE(app, argc, argv);

#if !OVL_PROFILE
    if (!profile_path.empty()) {
        std::fprintf(stderr,
                     "error: this build carries no stage counters; use ovprofile\n");
        return 2;
    }
#endif

    std::vector<uint8_t> stream;
    try {
        stream = read_file(input);
    } catch (const ovl::Error& e) {
        std::fprintf(stderr, "error: code=%s %s\n", ovl::error_code_name(e.code()),
                     e.what());
        return 2;
    }

    ovl::DecoderOptions opts;
    opts.threads = threads;
    opts.kernels = kernels == "scalar"
                       ? ovl::KernelRequest::Scalar
                       : (kernels == "vector" ? ovl::KernelRequest::Vector
                                              : ovl::KernelRequest::Auto);
    opts.watchdog_ms = watchdog_ms;
    ovl::TraceSink trace;
    if (!trace_path.empty()) opts.trace = &trace;

    std::optional<std::ofstream> y4m_file;
    std::optional<ovl::Y4mWriter> writer;
    ovl::RawFrame frame;
    uint64_t checksum = 0xcbf29ce484222325ull;
    uint64_t frames = 0;

    const ovl::KernelTable& ker = ovl::select_impl(opts.kernels);
    std::printf("ovdec: %s, %d thread(s), %s kernels\n", input.c_str(), threads,
                ker.level == ovl::ImplLevel::Vector ? "vector" : "scalar");

#if OVL_PROFILE
    ovl::prof::reset();
#endif

    auto t0 = std::chrono::steady_clock::now();
    ovl::DecodeStats stats;
    try {
        ovl::SequenceHeader seq = ovl::parse_sequence_header(stream);
        if (!output.empty()) {
            y4m_file.emplace(output, std::ios::binary);
            ovl::check(y4m_file->good(), ovl::ErrorCode::Io, "cannot open " + output);
            writer.emplace(*y4m_file, seq.width, seq.height, seq.bit_depth);
        }
        stats = ovl::run_decode(stream, opts, [&](uint32_t, const ovl::PictureBuffer& pic) {
            ovl::picture_to_raw(pic, frame);
            checksum = checksum_update(checksum, frame.y);
            checksum = checksum_update(checksum, frame.u);
            checksum = checksum_update(checksum, frame.v);
            if (writer) writer->write_frame(frame);
            ++frames;
        });
    } catch (const ovl::Error& e) {
        std::fprintf(stderr, "error: code=%s poc=%lld %s\n",
                     ovl::error_code_name(e.code()), (long long)e.poc(), e.what());
        return 3;
    }
    auto t1 = std::chrono::steady_clock::now();
    double secs = std::chrono::duration<double>(t1 - t0).count();

    std::printf("decoded %llu frames in %.3f s : %.2f fps\n",
                (unsigned long long)stats.frames, secs, double(stats.frames) / secs);
    std::printf("checksum %016llx\n", (unsigned long long)checksum);
    std::printf("peak accounted memory: %.2f MB\n", double(stats.peak_bytes_total) / 1e6);
    for (const auto& row : stats.memory)
        std::printf("  %-14s %12zu bytes  %6zu allocations\n", row.category,
                    row.peak_bytes, row.allocations);

    if (!trace_path.empty()) trace.write_csv(trace_path);
    if (!mem_path.empty()) {
        std::ofstream mem(mem_path);
        mem << "category,peak_bytes,allocations\n";
        for (const auto& row : stats.memory)
            mem << row.category << ',' << row.peak_bytes << ',' << row.allocations << '\n';
    }

#if OVL_PROFILE
    {
        ovl::StageTotals totals = ovl::prof::collect();
        uint64_t total = totals.total();
        if (total == 0) total = 1;
        std::printf("\ncomplexity distribution:\n");
        std::string csv = "stage,percent\n";
        for (size_t i = 0; i < totals.ns.size(); ++i) {
            double pct = 100.0 * double(totals.ns[i]) / double(total);
            const char* name = ovl::stage_name(ovl::Stage(i));
            int bars = int(pct / 2.0 + 0.5);
            std::printf("  %-10s %6.2f%% %s\n", name, pct, std::string(size_t(bars), '#').c_str());
            csv += std::string(name) + "," + std::to_string(pct) + "\n";
        }
        if (!profile_path.empty()) {
            std::ofstream pf(profile_path);
            pf << csv;
        }
    }
#endif
    return 0;
}
