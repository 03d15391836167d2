#include <CLI11.hpp>

#include <fstream>

#include "ovl/encoder.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ovenc - reference encoder"};
    std::string input, output, gop = "ai";
    ovl::EncoderConfig cfg;
    app.add_option("--input,-i", input, "input .y4m")->required();
    app.add_option("--qp", cfg.qp, "quantizer, 1..51");
    app.add_option("--gop", gop, "ai | ld | ra8")->check(CLI::IsMember({"ai", "ld", "ra8"}));
    app.add_option("--ctu", cfg.ctu_size, "CTU size")->check(CLI::IsMember({32, 64, 128}));
    app.add_option("--search-range", cfg.search_range, "integer-pel search range, 0..16");
    app.add_option("--bit-depth", cfg.bit_depth, "internal bit depth")
        ->check(CLI::IsMember({8, 10}));
    app.add_option("-o,--output", output, "output .ovl stream")->required();
    CLI11_PARSE(app, argc, argv);

    cfg.gop_mode = gop == "ai" ? ovl::GopMode::AI
                               : (gop == "ld" ? ovl::GopMode::LD : ovl::GopMode::RA8);
    try {
        ovl::RawVideo video = ovl::read_y4m_file(input);
        ovl::EncodeResult r = ovl::encode_sequence(video, cfg);
        std::ofstream out(output, std::ios::binary);
        ovl::check(out.good(), ovl::ErrorCode::Io, "cannot open " + output);
        out.write(reinterpret_cast<const char*>(r.stream.data()),
                  std::streamsize(r.stream.size()));
        std::printf("%s: %zu frames, %zu bytes (%s, qp %d, ctu %d)\n", output.c_str(),
                    r.reconstruction.size(), r.stream.size(), gop.c_str(), cfg.qp,
                    cfg.ctu_size);
    } catch (const ovl::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
