#include <CLI11.hpp>

#include "ovl/content.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ovgen - synthetic 4:2:0 test content generator"};
    ovl::ContentConfig cfg;
    std::string output;
    int bit_depth = 10;
    app.add_option("--width", cfg.width, "luma width (multiple of 8)");
    app.add_option("--height", cfg.height, "luma height (multiple of 8)");
    app.add_option("--frames", cfg.frames, "frame count");
    app.add_option("--seed", cfg.seed, "content seed");
    app.add_option("--bit-depth", bit_depth, "8 or 10")->check(CLI::IsMember({8, 10}));
    app.add_option("--noise", cfg.noise_level, "noise band level, 0..1");
    app.add_option("--motion", cfg.motion_pels_per_frame, "gradient scroll, pels/frame");
    app.add_option("-o,--output", output, "output .y4m path")->required();
    CLI11_PARSE(app, argc, argv);

    try {
        cfg.bit_depth = uint8_t(bit_depth);
        ovl::RawVideo video = ovl::generate_content(cfg);
        ovl::write_y4m_file(output, video);
        std::printf("wrote %ux%u %ubit, %zu frames to %s\n", cfg.width, cfg.height,
                    unsigned(cfg.bit_depth), video.frames.size(), output.c_str());
    } catch (const ovl::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
