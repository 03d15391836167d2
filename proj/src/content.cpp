#include "ovl/content.hpp"

#include <random>

namespace ovl {

RawVideo generate_content(const ContentConfig& cfg) {
    RawVideo v;
    v.width = cfg.width;
    v.height = cfg.height;
    v.bit_depth = cfg.bit_depth;
    std::mt19937_64 rng(cfg.seed);

    const int maxval = (1 << cfg.bit_depth) - 1;
    const int W = int(cfg.width), H = int(cfg.height);
    const int noise_amp = int(cfg.noise_level * maxval);

    // static texture tile, fixed for the whole sequence
    const int tile = 64;
    std::vector<int> texture(size_t(tile) * tile);
    for (auto& t : texture) t = int(rng() % (maxval / 3));

    for (uint32_t f = 0; f < cfg.frames; ++f) {
        RawFrame fr = v.make_frame();
        int shift = int(f) * cfg.motion_pels_per_frame;
        std::mt19937_64 frame_rng(cfg.seed ^ (0x9E3779B97F4A7C15ull * (f + 1)));

        for (int y = 0; y < H; ++y) {
            for (int x = 0; x < W; ++x) {
                int band = y * 3 / H;
                int val;
                if (band == 0) {
                    // scrolling diagonal gradient
                    val = ((x + y + shift) * maxval / (W + H)) % (maxval + 1);
                } else if (band == 1) {
                    // static texture with a mild gradient
                    val = texture[size_t(y % tile) * tile + (x % tile)] +
                          x * (maxval / 3) / W;
                } else {
                    // gradient with additive noise
                    val = (x * maxval / W + int(frame_rng() % (2 * noise_amp + 1)) -
                           noise_amp);
                }
                fr.y[size_t(y) * W + x] = clip_sample(val, cfg.bit_depth);
            }
        }
        for (int y = 0; y < H / 2; ++y) {
            for (int x = 0; x < W / 2; ++x) {
                int cu = (x * 2 + shift) * maxval / (W * 2) + maxval / 3;
                int cv2 = (y * 2 + shift / 2) * maxval / (H * 2) + maxval / 3;
                fr.u[size_t(y) * (W / 2) + x] = clip_sample(cu, cfg.bit_depth);
                fr.v[size_t(y) * (W / 2) + x] = clip_sample(cv2, cfg.bit_depth);
            }
        }
        v.frames.push_back(std::move(fr));
    }
    return v;
}

} // namespace ovl
