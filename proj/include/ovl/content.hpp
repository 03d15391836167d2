#pragma once

#include "ovl/y4m.hpp"

namespace ovl {

struct ContentConfig {
    uint32_t width = 1280;
    uint32_t height = 720;
    uint32_t frames = 32;
    uint8_t bit_depth = 10;
    uint64_t seed = 1;
    // moving diagonal gradient, a static textured band and a noise band
    int motion_pels_per_frame = 2;
    double noise_level = 0.15; // fraction of full scale in the noise band
};

// Deterministic synthetic test content: moving gradient + static texture +
// noise mix, a desk-scale stand-in for natural sequences.
RawVideo generate_content(const ContentConfig& cfg);

} // namespace ovl
