#pragma once

#include "ovl/container.hpp"
#include "ovl/y4m.hpp"

namespace ovl {

struct EncoderConfig {
    GopMode gop_mode = GopMode::AI;
    int qp = 32;
    int ctu_size = 64;
    int search_range = 8; // integer pels, <= 16
    int bit_depth = 10;

    void validate() const;
    uint8_t dpb_max_nb_pic() const;
};

struct EncodeResult {
    std::vector<uint8_t> stream;
    // final reconstruction (after all loop filters) per frame, display order
    std::vector<RawFrame> reconstruction;
    // mode statistics, for tests and tuning
    uint64_t cu_count = 0;
    uint64_t intra_cu_count = 0;
    uint64_t zero_mv_skip_count = 0; // inter CUs with mv=(0,0), no residual
    uint64_t nonzero_mv_count = 0;
    std::array<uint64_t, 4> intra_mode_histogram{};
};

// Reference encoder: SAD-driven decisions, no rate-distortion optimization.
// The retained reconstruction is bit-exact with what the decoder produces.
EncodeResult encode_sequence(const RawVideo& video, const EncoderConfig& cfg);

// Decode order of POCs for a GOP configuration (hierarchical for RA8), with
// the reference POCs per frame.
struct GopEntry {
    uint32_t poc;
    FrameType type;
    std::vector<uint32_t> refs;
};
std::vector<GopEntry> gop_structure(GopMode mode, uint32_t frame_count);

} // namespace ovl
