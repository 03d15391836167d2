#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ovl/common.hpp"

namespace ovl {

enum class GopMode : uint8_t { AI = 0, LD = 1, RA8 = 2 };
enum class FrameType : uint8_t { I = 0, P = 1, B = 2 };

const char* gop_mode_name(GopMode m);

// Frame-global ALF parameters, carried as a fixed 64-byte block in every
// frame header. Layout: 12 luma coefficients (int8), 6 chroma coefficients
// (int8), enable mode byte {0: all off, 1: all on, 2: bitmap}, then a
// 45-byte CTU enable bitmap (LSB first, raster order, up to 360 CTUs).
constexpr int kAlfBlockBytes = 64;
constexpr int kAlfLumaCoeffs = 12;
constexpr int kAlfChromaCoeffs = 6;
constexpr int kAlfBitmapCapacity = (kAlfBlockBytes - kAlfLumaCoeffs - kAlfChromaCoeffs - 1) * 8;

struct AlfParams {
    std::array<int8_t, kAlfLumaCoeffs> luma{};
    std::array<int8_t, kAlfChromaCoeffs> chroma{};
    uint8_t enable_mode = 0; // 0 all-off, 1 all-on, 2 bitmap
    std::array<uint8_t, 45> bitmap{};

    bool ctu_enabled(int ctu_idx) const {
        if (enable_mode == 0) return false;
        if (enable_mode == 1) return true;
        if (ctu_idx >= kAlfBitmapCapacity) return false;
        return (bitmap[ctu_idx >> 3] >> (ctu_idx & 7)) & 1;
    }
    void set_ctu_enabled(int ctu_idx, bool on) {
        if (ctu_idx >= kAlfBitmapCapacity) return;
        uint8_t& b = bitmap[ctu_idx >> 3];
        uint8_t m = uint8_t(1u << (ctu_idx & 7));
        b = on ? uint8_t(b | m) : uint8_t(b & ~m);
    }

    void serialize(std::vector<uint8_t>& out) const;
    static AlfParams parse(std::span<const uint8_t> block);
};

struct SequenceHeader {
    uint32_t width = 0;
    uint32_t height = 0;
    uint8_t bit_depth = 10; // {8, 10}
    uint8_t ctu_size = 64;  // {32, 64, 128}
    GopMode gop_mode = GopMode::AI;
    uint8_t dpb_max_nb_pic = 1;
    uint32_t frame_count = 0;

    int ctu_cols() const { return ceil_div(int(width), ctu_size); }
    int ctu_rows() const { return ceil_div(int(height), ctu_size); }
    int ctu_count() const { return ctu_cols() * ctu_rows(); }

    void validate() const;
};

struct FrameHeader {
    uint32_t poc = 0;
    FrameType frame_type = FrameType::I;
    uint8_t qp = 32; // [1, 51]
    std::vector<uint32_t> ref_pocs; // <= 2
    AlfParams alf;
    std::vector<uint32_t> payload_sizes; // one per CTU

    void validate(const SequenceHeader& seq) const;
};

constexpr char kStreamMagic[4] = {'O', 'V', 'L', '1'};
constexpr uint8_t kStreamVersion = 1;
constexpr size_t kSequenceHeaderBytes = 28;

struct Frame {
    FrameHeader header;
    std::vector<std::vector<uint8_t>> payloads; // one per CTU
};

std::vector<uint8_t> write_stream(const SequenceHeader& header,
                                  const std::vector<Frame>& frames);

// Incremental parser. Headers are parsed on the main thread; CTU payloads
// are returned as spans into the caller-owned stream buffer.
class StreamParser {
public:
    explicit StreamParser(std::span<const uint8_t> stream);

    const SequenceHeader& sequence_header() const { return m_seq; }

    struct ParsedFrame {
        FrameHeader header;
        std::vector<std::span<const uint8_t>> payloads;
    };

    // Returns nullopt once frame_count frames have been parsed.
    std::optional<ParsedFrame> next_frame();

    size_t offset() const { return m_pos; }

private:
    uint8_t read_u8();
    uint32_t read_u32();
    std::span<const uint8_t> read_bytes(size_t n, const char* what);

    std::span<const uint8_t> m_stream;
    size_t m_pos = 0;
    SequenceHeader m_seq;
    uint32_t m_frames_parsed = 0;
    std::vector<uint32_t> m_decoded_pocs;
};

SequenceHeader parse_sequence_header(std::span<const uint8_t> bytes, size_t* consumed = nullptr);

} // namespace ovl
