#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ovl/common.hpp"

namespace ovl {

// Planar 4:2:0 frames. Samples are stored as uint16_t regardless of bit
// depth; values are < 2^bit_depth.
struct RawFrame {
    std::vector<Sample> y, u, v;
};

struct RawVideo {
    uint32_t width = 0;
    uint32_t height = 0;
    uint8_t bit_depth = 8;
    uint32_t fps_num = 25;
    uint32_t fps_den = 1;
    std::vector<RawFrame> frames;

    size_t luma_size() const { return size_t(width) * height; }
    size_t chroma_size() const { return size_t(width / 2) * (height / 2); }

    RawFrame make_frame(Sample fill = 0) const {
        return RawFrame{std::vector<Sample>(luma_size(), fill),
                        std::vector<Sample>(chroma_size(), fill),
                        std::vector<Sample>(chroma_size(), fill)};
    }
};

RawVideo read_y4m(std::istream& in);
RawVideo read_y4m_file(const std::string& path);
void write_y4m(std::ostream& out, const RawVideo& video);
void write_y4m_file(const std::string& path, const RawVideo& video);

// Incremental Y4M writer for streaming decoded frames in display order.
class Y4mWriter {
public:
    Y4mWriter(std::ostream& out, uint32_t width, uint32_t height, uint8_t bit_depth,
              uint32_t fps_num = 25, uint32_t fps_den = 1);
    void write_frame(const RawFrame& frame);

private:
    std::ostream& m_out;
    uint32_t m_width, m_height;
    uint8_t m_bit_depth;
};

} // namespace ovl
