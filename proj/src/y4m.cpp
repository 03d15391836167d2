#include "ovl/y4m.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ovl {

namespace {

void write_plane(std::ostream& out, const std::vector<Sample>& plane, int bit_depth) {
    if (bit_depth > 8) {
        // little-endian 16-bit
        std::vector<uint8_t> buf(plane.size() * 2);
        for (size_t i = 0; i < plane.size(); ++i) {
            buf[2 * i] = uint8_t(plane[i]);
            buf[2 * i + 1] = uint8_t(plane[i] >> 8);
        }
        out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
    } else {
        std::vector<uint8_t> buf(plane.size());
        for (size_t i = 0; i < plane.size(); ++i) buf[i] = uint8_t(plane[i]);
        out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
    }
}

bool read_plane(std::istream& in, std::vector<Sample>& plane, int bit_depth) {
    if (bit_depth > 8) {
        std::vector<uint8_t> buf(plane.size() * 2);
        if (!in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size())))
            return false;
        for (size_t i = 0; i < plane.size(); ++i)
            plane[i] = Sample(buf[2 * i] | (buf[2 * i + 1] << 8));
    } else {
        std::vector<uint8_t> buf(plane.size());
        if (!in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size())))
            return false;
        for (size_t i = 0; i < plane.size(); ++i) plane[i] = buf[i];
    }
    return true;
}

void write_header(std::ostream& out, uint32_t w, uint32_t h, uint8_t bd, uint32_t fn,
                  uint32_t fd) {
    out << "YUV4MPEG2 W" << w << " H" << h << " F" << fn << ":" << fd << " Ip A1:1 C420";
    if (bd == 10)
        out << "p10";
    else
        out << "jpeg";
    out << "\n";
}

} // namespace

RawVideo read_y4m(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::TruncatedStream, "empty y4m input");
    check(line.rfind("YUV4MPEG2", 0) == 0, ErrorCode::UnsupportedFormat, "not a y4m stream");

    RawVideo v;
    v.bit_depth = 8;
    std::string colorspace = "420jpeg";
    std::istringstream tokens(line.substr(9));
    std::string tok;
    while (tokens >> tok) {
        if (tok.empty()) continue;
        char tag = tok[0];
        std::string val = tok.substr(1);
        switch (tag) {
            case 'W': v.width = uint32_t(std::stoul(val)); break;
            case 'H': v.height = uint32_t(std::stoul(val)); break;
            case 'F': {
                auto colon = val.find(':');
                check(colon != std::string::npos, ErrorCode::CorruptStream, "y4m frame rate");
                v.fps_num = uint32_t(std::stoul(val.substr(0, colon)));
                v.fps_den = uint32_t(std::stoul(val.substr(colon + 1)));
                break;
            }
            case 'C': colorspace = val; break;
            default: break; // interlacing / aspect tags ignored
        }
    }
    check(v.width > 0 && v.height > 0, ErrorCode::CorruptStream, "y4m dimensions");

    if (colorspace == "420" || colorspace == "420jpeg" || colorspace == "420mpeg2" ||
        colorspace == "420paldv") {
        v.bit_depth = 8;
    } else if (colorspace == "420p10") {
        v.bit_depth = 10;
    } else {
        fail(ErrorCode::UnsupportedFormat, "y4m colorspace " + colorspace + " (4:2:0 only)");
    }

    while (std::getline(in, line)) {
        check(line.rfind("FRAME", 0) == 0, ErrorCode::CorruptStream, "y4m frame marker");
        RawFrame f = v.make_frame();
        check(read_plane(in, f.y, v.bit_depth) && read_plane(in, f.u, v.bit_depth) &&
                  read_plane(in, f.v, v.bit_depth),
              ErrorCode::TruncatedStream, "y4m frame data truncated");
        v.frames.push_back(std::move(f));
    }
    return v;
}

RawVideo read_y4m_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), ErrorCode::Io, "cannot open " + path);
    return read_y4m(in);
}

void write_y4m(std::ostream& out, const RawVideo& video) {
    write_header(out, video.width, video.height, video.bit_depth, video.fps_num,
                 video.fps_den);
    for (const RawFrame& f : video.frames) {
        out << "FRAME\n";
        write_plane(out, f.y, video.bit_depth);
        write_plane(out, f.u, video.bit_depth);
        write_plane(out, f.v, video.bit_depth);
    }
}

void write_y4m_file(const std::string& path, const RawVideo& video) {
    std::ofstream out(path, std::ios::binary);
    check(out.good(), ErrorCode::Io, "cannot open " + path);
    write_y4m(out, video);
}

Y4mWriter::Y4mWriter(std::ostream& out, uint32_t width, uint32_t height, uint8_t bit_depth,
                     uint32_t fps_num, uint32_t fps_den)
    : m_out(out), m_width(width), m_height(height), m_bit_depth(bit_depth) {
    write_header(out, width, height, bit_depth, fps_num, fps_den);
}

void Y4mWriter::write_frame(const RawFrame& frame) {
    m_out << "FRAME\n";
    write_plane(m_out, frame.y, m_bit_depth);
    write_plane(m_out, frame.u, m_bit_depth);
    write_plane(m_out, frame.v, m_bit_depth);
}

} // namespace ovl
