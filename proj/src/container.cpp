#include "ovl/container.hpp"

#include <algorithm>
#include <cstring>
#include <unordered_set>

namespace ovl {

const char* gop_mode_name(GopMode m) {
    switch (m) {
        case GopMode::AI: return "ai";
        case GopMode::LD: return "ld";
        case GopMode::RA8: return "ra8";
    }
    return "?";
}

void AlfParams::serialize(std::vector<uint8_t>& out) const {
    for (int8_t c : luma) out.push_back(uint8_t(c));
    for (int8_t c : chroma) out.push_back(uint8_t(c));
    out.push_back(enable_mode);
    out.insert(out.end(), bitmap.begin(), bitmap.end());
}

AlfParams AlfParams::parse(std::span<const uint8_t> block) {
    check(block.size() == kAlfBlockBytes, ErrorCode::CorruptStream, "alf block size");
    AlfParams p;
    size_t i = 0;
    for (auto& c : p.luma) c = int8_t(block[i++]);
    for (auto& c : p.chroma) c = int8_t(block[i++]);
    p.enable_mode = block[i++];
    check(p.enable_mode <= 2, ErrorCode::CorruptStream, "alf enable_mode");
    std::copy(block.begin() + i, block.end(), p.bitmap.begin());
    return p;
}

void SequenceHeader::validate() const {
    check(width > 0 && height > 0, ErrorCode::EncodeConfig, "empty frame dimensions");
    check(width % 8 == 0 && height % 8 == 0, ErrorCode::EncodeConfig,
          "dimensions must be multiples of 8");
    check(width <= 16384 && height <= 16384, ErrorCode::EncodeConfig, "dimensions too large");
    check(bit_depth == 8 || bit_depth == 10, ErrorCode::EncodeConfig, "bit_depth");
    check(ctu_size == 32 || ctu_size == 64 || ctu_size == 128, ErrorCode::EncodeConfig,
          "ctu_size");
    check(dpb_max_nb_pic >= 1, ErrorCode::EncodeConfig, "dpb_max_nb_pic");
    check(gop_mode != GopMode::AI || dpb_max_nb_pic == 1, ErrorCode::EncodeConfig,
          "dpb_max_nb_pic must be 1 in AI mode");
}

void FrameHeader::validate(const SequenceHeader& seq) const {
    check(qp >= 1 && qp <= 51, ErrorCode::CorruptStream, "qp out of range");
    check(ref_pocs.size() <= 2, ErrorCode::CorruptStream, "too many references");
    bool intra = frame_type == FrameType::I;
    check(intra == ref_pocs.empty(), ErrorCode::CorruptStream,
          "ref_pocs must be empty iff frame is I");
    check(poc < seq.frame_count, ErrorCode::CorruptStream, "poc out of range");
    check(payload_sizes.size() == size_t(seq.ctu_count()), ErrorCode::CorruptStream,
          "ctu_count mismatch");
}

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(uint8_t(v));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 24));
}

} // namespace

std::vector<uint8_t> write_stream(const SequenceHeader& header,
                                  const std::vector<Frame>& frames) {
    header.validate();
    check(frames.size() == header.frame_count, ErrorCode::EncodeConfig,
          "frame_count mismatch");

    std::vector<uint8_t> out;
    out.insert(out.end(), kStreamMagic, kStreamMagic + 4);
    out.push_back(kStreamVersion);
    put_u32(out, header.width);
    put_u32(out, header.height);
    out.push_back(header.bit_depth);
    out.push_back(header.ctu_size);
    out.push_back(uint8_t(header.gop_mode));
    out.push_back(header.dpb_max_nb_pic);
    put_u32(out, header.frame_count);
    out.insert(out.end(), kSequenceHeaderBytes - out.size(), 0); // reserved

    for (const Frame& f : frames) {
        f.header.validate(header);
        check(f.payloads.size() == f.header.payload_sizes.size(), ErrorCode::EncodeConfig,
              "payload count mismatch");
        put_u32(out, f.header.poc);
        out.push_back(uint8_t(f.header.frame_type));
        out.push_back(f.header.qp);
        out.push_back(uint8_t(f.header.ref_pocs.size()));
        for (uint32_t r : f.header.ref_pocs) put_u32(out, r);
        f.header.alf.serialize(out);
        put_u32(out, uint32_t(f.payloads.size()));
        for (size_t i = 0; i < f.payloads.size(); ++i) {
            check(f.header.payload_sizes[i] == f.payloads[i].size(), ErrorCode::EncodeConfig,
                  "payload size table mismatch");
            put_u32(out, f.header.payload_sizes[i]);
        }
        for (const auto& p : f.payloads) out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

StreamParser::StreamParser(std::span<const uint8_t> stream) : m_stream(stream) {
    size_t consumed = 0;
    m_seq = parse_sequence_header(stream, &consumed);
    m_pos = consumed;
}

uint8_t StreamParser::read_u8() {
    check(m_pos + 1 <= m_stream.size(), ErrorCode::TruncatedStream, "header truncated");
    return m_stream[m_pos++];
}

uint32_t StreamParser::read_u32() {
    check(m_pos + 4 <= m_stream.size(), ErrorCode::TruncatedStream, "header truncated");
    uint32_t v = uint32_t(m_stream[m_pos]) | uint32_t(m_stream[m_pos + 1]) << 8 |
                 uint32_t(m_stream[m_pos + 2]) << 16 | uint32_t(m_stream[m_pos + 3]) << 24;
    m_pos += 4;
    return v;
}

std::span<const uint8_t> StreamParser::read_bytes(size_t n, const char* what) {
    check(m_pos + n <= m_stream.size(), ErrorCode::TruncatedStream, what);
    auto s = m_stream.subspan(m_pos, n);
    m_pos += n;
    return s;
}

std::optional<StreamParser::ParsedFrame> StreamParser::next_frame() {
    if (m_frames_parsed >= m_seq.frame_count) return std::nullopt;

    ParsedFrame out;
    FrameHeader& h = out.header;
    h.poc = read_u32();
    uint8_t ft = read_u8();
    check(ft <= 2, ErrorCode::CorruptStream, "frame_type");
    h.frame_type = FrameType(ft);
    h.qp = read_u8();
    uint8_t n_refs = read_u8();
    check(n_refs <= 2, ErrorCode::CorruptStream, "n_refs");
    for (int i = 0; i < n_refs; ++i) h.ref_pocs.push_back(read_u32());
    h.alf = AlfParams::parse(read_bytes(kAlfBlockBytes, "alf block truncated"));
    uint32_t ctu_count = read_u32();
    check(ctu_count == uint32_t(m_seq.ctu_count()), ErrorCode::CorruptStream,
          "ctu_count mismatch");
    h.payload_sizes.resize(ctu_count);
    for (auto& s : h.payload_sizes) s = read_u32();
    h.validate(m_seq);

    // Decode order = stream order; every reference must already be parsed.
    for (uint32_t r : h.ref_pocs) {
        check(std::find(m_decoded_pocs.begin(), m_decoded_pocs.end(), r) !=
                  m_decoded_pocs.end(),
              ErrorCode::CorruptStream, "ref_pocs: reference does not precede frame", h.poc);
    }
    check(std::find(m_decoded_pocs.begin(), m_decoded_pocs.end(), h.poc) ==
              m_decoded_pocs.end(),
          ErrorCode::CorruptStream, "duplicate poc", h.poc);
    m_decoded_pocs.push_back(h.poc);

    out.payloads.reserve(ctu_count);
    for (uint32_t s : h.payload_sizes)
        out.payloads.push_back(read_bytes(s, "ctu payload truncated"));

    ++m_frames_parsed;
    return out;
}

SequenceHeader parse_sequence_header(std::span<const uint8_t> bytes, size_t* consumed) {
    check(bytes.size() >= kSequenceHeaderBytes, ErrorCode::TruncatedStream,
          "sequence header truncated");
    check(std::memcmp(bytes.data(), kStreamMagic, 4) == 0, ErrorCode::CorruptStream, "magic");
    check(bytes[4] == kStreamVersion, ErrorCode::CorruptStream, "version");

    SequenceHeader h;
    auto u32 = [&](size_t off) {
        return uint32_t(bytes[off]) | uint32_t(bytes[off + 1]) << 8 |
               uint32_t(bytes[off + 2]) << 16 | uint32_t(bytes[off + 3]) << 24;
    };
    h.width = u32(5);
    h.height = u32(9);
    h.bit_depth = bytes[13];
    h.ctu_size = bytes[14];
    check(bytes[15] <= 2, ErrorCode::CorruptStream, "gop_mode");
    h.gop_mode = GopMode(bytes[15]);
    h.dpb_max_nb_pic = bytes[16];
    h.frame_count = u32(17);
    try {
        h.validate();
    } catch (const Error& e) {
        fail(ErrorCode::CorruptStream, e.what());
    }
    if (consumed) *consumed = kSequenceHeaderBytes;
    return h;
}

} // namespace ovl
