#include "ovl/bitio.hpp"

namespace ovl {

const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::TruncatedStream: return "truncated-stream";
        case ErrorCode::CorruptStream: return "corrupt-stream";
        case ErrorCode::CorruptPayload: return "corrupt-payload";
        case ErrorCode::BrokenReference: return "broken-reference";
        case ErrorCode::InternalState: return "internal-state";
        case ErrorCode::UnsupportedFormat: return "unsupported-format";
        case ErrorCode::EncodeConfig: return "encode-config";
        case ErrorCode::OutOfMemory: return "out-of-memory";
        case ErrorCode::WatchdogTimeout: return "watchdog-timeout";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

void BitWriter::put_bit(uint32_t bit) {
    if (m_free == 0) {
        m_bytes.push_back(0);
        m_free = 8;
    }
    --m_free;
    if (bit & 1) m_bytes.back() |= uint8_t(1u << m_free);
}

void BitWriter::put_bits(uint32_t value, int width) {
    for (int i = width - 1; i >= 0; --i) put_bit((value >> i) & 1);
}

void BitWriter::put_ue(uint32_t value) {
    check(value < (1u << 31), ErrorCode::InternalState, "ue value out of range");
    uint32_t n = value + 1;
    int len = 0;
    for (uint32_t t = n; t > 1; t >>= 1) ++len;
    put_bits(0, len);
    put_bits(n, len + 1);
}

std::vector<uint8_t> BitWriter::finish() {
    m_free = 0;
    return std::move(m_bytes);
}

uint32_t BitReader::get_bit() {
    check(m_pos < m_bytes.size() * 8, ErrorCode::TruncatedStream, "bit read past end");
    uint32_t bit = (m_bytes[m_pos >> 3] >> (7 - (m_pos & 7))) & 1;
    ++m_pos;
    return bit;
}

uint32_t BitReader::get_bits(int width) {
    uint32_t v = 0;
    for (int i = 0; i < width; ++i) v = (v << 1) | get_bit();
    return v;
}

uint32_t BitReader::get_ue() {
    int zeros = 0;
    while (get_bit() == 0) {
        ++zeros;
        check(zeros < 33, ErrorCode::CorruptStream, "exp-golomb prefix too long");
    }
    uint32_t v = 1;
    for (int i = 0; i < zeros; ++i) v = (v << 1) | get_bit();
    return v - 1;
}

namespace {

inline void adapt(uint16_t& p, int bin) {
    if (bin)
        p = uint16_t(p + (((1u << kProbBits) - p) >> kAdaptShift));
    else
        p = uint16_t(p - (p >> kAdaptShift));
}

} // namespace

void RangeEncoder::shift_low() {
    if (uint32_t(m_low) < 0xFF000000u || (m_low >> 32) != 0) {
        uint8_t carry = uint8_t(m_low >> 32);
        uint8_t byte = m_cache;
        do {
            m_out.push_back(uint8_t(byte + carry));
            byte = 0xFF;
        } while (--m_cache_size != 0);
        m_cache = uint8_t(m_low >> 24);
    }
    ++m_cache_size;
    m_low = (m_low << 8) & 0xFFFFFFFFu;
}

void RangeEncoder::renorm() {
    while (m_range < (1u << 24)) {
        m_range <<= 8;
        shift_low();
    }
}

void RangeEncoder::encode_bin(int ctx, int bin) {
    uint16_t& p = m_ctx.p[ctx];
    uint32_t bound = (m_range >> kProbBits) * p;
    if (bin) {
        m_range = bound;
    } else {
        m_low += bound;
        m_range -= bound;
    }
    adapt(p, bin);
    renorm();
}

void RangeEncoder::encode_bypass(int bin) {
    uint32_t bound = (m_range >> kProbBits) << (kProbBits - 1);
    if (bin) {
        m_range = bound;
    } else {
        m_low += bound;
        m_range -= bound;
    }
    renorm();
}

std::vector<uint8_t> RangeEncoder::finish() {
    for (int i = 0; i < 5; ++i) shift_low();
    return std::move(m_out);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> payload) : m_payload(payload) {
    m_ctx.reset();
    for (int i = 0; i < 5; ++i) m_code = (m_code << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
    check(m_pos < m_payload.size(), ErrorCode::TruncatedStream,
          "end-of-stream before terminator");
    return m_payload[m_pos++];
}

int RangeDecoder::decode_bin(int ctx) {
    uint16_t& p = m_ctx.p[ctx];
    uint32_t bound = (m_range >> kProbBits) * p;
    int bin;
    if (m_code < bound) {
        bin = 1;
        m_range = bound;
    } else {
        bin = 0;
        m_code -= bound;
        m_range -= bound;
    }
    adapt(p, bin);
    while (m_range < (1u << 24)) {
        m_range <<= 8;
        m_code = (m_code << 8) | next_byte();
    }
    return bin;
}

int RangeDecoder::decode_bypass() {
    uint32_t bound = (m_range >> kProbBits) << (kProbBits - 1);
    int bin;
    if (m_code < bound) {
        bin = 1;
        m_range = bound;
    } else {
        bin = 0;
        m_code -= bound;
        m_range -= bound;
    }
    while (m_range < (1u << 24)) {
        m_range <<= 8;
        m_code = (m_code << 8) | next_byte();
    }
    return bin;
}

void RangeDecoder::verify_terminator() {
    int bin = decode_bin(CTX_TERM);
    check(bin == 1, ErrorCode::CorruptPayload, "terminator bin mismatch");
    check(fully_consumed(), ErrorCode::CorruptPayload, "payload not fully consumed");
}

} // namespace ovl
