#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ovl/common.hpp"

namespace ovl {

// MSB-first bit packing within bytes.
class BitWriter {
public:
    void put_bit(uint32_t bit);
    void put_bits(uint32_t value, int width);
    void put_ue(uint32_t value); // order-0 Exp-Golomb, value < 2^31

    // Pads the last byte with zero bits.
    std::vector<uint8_t> finish();

    size_t bit_count() const { return m_bytes.size() * 8 - (m_free & 7); }

private:
    std::vector<uint8_t> m_bytes;
    int m_free = 0; // free bits in the last byte
};

class BitReader {
public:
    explicit BitReader(std::span<const uint8_t> bytes) : m_bytes(bytes) {}

    uint32_t get_bit();
    uint32_t get_bits(int width);
    uint32_t get_ue();

    size_t bits_left() const { return m_bytes.size() * 8 - m_pos; }

private:
    std::span<const uint8_t> m_bytes;
    size_t m_pos = 0;
};

// Adaptive binary range coder: 32-bit range, 12-bit probability states
// updated as p += (bin*4096 - p) >> 5. Payloads are self-contained: all
// contexts start at 1/2 and a terminator bin closes the payload so the
// decoder consumes exactly the bytes the encoder produced.
constexpr int kNumContexts = 16;
constexpr uint16_t kProbInit = 2048;
constexpr uint16_t kProbBits = 12;
constexpr int kAdaptShift = 5;

// Fixed context set.
enum Ctx : int {
    CTX_SPLIT = 0,
    CTX_PRED_MODE = 1,
    CTX_INTRA_MODE0 = 2,
    CTX_INTRA_MODE1 = 3,
    CTX_MRL0 = 4,
    CTX_MRL1 = 5,
    CTX_INTER_BI = 6,
    CTX_INTER_REF = 7,
    CTX_MV_GT0 = 8,
    CTX_MV_GT1 = 9,
    CTX_CBF = 10,
    CTX_SIG = 11,
    CTX_COEF_GT1 = 12,
    CTX_LAST_X = 13,
    CTX_LAST_Y = 14,
    CTX_TERM = 15,
};

struct ContextSet {
    uint16_t p[kNumContexts];
    void reset() {
        for (auto& v : p) v = kProbInit;
    }
};

class RangeEncoder {
public:
    RangeEncoder() { m_ctx.reset(); }

    void encode_bin(int ctx, int bin);
    void encode_bypass(int bin);
    void encode_terminator() { encode_bin(CTX_TERM, 1); }

    // Flushes the accumulator; further encode calls are invalid.
    std::vector<uint8_t> finish();

    const ContextSet& contexts() const { return m_ctx; }

private:
    void shift_low();
    void renorm();

    std::vector<uint8_t> m_out;
    uint64_t m_low = 0;
    uint32_t m_range = 0xFFFFFFFFu;
    uint8_t m_cache = 0;
    int64_t m_cache_size = 1;
    ContextSet m_ctx;
};

class RangeDecoder {
public:
    explicit RangeDecoder(std::span<const uint8_t> payload);

    int decode_bin(int ctx);
    int decode_bypass();

    // Decodes the terminator bin and verifies the payload was consumed
    // exactly. Throws CorruptPayload / TruncatedStream otherwise.
    void verify_terminator();

    size_t consumed() const { return m_pos; }
    bool fully_consumed() const { return m_pos == m_payload.size(); }
    const ContextSet& contexts() const { return m_ctx; }

private:
    uint8_t next_byte();

    std::span<const uint8_t> m_payload;
    size_t m_pos = 0;
    uint32_t m_range = 0xFFFFFFFFu;
    uint32_t m_code = 0;
    ContextSet m_ctx;
};

} // namespace ovl
