#pragma once

#include <cstdlib>

#include "ovl/bitio.hpp"

namespace ovl::syntax {

// Order-0 Exp-Golomb over bypass bins (coefficient remainders, MVD suffixes).
inline void write_ue_bypass(RangeEncoder& enc, uint32_t v) {
    uint32_t n = v + 1;
    int len = 0;
    for (uint32_t t = n; t > 1; t >>= 1) ++len;
    for (int i = 0; i < len; ++i) enc.encode_bypass(0);
    for (int i = len; i >= 0; --i) enc.encode_bypass((n >> i) & 1);
}

inline uint32_t read_ue_bypass(RangeDecoder& dec) {
    int zeros = 0;
    while (dec.decode_bypass() == 0) {
        ++zeros;
        check(zeros < 32, ErrorCode::CorruptPayload, "bypass exp-golomb prefix too long");
    }
    uint32_t v = 1;
    for (int i = 0; i < zeros; ++i) v = (v << 1) | uint32_t(dec.decode_bypass());
    return v - 1;
}

// MVD component: greater-than flags on adaptive contexts, remainder and sign
// in bypass.
inline void write_mvd(RangeEncoder& enc, int v) {
    int mag = std::abs(v);
    enc.encode_bin(CTX_MV_GT0, mag > 0);
    if (!mag) return;
    enc.encode_bin(CTX_MV_GT1, mag > 1);
    if (mag > 1) write_ue_bypass(enc, uint32_t(mag - 2));
    enc.encode_bypass(v < 0);
}

inline int read_mvd(RangeDecoder& dec) {
    if (!dec.decode_bin(CTX_MV_GT0)) return 0;
    int mag = 1;
    if (dec.decode_bin(CTX_MV_GT1)) mag = 2 + int(read_ue_bypass(dec));
    return dec.decode_bypass() ? -mag : mag;
}

// 8x8 residual block, raster scan: last position, significance flags,
// greater-than-1 flags, bypass remainders and signs. The block must contain
// at least one nonzero level.
void write_residual_block(RangeEncoder& enc, const int16_t* levels);
void read_residual_block(RangeDecoder& dec, int16_t* levels);

} // namespace ovl::syntax
