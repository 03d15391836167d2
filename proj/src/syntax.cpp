#include "ovl/syntax.hpp"

#include <cstring>

namespace ovl::syntax {

void write_residual_block(RangeEncoder& enc, const int16_t* levels) {
    int last = 63;
    while (last > 0 && levels[last] == 0) --last;

    int lx = last & 7, ly = last >> 3;
    for (int b = 2; b >= 0; --b) enc.encode_bin(CTX_LAST_X, (lx >> b) & 1);
    for (int b = 2; b >= 0; --b) enc.encode_bin(CTX_LAST_Y, (ly >> b) & 1);

    for (int i = 0; i <= last; ++i) {
        int16_t l = levels[i];
        if (i < last) enc.encode_bin(CTX_SIG, l != 0);
        if (l == 0) continue;
        int mag = std::abs(l);
        enc.encode_bin(CTX_COEF_GT1, mag > 1);
        if (mag > 1) write_ue_bypass(enc, uint32_t(mag - 2));
        enc.encode_bypass(l < 0);
    }
}

void read_residual_block(RangeDecoder& dec, int16_t* levels) {
    std::memset(levels, 0, 64 * sizeof(int16_t));
    int lx = 0, ly = 0;
    for (int b = 0; b < 3; ++b) lx = (lx << 1) | dec.decode_bin(CTX_LAST_X);
    for (int b = 0; b < 3; ++b) ly = (ly << 1) | dec.decode_bin(CTX_LAST_Y);
    int last = ly * 8 + lx;

    for (int i = 0; i <= last; ++i) {
        bool sig = i == last ? true : dec.decode_bin(CTX_SIG) != 0;
        if (!sig) continue;
        int mag = 1;
        if (dec.decode_bin(CTX_COEF_GT1)) mag = 2 + int(read_ue_bypass(dec));
        check(mag <= 32767, ErrorCode::CorruptPayload, "coefficient magnitude overflow");
        levels[i] = int16_t(dec.decode_bypass() ? -mag : mag);
    }
}

} // namespace ovl::syntax
