#include "ovl/transform.hpp"

namespace ovl {

void dct8x8_forward(const int16_t* residual, int16_t* coeff) {
    int32_t tmp[64];
    for (int c = 0; c < 8; ++c) {
        for (int k = 0; k < 8; ++k) {
            int32_t acc = 0;
            for (int r = 0; r < 8; ++r) acc += kDct8[k][r] * int32_t(residual[r * 8 + c]);
            tmp[k * 8 + c] = clip3<int32_t>(-32768, 32767, (acc + 16) >> 5);
        }
    }
    for (int k = 0; k < 8; ++k) {
        for (int l = 0; l < 8; ++l) {
            int32_t acc = 0;
            for (int c = 0; c < 8; ++c) acc += tmp[k * 8 + c] * kDct8[l][c];
            coeff[k * 8 + l] = int16_t(clip3<int32_t>(-32768, 32767, (acc + 512) >> 10));
        }
    }
}

void quantize8x8(const int16_t* coeff, int16_t* levels, int qp) {
    int32_t scale = quant_scale(qp);
    for (int i = 0; i < 64; ++i) {
        int32_t c = coeff[i];
        int32_t mag = (std::abs(c) + scale / 2) / scale;
        levels[i] = int16_t(c < 0 ? -mag : mag);
    }
}

} // namespace ovl
