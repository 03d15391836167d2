#pragma once

#include <cstdint>

#include "ovl/kernels.hpp"

namespace ovl {

// Forward 8x8 DCT-II, stage shifts 5 and 10; leaves coefficients at 4x the
// orthonormal scale (int16-safe for 10-bit residuals).
void dct8x8_forward(const int16_t* residual, int16_t* coeff);

// level = round(|c| / scale) with sign, encoder side.
void quantize8x8(const int16_t* coeff, int16_t* levels, int qp);

inline void dequantize8x8(const int16_t* levels, int16_t* coeff, int qp) {
    scalar_kernels().dequant(levels, coeff, 64, quant_scale(qp));
}

} // namespace ovl
