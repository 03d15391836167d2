#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ovl/common.hpp"

namespace ovl {

// Interpolation taps. Luma: 8-tap DCT-IF at quarter-pel phases, sample
// offsets -3..+4. Chroma: 4-tap at eighth-pel phases, offsets -1..+2.
extern const int16_t kLumaTaps[4][8];
extern const int16_t kChromaTaps[8][4];

// 8x8 integer DCT-II, 7-bit precision (DC row = 128).
extern const int16_t kDct8[8][8];

// Quantizer step table, period 6: scale(qp) = kQuantScale[qp % 6] << (qp / 6).
extern const int16_t kQuantScale[6];
inline int32_t quant_scale(int qp) { return int32_t(kQuantScale[qp % 6]) << (qp / 6); }

// 7x7 (luma) and 5x5 (chroma) diamond offsets of the 12/6 point-symmetric
// coefficient pairs, upper half; the mirrored tap shares the coefficient.
struct TapOffset {
    int8_t dx, dy;
};
extern const TapOffset kAlfLumaOffsets[12];
extern const TapOffset kAlfChromaOffsets[6];

enum class ImplLevel { Scalar = 0, Vector = 1 };

// MC block filter: src points at the integer-pel source position of the
// destination's top-left sample; frac is the quarter-pel (luma) or
// eighth-pel (chroma) phase. Output clipped to bit depth.
using McFn = void (*)(const Sample* src, ptrdiff_t src_stride, Sample* dst,
                      ptrdiff_t dst_stride, int w, int h, int frac_x, int frac_y,
                      int bit_depth);

using BipredFn = void (*)(const Sample* p0, const Sample* p1, Sample* dst, int n);
using Idct8x8Fn = void (*)(const int16_t* coeff, int16_t* residual);
using DequantFn = void (*)(const int16_t* levels, int16_t* coeff, int n, int32_t scale);

// ALF row filter: applies the diamond filter to w samples; src/dst may not
// alias. coeffs are the 12 (luma) / 6 (chroma) pair coefficients at 2^7 scale.
using AlfRowFn = void (*)(const Sample* src, ptrdiff_t src_stride, Sample* dst, int w,
                          const int16_t* coeffs, int bit_depth);

// Classification of one 4x4 block; src points at its top-left sample and the
// 8x8 support window (+/-1 gradient reach) must be readable around it.
// Returns class 0..4 and the Laplacian activity through *activity.
using AlfClassifyFn = int (*)(const Sample* src, ptrdiff_t stride, uint32_t* activity);

using SaoBandFn = void (*)(const Sample* src, Sample* dst, int w, const int8_t* offsets,
                           int start_band, int bit_depth);
// One of four directions; neighbors read at +/-1 in the direction.
using SaoEdgeFn = void (*)(const Sample* src, ptrdiff_t stride, Sample* dst, int w,
                           const int8_t* offsets, int bit_depth);

using IntraDcFn = void (*)(Sample* dst, ptrdiff_t stride, int size, const Sample* top,
                           const Sample* left);
using IntraPlanarFn = void (*)(Sample* dst, ptrdiff_t stride, int size, const Sample* top,
                               const Sample* left);

struct KernelTable {
    // index = (frac_y != 0) * 2 + (frac_x != 0)
    McFn mc_luma[4];
    McFn mc_chroma[4];
    BipredFn bipred_blend;
    Idct8x8Fn idct8x8;
    DequantFn dequant;
    AlfRowFn alf_luma_row;   // 7x7 diamond
    AlfRowFn alf_chroma_row; // 5x5 diamond
    AlfClassifyFn alf_classify;
    SaoBandFn sao_band;
    SaoEdgeFn sao_edge[4]; // 0deg, 90deg, 45deg, 135deg
    IntraDcFn intra_dc;
    IntraPlanarFn intra_planar;
    ImplLevel level;
};

const KernelTable& scalar_kernels();
// Scalar table with the SSE4.1 slots swapped in; null when the build or the
// machine cannot run them.
const KernelTable* vector_kernels();

bool platform_supports_vector();

enum class KernelRequest { Scalar, Vector, Auto };

// Capability-gated dispatch; falls back to scalar (with a notice on stderr
// for an explicit vector request on an incapable platform).
const KernelTable& select_impl(KernelRequest request);

struct SlotReport {
    std::string slot;
    uint64_t trials = 0;
    uint64_t mismatches = 0;
    uint64_t first_bad_seed = 0;
    double ns_per_call_a = 0;
    double ns_per_call_b = 0;
    double throughput_ratio = 0; // a_time / b_time
};

// Randomized bit-exactness comparison of every slot, with per-slot
// throughput. Any mismatch is reported with the reproducer seed.
std::vector<SlotReport> verify_equivalence(const KernelTable& a, const KernelTable& b,
                                           int trials, uint64_t seed = 0x5eed);

bool all_equivalent(const std::vector<SlotReport>& reports);

} // namespace ovl
