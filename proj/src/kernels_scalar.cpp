#include "ovl/kernels.hpp"

#include <cstdlib>

namespace ovl {

const int16_t kLumaTaps[4][8] = {
    {0, 0, 0, 64, 0, 0, 0, 0},
    {-1, 4, -10, 58, 17, -5, 1, 0},
    {-1, 4, -11, 40, 40, -11, 4, -1},
    {0, 1, -5, 17, 58, -10, 4, -1},
};

const int16_t kChromaTaps[8][4] = {
    {0, 64, 0, 0},   {-2, 58, 10, -2}, {-4, 54, 16, -2}, {-6, 46, 28, -4},
    {-4, 36, 36, -4}, {-4, 28, 46, -6}, {-2, 16, 54, -4}, {-2, 10, 58, -2},
};

const int16_t kDct8[8][8] = {
    {128, 128, 128, 128, 128, 128, 128, 128},
    {178, 151, 101, 35, -35, -101, -151, -178},
    {167, 69, -69, -167, -167, -69, 69, 167},
    {151, -35, -178, -101, 101, 178, 35, -151},
    {128, -128, -128, 128, 128, -128, -128, 128},
    {101, -178, 35, 151, -151, -35, 178, -101},
    {69, -167, 167, -69, -69, 167, -167, 69},
    {35, -101, 151, -178, 178, -151, 101, -35},
};

const int16_t kQuantScale[6] = {26, 29, 33, 38, 43, 49};

const TapOffset kAlfLumaOffsets[12] = {
    {0, -3}, {-1, -2}, {0, -2}, {1, -2}, {-2, -1}, {-1, -1},
    {0, -1}, {1, -1},  {2, -1}, {-3, 0}, {-2, 0},  {-1, 0},
};

const TapOffset kAlfChromaOffsets[6] = {
    {0, -2}, {-1, -1}, {0, -1}, {1, -1}, {-2, 0}, {-1, 0},
};

namespace {

template <int Taps>
void mc_generic(const int16_t* th, const int16_t* tv, const Sample* src,
                ptrdiff_t src_stride, Sample* dst, ptrdiff_t dst_stride, int w, int h,
                int bit_depth) {
    constexpr int kCenter = Taps == 8 ? 3 : 1;
    // Separable with 32-bit accumulation; single rounded downshift at the
    // end, so the result equals the direct 2-D convolution bit-exactly.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int32_t acc = 0;
            for (int j = 0; j < Taps; ++j) {
                const Sample* row = src + (ptrdiff_t(y + j - kCenter)) * src_stride;
                int32_t hsum = 0;
                for (int i = 0; i < Taps; ++i)
                    hsum += th[i] * int32_t(row[x + i - kCenter]);
                acc += tv[j] * hsum;
            }
            dst[y * dst_stride + x] = clip_sample((acc + 2048) >> 12, bit_depth);
        }
    }
}

template <int Taps>
void mc_copy(const Sample* src, ptrdiff_t src_stride, Sample* dst, ptrdiff_t dst_stride,
             int w, int h, int, int, int) {
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) dst[y * dst_stride + x] = src[y * src_stride + x];
}

template <int Taps, bool Horizontal>
void mc_1d(const Sample* src, ptrdiff_t src_stride, Sample* dst, ptrdiff_t dst_stride,
           int w, int h, int frac_x, int frac_y, int bit_depth) {
    constexpr int kCenter = Taps == 8 ? 3 : 1;
    const int16_t* taps = Taps == 8 ? kLumaTaps[Horizontal ? frac_x : frac_y]
                                    : kChromaTaps[Horizontal ? frac_x : frac_y];
    ptrdiff_t step = Horizontal ? 1 : src_stride;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Sample* p = src + y * src_stride + x - kCenter * step;
            int32_t acc = 0;
            for (int i = 0; i < Taps; ++i) acc += taps[i] * int32_t(p[i * step]);
            dst[y * dst_stride + x] = clip_sample((acc + 32) >> 6, bit_depth);
        }
    }
}

void mc_luma_hv(const Sample* src, ptrdiff_t src_stride, Sample* dst, ptrdiff_t dst_stride,
                int w, int h, int fx, int fy, int bd) {
    mc_generic<8>(kLumaTaps[fx], kLumaTaps[fy], src, src_stride, dst, dst_stride, w, h, bd);
}

void mc_chroma_hv(const Sample* src, ptrdiff_t src_stride, Sample* dst,
                  ptrdiff_t dst_stride, int w, int h, int fx, int fy, int bd) {
    mc_generic<4>(kChromaTaps[fx], kChromaTaps[fy], src, src_stride, dst, dst_stride, w, h,
                  bd);
}

void bipred_blend_c(const Sample* p0, const Sample* p1, Sample* dst, int n) {
    for (int i = 0; i < n; ++i) dst[i] = Sample((p0[i] + p1[i] + 1) >> 1);
}

void dequant_c(const int16_t* levels, int16_t* coeff, int n, int32_t scale) {
    for (int i = 0; i < n; ++i)
        coeff[i] = int16_t(clip3<int32_t>(-32768, 32767, int32_t(levels[i]) * scale));
}

// Inverse 2-D: Y = Mt * C * M with stage shifts 8 and 11 (the forward pass
// leaves coefficients at 4x the orthonormal scale).
void idct8x8_c(const int16_t* coeff, int16_t* residual) {
    int32_t tmp[64];
    for (int c = 0; c < 8; ++c) {
        for (int r = 0; r < 8; ++r) {
            int32_t acc = 0;
            for (int k = 0; k < 8; ++k) acc += kDct8[k][r] * int32_t(coeff[k * 8 + c]);
            tmp[r * 8 + c] = clip3<int32_t>(-32768, 32767, (acc + 128) >> 8);
        }
    }
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) {
            int32_t acc = 0;
            for (int l = 0; l < 8; ++l) acc += tmp[r * 8 + l] * kDct8[l][c];
            residual[r * 8 + c] = int16_t(clip3<int32_t>(-32768, 32767, (acc + 1024) >> 11));
        }
    }
}

template <int NPairs>
void alf_row(const Sample* src, ptrdiff_t stride, Sample* dst, int w,
             const int16_t* coeffs, int bit_depth) {
    const TapOffset* offs = NPairs == 12 ? kAlfLumaOffsets : kAlfChromaOffsets;
    for (int x = 0; x < w; ++x) {
        int32_t c = src[x];
        int32_t acc = 0;
        for (int i = 0; i < NPairs; ++i) {
            const Sample* a = src + ptrdiff_t(offs[i].dy) * stride + offs[i].dx + x;
            const Sample* b = src - ptrdiff_t(offs[i].dy) * stride - offs[i].dx + x;
            acc += coeffs[i] * (int32_t(*a) + int32_t(*b) - 2 * c);
        }
        dst[x] = clip_sample(c + ((acc + 64) >> 7), bit_depth);
    }
}

int alf_classify_c(const Sample* src, ptrdiff_t stride, uint32_t* activity) {
    uint32_t gv = 0, gh = 0, gd0 = 0, gd1 = 0;
    for (int y = -2; y < 6; ++y) {
        const Sample* row = src + ptrdiff_t(y) * stride;
        for (int x = -2; x < 6; ++x) {
            int32_t c2 = 2 * int32_t(row[x]);
            gv += uint32_t(std::abs(c2 - row[x - stride] - row[x + stride]));
            gh += uint32_t(std::abs(c2 - row[x - 1] - row[x + 1]));
            gd0 += uint32_t(std::abs(c2 - row[x - stride - 1] - row[x + stride + 1]));
            gd1 += uint32_t(std::abs(c2 - row[x - stride + 1] - row[x + stride - 1]));
        }
    }
    if (activity) *activity = gv + gh;

    uint32_t hv_max = gh > gv ? gh : gv, hv_min = gh > gv ? gv : gh;
    uint32_t d_max = gd0 > gd1 ? gd0 : gd1, d_min = gd0 > gd1 ? gd1 : gd0;
    // Pick the stronger family by cross-multiplied ratio, then require the
    // dominant gradient to exceed twice the weak one.
    bool hv_family = uint64_t(hv_max) * d_min >= uint64_t(d_max) * hv_min;
    uint32_t fmax = hv_family ? hv_max : d_max;
    uint32_t fmin = hv_family ? hv_min : d_min;
    if (fmax <= 2 * fmin) return 4;
    if (hv_family) return gh >= gv ? 0 : 1;
    return gd0 >= gd1 ? 2 : 3;
}

void sao_band_c(const Sample* src, Sample* dst, int w, const int8_t* offsets,
                int start_band, int bit_depth) {
    int shift = bit_depth - 5;
    for (int x = 0; x < w; ++x) {
        int band = src[x] >> shift;
        int rel = band - start_band;
        if (rel >= 0 && rel < 4)
            dst[x] = clip_sample(int32_t(src[x]) + offsets[rel], bit_depth);
        else
            dst[x] = src[x];
    }
}

inline int sign3(int32_t v) { return (v > 0) - (v < 0); }

template <int Dir>
void sao_edge_c(const Sample* src, ptrdiff_t stride, Sample* dst, int w,
                const int8_t* offsets, int bit_depth) {
    // neighbor offsets per direction: 0deg, 90deg, 45deg, 135deg
    constexpr ptrdiff_t kA[4] = {-1, 0, +1, -1};
    constexpr ptrdiff_t kAy[4] = {0, -1, -1, -1};
    ptrdiff_t off_a = kAy[Dir] * stride + kA[Dir];
    ptrdiff_t off_b = -off_a;
    for (int x = 0; x < w; ++x) {
        int32_t c = src[x];
        int cat = 2 + sign3(c - src[x + off_a]) + sign3(c - src[x + off_b]);
        if (cat == 2) {
            dst[x] = src[x];
        } else {
            int idx = cat < 2 ? cat : cat - 1;
            dst[x] = clip_sample(c + offsets[idx], bit_depth);
        }
    }
}

void intra_dc_c(Sample* dst, ptrdiff_t stride, int size, const Sample* top,
                const Sample* left) {
    int32_t sum = size;
    for (int i = 0; i < size; ++i) sum += top[i] + left[i];
    Sample v = Sample(sum >> (ilog2(uint32_t(size)) + 1));
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) dst[y * stride + x] = v;
}

void intra_planar_c(Sample* dst, ptrdiff_t stride, int size, const Sample* top,
                    const Sample* left) {
    int log2s = ilog2(uint32_t(size));
    int32_t top_right = top[size];
    int32_t bottom_left = left[size];
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            int32_t hor = (size - 1 - x) * left[y] + (x + 1) * top_right;
            int32_t ver = (size - 1 - y) * top[x] + (y + 1) * bottom_left;
            dst[y * stride + x] = Sample((hor + ver + size) >> (log2s + 1));
        }
    }
}

} // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table = {
        {mc_copy<8>, mc_1d<8, true>, mc_1d<8, false>, mc_luma_hv},
        {mc_copy<4>, mc_1d<4, true>, mc_1d<4, false>, mc_chroma_hv},
        bipred_blend_c,
        idct8x8_c,
        dequant_c,
        alf_row<12>,
        alf_row<6>,
        alf_classify_c,
        sao_band_c,
        {sao_edge_c<0>, sao_edge_c<1>, sao_edge_c<2>, sao_edge_c<3>},
        intra_dc_c,
        intra_planar_c,
        ImplLevel::Scalar,
    };
    return table;
}

} // namespace ovl
