#include "ovl/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <smmintrin.h>

#include <cstring>
#include <vector>

namespace ovl {

namespace {

// All vector slots accumulate in 32 bits and round exactly like the scalar
// reference, so results are bit-identical.

inline __m128i clip_epi32_to_sample(__m128i v, int bit_depth) {
    __m128i zero = _mm_setzero_si128();
    __m128i maxv = _mm_set1_epi32((1 << bit_depth) - 1);
    return _mm_min_epi32(_mm_max_epi32(v, zero), maxv);
}

void mc_luma_hv_sse(const Sample* src, ptrdiff_t src_stride, Sample* dst,
                    ptrdiff_t dst_stride, int w, int h, int fx, int fy, int bit_depth) {
    const int16_t* th = kLumaTaps[fx];
    const int16_t* tv = kLumaTaps[fy];
    // horizontal pass into a 32-bit intermediate (h + 7 rows)
    int tw = w;
    std::vector<int32_t> tmp(size_t(tw) * (h + 7));
    for (int y = 0; y < h + 7; ++y) {
        const Sample* row = src + ptrdiff_t(y - 3) * src_stride;
        int32_t* trow = tmp.data() + ptrdiff_t(y) * tw;
        int x = 0;
        for (; x + 4 <= tw; x += 4) {
            __m128i acc = _mm_setzero_si128();
            for (int i = 0; i < 8; ++i) {
                __m128i s = _mm_cvtepu16_epi32(
                    _mm_loadl_epi64(reinterpret_cast<const __m128i*>(row + x + i - 3)));
                acc = _mm_add_epi32(acc, _mm_mullo_epi32(s, _mm_set1_epi32(th[i])));
            }
            _mm_storeu_si128(reinterpret_cast<__m128i*>(trow + x), acc);
        }
        for (; x < tw; ++x) {
            int32_t a = 0;
            for (int i = 0; i < 8; ++i) a += th[i] * int32_t(row[x + i - 3]);
            trow[x] = a;
        }
    }
    for (int y = 0; y < h; ++y) {
        Sample* drow = dst + ptrdiff_t(y) * dst_stride;
        int x = 0;
        for (; x + 4 <= w; x += 4) {
            __m128i acc = _mm_set1_epi32(2048);
            for (int j = 0; j < 8; ++j) {
                __m128i t = _mm_loadu_si128(
                    reinterpret_cast<const __m128i*>(tmp.data() + ptrdiff_t(y + j) * tw + x));
                acc = _mm_add_epi32(acc, _mm_mullo_epi32(t, _mm_set1_epi32(tv[j])));
            }
            acc = _mm_srai_epi32(acc, 12);
            acc = clip_epi32_to_sample(acc, bit_depth);
            __m128i packed = _mm_packus_epi32(acc, acc);
            _mm_storel_epi64(reinterpret_cast<__m128i*>(drow + x), packed);
        }
        for (; x < w; ++x) {
            int32_t a = 2048;
            for (int j = 0; j < 8; ++j) a += tv[j] * tmp[size_t(y + j) * tw + x];
            drow[x] = clip_sample(a >> 12, bit_depth);
        }
    }
}

void mc_luma_h_sse(const Sample* src, ptrdiff_t src_stride, Sample* dst,
                   ptrdiff_t dst_stride, int w, int h, int fx, int /*fy*/, int bit_depth) {
    const int16_t* th = kLumaTaps[fx];
    for (int y = 0; y < h; ++y) {
        const Sample* row = src + ptrdiff_t(y) * src_stride;
        Sample* drow = dst + ptrdiff_t(y) * dst_stride;
        int x = 0;
        for (; x + 4 <= w; x += 4) {
            __m128i acc = _mm_set1_epi32(32);
            for (int i = 0; i < 8; ++i) {
                __m128i s = _mm_cvtepu16_epi32(
                    _mm_loadl_epi64(reinterpret_cast<const __m128i*>(row + x + i - 3)));
                acc = _mm_add_epi32(acc, _mm_mullo_epi32(s, _mm_set1_epi32(th[i])));
            }
            acc = _mm_srai_epi32(acc, 6);
            acc = clip_epi32_to_sample(acc, bit_depth);
            __m128i packed = _mm_packus_epi32(acc, acc);
            _mm_storel_epi64(reinterpret_cast<__m128i*>(drow + x), packed);
        }
        for (; x < w; ++x) {
            int32_t a = 32;
            for (int i = 0; i < 8; ++i) a += th[i] * int32_t(row[x + i - 3]);
            drow[x] = clip_sample(a >> 6, bit_depth);
        }
    }
}

void mc_luma_v_sse(const Sample* src, ptrdiff_t src_stride, Sample* dst,
                   ptrdiff_t dst_stride, int w, int h, int /*fx*/, int fy, int bit_depth) {
    const int16_t* tv = kLumaTaps[fy];
    for (int y = 0; y < h; ++y) {
        Sample* drow = dst + ptrdiff_t(y) * dst_stride;
        int x = 0;
        for (; x + 4 <= w; x += 4) {
            __m128i acc = _mm_set1_epi32(32);
            for (int j = 0; j < 8; ++j) {
                const Sample* row = src + ptrdiff_t(y + j - 3) * src_stride;
                __m128i s = _mm_cvtepu16_epi32(
                    _mm_loadl_epi64(reinterpret_cast<const __m128i*>(row + x)));
                acc = _mm_add_epi32(acc, _mm_mullo_epi32(s, _mm_set1_epi32(tv[j])));
            }
            acc = _mm_srai_epi32(acc, 6);
            acc = clip_epi32_to_sample(acc, bit_depth);
            __m128i packed = _mm_packus_epi32(acc, acc);
            _mm_storel_epi64(reinterpret_cast<__m128i*>(drow + x), packed);
        }
        for (; x < w; ++x) {
            int32_t a = 32;
            for (int j = 0; j < 8; ++j)
                a += tv[j] * int32_t(src[ptrdiff_t(y + j - 3) * src_stride + x]);
            drow[x] = clip_sample(a >> 6, bit_depth);
        }
    }
}

void bipred_blend_sse(const Sample* p0, const Sample* p1, Sample* dst, int n) {
    int i = 0;
    for (; i + 8 <= n; i += 8) {
        __m128i a = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p0 + i));
        __m128i b = _mm_loadu_si128(reinterpret_cast<const __m128i*>(p1 + i));
        _mm_storeu_si128(reinterpret_cast<__m128i*>(dst + i), _mm_avg_epu16(a, b));
    }
    for (; i < n; ++i) dst[i] = Sample((p0[i] + p1[i] + 1) >> 1);
}

void dequant_sse(const int16_t* levels, int16_t* coeff, int n, int32_t scale) {
    __m128i vs = _mm_set1_epi32(scale);
    int i = 0;
    for (; i + 8 <= n; i += 8) {
        __m128i l = _mm_loadu_si128(reinterpret_cast<const __m128i*>(levels + i));
        __m128i lo = _mm_cvtepi16_epi32(l);
        __m128i hi = _mm_cvtepi16_epi32(_mm_srli_si128(l, 8));
        lo = _mm_mullo_epi32(lo, vs);
        hi = _mm_mullo_epi32(hi, vs);
        _mm_storeu_si128(reinterpret_cast<__m128i*>(coeff + i), _mm_packs_epi32(lo, hi));
    }
    for (; i < n; ++i)
        coeff[i] = int16_t(clip3<int32_t>(-32768, 32767, int32_t(levels[i]) * scale));
}

void idct8x8_sse(const int16_t* coeff, int16_t* residual) {
    int32_t tmp[64];
    // stage 1: tmp[r][c] = sum_k M[k][r] * coeff[k][c], shift 8, clip16
    for (int r = 0; r < 8; ++r) {
        __m128i acc_lo = _mm_set1_epi32(128);
        __m128i acc_hi = _mm_set1_epi32(128);
        for (int k = 0; k < 8; ++k) {
            __m128i row = _mm_loadu_si128(reinterpret_cast<const __m128i*>(coeff + k * 8));
            __m128i lo = _mm_cvtepi16_epi32(row);
            __m128i hi = _mm_cvtepi16_epi32(_mm_srli_si128(row, 8));
            __m128i m = _mm_set1_epi32(kDct8[k][r]);
            acc_lo = _mm_add_epi32(acc_lo, _mm_mullo_epi32(lo, m));
            acc_hi = _mm_add_epi32(acc_hi, _mm_mullo_epi32(hi, m));
        }
        acc_lo = _mm_srai_epi32(acc_lo, 8);
        acc_hi = _mm_srai_epi32(acc_hi, 8);
        __m128i packed = _mm_packs_epi32(acc_lo, acc_hi);
        __m128i lo32 = _mm_cvtepi16_epi32(packed);
        __m128i hi32 = _mm_cvtepi16_epi32(_mm_srli_si128(packed, 8));
        _mm_storeu_si128(reinterpret_cast<__m128i*>(tmp + r * 8), lo32);
        _mm_storeu_si128(reinterpret_cast<__m128i*>(tmp + r * 8 + 4), hi32);
    }
    // stage 2: residual[r][c] = sum_l tmp[r][l] * M[l][c], shift 11, clip16
    for (int r = 0; r < 8; ++r) {
        __m128i acc_lo = _mm_set1_epi32(1024);
        __m128i acc_hi = _mm_set1_epi32(1024);
        for (int l = 0; l < 8; ++l) {
            __m128i t = _mm_set1_epi32(tmp[r * 8 + l]);
            __m128i m16 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(kDct8[l]));
            __m128i m_lo = _mm_cvtepi16_epi32(m16);
            __m128i m_hi = _mm_cvtepi16_epi32(_mm_srli_si128(m16, 8));
            acc_lo = _mm_add_epi32(acc_lo, _mm_mullo_epi32(t, m_lo));
            acc_hi = _mm_add_epi32(acc_hi, _mm_mullo_epi32(t, m_hi));
        }
        acc_lo = _mm_srai_epi32(acc_lo, 11);
        acc_hi = _mm_srai_epi32(acc_hi, 11);
        _mm_storeu_si128(reinterpret_cast<__m128i*>(residual + r * 8),
                         _mm_packs_epi32(acc_lo, acc_hi));
    }
}

template <int NPairs>
void alf_row_sse(const Sample* src, ptrdiff_t stride, Sample* dst, int w,
                 const int16_t* coeffs, int bit_depth) {
    const TapOffset* offs = NPairs == 12 ? kAlfLumaOffsets : kAlfChromaOffsets;
    int x = 0;
    for (; x + 4 <= w; x += 4) {
        __m128i c = _mm_cvtepu16_epi32(
            _mm_loadl_epi64(reinterpret_cast<const __m128i*>(src + x)));
        __m128i c2 = _mm_slli_epi32(c, 1);
        __m128i acc = _mm_set1_epi32(64);
        for (int i = 0; i < NPairs; ++i) {
            const Sample* pa = src + ptrdiff_t(offs[i].dy) * stride + offs[i].dx + x;
            const Sample* pb = src - ptrdiff_t(offs[i].dy) * stride - offs[i].dx + x;
            __m128i a = _mm_cvtepu16_epi32(
                _mm_loadl_epi64(reinterpret_cast<const __m128i*>(pa)));
            __m128i b = _mm_cvtepu16_epi32(
                _mm_loadl_epi64(reinterpret_cast<const __m128i*>(pb)));
            __m128i e = _mm_sub_epi32(_mm_add_epi32(a, b), c2);
            acc = _mm_add_epi32(acc, _mm_mullo_epi32(e, _mm_set1_epi32(coeffs[i])));
        }
        acc = _mm_add_epi32(c, _mm_srai_epi32(acc, 7));
        acc = clip_epi32_to_sample(acc, bit_depth);
        __m128i packed = _mm_packus_epi32(acc, acc);
        _mm_storel_epi64(reinterpret_cast<__m128i*>(dst + x), packed);
    }
    for (; x < w; ++x) {
        int32_t c = src[x];
        int32_t acc = 0;
        for (int i = 0; i < NPairs; ++i) {
            int32_t a = src[ptrdiff_t(offs[i].dy) * stride + offs[i].dx + x];
            int32_t b = src[-ptrdiff_t(offs[i].dy) * stride - offs[i].dx + x];
            acc += coeffs[i] * (a + b - 2 * c);
        }
        dst[x] = clip_sample(c + ((acc + 64) >> 7), bit_depth);
    }
}

void sao_band_sse(const Sample* src, Sample* dst, int w, const int8_t* offsets,
                  int start_band, int bit_depth) {
    int shift = bit_depth - 5;
    __m128i vstart = _mm_set1_epi32(start_band);
    __m128i voff = _mm_setr_epi32(offsets[0], offsets[1], offsets[2], offsets[3]);
    int x = 0;
    for (; x + 4 <= w; x += 4) {
        __m128i s = _mm_cvtepu16_epi32(
            _mm_loadl_epi64(reinterpret_cast<const __m128i*>(src + x)));
        __m128i rel = _mm_sub_epi32(_mm_srli_epi32(s, shift), vstart);
        // gather offsets for rel in [0,4), else 0
        alignas(16) int32_t r[4], o[4];
        _mm_store_si128(reinterpret_cast<__m128i*>(r), rel);
        _mm_store_si128(reinterpret_cast<__m128i*>(o), voff);
        alignas(16) int32_t add[4];
        for (int i = 0; i < 4; ++i) add[i] = (r[i] >= 0 && r[i] < 4) ? o[r[i]] : 0;
        __m128i res = _mm_add_epi32(s, _mm_load_si128(reinterpret_cast<__m128i*>(add)));
        res = clip_epi32_to_sample(res, bit_depth);
        __m128i packed = _mm_packus_epi32(res, res);
        _mm_storel_epi64(reinterpret_cast<__m128i*>(dst + x), packed);
    }
    for (; x < w; ++x) {
        int band = src[x] >> shift;
        int rel = band - start_band;
        dst[x] = (rel >= 0 && rel < 4)
                     ? clip_sample(int32_t(src[x]) + offsets[rel], bit_depth)
                     : src[x];
    }
}

} // namespace

const KernelTable* vector_kernels() {
    static const KernelTable table = [] {
        KernelTable t = scalar_kernels();
        t.mc_luma[1] = mc_luma_h_sse;
        t.mc_luma[2] = mc_luma_v_sse;
        t.mc_luma[3] = mc_luma_hv_sse;
        t.bipred_blend = bipred_blend_sse;
        t.dequant = dequant_sse;
        t.idct8x8 = idct8x8_sse;
        t.alf_luma_row = alf_row_sse<12>;
        t.alf_chroma_row = alf_row_sse<6>;
        t.sao_band = sao_band_sse;
        t.level = ImplLevel::Vector;
        return t;
    }();
    return &table;
}

} // namespace ovl

#else

namespace ovl {
const KernelTable* vector_kernels() { return nullptr; }
} // namespace ovl

#endif
