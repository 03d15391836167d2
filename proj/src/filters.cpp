#include "ovl/filters.hpp"

#include <algorithm>
#include <cstring>

#include "ovl/profile.hpp"

namespace ovl {

void write_sao_params(RangeEncoder& enc, const SaoCtuParams& p) {
    for (const SaoParams* sp : {&p.luma, &p.chroma}) {
        enc.encode_bypass(sp->type != SaoType::Off);
        if (sp->type == SaoType::Off) continue;
        enc.encode_bypass(sp->type == SaoType::Edge);
        if (sp->type == SaoType::Edge) {
            enc.encode_bypass((sp->edge_dir >> 1) & 1);
            enc.encode_bypass(sp->edge_dir & 1);
        } else {
            for (int b = 4; b >= 0; --b) enc.encode_bypass((sp->band_start >> b) & 1);
        }
        for (int i = 0; i < 4; ++i) {
            int mag = std::abs(sp->offsets[size_t(i)]);
            for (int b = 2; b >= 0; --b) enc.encode_bypass((mag >> b) & 1);
            if (mag) enc.encode_bypass(sp->offsets[size_t(i)] < 0);
        }
    }
}

SaoCtuParams read_sao_params(RangeDecoder& dec) {
    SaoCtuParams out;
    for (SaoParams* sp : {&out.luma, &out.chroma}) {
        if (!dec.decode_bypass()) {
            sp->type = SaoType::Off;
            continue;
        }
        if (dec.decode_bypass()) {
            sp->type = SaoType::Edge;
            sp->edge_dir = uint8_t(dec.decode_bypass() << 1);
            sp->edge_dir |= uint8_t(dec.decode_bypass());
        } else {
            sp->type = SaoType::Band;
            sp->band_start = 0;
            for (int b = 0; b < 5; ++b)
                sp->band_start = uint8_t((sp->band_start << 1) | dec.decode_bypass());
        }
        for (int i = 0; i < 4; ++i) {
            int mag = 0;
            for (int b = 0; b < 3; ++b) mag = (mag << 1) | dec.decode_bypass();
            if (mag && dec.decode_bypass()) mag = -mag;
            sp->offsets[size_t(i)] = int8_t(mag);
        }
    }
    return out;
}

namespace {

inline void dbf_filter_pair(Sample& p1, Sample& p0, Sample& q0, Sample& q1, int beta,
                            int bit_depth) {
    int32_t vp0 = p0, vq0 = q0;
    if (std::abs(vp0 - vq0) >= beta) return;
    int32_t np0 = (int32_t(p1) + 2 * vp0 + vq0 + 2) >> 2;
    int32_t nq0 = (int32_t(q1) + 2 * vq0 + vp0 + 2) >> 2;
    p0 = clip_sample(np0, bit_depth);
    q0 = clip_sample(nq0, bit_depth);
}

// Vertical CU edge at column x_e: horizontal filtering of rows [y0, y1).
template <typename FlagFn, typename QpFn>
void dbf_vertical_edge(PictureBuffer& pic, int plane, int x_e, int y0, int y1, int shift,
                       FlagFn has_left_edge, QpFn qp_at, int bit_depth) {
    Sample* base = pic.plane(plane);
    ptrdiff_t ps = pic.stride(plane);
    for (int y = y0; y < y1; ++y) {
        int bx = (x_e << shift) >> 3, by = (y << shift) >> 3;
        if (!has_left_edge(bx, by)) continue;
        Sample* row = base + ptrdiff_t(y) * ps;
        dbf_filter_pair(row[x_e - 2], row[x_e - 1], row[x_e], row[x_e + 1], qp_at(bx, by),
                        bit_depth);
    }
}

// Horizontal CU edge at row y_e: vertical filtering of columns [x0, x1).
template <typename FlagFn, typename QpFn>
void dbf_horizontal_edge(PictureBuffer& pic, int plane, int y_e, int x0, int x1, int shift,
                         FlagFn has_top_edge, QpFn qp_at, int bit_depth) {
    Sample* base = pic.plane(plane);
    ptrdiff_t ps = pic.stride(plane);
    Sample* r_p1 = base + ptrdiff_t(y_e - 2) * ps;
    Sample* r_p0 = base + ptrdiff_t(y_e - 1) * ps;
    Sample* r_q0 = base + ptrdiff_t(y_e) * ps;
    Sample* r_q1 = base + ptrdiff_t(y_e + 1) * ps;
    for (int x = x0; x < x1; ++x) {
        int bx = (x << shift) >> 3, by = (y_e << shift) >> 3;
        if (!has_top_edge(bx, by)) continue;
        dbf_filter_pair(r_p1[x], r_p0[x], r_q0[x], r_q1[x], qp_at(bx, by), bit_depth);
    }
}

template <typename FlagFn, typename QpFn>
void dbf_ctu_plane(PictureBuffer& pic, int plane, int ctu_x, int ctu_y, int ctu_size,
                   FlagFn flags, QpFn qp, int bit_depth) {
    const int shift = plane ? 1 : 0;
    const int sp = ctu_size >> shift;
    const int W = pic.width(plane), H = pic.height(plane);
    const int x0 = ctu_x * sp, y0 = ctu_y * sp;
    const int x1 = std::min(x0 + sp, W), y1 = std::min(y0 + sp, H);
    const int b = 8 >> shift;
    const bool last_x = x1 == W, last_y = y1 == H;

    auto left_flag = [&](int bx, int by) { return (flags(bx, by) & kCuEdgeLeft) != 0; };
    auto top_flag = [&](int bx, int by) { return (flags(bx, by) & kCuEdgeTop) != 0; };

    // Vertical edges first (horizontal filtering), banded one quantum behind
    // the reconstruction so the right/bottom 8-sample bands stay untouched
    // until the neighbor arrives.
    int ve0 = std::max(b, x0 - b);
    int ve1 = last_x ? x1 : x1 - b;
    int vy0 = ctu_y ? y0 - b : 0;
    int vy1 = last_y ? y1 : y1 - b;
    for (int x_e = ve0; x_e < ve1; x_e += b)
        dbf_vertical_edge(pic, plane, x_e, vy0, vy1, shift, left_flag, qp, bit_depth);

    // Horizontal edges on columns whose vertical filtering is complete.
    int he0 = std::max(b, y0 - b);
    int he1 = last_y ? y1 : y1 - b;
    int hx0 = ctu_x ? x0 - 2 * b : 0;
    int hx1 = last_x ? x1 : x1 - 2 * b;
    for (int y_e = he0; y_e < he1; y_e += b)
        dbf_horizontal_edge(pic, plane, y_e, hx0, hx1, shift, top_flag, qp, bit_depth);
}

} // namespace

void dbf_ctu(PictureBuffer& pic, int ctu_x, int ctu_y, int ctu_size, const RowMaps& maps,
             int bit_depth) {
    OVL_PROFILE_SCOPE(Stage::Dbf);
    auto flags = [&maps](int bx, int by) { return maps.flag_at(bx, by); };
    auto qp = [&maps](int bx, int by) { return int(maps.qp_at(bx, by)); };
    for (int plane = 0; plane < 3; ++plane)
        dbf_ctu_plane(pic, plane, ctu_x, ctu_y, ctu_size, flags, qp, bit_depth);
}

void dbf_frame(PictureBuffer& pic, const std::vector<uint8_t>& flags,
               const std::vector<uint8_t>& qp, int block_cols, int bit_depth) {
    auto flag_fn = [&](int bx, int by) { return flags[size_t(by) * block_cols + bx]; };
    auto qp_fn = [&](int bx, int by) { return int(qp[size_t(by) * block_cols + bx]); };
    for (int plane = 0; plane < 3; ++plane) {
        const int shift = plane ? 1 : 0;
        const int W = pic.width(plane), H = pic.height(plane);
        const int b = 8 >> shift;
        for (int x_e = b; x_e < W; x_e += b)
            dbf_vertical_edge(pic, plane, x_e, 0, H, shift,
                              [&](int bx, int by) { return (flag_fn(bx, by) & kCuEdgeLeft) != 0; },
                              qp_fn, bit_depth);
        for (int y_e = b; y_e < H; y_e += b)
            dbf_horizontal_edge(pic, plane, y_e, 0, W, shift,
                                [&](int bx, int by) { return (flag_fn(bx, by) & kCuEdgeTop) != 0; },
                                qp_fn, bit_depth);
    }
}

namespace {

// SAO of one row from the pristine EC into the output buffer.
void sao_apply_row(const KernelTable& k, const SaoParams& p, const Sample* src,
                   ptrdiff_t src_stride, Sample* dst, int w, int bit_depth) {
    switch (p.type) {
        case SaoType::Off:
            std::memcpy(dst, src, size_t(w) * sizeof(Sample));
            break;
        case SaoType::Band:
            k.sao_band(src, dst, w, p.offsets.data(), p.band_start, bit_depth);
            break;
        case SaoType::Edge:
            k.sao_edge[p.edge_dir](src, src_stride, dst, w, p.offsets.data(), bit_depth);
            break;
    }
}

} // namespace

void sao_line(LocalContext& ctx, const KernelTable& kernels, PictureBuffer& pic, int line,
              const std::vector<SaoCtuParams>& params, int ctu_cols, int bit_depth) {
    OVL_PROFILE_SCOPE(Stage::Sao);
    const int S = ctx.ctu_size();
    for (int plane = 0; plane < 3; ++plane) {
        const bool chroma = plane > 0;
        const int sp = S >> (chroma ? 1 : 0);
        const int W = pic.width(plane), H = pic.height(plane);
        const int lead = chroma ? 2 : 3; // rows processed ahead into the next line
        int a = line * sp + (line > 0 ? lead : 0);
        int b = std::min((line + 1) * sp + lead, H);
        if (a >= b) continue;
        // the first line carries its lead rows as a separate strip so every
        // strip fits the EC buffer height
        std::vector<std::pair<int, int>> strips;
        if (line == 0 && b > lead) {
            strips.push_back({0, lead});
            strips.push_back({lead, b});
        } else {
            strips.push_back({a, b});
        }
        for (auto [sa, sb] : strips)
        for (int cx = 0; cx < ctu_cols; ++cx) {
            int x0 = cx * sp;
            int w = std::min(sp, W - x0);
            Rect rect{x0, sa, w, sb - sa};
            ctx.ec_fill(FilterStage::Sao, plane, pic, rect);
            ctx.rc_br_update(FilterStage::Sao, plane, rect);
            const Sample* ec = ctx.ec(FilterStage::Sao, plane);
            ptrdiff_t es = ctx.ec_stride(FilterStage::Sao, plane);
            Sample* out = ctx.out(FilterStage::Sao, plane);
            ptrdiff_t os = ctx.out_stride(FilterStage::Sao, plane);
            for (int j = 0; j < rect.h; ++j) {
                int row_line = (rect.y + j) / sp;
                const SaoCtuParams& cp = params[size_t(row_line) * ctu_cols + cx];
                sao_apply_row(kernels, chroma ? cp.chroma : cp.luma, ec + ptrdiff_t(j) * es,
                              es, out + ptrdiff_t(j) * os, w, bit_depth);
            }
            ctx.commit(FilterStage::Sao, plane, pic, rect);
        }
    }
}

void sao_frame(const KernelTable& kernels, PictureBuffer& pic,
               const std::vector<SaoCtuParams>& params, int ctu_size, int ctu_cols,
               int bit_depth) {
    for (int plane = 0; plane < 3; ++plane) {
        const bool chroma = plane > 0;
        const int sp = ctu_size >> (chroma ? 1 : 0);
        const int W = pic.width(plane), H = pic.height(plane);
        // pre-stage copy with a replicated 1-sample border
        const int m = 1;
        ptrdiff_t cs = W + 2 * m;
        std::vector<Sample> copy(size_t(cs) * (H + 2 * m));
        Sample* cbase = copy.data() + ptrdiff_t(m) * cs + m;
        for (int y = -m; y < H + m; ++y) {
            int sy = clip3(0, H - 1, y);
            for (int x = -m; x < W + m; ++x)
                cbase[ptrdiff_t(y) * cs + x] = pic.at(plane, clip3(0, W - 1, x), sy);
        }
        for (int y = 0; y < H; ++y) {
            for (int cx = 0; cx < ctu_cols; ++cx) {
                int x0 = cx * sp;
                int w = std::min(sp, W - x0);
                if (w <= 0) continue;
                const SaoCtuParams& cp = params[size_t(y / sp) * ctu_cols + cx];
                sao_apply_row(kernels, chroma ? cp.chroma : cp.luma,
                              cbase + ptrdiff_t(y) * cs + x0, cs,
                              pic.plane(plane) + ptrdiff_t(y) * pic.stride(plane) + x0, w,
                              bit_depth);
            }
        }
    }
}

std::array<int16_t, kAlfLumaCoeffs> alf_luma_coeffs(const AlfParams& p) {
    std::array<int16_t, kAlfLumaCoeffs> c;
    for (size_t i = 0; i < c.size(); ++i) c[i] = p.luma[i];
    return c;
}

std::array<int16_t, kAlfChromaCoeffs> alf_chroma_coeffs(const AlfParams& p) {
    std::array<int16_t, kAlfChromaCoeffs> c;
    for (size_t i = 0; i < c.size(); ++i) c[i] = p.chroma[i];
    return c;
}

namespace {

void alf_apply_rect(const KernelTable& kernels, const Sample* ec, ptrdiff_t es,
                    Sample* out, ptrdiff_t os, int w, int h, bool chroma,
                    const int16_t* coeffs, int bit_depth) {
    if (!chroma) {
        // 4x4 block classification; v1 maps all classes to the frame filter.
        for (int by = 0; by < h; by += 4)
            for (int bx = 0; bx < w; bx += 4) {
                uint32_t act = 0;
                kernels.alf_classify(ec + ptrdiff_t(by) * es + bx, es, &act);
            }
    }
    for (int j = 0; j < h; ++j) {
        const Sample* src = ec + ptrdiff_t(j) * es;
        Sample* dst = out + ptrdiff_t(j) * os;
        if (chroma)
            kernels.alf_chroma_row(src, es, dst, w, coeffs, bit_depth);
        else
            kernels.alf_luma_row(src, es, dst, w, coeffs, bit_depth);
    }
}

} // namespace

void alf_line(LocalContext& ctx, const KernelTable& kernels, PictureBuffer& pic, int line,
              const AlfParams& params, int ctu_cols, int bit_depth) {
    OVL_PROFILE_SCOPE(Stage::Alf);
    const int S = ctx.ctu_size();
    auto lc = alf_luma_coeffs(params);
    auto cc = alf_chroma_coeffs(params);
    for (int plane = 0; plane < 3; ++plane) {
        const bool chroma = plane > 0;
        const int sp = S >> (chroma ? 1 : 0);
        const int W = pic.width(plane), H = pic.height(plane);
        int a = line * sp;
        int b = std::min((line + 1) * sp, H);
        if (a >= b) continue;
        for (int cx = 0; cx < ctu_cols; ++cx) {
            int x0 = cx * sp;
            int w = std::min(sp, W - x0);
            Rect rect{x0, a, w, b - a};
            ctx.ec_fill(FilterStage::Alf, plane, pic, rect);
            ctx.rc_br_update(FilterStage::Alf, plane, rect);
            const Sample* ec = ctx.ec(FilterStage::Alf, plane);
            ptrdiff_t es = ctx.ec_stride(FilterStage::Alf, plane);
            Sample* out = ctx.out(FilterStage::Alf, plane);
            ptrdiff_t os = ctx.out_stride(FilterStage::Alf, plane);
            if (params.ctu_enabled(line * ctu_cols + cx)) {
                alf_apply_rect(kernels, ec, es, out, os, rect.w, rect.h, chroma,
                               chroma ? cc.data() : lc.data(), bit_depth);
            } else {
                for (int j = 0; j < rect.h; ++j)
                    std::memcpy(out + ptrdiff_t(j) * os, ec + ptrdiff_t(j) * es,
                                size_t(rect.w) * sizeof(Sample));
            }
            ctx.commit(FilterStage::Alf, plane, pic, rect);
        }
    }
}

void alf_frame(const KernelTable& kernels, PictureBuffer& pic, const AlfParams& params,
               int ctu_size, int ctu_cols, int bit_depth) {
    auto lc = alf_luma_coeffs(params);
    auto cc = alf_chroma_coeffs(params);
    for (int plane = 0; plane < 3; ++plane) {
        const bool chroma = plane > 0;
        const int sp = ctu_size >> (chroma ? 1 : 0);
        const int W = pic.width(plane), H = pic.height(plane);
        const int m = chroma ? 3 : 4; // diamond reach + classification reach
        ptrdiff_t cs = W + 2 * m;
        std::vector<Sample> copy(size_t(cs) * (H + 2 * m));
        Sample* cbase = copy.data() + ptrdiff_t(m) * cs + m;
        for (int y = -m; y < H + m; ++y)
            for (int x = -m; x < W + m; ++x)
                cbase[ptrdiff_t(y) * cs + x] =
                    pic.at(plane, clip3(0, W - 1, x), clip3(0, H - 1, y));

        int rows = ceil_div(H, sp), cols = ceil_div(W, sp);
        for (int cy = 0; cy < rows; ++cy) {
            for (int cx = 0; cx < cols; ++cx) {
                int x0 = cx * sp, y0 = cy * sp;
                int w = std::min(sp, W - x0), h = std::min(sp, H - y0);
                if (!params.ctu_enabled(cy * ctu_cols + cx)) continue;
                alf_apply_rect(kernels, cbase + ptrdiff_t(y0) * cs + x0, cs,
                               pic.plane(plane) + ptrdiff_t(y0) * pic.stride(plane) + x0,
                               pic.stride(plane), w, h, chroma,
                               chroma ? cc.data() : lc.data(), bit_depth);
            }
        }
    }
}

} // namespace ovl
