#include "ovl/local_context.hpp"

#include <algorithm>
#include <cstring>

namespace ovl {

void RowMaps::init(int width, int ctu_size) {
    block_cols = ceil_div(width, 8);
    block_rows = ctu_size / 8;
    flags.assign(size_t(block_rows) * block_cols, 0);
    qp.assign(size_t(block_rows) * block_cols, 0);
    above_flags.assign(size_t(block_cols), 0);
    above_qp.assign(size_t(block_cols), 0);
    row_block_y0 = 0;
}

void RowMaps::start_row(int ctu_row, int ctu_size) {
    if (ctu_row > 0) {
        // keep the bottom block-row of the finished row
        size_t last = size_t(block_rows - 1) * block_cols;
        std::copy_n(flags.begin() + last, block_cols, above_flags.begin());
        std::copy_n(qp.begin() + last, block_cols, above_qp.begin());
    }
    std::fill(flags.begin(), flags.end(), 0);
    std::fill(qp.begin(), qp.end(), 0);
    row_block_y0 = ctu_row * (ctu_size / 8);
}

uint8_t RowMaps::flag_at(int bx, int by) const {
    if (by == row_block_y0 - 1) return above_flags[bx];
    if (by < row_block_y0 || by >= row_block_y0 + block_rows) return 0;
    return flags[size_t(by - row_block_y0) * block_cols + bx];
}

uint8_t RowMaps::qp_at(int bx, int by) const {
    if (by == row_block_y0 - 1) return above_qp[bx];
    if (by < row_block_y0 || by >= row_block_y0 + block_rows) return 0;
    return qp[size_t(by - row_block_y0) * block_cols + bx];
}

void RowMaps::mark_cu(int x, int y, int size, uint8_t cu_qp) {
    int bx0 = x / 8, by0 = y / 8, nb = size / 8;
    for (int by = by0; by < by0 + nb; ++by) {
        if (by < row_block_y0 || by >= row_block_y0 + block_rows) continue;
        uint8_t* row = flags.data() + size_t(by - row_block_y0) * block_cols;
        uint8_t* qrow = qp.data() + size_t(by - row_block_y0) * block_cols;
        for (int bx = bx0; bx < bx0 + nb && bx < block_cols; ++bx) {
            if (bx == bx0) row[bx] |= kCuEdgeLeft;
            if (by == by0) row[bx] |= kCuEdgeTop;
            qrow[bx] = cu_qp;
        }
    }
}

LocalContext::LocalContext(int frame_width, int frame_height, int ctu_size,
                           MemoryAccounting* acct)
    : m_width(frame_width), m_height(frame_height), m_ctu_size(ctu_size), m_acct(acct) {
    for (int s = 0; s < kNumStages; ++s) {
        for (int plane = 0; plane < 3; ++plane) {
            bool chroma = plane > 0;
            StagePlane& p = m_sp[s][plane];
            p.margin = stage_margin(FilterStage(s), chroma);
            p.ec_side = chroma ? ctu_size / 2 : ctu_size;
            int full = p.ec_side + 2 * p.margin;
            int pw = chroma ? frame_width / 2 : frame_width;
            p.ec.assign(size_t(full) * full, 0);
            p.out.assign(size_t(p.ec_side) * p.ec_side, 0);
            p.rc.assign(size_t(p.ec_side) * p.margin, 0);
            p.br.assign(size_t(p.margin) * pw, 0);
            p.corner.assign(size_t(p.margin) * p.margin, 0);
            m_buffer_bytes += (p.ec.size() + p.out.size() + p.rc.size() + p.br.size() +
                               p.corner.size()) *
                              sizeof(Sample);
        }
    }
    m_maps.init(frame_width, ctu_size);
    m_buffer_bytes += m_maps.flags.size() + m_maps.qp.size() + m_maps.above_flags.size() +
                      m_maps.above_qp.size();
    if (m_acct) m_acct->add(MemCategory::LocalContext, m_buffer_bytes);
}

LocalContext::~LocalContext() {
    if (m_acct) m_acct->remove(MemCategory::LocalContext, m_buffer_bytes);
}

Sample* LocalContext::ec(FilterStage s, int plane) {
    StagePlane& p = sp(s, plane);
    int full = p.ec_side + 2 * p.margin;
    return p.ec.data() + ptrdiff_t(p.margin) * full + p.margin;
}

ptrdiff_t LocalContext::ec_stride(FilterStage s, int plane) const {
    const StagePlane& p = sp(s, plane);
    return p.ec_side + 2 * p.margin;
}

Sample* LocalContext::out(FilterStage s, int plane) { return sp(s, plane).out.data(); }

ptrdiff_t LocalContext::out_stride(FilterStage s, int plane) const {
    return sp(s, plane).ec_side;
}

void LocalContext::ec_fill(FilterStage s, int plane, const PictureBuffer& pic,
                           const Rect& rect) {
    StagePlane& p = sp(s, plane);
    const int M = p.margin;
    check(rect.w > 0 && rect.h > 0 && rect.w <= p.ec_side && rect.h <= p.ec_side &&
              rect.x >= 0 && rect.y >= 0 && rect.x + rect.w <= pic.width(plane) &&
              rect.y + rect.h <= pic.height(plane),
          ErrorCode::InternalState, "ec_fill rect outside grid");

    const int W = pic.width(plane), H = pic.height(plane);
    Sample* ecp = ec(s, plane);
    const ptrdiff_t es = ec_stride(s, plane);
    const Sample* pp = pic.plane(plane);
    const ptrdiff_t ps = pic.stride(plane);
    const int pw = plane ? m_width / 2 : m_width;

    for (int j = -M; j < rect.h + M; ++j) {
        Sample* erow = ecp + ptrdiff_t(j) * es;
        int py = clip3(0, H - 1, rect.y + j);
        for (int i = -M; i < rect.w + M; ++i) {
            int px = clip3(0, W - 1, rect.x + i);
            Sample v;
            if (py >= rect.y) {
                if (px >= rect.x || py >= rect.y + rect.h) {
                    // center, right margin and everything below: unprocessed
                    // samples still in the picture
                    v = pp[ptrdiff_t(py) * ps + px];
                } else {
                    // left margin: saved right columns of the left chunk
                    v = p.rc[size_t(py - rect.y) * M + (px - (rect.x - M))];
                }
            } else {
                if (px >= rect.x) {
                    v = p.br[size_t(py - (rect.y - M)) * pw + px];
                } else {
                    v = p.corner[size_t(py - (rect.y - M)) * M + (px - (rect.x - M))];
                }
            }
            erow[i] = v;
        }
    }
}

void LocalContext::rc_br_update(FilterStage s, int plane, const Rect& rect) {
    StagePlane& p = sp(s, plane);
    const int M = p.margin;
    Sample* ecp = ec(s, plane);
    const ptrdiff_t es = ec_stride(s, plane);
    const int pw = plane ? m_width / 2 : m_width;

    // Snapshot the BR sliver the next chunk's top-left corner will need,
    // before this chunk's rows overwrite it.
    int cx0 = rect.x + rect.w - M;
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < M; ++i) {
            int px = clip3(0, pw - 1, cx0 + i);
            p.corner[size_t(j) * M + i] = p.br[size_t(j) * pw + px];
        }

    for (int j = 0; j < rect.h; ++j)
        for (int i = 0; i < M; ++i)
            p.rc[size_t(j) * M + i] = ecp[ptrdiff_t(j) * es + rect.w - M + i];

    for (int j = 0; j < M; ++j) {
        int sy = rect.h - M + j;
        if (sy < 0) sy = 0; // chunks shorter than M keep their top rows
        for (int i = 0; i < rect.w; ++i)
            p.br[size_t(j) * pw + rect.x + i] = ecp[ptrdiff_t(sy) * es + i];
    }
}

void LocalContext::commit(FilterStage s, int plane, PictureBuffer& pic, const Rect& rect,
                          const Rect& region) const {
    const StagePlane& p = sp(s, plane);
    check(region.x >= 0 && region.y >= 0 && region.x + region.w <= rect.w &&
              region.y + region.h <= rect.h && region.w >= 0 && region.h >= 0,
          ErrorCode::InternalState, "commit region outside EC bounds");
    if (region.w == 0 || region.h == 0) return;

    const bool from_ec = s == FilterStage::Intra;
    const Sample* src = from_ec ? p.ec.data() + ptrdiff_t(p.margin) * (p.ec_side + 2 * p.margin) +
                                      p.margin
                                : p.out.data();
    const ptrdiff_t ss = from_ec ? p.ec_side + 2 * p.margin : p.ec_side;
    for (int j = 0; j < region.h; ++j) {
        const Sample* srow = src + ptrdiff_t(region.y + j) * ss + region.x;
        Sample* drow = pic.plane(plane) + ptrdiff_t(rect.y + region.y + j) * pic.stride(plane) +
                       rect.x + region.x;
        std::memcpy(drow, srow, size_t(region.w) * sizeof(Sample));
    }
}

} // namespace ovl
