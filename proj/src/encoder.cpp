#include "ovl/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

#include "ovl/filters.hpp"
#include "ovl/inter.hpp"
#include "ovl/intra.hpp"
#include "ovl/syntax.hpp"
#include "ovl/transform.hpp"

namespace ovl {

void EncoderConfig::validate() const {
    check(qp >= 1 && qp <= 51, ErrorCode::EncodeConfig, "qp out of range");
    check(ctu_size == 32 || ctu_size == 64 || ctu_size == 128, ErrorCode::EncodeConfig,
          "ctu_size");
    check(search_range >= 0 && search_range <= 16, ErrorCode::EncodeConfig, "search_range");
    check(bit_depth == 8 || bit_depth == 10, ErrorCode::EncodeConfig, "bit_depth");
}

uint8_t EncoderConfig::dpb_max_nb_pic() const {
    switch (gop_mode) {
        case GopMode::AI: return 1;
        case GopMode::LD: return 2;
        case GopMode::RA8: return 5; // max simultaneously-needed set of the GOP graph
    }
    return 1;
}

std::vector<GopEntry> gop_structure(GopMode mode, uint32_t frame_count) {
    std::vector<GopEntry> out;
    if (frame_count == 0) return out;
    out.push_back({0, FrameType::I, {}});

    switch (mode) {
        case GopMode::AI:
            for (uint32_t p = 1; p < frame_count; ++p) out.push_back({p, FrameType::I, {}});
            break;
        case GopMode::LD:
            for (uint32_t p = 1; p < frame_count; ++p)
                out.push_back({p, FrameType::P, {p - 1}});
            break;
        case GopMode::RA8: {
            uint32_t base = 0;
            while (base + 8 < frame_count) {
                uint32_t b = base;
                out.push_back({b + 8, FrameType::P, {b}});
                out.push_back({b + 4, FrameType::B, {b, b + 8}});
                out.push_back({b + 2, FrameType::B, {b, b + 4}});
                out.push_back({b + 1, FrameType::B, {b, b + 2}});
                out.push_back({b + 3, FrameType::B, {b + 2, b + 4}});
                out.push_back({b + 6, FrameType::B, {b + 4, b + 8}});
                out.push_back({b + 5, FrameType::B, {b + 4, b + 6}});
                out.push_back({b + 7, FrameType::B, {b + 6, b + 8}});
                base += 8;
            }
            // partial tail coded as a low-delay chain
            for (uint32_t p = base + 1; p < frame_count; ++p)
                out.push_back({p, FrameType::P, {p - 1}});
            break;
        }
    }
    return out;
}

namespace {

struct CuDecision {
    int x, y, size;
    bool intra = true;
    IntraMode mode = IntraMode::DC;
    int ref_line = 0;
    bool bi = false;
    int ref_sel = 0;
    MotionVector mv[2];
    bool cbf = false;
    // coded block levels in decode order: luma raster blocks, then chroma
    // per plane; empty vector = block not coded
    std::vector<std::vector<int16_t>> luma_levels;
    std::vector<std::vector<int16_t>> cb_levels, cr_levels;
};

struct RefFrame {
    std::unique_ptr<PictureBuffer> pic;
};

int64_t sad_block(const Sample* a, ptrdiff_t as, const Sample* b, ptrdiff_t bs, int w,
                  int h) {
    int64_t sad = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            sad += std::abs(int32_t(a[y * as + x]) - int32_t(b[y * bs + x]));
    return sad;
}

class FrameEncoder {
public:
    FrameEncoder(const EncoderConfig& cfg, const SequenceHeader& seq,
                 const KernelTable& kernels, const RawFrame& orig, PictureBuffer& work,
                 const std::vector<const PictureBuffer*>& refs, FrameType type)
        : m_cfg(cfg), m_seq(seq), m_kernels(kernels), m_orig(orig), m_work(work),
          m_refs(refs), m_type(type) {}

    // Pass A: choose modes and reconstruct the whole frame (unfiltered).
    void decide() {
        int S = m_cfg.ctu_size;
        m_ctu_leaves.resize(size_t(m_seq.ctu_count()));
        for (int cy = 0; cy < m_seq.ctu_rows(); ++cy)
            for (int cx = 0; cx < m_seq.ctu_cols(); ++cx) {
                m_ctu_x0 = cx * S;
                m_ctu_y0 = cy * S;
                m_ctu_x1 = std::min(m_ctu_x0 + S, int(m_seq.width));
                m_ctu_y1 = std::min(m_ctu_y0 + S, int(m_seq.height));
                m_leaves = &m_ctu_leaves[size_t(cy) * m_seq.ctu_cols() + cx];
                decide_tree(m_ctu_x0, m_ctu_y0, S);
            }
    }

    // Pass B: serialize one CTU payload from the stored decisions.
    std::vector<uint8_t> write_payload(int cx, int cy, const SaoCtuParams& sao) {
        RangeEncoder enc;
        write_sao_params(enc, sao);
        m_replay_idx = 0;
        m_leaves = &m_ctu_leaves[size_t(cy) * m_seq.ctu_cols() + cx];
        replay_tree(enc, cx * m_cfg.ctu_size, cy * m_cfg.ctu_size, m_cfg.ctu_size);
        enc.encode_terminator();
        return enc.finish();
    }

    const std::vector<std::vector<CuDecision>>& leaves() const { return m_ctu_leaves; }

    uint64_t cu_count = 0;
    uint64_t intra_cu_count = 0;
    uint64_t zero_mv_skip_count = 0;
    uint64_t nonzero_mv_count = 0;
    std::array<uint64_t, 4> intra_mode_histogram{};

private:
    const Sample* orig_plane(int p) const {
        return p == 0 ? m_orig.y.data() : (p == 1 ? m_orig.u.data() : m_orig.v.data());
    }
    int plane_w(int p) const { return p ? int(m_seq.width) / 2 : int(m_seq.width); }
    int plane_h(int p) const { return p ? int(m_seq.height) / 2 : int(m_seq.height); }

    void decide_tree(int x, int y, int size);
    bool should_split(int x, int y, int size) const;
    CuDecision decide_cu(int x, int y, int size);
    void reconstruct_cu(CuDecision& d);
    void predict_cu(const CuDecision& d, int plane, Sample* dst, ptrdiff_t ds);
    int64_t try_intra(int x, int y, int size, IntraMode mode, int ref_line,
                      std::vector<Sample>& pred) const;
    MotionVector search_mv(int ref_idx, int x, int y, int size, int64_t& best_sad) const;

    void replay_tree(RangeEncoder& enc, int x, int y, int size);
    void write_cu(RangeEncoder& enc, const CuDecision& d);

    const EncoderConfig& m_cfg;
    const SequenceHeader& m_seq;
    const KernelTable& m_kernels;
    const RawFrame& m_orig;
    PictureBuffer& m_work;
    const std::vector<const PictureBuffer*>& m_refs;
    FrameType m_type;

    std::vector<std::vector<CuDecision>> m_ctu_leaves;
    std::vector<CuDecision>* m_leaves = nullptr;
    size_t m_replay_idx = 0;
    int m_ctu_x0 = 0, m_ctu_y0 = 0, m_ctu_x1 = 0, m_ctu_y1 = 0;
};

bool FrameEncoder::should_split(int x, int y, int size) const {
    // split when per-quadrant means absorb enough of the block's activity
    const Sample* src = m_orig.y.data();
    int W = int(m_seq.width);
    auto mad = [&](int bx, int by, int bs) {
        int64_t sum = 0;
        for (int j = 0; j < bs; ++j)
            for (int i = 0; i < bs; ++i) sum += src[size_t(by + j) * W + bx + i];
        int64_t mean = sum / (bs * bs);
        int64_t acc = 0;
        for (int j = 0; j < bs; ++j)
            for (int i = 0; i < bs; ++i)
                acc += std::abs(int64_t(src[size_t(by + j) * W + bx + i]) - mean);
        return acc;
    };
    int h = size / 2;
    int64_t whole = mad(x, y, size);
    int64_t children = mad(x, y, h) + mad(x + h, y, h) + mad(x, y + h, h) +
                       mad(x + h, y + h, h);
    return whole - children > int64_t(2) * size * size;
}

void FrameEncoder::decide_tree(int x, int y, int size) {
    if (x >= int(m_seq.width) || y >= int(m_seq.height)) return;
    bool inside = x + size <= int(m_seq.width) && y + size <= int(m_seq.height);
    bool split = size > 8 && (!inside || should_split(x, y, size));
    if (split) {
        int h = size / 2;
        decide_tree(x, y, h);
        decide_tree(x + h, y, h);
        decide_tree(x, y + h, h);
        decide_tree(x + h, y + h, h);
    } else {
        CuDecision d = decide_cu(x, y, size);
        reconstruct_cu(d);
        m_leaves->push_back(std::move(d));
    }
}

int64_t FrameEncoder::try_intra(int x, int y, int size, IntraMode mode, int ref_line,
                                std::vector<Sample>& pred) const {
    IntraAvailability avail;
    avail.frame_w = int(m_seq.width);
    avail.frame_h = int(m_seq.height);
    avail.ctu_x0 = m_ctu_x0;
    avail.ctu_y0 = m_ctu_y0;
    avail.ctu_x1 = m_ctu_x1;
    avail.ctu_y1 = m_ctu_y1;
    avail.cu_z = morton2(uint32_t(x - m_ctu_x0) >> 3, uint32_t(y - m_ctu_y0) >> 3);

    auto view = [&](int px, int py) { return m_work.at(0, px, py); };
    IntraRefs refs =
        gather_intra_refs(view, avail, 0, x, y, size, ref_line, m_cfg.bit_depth);
    pred.assign(size_t(size) * size, 0);
    predict_intra(m_kernels, mode, refs, pred.data(), size, size);
    return sad_block(pred.data(), size, m_orig.y.data() + size_t(y) * m_seq.width + x,
                     m_seq.width, size, size);
}

MotionVector FrameEncoder::search_mv(int ref_idx, int x, int y, int size,
                                     int64_t& best_sad) const {
    const PictureBuffer& ref = *m_refs[size_t(ref_idx)];
    const Sample* src = m_orig.y.data() + size_t(y) * m_seq.width + x;
    const int W = int(m_seq.width), H = int(m_seq.height);
    int r = m_cfg.search_range;

    auto ref_sad = [&](int mx, int my) {
        int64_t sad = 0;
        for (int j = 0; j < size; ++j) {
            int sy = clip3(0, H - 1, y + my + j);
            const Sample* rrow = ref.plane(0) + ptrdiff_t(sy) * ref.stride(0);
            const Sample* srow = src + ptrdiff_t(j) * m_seq.width;
            for (int i = 0; i < size; ++i)
                sad += std::abs(int32_t(srow[i]) - int32_t(rrow[clip3(0, W - 1, x + mx + i)]));
        }
        return sad;
    };

    MotionVector best{0, 0};
    best_sad = ref_sad(0, 0);
    for (int my = -r; my <= r; ++my)
        for (int mx = -r; mx <= r; ++mx) {
            if (mx == 0 && my == 0) continue;
            int64_t s = ref_sad(mx, my);
            if (s < best_sad) {
                best_sad = s;
                best = {int16_t(mx * 4), int16_t(my * 4)};
            }
        }

    if (r == 0) return best; // zero-MV test only

    // quarter-pel refinement, +/-3 steps around the integer winner
    std::vector<Sample> pred(size_t(size) * size);
    MotionVector ibest = best;
    for (int dy = -3; dy <= 3; ++dy)
        for (int dx = -3; dx <= 3; ++dx) {
            if (dx == 0 && dy == 0) continue;
            MotionVector cand{int16_t(ibest.x + dx), int16_t(ibest.y + dy)};
            cand = cand.clamped();
            mc_predict(m_kernels, ref, 0, x, y, size, size, cand, pred.data(), size,
                       m_cfg.bit_depth);
            int64_t s = sad_block(pred.data(), size, src, m_seq.width, size, size);
            if (s < best_sad) {
                best_sad = s;
                best = cand;
            }
        }
    return best;
}

CuDecision FrameEncoder::decide_cu(int x, int y, int size) {
    CuDecision d;
    d.x = x;
    d.y = y;
    d.size = size;

    std::vector<Sample> pred;
    int64_t best_intra = -1;
    for (int rl = 0; rl < 3; ++rl) {
        for (int m = 0; m < 4; ++m) {
            std::vector<Sample> p;
            int64_t s = try_intra(x, y, size, IntraMode(m), rl, p);
            if (best_intra < 0 || s < best_intra) {
                best_intra = s;
                d.mode = IntraMode(m);
                d.ref_line = rl;
            }
        }
    }

    if (m_type != FrameType::I && !m_refs.empty()) {
        int64_t sad0 = 0, sad1 = 0;
        MotionVector mv0 = search_mv(0, x, y, size, sad0);
        int64_t best_inter = sad0;
        d.intra = false;
        d.ref_sel = 0;
        d.mv[0] = mv0;

        if (m_refs.size() == 2) {
            MotionVector mv1 = search_mv(1, x, y, size, sad1);
            if (sad1 < best_inter) {
                best_inter = sad1;
                d.ref_sel = 1;
                d.mv[0] = mv1;
            }
            // bi-prediction from the two per-list winners
            std::vector<Sample> p0(size_t(size) * size), p1(p0), blend(p0);
            mc_predict(m_kernels, *m_refs[0], 0, x, y, size, size, mv0, p0.data(), size,
                       m_cfg.bit_depth);
            mc_predict(m_kernels, *m_refs[1], 0, x, y, size, size, mv1, p1.data(), size,
                       m_cfg.bit_depth);
            for (int j = 0; j < size; ++j)
                m_kernels.bipred_blend(p0.data() + ptrdiff_t(j) * size,
                                       p1.data() + ptrdiff_t(j) * size,
                                       blend.data() + ptrdiff_t(j) * size, size);
            int64_t sbi = sad_block(blend.data(), size,
                                    m_orig.y.data() + size_t(y) * m_seq.width + x,
                                    m_seq.width, size, size);
            if (sbi < best_inter) {
                best_inter = sbi;
                d.bi = true;
                d.mv[0] = mv0;
                d.mv[1] = mv1;
            }
        }
        if (best_intra < best_inter) {
            d.intra = true;
        }
    }

    ++cu_count;
    if (d.intra) {
        ++intra_cu_count;
        ++intra_mode_histogram[size_t(d.mode)];
    }
    return d;
}

void FrameEncoder::predict_cu(const CuDecision& d, int plane, Sample* dst, ptrdiff_t ds) {
    bool chroma = plane > 0;
    int shift = chroma ? 1 : 0;
    int px = d.x >> shift, py = d.y >> shift, psize = d.size >> shift;

    if (d.intra) {
        IntraAvailability avail;
        avail.frame_w = int(m_seq.width);
        avail.frame_h = int(m_seq.height);
        avail.ctu_x0 = m_ctu_x0;
        avail.ctu_y0 = m_ctu_y0;
        avail.ctu_x1 = m_ctu_x1;
        avail.ctu_y1 = m_ctu_y1;
        avail.cu_z = morton2(uint32_t(d.x - m_ctu_x0) >> 3, uint32_t(d.y - m_ctu_y0) >> 3);
        auto view = [&](int vx, int vy) { return m_work.at(plane, vx, vy); };
        int rl = chroma ? 0 : d.ref_line;
        IntraRefs refs =
            gather_intra_refs(view, avail, shift, px, py, psize, rl, m_cfg.bit_depth);
        predict_intra(m_kernels, d.mode, refs, dst, ds, psize);
        return;
    }

    const PictureBuffer& r0 = *m_refs[d.bi ? 0 : size_t(d.ref_sel)];
    if (!d.bi) {
        mc_predict(m_kernels, r0, plane, px, py, psize, psize, d.mv[0], dst, ds,
                   m_cfg.bit_depth);
        return;
    }
    std::vector<Sample> p0(size_t(psize) * psize), p1(p0);
    mc_predict(m_kernels, r0, plane, px, py, psize, psize, d.mv[0], p0.data(), psize,
               m_cfg.bit_depth);
    mc_predict(m_kernels, *m_refs[1], plane, px, py, psize, psize, d.mv[1], p1.data(),
               psize, m_cfg.bit_depth);
    for (int j = 0; j < psize; ++j)
        m_kernels.bipred_blend(p0.data() + ptrdiff_t(j) * psize,
                               p1.data() + ptrdiff_t(j) * psize, dst + ptrdiff_t(j) * ds,
                               psize);
}

void FrameEncoder::reconstruct_cu(CuDecision& d) {
    bool any_coded = false;
    for (int plane = 0; plane < 3; ++plane) {
        bool chroma = plane > 0;
        int shift = chroma ? 1 : 0;
        int px = d.x >> shift, py = d.y >> shift, psize = d.size >> shift;
        if (chroma && d.size < 16) {
            // 8x8 transforms only: no chroma residual below 16 luma, predict
            std::vector<Sample> pred(size_t(psize) * psize);
            predict_cu(d, plane, pred.data(), psize);
            for (int j = 0; j < psize; ++j)
                for (int i = 0; i < psize; ++i)
                    m_work.at(plane, px + i, py + j) = pred[size_t(j) * psize + i];
            continue;
        }

        std::vector<Sample> pred(size_t(psize) * psize);
        predict_cu(d, plane, pred.data(), psize);

        auto& levels_out =
            plane == 0 ? d.luma_levels : (plane == 1 ? d.cb_levels : d.cr_levels);
        int nb = psize / 8;
        levels_out.resize(size_t(nb) * nb);

        const Sample* orig = orig_plane(plane);
        int ow = plane_w(plane);
        for (int by = 0; by < nb; ++by) {
            for (int bx = 0; bx < nb; ++bx) {
                int16_t res[64], coeff[64], levels[64], deq[64], rec[64];
                for (int j = 0; j < 8; ++j)
                    for (int i = 0; i < 8; ++i)
                        res[j * 8 + i] =
                            int16_t(int32_t(orig[size_t(py + by * 8 + j) * ow + px +
                                                 bx * 8 + i]) -
                                    int32_t(pred[size_t(by * 8 + j) * psize + bx * 8 + i]));
                dct8x8_forward(res, coeff);
                quantize8x8(coeff, levels, m_cfg.qp);
                bool coded = std::any_of(levels, levels + 64,
                                         [](int16_t l) { return l != 0; });
                if (coded) {
                    any_coded = true;
                    levels_out[size_t(by) * nb + bx].assign(levels, levels + 64);
                    m_kernels.dequant(levels, deq, 64, quant_scale(m_cfg.qp));
                    m_kernels.idct8x8(deq, rec);
                }
                for (int j = 0; j < 8; ++j)
                    for (int i = 0; i < 8; ++i) {
                        int32_t p = pred[size_t(by * 8 + j) * psize + bx * 8 + i];
                        int32_t v = coded ? p + rec[j * 8 + i] : p;
                        m_work.at(plane, px + bx * 8 + i, py + by * 8 + j) =
                            clip_sample(v, m_cfg.bit_depth);
                    }
            }
        }
    }
    d.cbf = any_coded;
    if (!d.intra) {
        int n_mv = d.bi ? 2 : 1;
        for (int i = 0; i < n_mv; ++i)
            if (d.mv[i].x != 0 || d.mv[i].y != 0) ++nonzero_mv_count;
    }
    if (!d.intra && !d.cbf && d.mv[0].x == 0 && d.mv[0].y == 0 && !d.bi)
        ++zero_mv_skip_count;
}

void FrameEncoder::replay_tree(RangeEncoder& enc, int x, int y, int size) {
    if (x >= int(m_seq.width) || y >= int(m_seq.height)) return;
    bool inside = x + size <= int(m_seq.width) && y + size <= int(m_seq.height);
    const CuDecision* next =
        m_replay_idx < m_leaves->size() ? &(*m_leaves)[m_replay_idx] : nullptr;
    bool is_leaf = next && next->x == x && next->y == y && next->size == size;
    if (size > 8) {
        if (!inside) {
            // implicit split, no flag
        } else {
            enc.encode_bin(CTX_SPLIT, !is_leaf);
        }
        if (!is_leaf) {
            int h = size / 2;
            replay_tree(enc, x, y, h);
            replay_tree(enc, x + h, y, h);
            replay_tree(enc, x, y + h, h);
            replay_tree(enc, x + h, y + h, h);
            return;
        }
    }
    check(is_leaf, ErrorCode::InternalState, "decision replay out of sync");
    write_cu(enc, *next);
    ++m_replay_idx;
}

void FrameEncoder::write_cu(RangeEncoder& enc, const CuDecision& d) {
    if (m_type != FrameType::I) enc.encode_bin(CTX_PRED_MODE, d.intra);

    if (d.intra) {
        enc.encode_bin(CTX_INTRA_MODE0, (int(d.mode) >> 1) & 1);
        enc.encode_bin(CTX_INTRA_MODE1, int(d.mode) & 1);
        enc.encode_bin(CTX_MRL0, d.ref_line > 0);
        if (d.ref_line > 0) enc.encode_bin(CTX_MRL1, d.ref_line == 2);
    } else {
        if (m_refs.size() == 2) enc.encode_bin(CTX_INTER_BI, d.bi);
        if (!d.bi && m_refs.size() == 2) enc.encode_bin(CTX_INTER_REF, d.ref_sel);
        int n_mv = d.bi ? 2 : 1;
        for (int i = 0; i < n_mv; ++i) {
            syntax::write_mvd(enc, d.mv[i].x);
            syntax::write_mvd(enc, d.mv[i].y);
        }
    }

    enc.encode_bin(CTX_CBF, d.cbf);
    if (!d.cbf) return;

    int nb = d.size / 8;
    for (int b = 0; b < nb * nb; ++b) {
        const auto& lv = d.luma_levels[size_t(b)];
        if (nb > 1) enc.encode_bin(CTX_CBF, !lv.empty());
        if (!lv.empty()) syntax::write_residual_block(enc, lv.data());
    }
    if (d.size >= 16) {
        int nbc = d.size / 16;
        for (const auto* planeLevels : {&d.cb_levels, &d.cr_levels}) {
            for (int b = 0; b < nbc * nbc; ++b) {
                const auto& lv = (*planeLevels)[size_t(b)];
                enc.encode_bin(CTX_CBF, !lv.empty());
                if (!lv.empty()) syntax::write_residual_block(enc, lv.data());
            }
        }
    }
}

// ---- SAO parameter estimation ----

struct SaoStats {
    std::array<int64_t, 32> band_sum{};
    std::array<int64_t, 32> band_count{};
    std::array<std::array<int64_t, 4>, 4> edge_sum{};   // [dir][category]
    std::array<std::array<int64_t, 4>, 4> edge_count{};
};

int sign3i(int32_t v) { return (v > 0) - (v < 0); }

void gather_sao_stats(const PictureBuffer& rec, const Sample* orig, int ow, int plane,
                      int x0, int y0, int w, int h, int bit_depth, SaoStats& st) {
    const int W = rec.width(plane), H = rec.height(plane);
    int shift = bit_depth - 5;
    static const int dx_a[4] = {-1, 0, 1, -1};
    static const int dy_a[4] = {0, -1, -1, -1};
    for (int y = y0; y < y0 + h; ++y) {
        for (int x = x0; x < x0 + w; ++x) {
            int32_t r = rec.at(plane, x, y);
            int32_t diff = int32_t(orig[size_t(y) * ow + x]) - r;
            int band = r >> shift;
            st.band_sum[size_t(band)] += diff;
            st.band_count[size_t(band)] += 1;
            for (int dir = 0; dir < 4; ++dir) {
                int ax = clip3(0, W - 1, x + dx_a[dir]);
                int ay = clip3(0, H - 1, y + dy_a[dir]);
                int bx = clip3(0, W - 1, x - dx_a[dir]);
                int by = clip3(0, H - 1, y - dy_a[dir]);
                int cat = 2 + sign3i(r - rec.at(plane, ax, ay)) +
                          sign3i(r - rec.at(plane, bx, by));
                if (cat == 2) continue;
                int idx = cat < 2 ? cat : cat - 1;
                st.edge_sum[size_t(dir)][size_t(idx)] += diff;
                st.edge_count[size_t(dir)][size_t(idx)] += 1;
            }
        }
    }
}

int8_t best_offset(int64_t sum, int64_t count) {
    if (count == 0) return 0;
    double o = double(sum) / double(count);
    return int8_t(clip3<int>(-7, 7, int(std::lround(o))));
}

// SSE reduction of applying offset o to n samples with diff sum s
int64_t offset_gain(int o, int64_t n, int64_t s) { return 2 * o * s - n * int64_t(o) * o; }

SaoParams choose_sao(const SaoStats& st) {
    SaoParams best; // Off, gain 0
    int64_t best_gain = 0;

    for (int start = 0; start <= 28; ++start) {
        int64_t gain = 0;
        std::array<int8_t, 4> offs{};
        for (int k = 0; k < 4; ++k) {
            offs[size_t(k)] = best_offset(st.band_sum[size_t(start + k)],
                                          st.band_count[size_t(start + k)]);
            gain += offset_gain(offs[size_t(k)], st.band_count[size_t(start + k)],
                                st.band_sum[size_t(start + k)]);
        }
        if (gain > best_gain) {
            best_gain = gain;
            best.type = SaoType::Band;
            best.band_start = uint8_t(start);
            best.offsets = offs;
        }
    }
    for (int dir = 0; dir < 4; ++dir) {
        int64_t gain = 0;
        std::array<int8_t, 4> offs{};
        for (int k = 0; k < 4; ++k) {
            offs[size_t(k)] =
                best_offset(st.edge_sum[size_t(dir)][size_t(k)],
                            st.edge_count[size_t(dir)][size_t(k)]);
            gain += offset_gain(offs[size_t(k)], st.edge_count[size_t(dir)][size_t(k)],
                                st.edge_sum[size_t(dir)][size_t(k)]);
        }
        if (gain > best_gain) {
            best_gain = gain;
            best.type = SaoType::Edge;
            best.edge_dir = uint8_t(dir);
            best.offsets = offs;
        }
    }
    return best;
}

// ---- ALF training ----

// Solves A x = b in place (n <= 12), Gaussian elimination, partial pivot.
bool solve_linear(std::vector<double>& A, std::vector<double>& b, int n) {
    for (int i = 0; i < n; ++i) {
        int piv = i;
        for (int r = i + 1; r < n; ++r)
            if (std::abs(A[size_t(r) * n + i]) > std::abs(A[size_t(piv) * n + i])) piv = r;
        if (std::abs(A[size_t(piv) * n + i]) < 1e-9) return false;
        if (piv != i) {
            for (int c = 0; c < n; ++c) std::swap(A[size_t(i) * n + c], A[size_t(piv) * n + c]);
            std::swap(b[size_t(i)], b[size_t(piv)]);
        }
        for (int r = i + 1; r < n; ++r) {
            double f = A[size_t(r) * n + i] / A[size_t(i) * n + i];
            for (int c = i; c < n; ++c) A[size_t(r) * n + c] -= f * A[size_t(i) * n + c];
            b[size_t(r)] -= f * b[size_t(i)];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[size_t(i)];
        for (int c = i + 1; c < n; ++c) s -= A[size_t(i) * n + c] * b[size_t(c)];
        b[size_t(i)] = s / A[size_t(i) * n + i];
    }
    return true;
}

template <int NPairs>
void train_alf_plane(const PictureBuffer& rec, const std::vector<const Sample*>& origs,
                     const std::vector<int>& planes, int ow_luma, int8_t* out_coeffs) {
    const TapOffset* offs = NPairs == 12 ? kAlfLumaOffsets : kAlfChromaOffsets;
    const int n = NPairs;
    std::vector<double> ata(size_t(n) * n, 0.0), atb(size_t(n), 0.0);

    for (size_t pi = 0; pi < planes.size(); ++pi) {
        int plane = planes[pi];
        const Sample* orig = origs[pi];
        int W = rec.width(plane), H = rec.height(plane);
        int ow = plane ? ow_luma / 2 : ow_luma;
        const int m = 3;
        double e[NPairs];
        for (int y = m; y < H - m; ++y) {
            for (int x = m; x < W - m; ++x) {
                int32_t c = rec.at(plane, x, y);
                for (int i = 0; i < n; ++i)
                    e[i] = double(int32_t(rec.at(plane, x + offs[i].dx, y + offs[i].dy)) +
                                  int32_t(rec.at(plane, x - offs[i].dx, y - offs[i].dy)) -
                                  2 * c);
                double t = double(int32_t(orig[size_t(y) * ow + x]) - c);
                for (int i = 0; i < n; ++i) {
                    for (int j = i; j < n; ++j) ata[size_t(i) * n + j] += e[i] * e[j];
                    atb[size_t(i)] += e[i] * t;
                }
            }
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) ata[size_t(i) * n + j] = ata[size_t(j) * n + i];

    std::fill(out_coeffs, out_coeffs + n, 0);
    std::vector<double> sol = atb;
    std::vector<double> a = ata;
    if (solve_linear(a, sol, n))
        for (int i = 0; i < n; ++i)
            out_coeffs[i] = int8_t(clip3<int>(-127, 127, int(std::lround(sol[size_t(i)] * 128.0))));
}

int64_t sse_region(const PictureBuffer& a, const Sample* orig, int ow, int plane, int x0,
                   int y0, int w, int h) {
    int64_t sse = 0;
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) {
            int64_t d = int64_t(a.at(plane, x, y)) - int64_t(orig[size_t(y) * ow + x]);
            sse += d * d;
        }
    return sse;
}

void copy_picture(const PictureBuffer& src, PictureBuffer& dst) {
    for (int p = 0; p < 3; ++p)
        for (int y = 0; y < src.height(p); ++y) {
            const Sample* s = src.plane(p) + ptrdiff_t(y) * src.stride(p);
            Sample* d = dst.plane(p) + ptrdiff_t(y) * dst.stride(p);
            std::copy(s, s + src.width(p), d);
        }
}

} // namespace

EncodeResult encode_sequence(const RawVideo& video, const EncoderConfig& cfg) {
    cfg.validate();
    check(video.width % 8 == 0 && video.height % 8 == 0, ErrorCode::EncodeConfig,
          "dimensions must be multiples of 8");
    check(!video.frames.empty(), ErrorCode::EncodeConfig, "no frames");

    SequenceHeader seq;
    seq.width = video.width;
    seq.height = video.height;
    seq.bit_depth = uint8_t(cfg.bit_depth);
    seq.ctu_size = uint8_t(cfg.ctu_size);
    seq.gop_mode = cfg.gop_mode;
    seq.dpb_max_nb_pic = cfg.dpb_max_nb_pic();
    seq.frame_count = uint32_t(video.frames.size());
    seq.validate();

    const KernelTable& kernels = scalar_kernels();
    auto gop = gop_structure(cfg.gop_mode, seq.frame_count);

    // internal bit depth conversion
    auto convert = [&](const RawFrame& in) {
        if (video.bit_depth == cfg.bit_depth) return in;
        RawFrame out = in;
        int up = cfg.bit_depth - video.bit_depth;
        for (auto* p : {&out.y, &out.u, &out.v})
            for (auto& s : *p) s = Sample(up > 0 ? s << up : s >> -up);
        return out;
    };

    // last decode index each reference is needed at
    std::map<uint32_t, size_t> last_use;
    for (size_t i = 0; i < gop.size(); ++i)
        for (uint32_t r : gop[i].refs) last_use[r] = i;

    std::map<uint32_t, std::unique_ptr<PictureBuffer>> ref_pool;
    EncodeResult result;
    result.reconstruction.resize(video.frames.size());
    std::vector<Frame> frames;

    for (size_t gi = 0; gi < gop.size(); ++gi) {
        const GopEntry& entry = gop[gi];
        RawFrame orig = convert(video.frames[entry.poc]);

        std::vector<const PictureBuffer*> refs;
        for (uint32_t r : entry.refs) {
            auto it = ref_pool.find(r);
            check(it != ref_pool.end(), ErrorCode::InternalState, "encoder lost reference");
            refs.push_back(it->second.get());
        }

        auto work = std::make_unique<PictureBuffer>(int(seq.width), int(seq.height), nullptr);

        FrameEncoder fe(cfg, seq, kernels, orig, *work, refs, entry.type);
        fe.decide();
        result.cu_count += fe.cu_count;
        result.intra_cu_count += fe.intra_cu_count;
        result.zero_mv_skip_count += fe.zero_mv_skip_count;
        result.nonzero_mv_count += fe.nonzero_mv_count;
        for (size_t m = 0; m < 4; ++m)
            result.intra_mode_histogram[m] += fe.intra_mode_histogram[m];

        // full-frame in-loop filters, mirroring the decoder's staged output
        std::vector<uint8_t> flags(size_t(ceil_div(int(seq.height), 8)) *
                                       ceil_div(int(seq.width), 8),
                                   0);
        std::vector<uint8_t> qp_map(flags.size(), uint8_t(cfg.qp));
        int bc = ceil_div(int(seq.width), 8);
        for (const auto& ctu : fe.leaves())
            for (const CuDecision& d : ctu) {
                int nb = d.size / 8;
                for (int by = d.y / 8; by < d.y / 8 + nb; ++by)
                    for (int bx = d.x / 8; bx < d.x / 8 + nb; ++bx) {
                        if (by >= int(seq.height) / 8 || bx >= bc) continue;
                        if (bx == d.x / 8) flags[size_t(by) * bc + bx] |= kCuEdgeLeft;
                        if (by == d.y / 8) flags[size_t(by) * bc + bx] |= kCuEdgeTop;
                    }
            }
        dbf_frame(*work, flags, qp_map, bc, cfg.bit_depth);

        // SAO: per-CTU parameter choice on the deblocked frame
        const Sample* origs[3] = {orig.y.data(), orig.u.data(), orig.v.data()};
        std::vector<SaoCtuParams> sao(size_t(seq.ctu_count()));
        for (int cy = 0; cy < seq.ctu_rows(); ++cy)
            for (int cx = 0; cx < seq.ctu_cols(); ++cx) {
                SaoCtuParams& sp = sao[size_t(cy) * seq.ctu_cols() + cx];
                {
                    SaoStats st;
                    int x0 = cx * cfg.ctu_size, y0 = cy * cfg.ctu_size;
                    gather_sao_stats(*work, origs[0], int(seq.width), 0, x0, y0,
                                     std::min(cfg.ctu_size, int(seq.width) - x0),
                                     std::min(cfg.ctu_size, int(seq.height) - y0),
                                     cfg.bit_depth, st);
                    sp.luma = choose_sao(st);
                }
                {
                    SaoStats st;
                    int s2 = cfg.ctu_size / 2;
                    int x0 = cx * s2, y0 = cy * s2;
                    int w = std::min(s2, int(seq.width) / 2 - x0);
                    int h = std::min(s2, int(seq.height) / 2 - y0);
                    gather_sao_stats(*work, origs[1], int(seq.width) / 2, 1, x0, y0, w, h,
                                     cfg.bit_depth, st);
                    gather_sao_stats(*work, origs[2], int(seq.width) / 2, 2, x0, y0, w, h,
                                     cfg.bit_depth, st);
                    sp.chroma = choose_sao(st);
                }
            }
        sao_frame(kernels, *work, sao, cfg.ctu_size, seq.ctu_cols(), cfg.bit_depth);

        // ALF: least-squares training on the SAO output, per-CTU enables
        AlfParams alf;
        train_alf_plane<12>(*work, {origs[0]}, {0}, int(seq.width), alf.luma.data());
        train_alf_plane<6>(*work, {origs[1], origs[2]}, {1, 2}, int(seq.width),
                           alf.chroma.data());

        auto filtered = std::make_unique<PictureBuffer>(int(seq.width), int(seq.height),
                                                        nullptr);
        copy_picture(*work, *filtered);
        AlfParams all_on = alf;
        all_on.enable_mode = 1;
        alf_frame(kernels, *filtered, all_on, cfg.ctu_size, seq.ctu_cols(), cfg.bit_depth);

        int enabled = 0;
        bool overflow = seq.ctu_count() > kAlfBitmapCapacity;
        int64_t total_gain = 0;
        for (int cy = 0; cy < seq.ctu_rows(); ++cy)
            for (int cx = 0; cx < seq.ctu_cols(); ++cx) {
                int64_t se_f = 0, se_u = 0;
                for (int plane = 0; plane < 3; ++plane) {
                    int sp2 = plane ? cfg.ctu_size / 2 : cfg.ctu_size;
                    int x0 = cx * sp2, y0 = cy * sp2;
                    int w = std::min(sp2, filtered->width(plane) - x0);
                    int h = std::min(sp2, filtered->height(plane) - y0);
                    int ow = plane ? int(seq.width) / 2 : int(seq.width);
                    se_f += sse_region(*filtered, origs[size_t(plane)], ow, plane, x0, y0, w, h);
                    se_u += sse_region(*work, origs[size_t(plane)], ow, plane, x0, y0, w, h);
                }
                bool on = se_f < se_u;
                total_gain += se_u - se_f;
                if (on) ++enabled;
                if (!overflow) alf.set_ctu_enabled(cy * seq.ctu_cols() + cx, on);
            }
        if (overflow) {
            alf.enable_mode = total_gain > 0 ? 1 : 0;
        } else if (enabled == 0) {
            alf.enable_mode = 0;
        } else if (enabled == seq.ctu_count()) {
            alf.enable_mode = 1;
        } else {
            alf.enable_mode = 2;
        }
        alf_frame(kernels, *work, alf, cfg.ctu_size, seq.ctu_cols(), cfg.bit_depth);

        // retained reconstruction and container payloads
        RawFrame& rec = result.reconstruction[entry.poc];
        rec.y.resize(size_t(seq.width) * seq.height);
        rec.u.resize(size_t(seq.width / 2) * (seq.height / 2));
        rec.v.resize(rec.u.size());
        PictureBuffer& wp = *work;
        for (int p = 0; p < 3; ++p) {
            auto& dst = p == 0 ? rec.y : (p == 1 ? rec.u : rec.v);
            for (int y = 0; y < wp.height(p); ++y) {
                const Sample* row = wp.plane(p) + ptrdiff_t(y) * wp.stride(p);
                std::copy(row, row + wp.width(p), dst.begin() + ptrdiff_t(y) * wp.width(p));
            }
        }

        Frame f;
        f.header.poc = entry.poc;
        f.header.frame_type = entry.type;
        f.header.qp = uint8_t(cfg.qp);
        f.header.ref_pocs = entry.refs;
        f.header.alf = alf;
        for (int cy = 0; cy < seq.ctu_rows(); ++cy)
            for (int cx = 0; cx < seq.ctu_cols(); ++cx) {
                f.payloads.push_back(
                    fe.write_payload(cx, cy, sao[size_t(cy) * seq.ctu_cols() + cx]));
                f.header.payload_sizes.push_back(uint32_t(f.payloads.back().size()));
            }
        frames.push_back(std::move(f));

        // publish as reference
        if (last_use.count(entry.poc)) {
            work->replicate_pad_rows(0, int(seq.height));
            ref_pool[entry.poc] = std::move(work);
        }
        for (auto it = ref_pool.begin(); it != ref_pool.end();) {
            if (last_use[it->first] <= gi)
                it = ref_pool.erase(it);
            else
                ++it;
        }
    }

    // frames were produced in decode order
    result.stream = write_stream(seq, frames);
    return result;
}

} // namespace ovl
