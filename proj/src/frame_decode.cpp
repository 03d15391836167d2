#include "ovl/frame_decode.hpp"

#include <algorithm>

#include "ovl/inter.hpp"
#include "ovl/intra.hpp"
#include "ovl/profile.hpp"
#include "ovl/syntax.hpp"

namespace ovl {

namespace {

struct CtuDecoder {
    const FrameDecodeParams& params;
    const FrameJob& job;
    LocalContext& ctx;
    RangeDecoder& rd;
    PictureBuffer& pic;
    int ctu_x, ctu_y;
    Rect luma_rect;   // this CTU clipped to the frame, luma coords
    Rect chroma_rect;
    int bit_depth;

    int width() const { return params.seq->width; }
    int height() const { return params.seq->height; }

    Sample* ec_plane(int plane) { return ctx.ec(FilterStage::Intra, plane); }
    ptrdiff_t ec_stride(int plane) const {
        return ctx.ec_stride(FilterStage::Intra, plane);
    }

    void decode_tree(int x, int y, int size);
    void decode_cu(int x, int y, int size);
    void predict_intra_cu(int x, int y, int size, IntraMode mode, int ref_line);
    void predict_inter_cu(int x, int y, int size);
    void decode_residual(int x, int y, int size);
    void add_residual_block(int plane, int px, int py, const int16_t* residual);
    void wait_reference(DpbEntry* ref, int y, int h, MotionVector mv);
};

void CtuDecoder::decode_tree(int x, int y, int size) {
    if (x >= width() || y >= height()) return;
    bool inside = x + size <= width() && y + size <= height();
    bool split;
    if (size > 8) {
        if (!inside) {
            split = true; // implicit split at the picture edge
        } else {
            OVL_PROFILE_SCOPE(Stage::Entropy);
            split = rd.decode_bin(CTX_SPLIT) != 0;
        }
    } else {
        split = false;
    }
    if (split) {
        int h = size / 2;
        decode_tree(x, y, h);
        decode_tree(x + h, y, h);
        decode_tree(x, y + h, h);
        decode_tree(x + h, y + h, h);
    } else {
        decode_cu(x, y, size);
    }
}

void CtuDecoder::decode_cu(int x, int y, int size) {
    bool intra = true;
    if (job.header.frame_type != FrameType::I) {
        OVL_PROFILE_SCOPE(Stage::Entropy);
        intra = rd.decode_bin(CTX_PRED_MODE) != 0;
    }

    if (intra) {
        IntraMode mode;
        int ref_line = 0;
        {
            OVL_PROFILE_SCOPE(Stage::Entropy);
            int b0 = rd.decode_bin(CTX_INTRA_MODE0);
            int b1 = rd.decode_bin(CTX_INTRA_MODE1);
            mode = IntraMode(b0 * 2 + b1);
            if (rd.decode_bin(CTX_MRL0)) ref_line = rd.decode_bin(CTX_MRL1) ? 2 : 1;
        }
        predict_intra_cu(x, y, size, mode, ref_line);
        for (int by = y / 8; by < (y + size) / 8; ++by)
            for (int bx = x / 8; bx < (x + size) / 8; ++bx)
                job.target->motion->set(bx, by, 0, 0, -1);
    } else {
        predict_inter_cu(x, y, size);
    }

    ctx.maps().mark_cu(x, y, size, job.header.qp);
    decode_residual(x, y, size);
}

void CtuDecoder::predict_intra_cu(int x, int y, int size, IntraMode mode, int ref_line) {
    OVL_PROFILE_SCOPE(Stage::Intra);
    for (int plane = 0; plane < 3; ++plane) {
        bool chroma = plane > 0;
        int shift = chroma ? 1 : 0;
        int px = x >> shift, py = y >> shift, psize = size >> shift;
        const Rect& rect = chroma ? chroma_rect : luma_rect;

        IntraAvailability avail;
        avail.frame_w = width();
        avail.frame_h = height();
        avail.ctu_x0 = luma_rect.x;
        avail.ctu_y0 = luma_rect.y;
        avail.ctu_x1 = luma_rect.x + luma_rect.w;
        avail.ctu_y1 = luma_rect.y + luma_rect.h;
        avail.cu_z = morton2(uint32_t(x - luma_rect.x) >> 3, uint32_t(y - luma_rect.y) >> 3);

        Sample* ec = ec_plane(plane);
        ptrdiff_t es = ec_stride(plane);
        auto view = [&](int vx, int vy) {
            return ec[ptrdiff_t(vy - rect.y) * es + (vx - rect.x)];
        };
        // chroma always predicts from the closest reference line
        int rl = chroma ? 0 : ref_line;
        IntraRefs refs = gather_intra_refs(view, avail, shift, px, py, psize, rl, bit_depth);
        predict_intra(*params.kernels, mode, refs,
                      ec + ptrdiff_t(py - rect.y) * es + (px - rect.x), es, psize);
    }
}

void CtuDecoder::wait_reference(DpbEntry* ref, int y, int h, MotionVector mv) {
    int needed = mc_needed_bottom_row(y, h, mv, height());
    int line = needed / params.seq->ctu_size;
    if (ref->availability.last_final_line() < line) {
        if (params.trace)
            params.trace->record(params.thread_id, TraceEvent::WaitBegin, ref->poc, line);
        ref->availability.wait_for_line(line, params.watchdog_ms, ref->poc);
        if (params.trace)
            params.trace->record(params.thread_id, TraceEvent::WaitEnd, ref->poc, line);
    } else if (ref->availability.failed()) {
        fail(ErrorCode::BrokenReference, "reference frame failed", ref->poc);
    }
#if !defined(NDEBUG)
    // publication contract: no read above the reported line
    check(ref->availability.last_final_line() >= line, ErrorCode::InternalState,
          "MC read above the available line");
#endif
}

void CtuDecoder::predict_inter_cu(int x, int y, int size) {
    int n_refs = int(job.refs.size());
    bool bi = false;
    int ref_sel = 0;
    MotionVector mv[2];
    {
        OVL_PROFILE_SCOPE(Stage::Entropy);
        if (n_refs == 2) bi = rd.decode_bin(CTX_INTER_BI) != 0;
        if (!bi && n_refs == 2) ref_sel = rd.decode_bin(CTX_INTER_REF);
        int n_mv = bi ? 2 : 1;
        for (int i = 0; i < n_mv; ++i) {
            mv[i].x = int16_t(syntax::read_mvd(rd));
            mv[i].y = int16_t(syntax::read_mvd(rd));
            mv[i] = mv[i].clamped();
        }
    }

    OVL_PROFILE_SCOPE(Stage::Mc);
    DpbEntry* r0 = bi ? job.refs[0] : job.refs[size_t(ref_sel)];
    DpbEntry* r1 = bi ? job.refs[1] : nullptr;
    wait_reference(r0, y, size, mv[0]);
    if (r1) wait_reference(r1, y, size, mv[1]);

    for (int plane = 0; plane < 3; ++plane) {
        bool chroma = plane > 0;
        int shift = chroma ? 1 : 0;
        int px = x >> shift, py = y >> shift, psize = size >> shift;
        const Rect& rect = chroma ? chroma_rect : luma_rect;
        Sample* dst = ec_plane(plane) + ptrdiff_t(py - rect.y) * ec_stride(plane) +
                      (px - rect.x);
        if (!bi) {
            mc_predict(*params.kernels, *r0->picture, plane, px, py, psize, psize, mv[0],
                       dst, ec_stride(plane), bit_depth);
        } else {
            std::vector<Sample> p0(size_t(psize) * psize), p1(size_t(psize) * psize);
            mc_predict(*params.kernels, *r0->picture, plane, px, py, psize, psize, mv[0],
                       p0.data(), psize, bit_depth);
            mc_predict(*params.kernels, *r1->picture, plane, px, py, psize, psize, mv[1],
                       p1.data(), psize, bit_depth);
            for (int j = 0; j < psize; ++j)
                params.kernels->bipred_blend(p0.data() + ptrdiff_t(j) * psize,
                                             p1.data() + ptrdiff_t(j) * psize,
                                             dst + ptrdiff_t(j) * ec_stride(plane), psize);
        }
    }

    int8_t ref_idx = bi ? 0 : int8_t(ref_sel);
    for (int by = y / 8; by < (y + size) / 8; ++by)
        for (int bx = x / 8; bx < (x + size) / 8; ++bx)
            job.target->motion->set(bx, by, mv[0].x, mv[0].y, ref_idx);
}

void CtuDecoder::add_residual_block(int plane, int px, int py, const int16_t* residual) {
    const Rect& rect = plane ? chroma_rect : luma_rect;
    Sample* ec = ec_plane(plane);
    ptrdiff_t es = ec_stride(plane);
    for (int j = 0; j < 8; ++j) {
        Sample* row = ec + ptrdiff_t(py - rect.y + j) * es + (px - rect.x);
        for (int i = 0; i < 8; ++i)
            row[i] = clip_sample(int32_t(row[i]) + residual[j * 8 + i], bit_depth);
    }
}

void CtuDecoder::decode_residual(int x, int y, int size) {
    bool cbf;
    {
        OVL_PROFILE_SCOPE(Stage::Entropy);
        cbf = rd.decode_bin(CTX_CBF) != 0;
    }
    if (!cbf) return;

    int16_t levels[64], coeff[64], residual[64];
    int nb = size / 8;
    for (int by = 0; by < nb; ++by) {
        for (int bx = 0; bx < nb; ++bx) {
            bool coded;
            {
                OVL_PROFILE_SCOPE(Stage::Entropy);
                coded = nb == 1 ? true : rd.decode_bin(CTX_CBF) != 0;
            }
            if (!coded) continue;
            {
                OVL_PROFILE_SCOPE(Stage::Entropy);
                syntax::read_residual_block(rd, levels);
            }
            OVL_PROFILE_SCOPE(Stage::Transform);
            params.kernels->dequant(levels, coeff, 64, quant_scale(job.header.qp));
            params.kernels->idct8x8(coeff, residual);
            add_residual_block(0, x + bx * 8, y + by * 8, residual);
        }
    }
    if (size >= 16) {
        int nbc = size / 16;
        for (int plane = 1; plane <= 2; ++plane) {
            for (int by = 0; by < nbc; ++by) {
                for (int bx = 0; bx < nbc; ++bx) {
                    bool coded;
                    {
                        OVL_PROFILE_SCOPE(Stage::Entropy);
                        coded = rd.decode_bin(CTX_CBF) != 0;
                    }
                    if (!coded) continue;
                    {
                        OVL_PROFILE_SCOPE(Stage::Entropy);
                        syntax::read_residual_block(rd, levels);
                    }
                    OVL_PROFILE_SCOPE(Stage::Transform);
                    params.kernels->dequant(levels, coeff, 64, quant_scale(job.header.qp));
                    params.kernels->idct8x8(coeff, residual);
                    add_residual_block(plane, x / 2 + bx * 8, y / 2 + by * 8, residual);
                }
            }
        }
    }
}

void decode_ctu(const FrameDecodeParams& params, const FrameJob& job, LocalContext& ctx,
                std::vector<SaoCtuParams>& sao_params, int ctu_x, int ctu_y) {
    const SequenceHeader& seq = *params.seq;
    const int S = seq.ctu_size;
    PictureBuffer& pic = *job.target->picture;

    int ctu_idx = ctu_y * seq.ctu_cols() + ctu_x;
    RangeDecoder rd(job.payloads[size_t(ctu_idx)]);

    Rect luma{ctu_x * S, ctu_y * S, std::min(S, int(seq.width) - ctu_x * S),
              std::min(S, int(seq.height) - ctu_y * S)};
    Rect chroma{luma.x / 2, luma.y / 2, luma.w / 2, luma.h / 2};

    {
        OVL_PROFILE_SCOPE(Stage::Entropy);
        sao_params[size_t(ctu_idx)] = read_sao_params(rd);
    }
    {
        OVL_PROFILE_SCOPE(Stage::BufferOps);
        ctx.ec_fill(FilterStage::Intra, 0, pic, luma);
        ctx.ec_fill(FilterStage::Intra, 1, pic, chroma);
        ctx.ec_fill(FilterStage::Intra, 2, pic, chroma);
    }

    CtuDecoder dec{params, job, ctx, rd, pic, ctu_x, ctu_y, luma, chroma, seq.bit_depth};
    dec.decode_tree(luma.x, luma.y, S);

    try {
        rd.verify_terminator();
    } catch (const Error& e) {
        fail(e.code(), std::string(e.what()) + " (ctu " + std::to_string(ctu_idx) + ")",
             job.header.poc);
    }

    {
        OVL_PROFILE_SCOPE(Stage::BufferOps);
        for (int plane = 0; plane < 3; ++plane) {
            const Rect& rect = plane ? chroma : luma;
            ctx.rc_br_update(FilterStage::Intra, plane, rect);
            ctx.commit(FilterStage::Intra, plane, pic, rect);
        }
    }
}

} // namespace

void decode_frame_body(const FrameDecodeParams& params, const FrameJob& job,
                       LocalContext& ctx) {
    const SequenceHeader& seq = *params.seq;
    const int rows = seq.ctu_rows(), cols = seq.ctu_cols();
    PictureBuffer& pic = *job.target->picture;

    std::vector<SaoCtuParams> sao_params(size_t(seq.ctu_count()));
    FilterSchedule schedule;

    auto finish_line = [&](int line) {
        sao_line(ctx, *params.kernels, pic, line, sao_params, cols, seq.bit_depth);
        schedule.last_sao_line = line;
        alf_line(ctx, *params.kernels, pic, line, job.header.alf, cols, seq.bit_depth);
        schedule.last_alf_line = line;
        {
            OVL_PROFILE_SCOPE(Stage::BufferOps);
            pic.replicate_pad_rows(line * seq.ctu_size,
                                   std::min((line + 1) * seq.ctu_size, int(seq.height)));
        }
        job.target->availability.report_line(line);
        if (params.trace)
            params.trace->record(params.thread_id, TraceEvent::LineAvail, job.header.poc,
                                 line);
        if (params.observer) params.observer->on_progress(job.header.poc, schedule);
    };

    for (int cy = 0; cy < rows; ++cy) {
        ctx.maps().start_row(cy, seq.ctu_size);
        for (int cx = 0; cx < cols; ++cx) {
            decode_ctu(params, job, ctx, sao_params, cx, cy);
            dbf_ctu(pic, cx, cy, seq.ctu_size, ctx.maps(), seq.bit_depth);
            schedule.last_dbf_ctu = cy * cols + cx;
            if (params.observer) params.observer->on_progress(job.header.poc, schedule);
        }
        if (cy >= 1) finish_line(cy - 1);
    }
    finish_line(rows - 1);
    OVL_PROFILE_FLUSH();
}

} // namespace ovl
