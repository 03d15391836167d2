#pragma once

#include <vector>

#include "ovl/bitio.hpp"
#include "ovl/buffers.hpp"
#include "ovl/container.hpp"
#include "ovl/kernels.hpp"
#include "ovl/local_context.hpp"

namespace ovl {

enum class SaoType : uint8_t { Off = 0, Band = 1, Edge = 2 };

struct SaoParams {
    SaoType type = SaoType::Off;
    uint8_t band_start = 0; // 5 bits
    uint8_t edge_dir = 0;   // 0deg, 90deg, 45deg, 135deg
    std::array<int8_t, 4> offsets{};
};

// One luma + one chroma (shared Cb/Cr) parameter set per CTU.
struct SaoCtuParams {
    SaoParams luma;
    SaoParams chroma;
};

void write_sao_params(RangeEncoder& enc, const SaoCtuParams& p);
SaoCtuParams read_sao_params(RangeDecoder& dec);

// ---- deblocking ----
// One-strength filter across 8-aligned CU boundaries: if |p0-q0| < beta(qp)
// with beta(qp) = qp, p0' = (p1 + 2 p0 + q0 + 2) >> 2 and symmetrically q0'.
// Streamed form: per CTU, vertical edges then horizontal edges, leaving the
// band quantum (8 luma / 4 chroma samples) at the right/bottom untouched;
// neighbors' deferred bands complete as later CTUs arrive.

struct DbfFrameParams {
    const RowMaps* maps = nullptr; // streamed: per-row maps
    // full-frame: flags/qp for the entire frame at 8x8 granularity
    const std::vector<uint8_t>* full_flags = nullptr;
    const std::vector<uint8_t>* full_qp = nullptr;
    int block_cols = 0;
};

void dbf_ctu(PictureBuffer& pic, int ctu_x, int ctu_y, int ctu_size, const RowMaps& maps,
             int bit_depth);

// Full-frame oracle: every vertical edge, then every horizontal edge.
void dbf_frame(PictureBuffer& pic, const std::vector<uint8_t>& flags,
               const std::vector<uint8_t>& qp, int block_cols, int bit_depth);

// ---- SAO ----
// Streamed form processes CTU line `line` shifted down by the ALF margin
// (3 luma rows / 2 chroma rows), so ALF of the same line has final support.
void sao_line(LocalContext& ctx, const KernelTable& kernels, PictureBuffer& pic, int line,
              const std::vector<SaoCtuParams>& params, int ctu_cols, int bit_depth);

void sao_frame(const KernelTable& kernels, PictureBuffer& pic,
               const std::vector<SaoCtuParams>& params, int ctu_size, int ctu_cols,
               int bit_depth);

// ---- ALF ----
void alf_line(LocalContext& ctx, const KernelTable& kernels, PictureBuffer& pic, int line,
              const AlfParams& params, int ctu_cols, int bit_depth);

void alf_frame(const KernelTable& kernels, PictureBuffer& pic, const AlfParams& params,
               int ctu_size, int ctu_cols, int bit_depth);

// Expanded integer coefficient views of the serialized params.
std::array<int16_t, kAlfLumaCoeffs> alf_luma_coeffs(const AlfParams& p);
std::array<int16_t, kAlfChromaCoeffs> alf_chroma_coeffs(const AlfParams& p);

} // namespace ovl
