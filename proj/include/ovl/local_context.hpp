#pragma once

#include <array>
#include <vector>

#include "ovl/bitio.hpp"
#include "ovl/buffers.hpp"
#include "ovl/common.hpp"

namespace ovl {

enum class FilterStage : int { Intra = 0, Sao = 1, Alf = 2 };
constexpr int kNumStages = 3;

// Margin of neighboring samples each staged process needs, per plane kind.
constexpr int stage_margin(FilterStage s, bool chroma) {
    switch (s) {
        case FilterStage::Intra: return 3; // 3 reference lines
        case FilterStage::Sao: return 1;
        case FilterStage::Alf: return chroma ? 2 : 3; // half the diamond size
    }
    return 0;
}

struct Rect {
    int x = 0, y = 0, w = 0, h = 0;
};

// CU boundary / QP map for one CTU row, at 8x8 block granularity, plus the
// bottom block-row of the previous CTU row (needed to finish its deferred
// deblocking bands).
constexpr uint8_t kCuEdgeLeft = 1;
constexpr uint8_t kCuEdgeTop = 2;

struct RowMaps {
    int block_cols = 0;
    int block_rows = 0; // blocks per CTU row
    std::vector<uint8_t> flags;    // current row, block_rows x block_cols
    std::vector<uint8_t> qp;       // current row
    std::vector<uint8_t> above_flags; // bottom block-row of the row above
    std::vector<uint8_t> above_qp;
    int row_block_y0 = 0; // absolute block row of flags[0]

    void init(int width, int ctu_size);
    void start_row(int ctu_row, int ctu_size);

    uint8_t flag_at(int bx, int by) const;
    uint8_t qp_at(int bx, int by) const;
    void mark_cu(int x, int y, int size, uint8_t cu_qp);
};

// Per-decoding-thread scratch: per-stage extended-CTU buffers with their
// right-columns / bottom-rows line caches, the row maps, and entropy state.
class LocalContext {
public:
    LocalContext(int frame_width, int frame_height, int ctu_size, MemoryAccounting* acct);
    ~LocalContext();

    LocalContext(const LocalContext&) = delete;
    LocalContext& operator=(const LocalContext&) = delete;

    int ctu_size() const { return m_ctu_size; }
    int frame_width(int plane = 0) const { return plane ? m_width / 2 : m_width; }
    int frame_height(int plane = 0) const { return plane ? m_height / 2 : m_height; }

    // EC buffer access: coordinate (0,0) maps to rect.x/rect.y of the last
    // ec_fill; margins live at negative offsets.
    Sample* ec(FilterStage s, int plane);
    ptrdiff_t ec_stride(FilterStage s, int plane) const;
    Sample* out(FilterStage s, int plane);
    ptrdiff_t out_stride(FilterStage s, int plane) const;

    // Fills the EC buffer for the chunk: center and right/bottom margins
    // from the picture (frame borders edge-replicated), left margin from RC,
    // top margin from BR, top-left corner from the corner save.
    void ec_fill(FilterStage s, int plane, const PictureBuffer& pic, const Rect& rect);

    // Saves the chunk's rightmost M columns into RC and its bottom M rows
    // into the BR segment, from the EC content as it stands; also snapshots
    // the BR sliver the next chunk needs for its top-left corner.
    void rc_br_update(FilterStage s, int plane, const Rect& rect);

    // Copies region (relative to rect) back into the picture. For the intra
    // stage the source is the EC center (reconstruction happens in place);
    // for SAO/ALF it is the separate output buffer.
    void commit(FilterStage s, int plane, PictureBuffer& pic, const Rect& rect,
                const Rect& region) const;
    void commit(FilterStage s, int plane, PictureBuffer& pic, const Rect& rect) const {
        commit(s, plane, pic, rect, Rect{0, 0, rect.w, rect.h});
    }

    RowMaps& maps() { return m_maps; }
    const RowMaps& maps() const { return m_maps; }

    size_t buffer_bytes() const { return m_buffer_bytes; }

private:
    struct StagePlane {
        int margin = 0;
        int ec_side = 0; // center side; full side = ec_side + 2*margin
        std::vector<Sample> ec;
        std::vector<Sample> out;
        std::vector<Sample> rc;      // [ec_side][margin]
        std::vector<Sample> br;      // [margin][plane_width]
        std::vector<Sample> corner;  // [margin][margin]
    };

    StagePlane& sp(FilterStage s, int plane) { return m_sp[int(s)][plane]; }
    const StagePlane& sp(FilterStage s, int plane) const { return m_sp[int(s)][plane]; }

    int m_width, m_height, m_ctu_size;
    std::array<std::array<StagePlane, 3>, kNumStages> m_sp;
    RowMaps m_maps;
    size_t m_buffer_bytes = 0;
    MemoryAccounting* m_acct;
};

} // namespace ovl
