#pragma once

#include <array>
#include <functional>

#include "ovl/kernels.hpp"

namespace ovl {

enum class IntraMode : uint8_t { DC = 0, PLANAR = 1, HOR = 2, VER = 3 };
constexpr int kMaxCuSize = 128;

struct IntraRefs {
    std::array<Sample, kMaxCuSize + 1> top;
    std::array<Sample, kMaxCuSize + 1> left;
};

// Morton index of an 8x8 block inside its CTU; quadtree leaves are visited
// in increasing z order, so "decoded before the current CU" is a plain
// z-index comparison.
constexpr uint32_t morton2(uint32_t bx, uint32_t by) {
    uint32_t z = 0;
    for (int i = 0; i < 5; ++i)
        z |= ((bx >> i) & 1u) << (2 * i) | ((by >> i) & 1u) << (2 * i + 1);
    return z;
}

// Availability of a reference sample, in luma coordinates.
struct IntraAvailability {
    int frame_w = 0, frame_h = 0;
    int ctu_x0 = 0, ctu_y0 = 0, ctu_x1 = 0, ctu_y1 = 0;
    uint32_t cu_z = 0;

    bool operator()(int lx, int ly) const {
        if (lx < 0 || ly < 0 || lx >= frame_w || ly >= frame_h) return false;
        if (ly < ctu_y0) return true;
        if (ly >= ctu_y1) return false;
        if (lx < ctu_x0) return true;
        if (lx >= ctu_x1) return false;
        return morton2(uint32_t(lx - ctu_x0) >> 3, uint32_t(ly - ctu_y0) >> 3) < cu_z;
    }
};

// Gathers the top/left reference arrays for one CU from `view` (a callable
// (px, py) -> Sample over decoded samples). Unavailable samples are
// substituted from the nearest available one walking bottom-left to
// top-right; a fully unavailable set becomes mid-gray.
template <typename View>
IntraRefs gather_intra_refs(View&& view, const IntraAvailability& avail, int plane_shift,
                            int x0, int y0, int size, int ref_line, int bit_depth) {
    IntraRefs refs;
    const int n = size + 1;
    const int tx = x0, ty = y0 - 1 - ref_line;
    const int lx = x0 - 1 - ref_line, ly = y0;

    // combined walk: left[size..0], then top[0..size]
    std::array<Sample, 2 * (kMaxCuSize + 1)> vals;
    std::array<bool, 2 * (kMaxCuSize + 1)> ok;
    for (int i = 0; i < n; ++i) {
        int py = ly + size - i;
        ok[size_t(i)] = avail(lx << plane_shift, py << plane_shift);
        vals[size_t(i)] = ok[size_t(i)] ? view(lx, py) : 0;
    }
    for (int i = 0; i < n; ++i) {
        int px = tx + i;
        ok[size_t(n + i)] = avail(px << plane_shift, ty << plane_shift);
        vals[size_t(n + i)] = ok[size_t(n + i)] ? view(px, ty) : 0;
    }

    int total = 2 * n;
    int first_ok = -1;
    for (int i = 0; i < total && first_ok < 0; ++i)
        if (ok[size_t(i)]) first_ok = i;
    if (first_ok < 0) {
        Sample mid = Sample(1u << (bit_depth - 1));
        for (int i = 0; i < total; ++i) vals[size_t(i)] = mid;
    } else {
        for (int i = first_ok - 1; i >= 0; --i) vals[size_t(i)] = vals[size_t(i) + 1];
        for (int i = first_ok + 1; i < total; ++i)
            if (!ok[size_t(i)]) vals[size_t(i)] = vals[size_t(i) - 1];
    }

    // the walk stores left[] bottom-up: vals[i] is row y0 + size - i
    for (int i = 0; i < n; ++i) {
        refs.left[size_t(size - i)] = vals[size_t(i)];
        refs.top[size_t(i)] = vals[size_t(n + i)];
    }
    return refs;
}

void predict_intra(const KernelTable& kernels, IntraMode mode, const IntraRefs& refs,
                   Sample* dst, ptrdiff_t stride, int size);

} // namespace ovl
