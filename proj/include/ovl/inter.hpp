#pragma once

#include "ovl/buffers.hpp"
#include "ovl/kernels.hpp"

namespace ovl {

constexpr int kMvClampQpel = 4 * 64; // +/-64 integer pels

struct MotionVector {
    int16_t x = 0, y = 0; // quarter-pel units

    MotionVector clamped() const {
        return {int16_t(clip3<int>(-kMvClampQpel, kMvClampQpel, x)),
                int16_t(clip3<int>(-kMvClampQpel, kMvClampQpel, y))};
    }
};

// Bottom-most luma row of the reference the 8-tap interpolation can read for
// a w x h block at (x, y); gates the cross-thread availability wait.
inline int mc_needed_bottom_row(int y, int h, MotionVector mv, int frame_h) {
    return clip3(0, frame_h - 1, y + h + (mv.y >> 2) + 4);
}

// Motion-compensated prediction of one block from `ref` into dst. mv is in
// quarter-pel luma units for plane 0 and reinterpreted as eighth-pel on the
// half-resolution grid for chroma planes. Source reads beyond the padded
// extent are coordinate-clamped, which matches edge replication.
void mc_predict(const KernelTable& kernels, const PictureBuffer& ref, int plane, int x,
                int y, int w, int h, MotionVector mv, Sample* dst, ptrdiff_t dst_stride,
                int bit_depth);

} // namespace ovl
