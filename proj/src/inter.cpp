#include "ovl/inter.hpp"

#include <vector>

namespace ovl {

void mc_predict(const KernelTable& kernels, const PictureBuffer& ref, int plane, int x,
                int y, int w, int h, MotionVector mv, Sample* dst, ptrdiff_t dst_stride,
                int bit_depth) {
    const bool chroma = plane > 0;
    const int frac_bits = chroma ? 3 : 2;
    const int frac_mask = (1 << frac_bits) - 1;
    const int center = chroma ? 1 : 3;
    const int taps = chroma ? 4 : 8;

    int ix = x + (mv.x >> frac_bits);
    int iy = y + (mv.y >> frac_bits);
    int fx = mv.x & frac_mask;
    int fy = mv.y & frac_mask;
    int route = (fy != 0) * 2 + (fx != 0);
    McFn fn = chroma ? kernels.mc_chroma[route] : kernels.mc_luma[route];

    const int W = ref.width(plane), H = ref.height(plane), pad = ref.pad(plane);
    // support window actually read by the kernel
    int rx0 = ix - (fx ? center : 0), rx1 = ix + w + (fx ? taps - 1 - center : 0);
    int ry0 = iy - (fy ? center : 0), ry1 = iy + h + (fy ? taps - 1 - center : 0);

    if (rx0 >= -pad && ry0 >= -pad && rx1 <= W - 1 + pad && ry1 <= H - 1 + pad) {
        const Sample* src = ref.plane(plane) + ptrdiff_t(iy) * ref.stride(plane) + ix;
        fn(src, ref.stride(plane), dst, dst_stride, w, h, fx, fy, bit_depth);
        return;
    }

    // Slow path for motion beyond the pad: gather a clamped window first.
    int gw = w + taps, gh = h + taps;
    std::vector<Sample> win(size_t(gw) * gh);
    for (int j = 0; j < gh; ++j) {
        int sy = clip3(0, H - 1, iy + j - center);
        const Sample* srow = ref.plane(plane) + ptrdiff_t(sy) * ref.stride(plane);
        for (int i = 0; i < gw; ++i) win[size_t(j) * gw + i] = srow[clip3(0, W - 1, ix + i - center)];
    }
    fn(win.data() + ptrdiff_t(center) * gw + center, gw, dst, dst_stride, w, h, fx, fy,
       bit_depth);
}

} // namespace ovl
