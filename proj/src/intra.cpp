#include "ovl/intra.hpp"

namespace ovl {

void predict_intra(const KernelTable& kernels, IntraMode mode, const IntraRefs& refs,
                   Sample* dst, ptrdiff_t stride, int size) {
    switch (mode) {
        case IntraMode::DC:
            kernels.intra_dc(dst, stride, size, refs.top.data(), refs.left.data());
            break;
        case IntraMode::PLANAR:
            kernels.intra_planar(dst, stride, size, refs.top.data(), refs.left.data());
            break;
        case IntraMode::HOR:
            for (int y = 0; y < size; ++y) {
                Sample v = refs.left[size_t(y)];
                for (int x = 0; x < size; ++x) dst[y * stride + x] = v;
            }
            break;
        case IntraMode::VER:
            for (int y = 0; y < size; ++y)
                for (int x = 0; x < size; ++x) dst[y * stride + x] = refs.top[size_t(x)];
            break;
    }
}

} // namespace ovl
