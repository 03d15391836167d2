#pragma once

#include <functional>
#include <span>

#include "ovl/frame_decode.hpp"
#include "ovl/y4m.hpp"

namespace ovl {

struct DecoderOptions {
    int threads = 1;
    KernelRequest kernels = KernelRequest::Auto;
    int64_t watchdog_ms = 0; // 0 disables
    TraceSink* trace = nullptr;
    FrameObserver* observer = nullptr; // progress hook, serialized per thread
};

// Receives decoded frames on the main thread, in POC order. The picture is
// only valid for the duration of the call.
using FrameSink = std::function<void(uint32_t poc, const PictureBuffer& pic)>;

struct DecodeStats {
    uint64_t frames = 0;
    size_t dpb_max_entries = 0;
    size_t picture_allocations = 0;
    size_t mv_allocations = 0;
    ImplLevel kernel_level = ImplLevel::Scalar;
    std::vector<MemoryAccounting::Row> memory;
    size_t peak_bytes_total = 0;
};

// Frame-parallel decode: the main thread parses headers, starts DPB entries
// and hands FrameJobs to the first idle decoding thread; decoding threads
// report per-CTU-line availability for cross-frame MC. Output is
// bit-identical for every thread count.
DecodeStats run_decode(std::span<const uint8_t> stream, const DecoderOptions& options,
                       const FrameSink& sink);

void picture_to_raw(const PictureBuffer& pic, RawFrame& frame);

} // namespace ovl
