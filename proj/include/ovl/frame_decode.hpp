#pragma once

#include <functional>
#include <span>

#include "ovl/buffers.hpp"
#include "ovl/container.hpp"
#include "ovl/filters.hpp"
#include "ovl/local_context.hpp"
#include "ovl/trace.hpp"

namespace ovl {

struct FilterSchedule {
    int last_dbf_ctu = -1; // raster index of the last CTU deblocked
    int last_sao_line = -1;
    int last_alf_line = -1;
};

// Progress hook; may be invoked concurrently from decoding threads.
class FrameObserver {
public:
    virtual ~FrameObserver() = default;
    virtual void on_progress(uint32_t /*poc*/, const FilterSchedule&) {}
};

// One frame's decode job: headers parsed by the main thread, payload spans
// into the stream buffer, reference entries resolved in the DPB.
struct FrameJob {
    FrameHeader header;
    std::vector<std::span<const uint8_t>> payloads;
    DpbEntry* target = nullptr;
    std::vector<DpbEntry*> refs;
};

struct FrameDecodeParams {
    const SequenceHeader* seq = nullptr;
    const KernelTable* kernels = nullptr;
    int64_t watchdog_ms = 0;
    TraceSink* trace = nullptr;
    int thread_id = 0;
    FrameObserver* observer = nullptr;
};

// Decodes all CTU rows of the frame with the staged in-loop filters,
// reporting CTU-line availability as each line becomes final. Does not
// touch the DPB bookkeeping; the caller finishes the frame.
void decode_frame_body(const FrameDecodeParams& params, const FrameJob& job,
                       LocalContext& ctx);

} // namespace ovl
