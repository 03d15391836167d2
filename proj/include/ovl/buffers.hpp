#pragma once

#include <array>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "ovl/common.hpp"

namespace ovl {

enum class MemCategory : int {
    Picture = 0,
    Mv,
    MvRefIdx,
    LocalContext,
    GlobalContext,
    Count,
};

const char* mem_category_name(MemCategory c);

// Byte accounting per category. Tracks the high-watermark of allocated
// bytes; pooled buffers are recycled, never freed, so the watermark mirrors
// what an RSS measurement would see.
class MemoryAccounting {
public:
    void add(MemCategory cat, size_t bytes);
    void remove(MemCategory cat, size_t bytes);

    size_t peak_bytes(MemCategory cat) const;
    size_t allocations(MemCategory cat) const;
    size_t total_peak_bytes() const;

    struct Row {
        const char* category;
        size_t peak_bytes;
        size_t allocations;
    };
    std::vector<Row> report() const;

private:
    struct Slot {
        std::atomic<size_t> current{0};
        std::atomic<size_t> peak{0};
        std::atomic<size_t> allocations{0};
    };
    std::array<Slot, size_t(MemCategory::Count)> m_slots;
};

constexpr int kPicturePadLuma = 16;
constexpr int kPicturePadChroma = 8;

// Padded planar 4:2:0 frame storage. plane 0 is luma, 1/2 chroma. The pad
// holds edge-replicated samples for motion compensation beyond the frame.
class PictureBuffer {
public:
    PictureBuffer(int width, int height, MemoryAccounting* acct);
    ~PictureBuffer();

    PictureBuffer(const PictureBuffer&) = delete;
    PictureBuffer& operator=(const PictureBuffer&) = delete;

    int width(int plane = 0) const { return plane ? m_width / 2 : m_width; }
    int height(int plane = 0) const { return plane ? m_height / 2 : m_height; }
    int stride(int plane = 0) const { return plane ? m_stride / 2 : m_stride; }
    int pad(int plane = 0) const { return plane ? kPicturePadChroma : kPicturePadLuma; }

    // Pointer to sample (0,0) of the plane; negative coordinates index the pad.
    Sample* plane(int p) { return m_origin[p]; }
    const Sample* plane(int p) const { return m_origin[p]; }

    Sample& at(int p, int x, int y) { return m_origin[p][ptrdiff_t(y) * stride(p) + x]; }
    Sample at(int p, int x, int y) const { return m_origin[p][ptrdiff_t(y) * stride(p) + x]; }

    // Edge-replicates the pad for rows [row0, row1) of the luma plane (and
    // the corresponding chroma rows), including the top/bottom pad when the
    // range touches the frame edges.
    void replicate_pad_rows(int row0, int row1);

    uint64_t generation() const { return m_generation; }
    void set_generation(uint64_t g) { m_generation = g; }

    static size_t total_bytes(int width, int height);

private:
    int m_width, m_height, m_stride, m_padded_height;
    uint64_t m_generation = 0;
    std::vector<Sample> m_storage;
    Sample* m_origin[3];
    MemoryAccounting* m_acct;
};

// One motion vector per 8x8 luma block, quarter-pel units, plus a parallel
// reference-index byte per block (kept out of the 4-byte MV footprint).
class MotionField {
public:
    MotionField(int width, int height, MemoryAccounting* acct);
    ~MotionField();

    MotionField(const MotionField&) = delete;
    MotionField& operator=(const MotionField&) = delete;

    int cols() const { return m_cols; }
    int rows() const { return m_rows; }

    void set(int bx, int by, int16_t mv_x, int16_t mv_y, int8_t ref_idx) {
        size_t i = size_t(by) * m_cols + bx;
        m_mv[2 * i] = mv_x;
        m_mv[2 * i + 1] = mv_y;
        m_ref_idx[i] = ref_idx;
    }
    void clear();

    uint64_t generation() const { return m_generation; }
    void set_generation(uint64_t g) { m_generation = g; }

    static size_t payload_bytes(int width, int height) {
        return size_t(ceil_div(width, 8)) * ceil_div(height, 8) * 4;
    }

private:
    int m_cols, m_rows;
    uint64_t m_generation = 0;
    std::vector<int16_t> m_mv;
    std::vector<int8_t> m_ref_idx;
    MemoryAccounting* m_acct;
};

// Free-list pool of fixed-geometry buffers; acquire allocates only when the
// free list is empty, released buffers are recycled.
template <typename Buffer>
class BufferPool {
public:
    template <typename Factory>
    explicit BufferPool(Factory factory) : m_factory(std::move(factory)) {}

    std::unique_ptr<Buffer> acquire() {
        {
            std::lock_guard lock(m_mutex);
            if (!m_free.empty()) {
                auto b = std::move(m_free.back());
                m_free.pop_back();
                ++m_outstanding;
                return b;
            }
        }
        std::unique_ptr<Buffer> b;
        try {
            b = m_factory();
        } catch (const std::bad_alloc&) {
            fail(ErrorCode::OutOfMemory, "pool allocation failed");
        }
        std::lock_guard lock(m_mutex);
        b->set_generation(++m_allocations);
        ++m_outstanding;
        if (m_outstanding > m_high_watermark) m_high_watermark = m_outstanding;
        return b;
    }

    void release(std::unique_ptr<Buffer> b) {
        std::lock_guard lock(m_mutex);
        --m_outstanding;
        m_free.push_back(std::move(b));
    }

    size_t allocations() const {
        std::lock_guard lock(m_mutex);
        return m_allocations;
    }
    size_t outstanding() const {
        std::lock_guard lock(m_mutex);
        return m_outstanding;
    }
    size_t free_count() const {
        std::lock_guard lock(m_mutex);
        return m_free.size();
    }
    size_t high_watermark() const {
        std::lock_guard lock(m_mutex);
        return m_high_watermark;
    }

private:
    std::function<std::unique_ptr<Buffer>()> m_factory;
    mutable std::mutex m_mutex;
    std::vector<std::unique_ptr<Buffer>> m_free;
    size_t m_allocations = 0;
    size_t m_outstanding = 0;
    size_t m_high_watermark = 0;
};

using PicturePool = BufferPool<PictureBuffer>;
using MvPool = BufferPool<MotionField>;

// Per-frame counter of fully loop-filtered CTU lines; the synchronization
// point for cross-frame MC reads. Lines are reported monotonically; -1
// means nothing is final yet.
class AvailabilityMonitor {
public:
    void reset(int total_lines);

    // Called by the owning decode thread after the last in-loop filter ran
    // on the line. Release-publishes the line and wakes waiters.
    void report_line(int line);

    // Marks the frame failed; waiters observe a broken reference.
    void mark_failed();

    int last_final_line() const { return m_line.load(std::memory_order_acquire); }
    bool failed() const { return m_failed.load(std::memory_order_acquire); }
    int total_lines() const { return m_total_lines; }

    // Blocks until `line` is final. Throws BrokenReference if the frame
    // failed, WatchdogTimeout after watchdog_ms (0 disables).
    void wait_for_line(int line, int64_t watchdog_ms, uint32_t poc) const;

private:
    std::atomic<int> m_line{-1};
    std::atomic<bool> m_failed{false};
    int m_total_lines = 0;
    mutable std::mutex m_mutex;
    mutable std::condition_variable m_cv;
};

enum class FrameState { Decoding, Decoded, Failed };

struct DpbEntry {
    uint32_t poc = 0;
    std::unique_ptr<PictureBuffer> picture;
    std::unique_ptr<MotionField> motion;
    std::atomic<int> ref_counter{0};
    FrameState state = FrameState::Decoding;
    AvailabilityMonitor availability;
    bool needed_for_output = true;
    bool output_done = false;
    std::vector<DpbEntry*> refs; // resolved reference entries
};

// Decoded picture buffer with reference counting, min-POC eviction of
// zero-ref already-output entries, and a POC-order output gate.
class Dpb {
public:
    Dpb(PicturePool& pictures, MvPool& motion) : m_pictures(pictures), m_motion(motion) {}

    DpbEntry* start_frame(uint32_t poc, const std::vector<uint32_t>& ref_pocs);

    // Transitions the entry to Decoded, decrements its references and runs
    // eviction. Throws InternalState on double finish / unknown poc.
    void finish_frame(uint32_t poc);

    // Marks a frame failed so dependent frames surface broken-reference.
    void fail_frame(uint32_t poc);

    std::vector<uint32_t> evict(int dpb_max_nb_pic);

    // Pops the next frame in POC order if it is decoded, for emission on
    // the output thread. Marks it output; caller copies samples before the
    // next eviction may recycle the buffer.
    DpbEntry* next_output();
    void mark_output_done(uint32_t poc);

    size_t entry_count() const;
    size_t max_entry_count() const;
    DpbEntry* find(uint32_t poc);
    uint32_t next_output_poc() const;
    bool any_failed() const;

private:
    std::vector<uint32_t> evict_locked(int dpb_max_nb_pic);

    PicturePool& m_pictures;
    MvPool& m_motion;
    mutable std::mutex m_mutex;
    std::vector<std::unique_ptr<DpbEntry>> m_entries;
    uint32_t m_next_output_poc = 0;
    size_t m_max_entries = 0;
    bool m_any_failed = false;
};

} // namespace ovl
