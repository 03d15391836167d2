#include "ovl/buffers.hpp"

#include <algorithm>
#include <chrono>

namespace ovl {

const char* mem_category_name(MemCategory c) {
    switch (c) {
        case MemCategory::Picture: return "picture";
        case MemCategory::Mv: return "mv";
        case MemCategory::MvRefIdx: return "mv_refidx";
        case MemCategory::LocalContext: return "local_context";
        case MemCategory::GlobalContext: return "global_context";
        default: return "?";
    }
}

void MemoryAccounting::add(MemCategory cat, size_t bytes) {
    Slot& s = m_slots[size_t(cat)];
    size_t cur = s.current.fetch_add(bytes) + bytes;
    size_t peak = s.peak.load();
    while (cur > peak && !s.peak.compare_exchange_weak(peak, cur)) {
    }
    s.allocations.fetch_add(1);
}

void MemoryAccounting::remove(MemCategory cat, size_t bytes) {
    m_slots[size_t(cat)].current.fetch_sub(bytes);
}

size_t MemoryAccounting::peak_bytes(MemCategory cat) const {
    return m_slots[size_t(cat)].peak.load();
}

size_t MemoryAccounting::allocations(MemCategory cat) const {
    return m_slots[size_t(cat)].allocations.load();
}

size_t MemoryAccounting::total_peak_bytes() const {
    size_t t = 0;
    for (const Slot& s : m_slots) t += s.peak.load();
    return t;
}

std::vector<MemoryAccounting::Row> MemoryAccounting::report() const {
    std::vector<Row> rows;
    for (size_t i = 0; i < m_slots.size(); ++i)
        rows.push_back({mem_category_name(MemCategory(i)), m_slots[i].peak.load(),
                        m_slots[i].allocations.load()});
    return rows;
}

size_t PictureBuffer::total_bytes(int width, int height) {
    size_t stride = size_t(width) + 2 * kPicturePadLuma;
    size_t padded_h = size_t(height) + 2 * kPicturePadLuma;
    return 2 * (stride * padded_h + 2 * (stride / 2) * (padded_h / 2));
}

PictureBuffer::PictureBuffer(int width, int height, MemoryAccounting* acct)
    : m_width(width), m_height(height), m_stride(width + 2 * kPicturePadLuma),
      m_padded_height(height + 2 * kPicturePadLuma), m_acct(acct) {
    size_t luma = size_t(m_stride) * m_padded_height;
    size_t chroma = size_t(m_stride / 2) * (m_padded_height / 2);
    m_storage.resize(luma + 2 * chroma);
    m_origin[0] = m_storage.data() + ptrdiff_t(kPicturePadLuma) * m_stride + kPicturePadLuma;
    m_origin[1] = m_storage.data() + luma + ptrdiff_t(kPicturePadChroma) * (m_stride / 2) +
                  kPicturePadChroma;
    m_origin[2] = m_origin[1] + chroma;
    if (m_acct) m_acct->add(MemCategory::Picture, m_storage.size() * sizeof(Sample));
}

PictureBuffer::~PictureBuffer() {
    if (m_acct) m_acct->remove(MemCategory::Picture, m_storage.size() * sizeof(Sample));
}

void PictureBuffer::replicate_pad_rows(int row0, int row1) {
    for (int p = 0; p < 3; ++p) {
        int shift = p ? 1 : 0;
        int w = width(p), h = height(p), s = stride(p), pd = pad(p);
        int r0 = row0 >> shift;
        int r1 = std::min((row1 + (1 << shift) - 1) >> shift, h);
        for (int y = r0; y < r1; ++y) {
            Sample* row = plane(p) + ptrdiff_t(y) * s;
            std::fill(row - pd, row, row[0]);
            std::fill(row + w, row + w + pd, row[w - 1]);
        }
        if (r0 == 0) {
            const Sample* top = plane(p) - pd;
            for (int y = 1; y <= pd; ++y)
                std::copy(top, top + s, plane(p) - ptrdiff_t(y) * s - pd);
        }
        if (r1 == h) {
            const Sample* bottom = plane(p) + ptrdiff_t(h - 1) * s - pd;
            for (int y = 0; y < pd; ++y)
                std::copy(bottom, bottom + s, plane(p) + ptrdiff_t(h + y) * s - pd);
        }
    }
}

MotionField::MotionField(int width, int height, MemoryAccounting* acct)
    : m_cols(ceil_div(width, 8)), m_rows(ceil_div(height, 8)), m_acct(acct) {
    m_mv.resize(size_t(m_cols) * m_rows * 2);
    m_ref_idx.resize(size_t(m_cols) * m_rows, -1);
    if (m_acct) {
        m_acct->add(MemCategory::Mv, m_mv.size() * sizeof(int16_t));
        m_acct->add(MemCategory::MvRefIdx, m_ref_idx.size());
    }
}

MotionField::~MotionField() {
    if (m_acct) {
        m_acct->remove(MemCategory::Mv, m_mv.size() * sizeof(int16_t));
        m_acct->remove(MemCategory::MvRefIdx, m_ref_idx.size());
    }
}

void MotionField::clear() {
    std::fill(m_mv.begin(), m_mv.end(), int16_t(0));
    std::fill(m_ref_idx.begin(), m_ref_idx.end(), int8_t(-1));
}

void AvailabilityMonitor::reset(int total_lines) {
    std::lock_guard lock(m_mutex);
    m_line.store(-1, std::memory_order_release);
    m_failed.store(false, std::memory_order_release);
    m_total_lines = total_lines;
}

void AvailabilityMonitor::report_line(int line) {
    int prev = m_line.load(std::memory_order_relaxed);
    check(line == prev + 1, ErrorCode::InternalState, "non-monotone availability report");
    {
        std::lock_guard lock(m_mutex);
        m_line.store(line, std::memory_order_release);
    }
    m_cv.notify_all();
}

void AvailabilityMonitor::mark_failed() {
    {
        std::lock_guard lock(m_mutex);
        m_failed.store(true, std::memory_order_release);
    }
    m_cv.notify_all();
}

void AvailabilityMonitor::wait_for_line(int line, int64_t watchdog_ms, uint32_t poc) const {
    if (m_line.load(std::memory_order_acquire) >= line) return;
    if (m_failed.load(std::memory_order_acquire))
        fail(ErrorCode::BrokenReference, "reference frame failed", poc);

    std::unique_lock lock(m_mutex);
    auto ready = [&] {
        return m_line.load(std::memory_order_acquire) >= line ||
               m_failed.load(std::memory_order_acquire);
    };
    if (watchdog_ms > 0) {
        if (!m_cv.wait_for(lock, std::chrono::milliseconds(watchdog_ms), ready))
            fail(ErrorCode::WatchdogTimeout, "stalled waiting for reference line", poc);
    } else {
        m_cv.wait(lock, ready);
    }
    if (m_failed.load(std::memory_order_acquire))
        fail(ErrorCode::BrokenReference, "reference frame failed", poc);
}

DpbEntry* Dpb::start_frame(uint32_t poc, const std::vector<uint32_t>& ref_pocs) {
    std::lock_guard lock(m_mutex);
    auto entry = std::make_unique<DpbEntry>();
    entry->poc = poc;
    for (uint32_t r : ref_pocs) {
        DpbEntry* ref = nullptr;
        for (auto& e : m_entries)
            if (e->poc == r && e->state != FrameState::Failed) ref = e.get();
        check(ref != nullptr, ErrorCode::BrokenReference,
              "reference poc " + std::to_string(r) + " not in DPB", poc);
        entry->refs.push_back(ref);
    }
    entry->picture = m_pictures.acquire();
    entry->motion = m_motion.acquire();
    entry->motion->clear();
    for (DpbEntry* ref : entry->refs) ref->ref_counter.fetch_add(1);
    m_entries.push_back(std::move(entry));
    m_max_entries = std::max(m_max_entries, m_entries.size());
    return m_entries.back().get();
}

void Dpb::finish_frame(uint32_t poc) {
    std::lock_guard lock(m_mutex);
    DpbEntry* e = nullptr;
    for (auto& p : m_entries)
        if (p->poc == poc) e = p.get();
    check(e != nullptr, ErrorCode::InternalState, "finish of unknown poc", poc);
    check(e->state == FrameState::Decoding, ErrorCode::InternalState, "double finish", poc);
    e->state = FrameState::Decoded;
    for (DpbEntry* ref : e->refs) {
        int prev = ref->ref_counter.fetch_sub(1);
        check(prev > 0, ErrorCode::InternalState, "ref_counter underflow", ref->poc);
    }
}

void Dpb::fail_frame(uint32_t poc) {
    std::lock_guard lock(m_mutex);
    for (auto& p : m_entries) {
        if (p->poc == poc) {
            if (p->state == FrameState::Decoding)
                for (DpbEntry* ref : p->refs) ref->ref_counter.fetch_sub(1);
            p->state = FrameState::Failed;
            p->availability.mark_failed();
            m_any_failed = true;
        }
    }
}

std::vector<uint32_t> Dpb::evict_locked(int dpb_max_nb_pic) {
    std::vector<uint32_t> evicted;
    while (m_entries.size() > size_t(dpb_max_nb_pic)) {
        auto it = m_entries.end();
        for (auto i = m_entries.begin(); i != m_entries.end(); ++i) {
            DpbEntry& e = **i;
            if (e.ref_counter.load() != 0 || e.state == FrameState::Decoding) continue;
            if (e.needed_for_output && !e.output_done && e.state != FrameState::Failed)
                continue;
            if (it == m_entries.end() || e.poc < (*it)->poc) it = i;
        }
        if (it == m_entries.end()) break;
        evicted.push_back((*it)->poc);
        if ((*it)->picture) m_pictures.release(std::move((*it)->picture));
        if ((*it)->motion) m_motion.release(std::move((*it)->motion));
        m_entries.erase(it);
    }
    return evicted;
}

std::vector<uint32_t> Dpb::evict(int dpb_max_nb_pic) {
    std::lock_guard lock(m_mutex);
    return evict_locked(dpb_max_nb_pic);
}

DpbEntry* Dpb::next_output() {
    std::lock_guard lock(m_mutex);
    for (auto& e : m_entries) {
        if (e->poc == m_next_output_poc && e->state == FrameState::Decoded &&
            !e->output_done)
            return e.get();
    }
    return nullptr;
}

void Dpb::mark_output_done(uint32_t poc) {
    std::lock_guard lock(m_mutex);
    for (auto& e : m_entries) {
        if (e->poc == poc) {
            e->output_done = true;
            e->needed_for_output = false;
            ++m_next_output_poc;
        }
    }
}

size_t Dpb::entry_count() const {
    std::lock_guard lock(m_mutex);
    return m_entries.size();
}

size_t Dpb::max_entry_count() const {
    std::lock_guard lock(m_mutex);
    return m_max_entries;
}

DpbEntry* Dpb::find(uint32_t poc) {
    std::lock_guard lock(m_mutex);
    for (auto& e : m_entries)
        if (e->poc == poc) return e.get();
    return nullptr;
}

uint32_t Dpb::next_output_poc() const {
    std::lock_guard lock(m_mutex);
    return m_next_output_poc;
}

bool Dpb::any_failed() const {
    std::lock_guard lock(m_mutex);
    return m_any_failed;
}

} // namespace ovl
