#include "ovl/pipeline.hpp"

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <thread>

#include "ovl/profile.hpp"

namespace ovl {

void picture_to_raw(const PictureBuffer& pic, RawFrame& frame) {
    const std::vector<Sample>* planes[3] = {&frame.y, &frame.u, &frame.v};
    for (int p = 0; p < 3; ++p) {
        auto& dst = const_cast<std::vector<Sample>&>(*planes[p]);
        dst.resize(size_t(pic.width(p)) * pic.height(p));
        for (int y = 0; y < pic.height(p); ++y) {
            const Sample* row = pic.plane(p) + ptrdiff_t(y) * pic.stride(p);
            std::copy(row, row + pic.width(p), dst.begin() + ptrdiff_t(y) * pic.width(p));
        }
    }
}

namespace {

struct FirstError {
    bool set = false;
    ErrorCode code = ErrorCode::InternalState;
    std::string message;
    int64_t poc = -1;
};

struct WorkerSlot {
    std::mutex mutex;
    std::condition_variable cv;
    std::optional<FrameJob> job;
    bool stop = false;
};

class DecodePipeline {
public:
    DecodePipeline(const SequenceHeader& seq, const DecoderOptions& opts)
        : m_seq(seq), m_opts(opts), m_kernels(&select_impl(opts.kernels)),
          m_pictures([&] {
              return std::make_unique<PictureBuffer>(int(seq.width), int(seq.height),
                                                     &m_acct);
          }),
          m_motion([&] {
              return std::make_unique<MotionField>(int(seq.width), int(seq.height),
                                                   &m_acct);
          }),
          m_dpb(m_pictures, m_motion) {
        m_acct.add(MemCategory::GlobalContext,
                   sizeof(*this) + sizeof(SequenceHeader) +
                       size_t(seq.ctu_count()) * sizeof(SaoCtuParams));
        m_slots.resize(size_t(opts.threads));
        for (auto& s : m_slots) s = std::make_unique<WorkerSlot>();
        for (int i = 0; i < opts.threads; ++i) {
            m_idle.push_back(i);
            m_threads.emplace_back([this, i] { worker_main(i); });
        }
    }

    ~DecodePipeline() {
        for (auto& s : m_slots) {
            std::lock_guard lock(s->mutex);
            s->stop = true;
            s->cv.notify_all();
        }
        for (auto& t : m_threads) t.join();
    }

    DecodeStats run(StreamParser& parser, const FrameSink& sink);

private:
    void worker_main(int id);
    void emit_ready_outputs(const FrameSink& sink);
    void record_error(int64_t poc, const Error& e);
    int acquire_worker(const FrameSink& sink, int64_t poc);

    const SequenceHeader& m_seq;
    const DecoderOptions& m_opts;
    const KernelTable* m_kernels;
    MemoryAccounting m_acct;
    PicturePool m_pictures;
    MvPool m_motion;
    Dpb m_dpb;

    std::vector<std::unique_ptr<WorkerSlot>> m_slots;
    std::vector<std::thread> m_threads;

    std::mutex m_mutex;
    std::condition_variable m_cv;
    std::vector<int> m_idle;
    int m_busy = 0;
    FirstError m_error;
    uint64_t m_frames_done = 0;
};

void DecodePipeline::record_error(int64_t poc, const Error& e) {
    std::lock_guard lock(m_mutex);
    if (!m_error.set) {
        m_error.set = true;
        m_error.code = e.code();
        m_error.message = e.what();
        m_error.poc = e.poc() >= 0 ? e.poc() : poc;
    }
}

void DecodePipeline::worker_main(int id) {
    WorkerSlot& slot = *m_slots[size_t(id)];
    LocalContext ctx(int(m_seq.width), int(m_seq.height), m_seq.ctu_size, &m_acct);

    while (true) {
        FrameJob job;
        {
            std::unique_lock lock(slot.mutex);
            slot.cv.wait(lock, [&] { return slot.stop || slot.job.has_value(); });
            if (slot.stop && !slot.job.has_value()) return;
            job = std::move(*slot.job);
            slot.job.reset();
        }

        uint32_t poc = job.header.poc;
        if (m_opts.trace) m_opts.trace->record(id, TraceEvent::JobStart, poc, -1);
        try {
            FrameDecodeParams params;
            params.seq = &m_seq;
            params.kernels = m_kernels;
            params.watchdog_ms = m_opts.watchdog_ms;
            params.trace = m_opts.trace;
            params.thread_id = id;
            params.observer = m_opts.observer;
            decode_frame_body(params, job, ctx);
            m_dpb.finish_frame(poc);
            m_dpb.evict(m_seq.dpb_max_nb_pic);
        } catch (const Error& e) {
            record_error(poc, e);
            m_dpb.fail_frame(poc);
        } catch (const std::exception& e) {
            record_error(poc, Error(ErrorCode::InternalState, e.what(), poc));
            m_dpb.fail_frame(poc);
        }
        if (m_opts.trace) m_opts.trace->record(id, TraceEvent::JobEnd, poc, -1);

        {
            std::lock_guard lock(m_mutex);
            m_idle.push_back(id);
            --m_busy;
            ++m_frames_done;
        }
        m_cv.notify_all();
    }
}

void DecodePipeline::emit_ready_outputs(const FrameSink& sink) {
    while (DpbEntry* e = m_dpb.next_output()) {
        if (sink) sink(e->poc, *e->picture);
        m_dpb.mark_output_done(e->poc);
        m_dpb.evict(m_seq.dpb_max_nb_pic);
    }
}

// Waits until an idle worker exists and the DPB has room for one more
// entry, emitting ready outputs between wakes. Returns -1 on error/stall.
int DecodePipeline::acquire_worker(const FrameSink& sink, int64_t poc) {
    const size_t entry_gate = size_t(m_seq.dpb_max_nb_pic) + size_t(m_opts.threads);
    const auto wait_start = std::chrono::steady_clock::now();
    while (true) {
        emit_ready_outputs(sink);
        std::unique_lock lock(m_mutex);
        if (m_error.set) return -1;
        if (!m_idle.empty() && m_dpb.entry_count() < entry_gate) {
            int worker = m_idle.back();
            m_idle.pop_back();
            ++m_busy;
            return worker;
        }
        m_cv.wait_for(lock, std::chrono::milliseconds(5));
        if (m_opts.watchdog_ms > 0 &&
            std::chrono::steady_clock::now() - wait_start >
                std::chrono::milliseconds(m_opts.watchdog_ms)) {
            m_error = {true, ErrorCode::WatchdogTimeout, "pipeline stalled", poc};
            return -1;
        }
    }
}

DecodeStats DecodePipeline::run(StreamParser& parser, const FrameSink& sink) {
    while (true) {
        std::optional<StreamParser::ParsedFrame> frame;
        try {
            frame = parser.next_frame();
        } catch (const Error& e) {
            record_error(-1, e);
            break;
        }
        if (!frame) break;

        int worker = acquire_worker(sink, int64_t(frame->header.poc));
        if (worker < 0) break;

        FrameJob job;
        job.header = std::move(frame->header);
        job.payloads = std::move(frame->payloads);
        try {
            job.target = m_dpb.start_frame(job.header.poc, job.header.ref_pocs);
        } catch (const Error& e) {
            record_error(job.header.poc, e);
            std::lock_guard lock(m_mutex);
            m_idle.push_back(worker);
            --m_busy;
            break;
        }
        job.target->availability.reset(m_seq.ctu_rows());
        job.refs = job.target->refs;

        WorkerSlot& slot = *m_slots[size_t(worker)];
        {
            std::lock_guard lock(slot.mutex);
            slot.job = std::move(job);
        }
        slot.cv.notify_all();

        emit_ready_outputs(sink);
    }

    // drain in-flight frames
    while (true) {
        emit_ready_outputs(sink);
        std::unique_lock lock(m_mutex);
        if (m_busy == 0) break;
        m_cv.wait_for(lock, std::chrono::milliseconds(5));
    }
    emit_ready_outputs(sink);

    if (m_error.set) throw Error(m_error.code, m_error.message, m_error.poc);

    DecodeStats stats;
    stats.frames = m_frames_done;
    stats.dpb_max_entries = m_dpb.max_entry_count();
    stats.picture_allocations = m_pictures.allocations();
    stats.mv_allocations = m_motion.allocations();
    stats.kernel_level = m_kernels->level;
    stats.memory = m_acct.report();
    stats.peak_bytes_total = m_acct.total_peak_bytes();
    return stats;
}

} // namespace

DecodeStats run_decode(std::span<const uint8_t> stream, const DecoderOptions& options,
                       const FrameSink& sink) {
    check(options.threads >= 1, ErrorCode::InternalState, "thread count must be >= 1");
    StreamParser parser(stream);
    DecodePipeline pipeline(parser.sequence_header(), options);
    return pipeline.run(parser, sink);
}

} // namespace ovl
