#include "ovl/trace.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "ovl/common.hpp"

namespace ovl {

const char* trace_event_name(TraceEvent e) {
    switch (e) {
        case TraceEvent::JobStart: return "job_start";
        case TraceEvent::LineAvail: return "line_avail";
        case TraceEvent::WaitBegin: return "wait_begin";
        case TraceEvent::WaitEnd: return "wait_end";
        case TraceEvent::JobEnd: return "job_end";
    }
    return "?";
}

void TraceSink::record(int thread, TraceEvent event, uint32_t poc, int line) {
    auto now = uint64_t(std::chrono::duration_cast<std::chrono::nanoseconds>(
                            std::chrono::steady_clock::now().time_since_epoch())
                            .count());
    std::lock_guard lock(m_mutex);
    m_records.push_back({now, thread, event, poc, line});
}

std::vector<TraceRecord> TraceSink::sorted() const {
    std::lock_guard lock(m_mutex);
    auto out = m_records;
    std::sort(out.begin(), out.end(),
              [](const TraceRecord& a, const TraceRecord& b) {
                  return a.timestamp_ns < b.timestamp_ns;
              });
    return out;
}

void TraceSink::write_csv(const std::string& path) const {
    std::ofstream out(path);
    check(out.good(), ErrorCode::Io, "cannot open " + path);
    out << "timestamp_ns,thread,event,poc,line\n";
    for (const auto& r : sorted())
        out << r.timestamp_ns << ',' << r.thread << ',' << trace_event_name(r.event) << ','
            << r.poc << ',' << r.line << '\n';
}

} // namespace ovl
