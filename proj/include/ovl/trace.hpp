#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

namespace ovl {

enum class TraceEvent : uint8_t { JobStart, LineAvail, WaitBegin, WaitEnd, JobEnd };

const char* trace_event_name(TraceEvent e);

struct TraceRecord {
    uint64_t timestamp_ns;
    int thread;
    TraceEvent event;
    uint32_t poc;
    int line;
};

// Collects per-thread event streams; merged and sorted on demand.
class TraceSink {
public:
    void record(int thread, TraceEvent event, uint32_t poc, int line);
    std::vector<TraceRecord> sorted() const;
    void write_csv(const std::string& path) const;

private:
    mutable std::mutex m_mutex;
    std::vector<TraceRecord> m_records;
};

} // namespace ovl
