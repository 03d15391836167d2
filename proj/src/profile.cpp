#include "ovl/profile.hpp"

#include <chrono>
#include <mutex>

namespace ovl {

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::Entropy: return "entropy";
        case Stage::Intra: return "intra";
        case Stage::Transform: return "transform";
        case Stage::Mc: return "mc";
        case Stage::Dbf: return "dbf";
        case Stage::Sao: return "sao";
        case Stage::Alf: return "alf";
        case Stage::BufferOps: return "buffer_ops";
        default: return "?";
    }
}

#if OVL_PROFILE

namespace prof {

namespace {
std::mutex g_mutex;
StageTotals g_totals;
} // namespace

ThreadStages& thread_stages() {
    thread_local ThreadStages stages;
    return stages;
}

void flush_thread_stages() {
    ThreadStages& t = thread_stages();
    std::lock_guard lock(g_mutex);
    for (size_t i = 0; i < t.ns.size(); ++i) {
        g_totals.ns[i] += t.ns[i];
        t.ns[i] = 0;
    }
}

StageTotals collect() {
    flush_thread_stages();
    std::lock_guard lock(g_mutex);
    return g_totals;
}

void reset() {
    std::lock_guard lock(g_mutex);
    g_totals = StageTotals{};
}

uint64_t now_ns() {
    return uint64_t(std::chrono::duration_cast<std::chrono::nanoseconds>(
                        std::chrono::steady_clock::now().time_since_epoch())
                        .count());
}

} // namespace prof

#endif

} // namespace ovl
