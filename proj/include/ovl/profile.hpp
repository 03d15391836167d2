#pragma once

#include <array>
#include <atomic>
#include <cstdint>

namespace ovl {

enum class Stage : int {
    Entropy = 0,
    Intra,
    Transform,
    Mc,
    Dbf,
    Sao,
    Alf,
    BufferOps,
    Count,
};

const char* stage_name(Stage s);

struct StageTotals {
    std::array<uint64_t, size_t(Stage::Count)> ns{};
    uint64_t total() const {
        uint64_t t = 0;
        for (auto v : ns) t += v;
        return t;
    }
};

#if OVL_PROFILE

namespace prof {

// Per-thread accumulation merged into the process-wide totals when each
// decoding thread finishes a frame (flush) or at collection time.
struct ThreadStages {
    std::array<uint64_t, size_t(Stage::Count)> ns{};
};

ThreadStages& thread_stages();
void flush_thread_stages();
StageTotals collect();
void reset();

uint64_t now_ns();

class Scope {
public:
    explicit Scope(Stage s) : m_stage(s), m_start(now_ns()) {}
    ~Scope() { thread_stages().ns[size_t(m_stage)] += now_ns() - m_start; }

private:
    Stage m_stage;
    uint64_t m_start;
};

} // namespace prof

#define OVL_PROFILE_SCOPE(stage) ::ovl::prof::Scope ovl_prof_scope_##__LINE__(stage)
#define OVL_PROFILE_FLUSH() ::ovl::prof::flush_thread_stages()

#else

#define OVL_PROFILE_SCOPE(stage) ((void)0)
#define OVL_PROFILE_FLUSH() ((void)0)

#endif

} // namespace ovl
