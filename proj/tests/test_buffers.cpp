#include <doctest.h>

#include <thread>

#include "ovl/buffers.hpp"

using namespace ovl;

namespace {

PicturePool make_pool(MemoryAccounting* acct, int w = 64, int h = 64) {
    return PicturePool([=] { return std::make_unique<PictureBuffer>(w, h, acct); });
}

MvPool make_mv_pool(MemoryAccounting* acct, int w = 64, int h = 64) {
    return MvPool([=] { return std::make_unique<MotionField>(w, h, acct); });
}

} // namespace

TEST_CASE("pool: first acquire allocates") {
    auto pool = make_pool(nullptr);
    auto b = pool.acquire();
    CHECK(pool.allocations() == 1);
    CHECK(pool.outstanding() == 1);
    pool.release(std::move(b));
    CHECK(pool.outstanding() == 0);
    CHECK(pool.free_count() == 1);
}

TEST_CASE("pool: acquire-release-acquire recycles the same buffer") {
    auto pool = make_pool(nullptr);
    auto b = pool.acquire();
    uint64_t gen = b->generation();
    pool.release(std::move(b));
    auto b2 = pool.acquire();
    CHECK(pool.allocations() == 1);
    CHECK(b2->generation() == gen);
}

TEST_CASE("pool: no-leak invariant outstanding + free == allocations") {
    auto pool = make_pool(nullptr);
    std::vector<std::unique_ptr<PictureBuffer>> held;
    for (int i = 0; i < 5; ++i) held.push_back(pool.acquire());
    pool.release(std::move(held.back()));
    held.pop_back();
    CHECK(pool.outstanding() + pool.free_count() == pool.allocations());
    CHECK(pool.high_watermark() == 5);
}

TEST_CASE("picture buffer byte formula matches the 4:2:0 padded sizing") {
    // stride = W + 2*16, padded height = H + 2*16,
    // bytes = 2*(stride*padded_h + 2*(stride/2)*(padded_h/2))
    CHECK(PictureBuffer::total_bytes(1920, 1080) == 6511872);

    MemoryAccounting acct;
    PictureBuffer pic(1920, 1080, &acct);
    CHECK(acct.peak_bytes(MemCategory::Picture) == 6511872);
    CHECK(acct.allocations(MemCategory::Picture) == 1);
}

TEST_CASE("FHD motion field payload is exactly 129600 bytes") {
    CHECK(MotionField::payload_bytes(1920, 1080) == 240 * 135 * 4);
    CHECK(MotionField::payload_bytes(1920, 1080) == 129600);

    MemoryAccounting acct;
    MotionField mf(1920, 1080, &acct);
    CHECK(acct.peak_bytes(MemCategory::Mv) == 129600);
    // ref indices live in a parallel array, accounted separately
    CHECK(acct.peak_bytes(MemCategory::MvRefIdx) == 240 * 135);
}

TEST_CASE("accounting starts at zero and tracks the watermark") {
    MemoryAccounting acct;
    CHECK(acct.total_peak_bytes() == 0);
    acct.add(MemCategory::Picture, 100);
    acct.remove(MemCategory::Picture, 100);
    acct.add(MemCategory::Picture, 60);
    CHECK(acct.peak_bytes(MemCategory::Picture) == 100);
    CHECK(acct.allocations(MemCategory::Picture) == 2);
}

TEST_CASE("picture pad replication covers rows and corners") {
    PictureBuffer pic(32, 32, nullptr);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) pic.at(0, x, y) = Sample(y * 32 + x);
    pic.replicate_pad_rows(0, 32);
    CHECK(pic.at(0, -1, 0) == pic.at(0, 0, 0));
    CHECK(pic.at(0, -16, 5) == pic.at(0, 0, 5));
    CHECK(pic.at(0, 32, 7) == pic.at(0, 31, 7));
    CHECK(pic.at(0, 4, -3) == pic.at(0, 4, 0));
    CHECK(pic.at(0, 4, 33) == pic.at(0, 4, 31));
    CHECK(pic.at(0, -2, -2) == pic.at(0, 0, 0));
    CHECK(pic.at(0, 40, 40) == pic.at(0, 31, 31));
}

TEST_CASE("dpb: I-frame start in an empty DPB holds no references") {
    MemoryAccounting acct;
    auto pics = make_pool(&acct);
    auto mvs = make_mv_pool(&acct);
    Dpb dpb(pics, mvs);
    DpbEntry* e = dpb.start_frame(0, {});
    CHECK(e->ref_counter.load() == 0);
    CHECK(e->refs.empty());
    CHECK(dpb.entry_count() == 1);
}

TEST_CASE("dpb: starting a frame increments its references, finishing decrements") {
    auto pics = make_pool(nullptr);
    auto mvs = make_mv_pool(nullptr);
    Dpb dpb(pics, mvs);
    DpbEntry* e0 = dpb.start_frame(0, {});
    dpb.finish_frame(0);

    // the Fig. 7 shape: a later picture referencing POC 0
    DpbEntry* e16 = dpb.start_frame(16, {0});
    CHECK(e0->ref_counter.load() == 1);
    CHECK(e16->refs.size() == 1);
    dpb.finish_frame(16);
    CHECK(e0->ref_counter.load() == 0);
}

TEST_CASE("dpb: missing reference is a broken-reference error") {
    auto pics = make_pool(nullptr);
    auto mvs = make_mv_pool(nullptr);
    Dpb dpb(pics, mvs);
    dpb.start_frame(0, {});
    try {
        dpb.start_frame(1, {42});
        FAIL("expected broken-reference");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BrokenReference);
    }
}

TEST_CASE("dpb: double finish and unknown finish are internal-state errors") {
    auto pics = make_pool(nullptr);
    auto mvs = make_mv_pool(nullptr);
    Dpb dpb(pics, mvs);
    dpb.start_frame(0, {});
    dpb.finish_frame(0);
    try {
        dpb.finish_frame(0);
        FAIL("expected internal-state");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InternalState);
    }
    CHECK_THROWS_AS(dpb.finish_frame(7), Error);
}

TEST_CASE("dpb: eviction removes only zero-ref, output, minimal-POC entries") {
    auto pics = make_pool(nullptr);
    auto mvs = make_mv_pool(nullptr);
    Dpb dpb(pics, mvs);

    dpb.start_frame(0, {});
    dpb.finish_frame(0);
    dpb.start_frame(1, {0});

    // all entries are referenced or decoding: nothing qualifies
    CHECK(dpb.evict(1).empty());

    dpb.finish_frame(1);
    // POC0 is zero-ref and decoded but not output yet
    CHECK(dpb.evict(1).empty());

    REQUIRE(dpb.next_output() != nullptr);
    CHECK(dpb.next_output()->poc == 0);
    dpb.mark_output_done(0);
    auto evicted = dpb.evict(1);
    REQUIRE(evicted.size() == 1);
    CHECK(evicted[0] == 0);
    CHECK(dpb.entry_count() == 1);
    CHECK(pics.free_count() == 1); // buffer recycled, not dropped
}

TEST_CASE("dpb: refcount conservation across a mixed sequence") {
    auto pics = make_pool(nullptr);
    auto mvs = make_mv_pool(nullptr);
    Dpb dpb(pics, mvs);
    dpb.start_frame(0, {});
    dpb.finish_frame(0);
    dpb.start_frame(8, {0});
    dpb.finish_frame(8);
    dpb.start_frame(4, {0, 8});
    DpbEntry* e0 = dpb.find(0);
    DpbEntry* e8 = dpb.find(8);
    CHECK(e0->ref_counter.load() == 1);
    CHECK(e8->ref_counter.load() == 1);
    dpb.finish_frame(4);
    CHECK(e0->ref_counter.load() == 0);
    CHECK(e8->ref_counter.load() == 0);
}

TEST_CASE("availability monitor: ordered reports wake waiters in order") {
    AvailabilityMonitor m;
    m.reset(4);
    CHECK(m.last_final_line() == -1);

    std::thread t([&] {
        m.wait_for_line(1, 5000, 0);
    });
    m.report_line(0);
    m.report_line(1);
    t.join();
    CHECK(m.last_final_line() == 1);
    m.report_line(2);
    m.report_line(3);
    CHECK(m.last_final_line() == m.total_lines() - 1);
}

TEST_CASE("availability monitor: out-of-order report is an internal error") {
    AvailabilityMonitor m;
    m.reset(4);
    CHECK_THROWS_AS(m.report_line(1), Error);
}

TEST_CASE("availability monitor: watchdog converts a stall into an error") {
    AvailabilityMonitor m;
    m.reset(4);
    try {
        m.wait_for_line(2, 50, 9);
        FAIL("expected watchdog");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::WatchdogTimeout);
        CHECK(e.poc() == 9);
    }
}

TEST_CASE("availability monitor: failed frames surface broken-reference") {
    AvailabilityMonitor m;
    m.reset(4);
    std::thread t([&] { m.mark_failed(); });
    try {
        m.wait_for_line(3, 5000, 12);
        FAIL("expected broken-reference");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BrokenReference);
    }
    t.join();
}
