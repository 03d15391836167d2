#include <doctest.h>

#include <random>

#include "ovl/local_context.hpp"

using namespace ovl;

namespace {

void fill_pic(PictureBuffer& pic, std::mt19937_64& rng) {
    for (int p = 0; p < 3; ++p)
        for (int y = 0; y < pic.height(p); ++y)
            for (int x = 0; x < pic.width(p); ++x) pic.at(p, x, y) = Sample(rng() & 0x3FF);
}

// Independent oracle: the EC content must equal a crop of a full pre-stage
// frame copy with edge replication.
Sample oracle_at(const std::vector<Sample>& shadow, int W, int H, int x, int y) {
    return shadow[size_t(clip3(0, H - 1, y)) * W + clip3(0, W - 1, x)];
}

} // namespace

TEST_CASE("local context geometry: EC side, RC/BR dims, margins") {
    LocalContext ctx(96, 64, 32, nullptr);
    CHECK(ctx.ec_stride(FilterStage::Intra, 0) == 32 + 2 * 3);
    CHECK(ctx.ec_stride(FilterStage::Sao, 0) == 32 + 2 * 1);
    CHECK(ctx.ec_stride(FilterStage::Alf, 0) == 32 + 2 * 3);
    CHECK(ctx.ec_stride(FilterStage::Alf, 1) == 16 + 2 * 2);
    CHECK(stage_margin(FilterStage::Intra, false) == 3);
    CHECK(stage_margin(FilterStage::Sao, false) == 1);
    CHECK(stage_margin(FilterStage::Alf, false) == 3);
}

TEST_CASE("ec_fill: top-left CTU margins are edge replications") {
    PictureBuffer pic(64, 64, nullptr);
    std::mt19937_64 rng(1);
    fill_pic(pic, rng);
    LocalContext ctx(64, 64, 32, nullptr);

    Rect rect{0, 0, 32, 32};
    ctx.ec_fill(FilterStage::Intra, 0, pic, rect);
    Sample* ec = ctx.ec(FilterStage::Intra, 0);
    ptrdiff_t es = ctx.ec_stride(FilterStage::Intra, 0);

    for (int j = 0; j < 32; ++j)
        for (int m = 1; m <= 3; ++m) CHECK(ec[j * es - m] == pic.at(0, 0, j));
    for (int i = 0; i < 32; ++i)
        for (int m = 1; m <= 3; ++m) CHECK(ec[-m * es + i] == pic.at(0, i, 0));
    CHECK(ec[0] == pic.at(0, 0, 0));
    CHECK(ec[5 * es + 7] == pic.at(0, 7, 5));
}

TEST_CASE("ec_fill: primed RC/BR margins survive picture overwrites") {
    // process CTU (0,0) while the picture reads 7, then flip the picture to
    // 100: the next fill's left margin must still read the saved 7s
    PictureBuffer pic(64, 64, nullptr);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) pic.at(0, x, y) = 7;
    LocalContext ctx(64, 64, 32, nullptr);

    Rect a{0, 0, 32, 32};
    ctx.ec_fill(FilterStage::Intra, 0, pic, a);
    ctx.rc_br_update(FilterStage::Intra, 0, a);

    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) pic.at(0, x, y) = 100;

    Rect b{32, 0, 32, 32};
    ctx.ec_fill(FilterStage::Intra, 0, pic, b);
    Sample* ec = ctx.ec(FilterStage::Intra, 0);
    ptrdiff_t es = ctx.ec_stride(FilterStage::Intra, 0);
    for (int j = 0; j < 32; ++j)
        for (int m = 1; m <= 3; ++m) CHECK(ec[j * es - m] == 7);
    CHECK(ec[0] == 100);
    CHECK(ec[10 * es + 20] == 100);

    // and one row down, the top margin must read the saved bottom rows
    ctx.rc_br_update(FilterStage::Intra, 0, b);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) pic.at(0, x, y) = 200;
    Rect c{0, 32, 32, 32};
    ctx.ec_fill(FilterStage::Intra, 0, pic, c);
    ec = ctx.ec(FilterStage::Intra, 0);
    for (int i = 0; i < 32; ++i)
        for (int m = 1; m <= 3; ++m) CHECK(ec[-m * es + i] == 7);
    CHECK(ec[0] == 200);
}

TEST_CASE("streamed fill/update protocol matches the full-frame shadow oracle") {
    std::mt19937_64 rng(2024);
    // several geometries, including frame dims not multiples of the CTU
    struct Geo {
        int w, h, ctu;
    };
    for (Geo g : {Geo{128, 64, 32}, Geo{96, 96, 32}, Geo{104, 72, 64}, Geo{64, 24, 64}}) {
        for (int stage_i = 0; stage_i < kNumStages; ++stage_i) {
            for (int plane = 0; plane < 2; ++plane) {
                FilterStage stage = FilterStage(stage_i);
                PictureBuffer pic(g.w, g.h, nullptr);
                fill_pic(pic, rng);
                LocalContext ctx(g.w, g.h, g.ctu, nullptr);

                int W = pic.width(plane), H = pic.height(plane);
                int sp = plane ? g.ctu / 2 : g.ctu;
                int M = stage_margin(stage, plane > 0);

                // pre-stage shadow copy
                std::vector<Sample> shadow(size_t(W) * H);
                for (int y = 0; y < H; ++y)
                    for (int x = 0; x < W; ++x) shadow[size_t(y) * W + x] = pic.at(plane, x, y);

                // the synthetic stage: box sum over the +/-M neighborhood,
                // a margin-hungry filter that exposes any stale sample
                auto filter_at = [&](auto&& at, int x, int y) {
                    uint32_t acc = 0;
                    for (int dy = -M; dy <= M; ++dy)
                        for (int dx = -M; dx <= M; ++dx) acc += at(x + dx, y + dy);
                    return Sample(acc % 1024);
                };

                for (int cy = 0; cy < ceil_div(H, sp); ++cy) {
                    for (int cx = 0; cx < ceil_div(W, sp); ++cx) {
                        Rect rect{cx * sp, cy * sp, std::min(sp, W - cx * sp),
                                  std::min(sp, H - cy * sp)};
                        ctx.ec_fill(stage, plane, pic, rect);

                        // every EC cell must equal the shadow-copy crop
                        Sample* ec = ctx.ec(stage, plane);
                        ptrdiff_t es = ctx.ec_stride(stage, plane);
                        for (int j = -M; j < rect.h + M; ++j)
                            for (int i = -M; i < rect.w + M; ++i)
                                REQUIRE(ec[ptrdiff_t(j) * es + i] ==
                                        oracle_at(shadow, W, H, rect.x + i, rect.y + j));

                        ctx.rc_br_update(stage, plane, rect);

                        Sample* out = ctx.out(stage, plane);
                        ptrdiff_t os = ctx.out_stride(stage, plane);
                        auto ec_at = [&](int x, int y) { return ec[ptrdiff_t(y) * es + x]; };
                        for (int j = 0; j < rect.h; ++j)
                            for (int i = 0; i < rect.w; ++i)
                                out[ptrdiff_t(j) * os + i] = filter_at(ec_at, i, j);
                        if (stage == FilterStage::Intra) {
                            // intra commits from the EC itself
                            for (int j = 0; j < rect.h; ++j)
                                for (int i = 0; i < rect.w; ++i)
                                    ec[ptrdiff_t(j) * es + i] = out[ptrdiff_t(j) * os + i];
                        }
                        ctx.commit(stage, plane, pic, rect);
                    }
                }

                // whole-frame single pass over the shadow copy
                auto shadow_at = [&](int x, int y) { return oracle_at(shadow, W, H, x, y); };
                for (int y = 0; y < H; ++y)
                    for (int x = 0; x < W; ++x)
                        REQUIRE(pic.at(plane, x, y) == filter_at(shadow_at, x, y));
            }
        }
    }
}

TEST_CASE("intra stage: rc_br_update after processing saves processed samples") {
    // the intra-stage margins hold reconstructed (post-process) samples
    PictureBuffer pic(64, 32, nullptr);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 64; ++x) pic.at(0, x, y) = 50;
    LocalContext ctx(64, 32, 32, nullptr);

    Rect a{0, 0, 32, 32};
    ctx.ec_fill(FilterStage::Intra, 0, pic, a);
    Sample* ec = ctx.ec(FilterStage::Intra, 0);
    ptrdiff_t es = ctx.ec_stride(FilterStage::Intra, 0);
    for (int j = 0; j < 32; ++j)
        for (int i = 0; i < 32; ++i) ec[j * es + i] = 900; // "reconstruction"
    ctx.rc_br_update(FilterStage::Intra, 0, a);
    ctx.commit(FilterStage::Intra, 0, pic, a);

    Rect b{32, 0, 32, 32};
    ctx.ec_fill(FilterStage::Intra, 0, pic, b);
    for (int j = 0; j < 32; ++j) CHECK(ec[j * es - 1] == 900);
}

TEST_CASE("sao stage stores exactly one row and column") {
    PictureBuffer pic(64, 32, nullptr);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 64; ++x) pic.at(0, x, y) = Sample(x + y * 64);
    LocalContext ctx(64, 32, 32, nullptr);

    Rect a{0, 0, 32, 32};
    ctx.ec_fill(FilterStage::Sao, 0, pic, a);
    ctx.rc_br_update(FilterStage::Sao, 0, a);
    // corrupt the picture; only the single saved column must survive
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 64; ++x) pic.at(0, x, y) = 0;
    Rect b{32, 0, 32, 32};
    ctx.ec_fill(FilterStage::Sao, 0, pic, b);
    Sample* ec = ctx.ec(FilterStage::Sao, 0);
    ptrdiff_t es = ctx.ec_stride(FilterStage::Sao, 0);
    for (int j = 0; j < 32; ++j) CHECK(ec[j * es - 1] == Sample(31 + j * 64));
}

TEST_CASE("commit with a zero-area region is a no-op") {
    PictureBuffer pic(32, 32, nullptr);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) pic.at(0, x, y) = 5;
    LocalContext ctx(32, 32, 32, nullptr);
    Rect rect{0, 0, 32, 32};
    ctx.ec_fill(FilterStage::Sao, 0, pic, rect);
    ctx.commit(FilterStage::Sao, 0, pic, rect, Rect{0, 0, 0, 0});
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) CHECK(pic.at(0, x, y) == 5);
}

TEST_CASE("identity stage leaves the picture unchanged after fill/update/commit") {
    std::mt19937_64 rng(8);
    PictureBuffer pic(64, 32, nullptr);
    fill_pic(pic, rng);
    std::vector<Sample> before;
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 64; ++x) before.push_back(pic.at(0, x, y));

    LocalContext ctx(64, 32, 32, nullptr);
    for (int cx = 0; cx < 2; ++cx) {
        Rect rect{cx * 32, 0, 32, 32};
        ctx.ec_fill(FilterStage::Sao, 0, pic, rect);
        ctx.rc_br_update(FilterStage::Sao, 0, rect);
        // identity: copy EC center to out
        Sample* ec = ctx.ec(FilterStage::Sao, 0);
        Sample* out = ctx.out(FilterStage::Sao, 0);
        for (int j = 0; j < 32; ++j)
            for (int i = 0; i < 32; ++i)
                out[j * ctx.out_stride(FilterStage::Sao, 0) + i] =
                    ec[j * ctx.ec_stride(FilterStage::Sao, 0) + i];
        ctx.commit(FilterStage::Sao, 0, pic, rect);
    }
    size_t k = 0;
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 64; ++x) CHECK(pic.at(0, x, y) == before[k++]);
}

TEST_CASE("ec_fill rejects rects outside the CTU grid") {
    PictureBuffer pic(32, 32, nullptr);
    LocalContext ctx(32, 32, 32, nullptr);
    CHECK_THROWS_AS(ctx.ec_fill(FilterStage::Intra, 0, pic, Rect{16, 0, 32, 32}), Error);
    CHECK_THROWS_AS(ctx.ec_fill(FilterStage::Intra, 0, pic, Rect{0, 0, 0, 8}), Error);
}

TEST_CASE("row maps mark CU boundaries and QP at 8x8 granularity") {
    RowMaps maps;
    maps.init(64, 32);
    maps.start_row(0, 32);
    maps.mark_cu(0, 0, 16, 30);
    maps.mark_cu(16, 0, 8, 31);

    CHECK((maps.flag_at(0, 0) & kCuEdgeLeft));
    CHECK((maps.flag_at(0, 0) & kCuEdgeTop));
    CHECK((maps.flag_at(1, 0) & kCuEdgeLeft) == 0);
    CHECK((maps.flag_at(1, 0) & kCuEdgeTop));
    CHECK((maps.flag_at(2, 0) & kCuEdgeLeft));
    CHECK(maps.qp_at(0, 0) == 30);
    CHECK(maps.qp_at(2, 0) == 31);

    // bottom block-row survives into the next CTU row
    maps.mark_cu(0, 24, 8, 29);
    maps.start_row(1, 32);
    CHECK((maps.flag_at(0, 3) & kCuEdgeLeft));
    CHECK(maps.qp_at(0, 3) == 29);
}
