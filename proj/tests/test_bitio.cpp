#include <doctest.h>

#include <cmath>
#include <random>

#include "ovl/bitio.hpp"

using namespace ovl;

TEST_CASE("exp-golomb: 0 maps to a single 1 bit") {
    BitWriter w;
    w.put_ue(0);
    CHECK(w.bit_count() == 1);
    auto bytes = w.finish();
    CHECK(bytes.size() == 1);
    CHECK(bytes[0] == 0x80); // "1" then zero padding
}

TEST_CASE("exp-golomb: 3 maps to 00100") {
    // hand expansion: 3+1 = 100b -> two leading zeros, then 100
    BitWriter w;
    w.put_ue(3);
    CHECK(w.bit_count() == 5);
    auto bytes = w.finish();
    CHECK(bytes[0] == 0x20); // 00100 000

    BitReader r(bytes);
    CHECK(r.get_ue() == 3);
}

TEST_CASE("exp-golomb round-trip over random values") {
    std::mt19937_64 rng(42);
    BitWriter w;
    std::vector<uint32_t> values;
    for (int i = 0; i < 2000; ++i) {
        uint32_t v = uint32_t(rng() % 1000001);
        values.push_back(v);
        w.put_ue(v);
    }
    values.push_back(0);
    w.put_ue(0);
    values.push_back((1u << 31) - 1);
    w.put_ue((1u << 31) - 1);

    auto bytes = w.finish();
    BitReader r(bytes);
    for (uint32_t v : values) CHECK(r.get_ue() == v);
}

TEST_CASE("exp-golomb: malformed prefix is a corrupt-header error") {
    std::vector<uint8_t> zeros(6, 0x00); // 33+ leading zero bits
    BitReader r(zeros);
    CHECK_THROWS_WITH_AS(r.get_ue(), doctest::Contains("prefix"), Error);
}

TEST_CASE("bit writer/reader round-trips (value,width) pairs") {
    std::mt19937_64 rng(7);
    BitWriter w;
    std::vector<std::pair<uint32_t, int>> items;
    for (int i = 0; i < 3000; ++i) {
        int width = 1 + int(rng() % 24);
        uint32_t v = uint32_t(rng()) & ((width == 32 ? ~0u : (1u << width) - 1));
        items.push_back({v, width});
        w.put_bits(v, width);
    }
    auto bytes = w.finish();
    BitReader r(bytes);
    for (auto [v, width] : items) CHECK(r.get_bits(width) == v);
}

TEST_CASE("range coder: constant zeros converge below the entropy budget") {
    RangeEncoder enc;
    const int n = 10000;
    for (int i = 0; i < n; ++i) enc.encode_bin(0, 0);
    double p1 = double(enc.contexts().p[0]) / 4096.0; // converged P(bin=1)
    auto bytes = enc.finish();

    CHECK(bytes.size() < 100);
    // entropy bound: ~n*H(p_final) bits once converged
    double h = -p1 * std::log2(p1) - (1 - p1) * std::log2(1 - p1);
    double expected_bits = n * h;
    CHECK(double(bytes.size() * 8) > expected_bits * 0.5);
    CHECK(double(bytes.size() * 8) < expected_bits * 2.0 + 80);

    RangeDecoder dec(bytes);
    for (int i = 0; i < n; ++i) REQUIRE(dec.decode_bin(0) == 0);
}

TEST_CASE("range coder: random bins round-trip over 8 contexts") {
    std::mt19937_64 rng(123);
    const int n = 100000;
    std::vector<std::pair<int, int>> seq; // (ctx, bin)
    RangeEncoder enc;
    for (int i = 0; i < n; ++i) {
        int ctx = int(rng() % 8);
        int bin = (rng() >> 13) & 1;
        seq.push_back({ctx, bin});
        enc.encode_bin(ctx, bin);
    }
    enc.encode_terminator();
    auto bytes = enc.finish();

    RangeDecoder dec(bytes);
    for (auto [ctx, bin] : seq) REQUIRE(dec.decode_bin(ctx) == bin);
    dec.verify_terminator();
    CHECK(dec.fully_consumed());
}

TEST_CASE("range coder: bypass bins round-trip") {
    std::mt19937_64 rng(5);
    std::vector<int> bins;
    RangeEncoder enc;
    for (int i = 0; i < 20000; ++i) {
        int b = int(rng() & 1);
        bins.push_back(b);
        enc.encode_bypass(b);
    }
    enc.encode_terminator();
    auto bytes = enc.finish();
    // bypass bins cost ~1 bit each
    CHECK(bytes.size() > 20000 / 8 - 16);
    CHECK(bytes.size() < 20000 / 8 + 64);

    RangeDecoder dec(bytes);
    for (int b : bins) REQUIRE(dec.decode_bypass() == b);
    dec.verify_terminator();
}

TEST_CASE("range coder: encoder and decoder context states stay in lock-step") {
    std::mt19937_64 rng(99);
    const int n = 5000;
    std::vector<std::pair<int, int>> seq;
    std::vector<ContextSet> enc_states;
    RangeEncoder enc;
    for (int i = 0; i < n; ++i) {
        int ctx = int(rng() % kNumContexts);
        if (ctx == CTX_TERM) ctx = 0;
        int bin = int((rng() >> 7) % 100) < 70 ? 1 : 0;
        seq.push_back({ctx, bin});
        enc.encode_bin(ctx, bin);
        enc_states.push_back(enc.contexts());
    }
    enc.encode_terminator();
    auto bytes = enc.finish();

    RangeDecoder dec(bytes);
    for (int i = 0; i < n; ++i) {
        REQUIRE(dec.decode_bin(seq[size_t(i)].first) == seq[size_t(i)].second);
        const ContextSet& e = enc_states[size_t(i)];
        const ContextSet& d = dec.contexts();
        for (int c = 0; c < kNumContexts; ++c) REQUIRE(e.p[c] == d.p[c]);
    }
}

TEST_CASE("range coder: probability states stay within [1, 4095]") {
    RangeEncoder enc;
    for (int i = 0; i < 100000; ++i) enc.encode_bin(1, 1);
    for (int i = 0; i < 100000; ++i) enc.encode_bin(2, 0);
    CHECK(enc.contexts().p[1] >= 1);
    CHECK(enc.contexts().p[1] <= 4095);
    CHECK(enc.contexts().p[2] >= 1);
    CHECK(enc.contexts().p[2] <= 4095);
    enc.finish();
}

TEST_CASE("range coder: empty flush leaves no decodable payload bins") {
    RangeEncoder enc;
    auto bytes = enc.finish();
    CHECK(bytes.size() == 5);

    // payload bins would be bypass-coded garbage: the decoder must hit
    // end-of-stream, never fabricate data silently forever
    RangeDecoder dec(bytes);
    CHECK_THROWS_AS(
        [&] {
            for (int i = 0; i < 1000; ++i) dec.decode_bypass();
        }(),
        Error);
}

TEST_CASE("range coder: terminator-only payload verifies cleanly") {
    RangeEncoder enc;
    enc.encode_terminator();
    auto bytes = enc.finish();
    RangeDecoder dec(bytes);
    dec.verify_terminator(); // no payload bins before the terminator
}

TEST_CASE("range coder: truncated stream raises a clean error") {
    // frozen seed, ~1 kB stream
    std::mt19937_64 rng(2024);
    std::vector<std::pair<int, int>> seq;
    RangeEncoder enc;
    for (int i = 0; i < 8000; ++i) {
        int ctx = int(rng() % 4);
        int bin = int(rng() & 1);
        seq.push_back({ctx, bin});
        enc.encode_bin(ctx, bin);
    }
    enc.encode_terminator();
    auto bytes = enc.finish();
    REQUIRE(bytes.size() > 900);

    bytes.pop_back(); // drop the last byte
    RangeDecoder dec(bytes);
    bool threw = false;
    try {
        for (auto [ctx, bin] : seq) dec.decode_bin(ctx);
        dec.verify_terminator();
    } catch (const Error& e) {
        threw = true;
        CHECK((e.code() == ErrorCode::TruncatedStream ||
               e.code() == ErrorCode::CorruptPayload));
    }
    CHECK(threw);
}

TEST_CASE("range coder: decoder consumes exactly the bytes produced") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 50; ++trial) {
        RangeEncoder enc;
        int n = int(rng() % 500);
        std::vector<std::pair<int, int>> seq;
        for (int i = 0; i < n; ++i) {
            int ctx = int(rng() % 8);
            int bin = int(rng() & 1);
            seq.push_back({ctx, bin});
            enc.encode_bin(ctx, bin);
        }
        enc.encode_terminator();
        auto bytes = enc.finish();

        RangeDecoder dec(bytes);
        for (auto [ctx, bin] : seq) REQUIRE(dec.decode_bin(ctx) == bin);
        dec.verify_terminator();
        REQUIRE(dec.consumed() == bytes.size());
    }
}
