#include <doctest.h>

#include <random>
#include <sstream>

#include "ovl/container.hpp"
#include "ovl/y4m.hpp"

using namespace ovl;

namespace {

SequenceHeader valid_seq() {
    SequenceHeader h;
    h.width = 96;
    h.height = 64;
    h.bit_depth = 10;
    h.ctu_size = 32;
    h.gop_mode = GopMode::AI;
    h.dpb_max_nb_pic = 1;
    h.frame_count = 0;
    return h;
}

} // namespace

TEST_CASE("empty sequence is a 28-byte header-only stream") {
    // field widths: magic 4 + version 1 + width 4 + height 4 + bit_depth 1 +
    // ctu_size 1 + gop_mode 1 + dpb_max 1 + frame_count 4 + reserved 7
    auto bytes = write_stream(valid_seq(), {});
    CHECK(bytes.size() == 28);
    CHECK(bytes.size() == kSequenceHeaderBytes);

    SequenceHeader parsed = parse_sequence_header(bytes);
    CHECK(parsed.width == 96);
    CHECK(parsed.height == 64);
    CHECK(parsed.frame_count == 0);
}

TEST_CASE("AI header with dpb_max_nb_pic=2 is an encode-config error") {
    SequenceHeader h = valid_seq();
    h.dpb_max_nb_pic = 2;
    CHECK_THROWS_AS(write_stream(h, {}), Error);
    try {
        write_stream(h, {});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EncodeConfig);
    }
}

TEST_CASE("bad magic names the offending field") {
    auto bytes = write_stream(valid_seq(), {});
    bytes[0] = 'X';
    try {
        parse_sequence_header(bytes);
        FAIL("expected corrupt-stream");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CorruptStream);
        CHECK(std::string(e.what()).find("magic") != std::string::npos);
    }
}

TEST_CASE("container round-trips fuzzed headers and payloads") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        SequenceHeader h;
        h.width = uint32_t(8 * (1 + rng() % 20));
        h.height = uint32_t(8 * (1 + rng() % 20));
        h.bit_depth = (rng() & 1) ? 10 : 8;
        h.ctu_size = uint8_t(32 << (rng() % 3));
        h.gop_mode = GopMode(rng() % 3);
        h.dpb_max_nb_pic = h.gop_mode == GopMode::AI ? 1 : uint8_t(1 + rng() % 6);
        uint32_t n = uint32_t(rng() % 4);
        h.frame_count = n;

        std::vector<Frame> frames;
        for (uint32_t f = 0; f < n; ++f) {
            Frame fr;
            fr.header.poc = f; // decode order == poc for this fuzz
            fr.header.frame_type = f == 0 ? FrameType::I : FrameType::P;
            fr.header.qp = uint8_t(1 + rng() % 51);
            if (f > 0) fr.header.ref_pocs = {f - 1};
            for (int c = 0; c < int(kAlfLumaCoeffs); ++c)
                fr.header.alf.luma[size_t(c)] = int8_t(rng());
            fr.header.alf.enable_mode = uint8_t(rng() % 3);
            for (int c = 0; c < h.ctu_count(); ++c) {
                std::vector<uint8_t> payload(rng() % 40);
                for (auto& b : payload) b = uint8_t(rng());
                fr.header.payload_sizes.push_back(uint32_t(payload.size()));
                fr.payloads.push_back(std::move(payload));
            }
            frames.push_back(std::move(fr));
        }

        auto bytes = write_stream(h, frames);
        StreamParser parser(bytes);
        const SequenceHeader& p = parser.sequence_header();
        CHECK(p.width == h.width);
        CHECK(p.height == h.height);
        CHECK(p.bit_depth == h.bit_depth);
        CHECK(p.ctu_size == h.ctu_size);
        CHECK(p.gop_mode == h.gop_mode);
        CHECK(p.dpb_max_nb_pic == h.dpb_max_nb_pic);
        CHECK(p.frame_count == h.frame_count);

        for (uint32_t f = 0; f < n; ++f) {
            auto got = parser.next_frame();
            REQUIRE(got.has_value());
            CHECK(got->header.poc == frames[f].header.poc);
            CHECK(got->header.qp == frames[f].header.qp);
            CHECK(got->header.ref_pocs == frames[f].header.ref_pocs);
            CHECK(got->header.alf.luma == frames[f].header.alf.luma);
            CHECK(got->header.payload_sizes == frames[f].header.payload_sizes);
            for (int c = 0; c < h.ctu_count(); ++c) {
                REQUIRE(got->payloads[size_t(c)].size() == frames[f].payloads[size_t(c)].size());
                CHECK(std::equal(got->payloads[size_t(c)].begin(),
                                 got->payloads[size_t(c)].end(),
                                 frames[f].payloads[size_t(c)].begin()));
            }
        }
        CHECK(!parser.next_frame().has_value());
    }
}

TEST_CASE("a reference that does not precede its frame is corrupt") {
    SequenceHeader h = valid_seq();
    h.gop_mode = GopMode::LD;
    h.dpb_max_nb_pic = 2;
    h.frame_count = 2;

    std::vector<Frame> frames(2);
    frames[0].header.poc = 0;
    frames[0].header.frame_type = FrameType::I;
    frames[0].header.payload_sizes.assign(size_t(h.ctu_count()), 0);
    frames[0].payloads.resize(size_t(h.ctu_count()));
    frames[1].header.poc = 1;
    frames[1].header.frame_type = FrameType::P;
    frames[1].header.ref_pocs = {5}; // never decoded
    frames[1].header.payload_sizes.assign(size_t(h.ctu_count()), 0);
    frames[1].payloads.resize(size_t(h.ctu_count()));

    auto bytes = write_stream(h, frames);
    StreamParser parser(bytes);
    CHECK(parser.next_frame().has_value());
    try {
        parser.next_frame();
        FAIL("expected corrupt-stream");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CorruptStream);
        CHECK(std::string(e.what()).find("ref_pocs") != std::string::npos);
    }
}

TEST_CASE("truncated payloads are detected at parse") {
    SequenceHeader h = valid_seq();
    h.frame_count = 1;
    std::vector<Frame> frames(1);
    frames[0].header.poc = 0;
    frames[0].header.frame_type = FrameType::I;
    for (int c = 0; c < h.ctu_count(); ++c) {
        frames[0].header.payload_sizes.push_back(16);
        frames[0].payloads.push_back(std::vector<uint8_t>(16, 0xAB));
    }
    auto bytes = write_stream(h, frames);
    bytes.resize(bytes.size() - 3);
    StreamParser parser(bytes);
    CHECK_THROWS_AS(parser.next_frame(), Error);
}

TEST_CASE("y4m: 10-bit gray frame round-trips losslessly") {
    RawVideo v;
    v.width = 16;
    v.height = 16;
    v.bit_depth = 10;
    v.fps_num = 30;
    v.fps_den = 1;
    v.frames.push_back(v.make_frame(512));

    std::stringstream ss;
    write_y4m(ss, v);
    RawVideo back = read_y4m(ss);
    CHECK(back.width == 16);
    CHECK(back.height == 16);
    CHECK(back.bit_depth == 10);
    CHECK(back.fps_num == 30);
    CHECK(back.fps_den == 1);
    REQUIRE(back.frames.size() == 1);
    CHECK(back.frames[0].y == v.frames[0].y);
    CHECK(back.frames[0].u == v.frames[0].u);
    CHECK(back.frames[0].v == v.frames[0].v);
}

TEST_CASE("y4m: 4:2:2 input is an unsupported-format error") {
    std::stringstream ss;
    ss << "YUV4MPEG2 W16 H16 F25:1 Ip A1:1 C422\nFRAME\n";
    try {
        read_y4m(ss);
        FAIL("expected unsupported-format");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnsupportedFormat);
    }
}

TEST_CASE("y4m: 8-bit samples survive the 10-bit internal round-trip") {
    std::mt19937_64 rng(3);
    RawVideo v;
    v.width = 24;
    v.height = 16;
    v.bit_depth = 8;
    v.frames.push_back(v.make_frame());
    for (auto* p : {&v.frames[0].y, &v.frames[0].u, &v.frames[0].v})
        for (auto& s : *p) s = Sample(rng() % 256);

    // upconvert by <<2, downconvert by >>2: identity for 8-bit content
    RawVideo internal = v;
    internal.bit_depth = 10;
    for (auto* p : {&internal.frames[0].y, &internal.frames[0].u, &internal.frames[0].v})
        for (auto& s : *p) s = Sample(s << 2);
    RawVideo back = internal;
    back.bit_depth = 8;
    for (auto* p : {&back.frames[0].y, &back.frames[0].u, &back.frames[0].v})
        for (auto& s : *p) s = Sample(s >> 2);

    CHECK(back.frames[0].y == v.frames[0].y);
    CHECK(back.frames[0].u == v.frames[0].u);
    CHECK(back.frames[0].v == v.frames[0].v);

    std::stringstream ss;
    write_y4m(ss, back);
    RawVideo reread = read_y4m(ss);
    CHECK(reread.frames[0].y == v.frames[0].y);
}

TEST_CASE("alf block layout is a fixed 64 bytes") {
    AlfParams p;
    p.luma[0] = -5;
    p.chroma[2] = 9;
    p.enable_mode = 2;
    p.set_ctu_enabled(0, true);
    p.set_ctu_enabled(17, true);
    std::vector<uint8_t> out;
    p.serialize(out);
    REQUIRE(out.size() == kAlfBlockBytes);
    AlfParams q = AlfParams::parse(out);
    CHECK(q.luma == p.luma);
    CHECK(q.chroma == p.chroma);
    CHECK(q.enable_mode == 2);
    CHECK(q.ctu_enabled(0));
    CHECK(q.ctu_enabled(17));
    CHECK(!q.ctu_enabled(16));
}
