#include <doctest.h>

#include "guicap/cursor_ground.hpp"
#include "guicap/png_io.hpp"
#include "guicap/scene_sim.hpp"

#include <httplib.h>

#include <cmath>
#include <random>
#include <thread>

using namespace guicap;

namespace {

Image busy_background(int w, int h, std::uint64_t seed) {
    Image img(w, h, {70, 72, 80});
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> cx(0, w - 1), cy(0, h - 1), cs(8, 60), col(0, 255);
    for (int i = 0; i < 25; ++i) {
        Rect r{cx(rng), cy(rng), cs(rng), cs(rng)};
        img.fill_rect(r, {static_cast<std::uint8_t>(col(rng)),
                          static_cast<std::uint8_t>(col(rng)),
                          static_cast<std::uint8_t>(col(rng))});
    }
    img.draw_text(10, 10, "some panel text", {230, 230, 230});
    return img;
}

void paste_cursor(Image& img, int x, int y) {
    const auto& rows = cursor_sprite_rows();
    for (int ry = 0; ry < static_cast<int>(rows.size()); ++ry)
        for (int rx = 0; rx < static_cast<int>(rows[ry].size()); ++rx) {
            char c = rows[ry][rx];
            if (c == '.')
                continue;
            if (img.in_bounds(x + rx, y + ry))
                img.set(x + rx, y + ry, c == 'B' ? Color{0, 0, 0} : Color{255, 255, 255});
        }
}

} // namespace

TEST_CASE("detect finds a pasted sprite within 2 px") {
    Image frame = busy_background(640, 480, 1);
    paste_cursor(frame, 312, 207);
    auto fix = detect(frame, default_sprite_library());
    REQUIRE(fix.has_value());
    CHECK(std::abs(fix->x - 312) <= 2);
    CHECK(std::abs(fix->y - 207) <= 2);
    CHECK(fix->confidence > 0.85);
}

TEST_CASE("cursor-free frame yields no detection") {
    Image frame = busy_background(320, 240, 2);
    CHECK_FALSE(detect(frame, default_sprite_library()).has_value());
}

TEST_CASE("threshold affects acceptance only") {
    Image frame = busy_background(320, 240, 3);
    paste_cursor(frame, 100, 60);
    auto strict = detect(frame, default_sprite_library(), 0.9);
    auto loose = detect(frame, default_sprite_library(), 0.5);
    REQUIRE(strict.has_value());
    REQUIRE(loose.has_value());
    CHECK(strict->x == loose->x);
    CHECK(strict->y == loose->y);
    CHECK(strict->confidence == loose->confidence);
}

TEST_CASE("detect is deterministic") {
    Image frame = busy_background(320, 240, 4);
    paste_cursor(frame, 41, 101);
    auto a = detect(frame, default_sprite_library());
    auto b = detect(frame, default_sprite_library());
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(a->x == b->x);
    CHECK(a->y == b->y);
    CHECK(a->confidence == b->confidence);
}

TEST_CASE("translation consistency within 2 px") {
    Image base = busy_background(300, 200, 5);
    auto library = default_sprite_library();
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> dx(0, 300 - 30), dy(0, 200 - 40);
    for (int trial = 0; trial < 40; ++trial) {
        int x = dx(rng), y = dy(rng);
        Image frame = base;
        paste_cursor(frame, x, y);
        auto fix = detect(frame, library);
        REQUIRE(fix.has_value());
        CHECK(std::abs(fix->x - x) <= 2);
        CHECK(std::abs(fix->y - y) <= 2);
    }
}

TEST_CASE("detect validates inputs") {
    Image frame(32, 32);
    CHECK_THROWS_AS(detect(frame, default_sprite_library(), 0.0), Error);
    CHECK_THROWS_AS(detect(frame, default_sprite_library(), 1.5), Error);
    CHECK_THROWS_AS(detect(frame, CursorSpriteLibrary{}), Error);
}

TEST_CASE("detect_sequence fills missed frames from the nearest neighbor") {
    auto library = default_sprite_library();
    std::vector<Image> frames;
    for (int i = 0; i < 10; ++i) {
        Image f = busy_background(200, 150, 7);
        if (i != 4) // frame 4: cursor occluded
            paste_cursor(f, 20 + 10 * i, 40);
        frames.push_back(std::move(f));
    }
    auto fixes = detect_sequence(frames, library);
    REQUIRE(fixes.size() == 10);
    for (int i = 0; i < 10; ++i) {
        CHECK(fixes[i].frame_idx == i);
        if (i == 4) {
            CHECK(fixes[i].confidence == 0.0);
            CHECK(fixes[i].x == fixes[3].x); // previous neighbor wins the tie
            CHECK(fixes[i].y == fixes[3].y);
        } else {
            CHECK(fixes[i].confidence > 0.0);
            CHECK(std::abs(fixes[i].x - (20 + 10 * i)) <= 2);
        }
    }
}

TEST_CASE("all-blank video raises AllFramesUndetected") {
    std::vector<Image> frames(3, Image(64, 64, {50, 50, 50}));
    CHECK_THROWS_AS(detect_sequence(frames, default_sprite_library()), AllFramesUndetected);
}

TEST_CASE("http detector adapter speaks the wire protocol") {
    httplib::Server server;
    std::string last_content_type;
    std::size_t last_body_size = 0;
    std::string reply = "17 23 0.93";
    server.Post("/detect", [&](const httplib::Request& req, httplib::Response& res) {
        last_content_type = req.get_header_value("Content-Type");
        last_body_size = req.body.size();
        res.set_content(reply, "text/plain");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpCursorDetector detector("http://127.0.0.1:" + std::to_string(port) + "/detect");
    Image frame = busy_background(120, 90, 8);

    auto fix = detector.detect_frame(frame, 5);
    REQUIRE(fix.has_value());
    CHECK(fix->frame_idx == 5);
    CHECK(fix->x == 17);
    CHECK(fix->y == 23);
    CHECK(fix->confidence == doctest::Approx(0.93));
    CHECK(last_content_type == "image/png");
    CHECK(last_body_size > 0);

    reply = "NONE";
    CHECK_FALSE(detector.detect_frame(frame, 0).has_value());

    server.stop();
    runner.join();

    CHECK_THROWS_AS(detector.detect_frame(frame, 0), BackendUnavailable);
}
