#include <doctest.h>

#include "guicap/keyframe.hpp"

using namespace guicap;

TEST_CASE("uniform sampling index arithmetic") {
    CHECK(sample_uniform_indices(10, 10) == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK(sample_uniform_indices(19, 10) == std::vector<int>{0, 2, 4, 6, 8, 10, 12, 14, 16, 18});
    CHECK(sample_uniform_indices(1, 10) == std::vector<int>(10, 0));
    // first and last raw frame always included
    auto idx = sample_uniform_indices(137, 10);
    CHECK(idx.front() == 0);
    CHECK(idx.back() == 136);
    for (std::size_t i = 1; i < idx.size(); ++i)
        CHECK(idx[i] >= idx[i - 1]);
}

TEST_CASE("sample_uniform picks the indexed frames") {
    std::vector<Image> frames;
    for (int i = 0; i < 19; ++i)
        frames.emplace_back(4, 4, Color{static_cast<std::uint8_t>(i), 0, 0});
    auto [sampled, indices] = sample_uniform(frames, 10);
    REQUIRE(sampled.size() == 10);
    for (std::size_t i = 0; i < sampled.size(); ++i)
        CHECK(sampled[i].at(0, 0).r == indices[i]);
}

TEST_CASE("embed: constants vanish, brightness offsets cancel, unit norm") {
    Image flat(32, 32, {90, 90, 90});
    Eigen::VectorXf z = embed(flat);
    REQUIRE(z.size() == kEmbedDim);
    CHECK(z.norm() == doctest::Approx(0.0));

    Image a(32, 32, {0, 0, 0});
    a.fill_rect({0, 0, 16, 16}, {200, 200, 200});
    Eigen::VectorXf va = embed(a);
    CHECK(va.norm() == doctest::Approx(1.0));
    CHECK(embed(a) == va); // deterministic

    Image b = a;
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            Color c = b.at(x, y);
            b.set(x, y, {static_cast<std::uint8_t>(c.r + 20),
                         static_cast<std::uint8_t>(c.g + 20),
                         static_cast<std::uint8_t>(c.b + 20)});
        }
    Eigen::VectorXf vb = embed(b);
    CHECK((va - vb).norm() == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("select_keyframes top-2 with ordered ties") {
    auto sel = select_keyframes({0.1f, 0.9f, 0.2f, 0.8f});
    CHECK(sel.s == 1);
    CHECK(sel.e == 3);

    sel = select_keyframes({0.5f, 0.5f, 0.1f});
    CHECK(sel.s == 0);
    CHECK(sel.e == 1);

    sel = select_keyframes({1.0f, 0.0f});
    CHECK(sel.s == 0);
    CHECK(sel.e == 1);

    CHECK_THROWS(select_keyframes({1.0f}));
}

TEST_CASE("heuristic keyframes from diff window") {
    auto make = [](std::uint8_t v) { return Image(8, 8, Color{v, v, v}); };

    SUBCASE("single change between frames 3 and 4") {
        std::vector<Image> crops(10, make(10));
        for (int i = 4; i < 10; ++i)
            crops[i] = make(200);
        auto sel = heuristic_keyframes(crops);
        CHECK(sel.s == 3);
        CHECK(sel.e == 4);
    }
    SUBCASE("all identical falls back to the full span") {
        std::vector<Image> crops(10, make(10));
        auto sel = heuristic_keyframes(crops);
        CHECK(sel.s == 0);
        CHECK(sel.e == 9);
    }
    SUBCASE("changes spanning frames 2..6") {
        std::vector<Image> crops;
        // equal steps from frame 2 to 7 so every d_t in 2..6 passes tau
        for (int i = 0; i < 10; ++i) {
            int level = std::clamp(i, 2, 7) - 2;
            crops.push_back(make(static_cast<std::uint8_t>(10 + 30 * level)));
        }
        auto sel = heuristic_keyframes(crops);
        CHECK(sel.s == 2);
        CHECK(sel.e == 7);
    }
    SUBCASE("small pre-wobble below tau is ignored") {
        std::vector<Image> crops(10, make(10));
        crops[1] = make(15); // diff 5 vs max diff 190
        for (int i = 6; i < 10; ++i)
            crops[i] = make(200);
        auto sel = heuristic_keyframes(crops);
        CHECK(sel.s == 5);
        CHECK(sel.e == 6);
    }
}

TEST_CASE("start_end baseline") {
    CHECK(start_end_keyframes(10).s == 0);
    CHECK(start_end_keyframes(10).e == 9);
    CHECK(start_end_keyframes(2).e == 1);
    CHECK(start_end_keyframes(3).e == 2);
}

TEST_CASE("embed_all stacks row-wise") {
    std::vector<Image> crops = {Image(16, 16, {0, 0, 0}), Image(16, 16, {255, 255, 255})};
    crops[0].fill_rect({0, 0, 8, 8}, {255, 255, 255});
    FrameFeatures feats = embed_all(crops);
    REQUIRE(feats.rows() == 2);
    REQUIRE(feats.cols() == kEmbedDim);
    CHECK(feats.row(0).norm() == doctest::Approx(1.0));
    CHECK(feats.row(1).norm() == doctest::Approx(0.0)); // constant crop
}
