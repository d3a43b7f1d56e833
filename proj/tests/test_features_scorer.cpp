#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "asmcrop/features.hpp"
#include "asmcrop/image.hpp"
#include "asmcrop/io_util.hpp"
#include "asmcrop/scorer.hpp"
#include "asmcrop/scoremap.hpp"
#include "test_util.hpp"

using namespace asmcrop;
using testutil::TempDir;

namespace {

ImageBuffer random_image(int h, int w, int channels, std::mt19937& rng) {
    ImageBuffer img(h, w, channels);
    std::uniform_int_distribution<int> dist(0, 255);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(dist(rng));
    return img;
}

Scorer random_scorer(const CompositionPattern& pattern, std::mt19937& rng,
                     const FeatureConfig& config = {}) {
    Scorer s = Scorer::zeros(pattern, config);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& v : s.weights) v = dist(rng);
    for (auto& v : s.bias) v = dist(rng);
    return s;
}

}  // namespace

TEST_SUITE("features_scorer") {

TEST_CASE("constant gray image: zero gradients, blur equals intensity") {
    ImageBuffer img(16, 16, 1);
    std::fill(img.data.begin(), img.data.end(), static_cast<std::uint8_t>(120));
    FeatureField f = extract_features(img);
    REQUIRE(f.dim == 9);
    double v = 120.0 / 255.0;
    for (int i = 0; i < 16; ++i) {
        for (int j = 0; j < 16; ++j) {
            CHECK(f.at(i, j, 0) == doctest::Approx(v));   // replicated gray
            CHECK(f.at(i, j, 1) == doctest::Approx(v));
            CHECK(f.at(i, j, 2) == doctest::Approx(v));
            CHECK(f.at(i, j, 3) == doctest::Approx(v));
            CHECK(f.at(i, j, 4) == 0.0);
            CHECK(f.at(i, j, 5) == 0.0);
            for (int b = 6; b < 9; ++b) CHECK(f.at(i, j, b) == doctest::Approx(v).epsilon(1e-12));
        }
    }
}

TEST_CASE("vertical step edge: horizontal gradient only on the straddling columns") {
    ImageBuffer img(16, 20, 1);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 20; ++j) img.sample(i, j, 0) = j < 10 ? 50 : 200;
    FeatureField f = extract_features(img);
    for (int i = 0; i < 16; ++i) {
        for (int j = 0; j < 20; ++j) {
            bool straddles = (j == 9 || j == 10);
            if (straddles)
                CHECK(f.at(i, j, 4) == doctest::Approx((150.0 / 255.0) / 2.0));
            else
                CHECK(f.at(i, j, 4) == 0.0);
            CHECK(f.at(i, j, 5) == 0.0);   // no vertical structure
        }
    }
}

TEST_CASE("box blur features match a naive clipped-window loop") {
    std::mt19937 rng(101);
    ImageBuffer img = random_image(20, 24, 3, rng);
    FeatureField f = extract_features(img);

    std::vector<double> intensity(20 * 24);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 24; ++j)
            intensity[i * 24 + j] =
                (img.sample(i, j, 0) + img.sample(i, j, 1) + img.sample(i, j, 2)) / (3.0 * 255.0);

    const int radii[3] = {2, 4, 8};
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 24; ++j) {
            CHECK(f.at(i, j, 3) == doctest::Approx(intensity[i * 24 + j]).epsilon(1e-12));
            for (int b = 0; b < 3; ++b) {
                double sum = 0.0;
                int count = 0;
                for (int u = std::max(0, i - radii[b]); u <= std::min(19, i + radii[b]); ++u)
                    for (int v = std::max(0, j - radii[b]); v <= std::min(23, j + radii[b]); ++v) {
                        sum += intensity[u * 24 + v];
                        ++count;
                    }
                CHECK(std::abs(f.at(i, j, 6 + b) - sum / count) <= 1e-9);
            }
        }
    }
}

TEST_CASE("positional features extend the dimension to 12") {
    ImageBuffer img(16, 16, 1);
    FeatureField f = extract_features(img, FeatureConfig{.positional = true});
    REQUIRE(f.dim == 12);
    CHECK(f.at(0, 0, 9) == 0.0);
    CHECK(f.at(8, 0, 9) == doctest::Approx(0.5));
    CHECK(f.at(0, 8, 10) == doctest::Approx(0.5));
    // Corner pixel is farthest from the center.
    CHECK(f.at(0, 0, 11) > f.at(8, 8, 11));
    CHECK(f.at(0, 0, 11) <= 1.0);
}

TEST_CASE("undersized images are rejected") {
    ImageBuffer img(15, 40, 1);
    CHECK_THROWS_AS(extract_features(img), std::invalid_argument);
}

TEST_CASE("zero weights yield a constant map per channel") {
    auto g = CompositionPattern::grid(2, 2);
    Scorer s = Scorer::zeros(g);
    s.bias = {1.0, -2.0, 0.5, 3.0};
    ImageBuffer img(16, 16, 1);
    std::fill(img.data.begin(), img.data.end(), static_cast<std::uint8_t>(33));
    AestheticScoreMap map = score_image(s, img);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            for (int l = 0; l < 4; ++l) CHECK(map.at(i, j, l) == s.bias[l]);
}

TEST_CASE("one-hot weight on intensity reproduces the intensity field") {
    std::mt19937 rng(103);
    auto g11 = CompositionPattern::grid(1, 1);
    Scorer s = Scorer::zeros(g11);
    s.weight(3, 0) = 1.0;   // intensity feature
    ImageBuffer img = random_image(16, 16, 1, rng);
    AestheticScoreMap map = score_image(s, img);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            CHECK(map.at(i, j, 0) == doctest::Approx(img.sample(i, j, 0) / 255.0).epsilon(1e-12));
}

TEST_CASE("score map matches a per-pixel dot-product loop") {
    std::mt19937 rng(107);
    auto cross = CompositionPattern::cross_rectangle();
    Scorer s = random_scorer(cross, rng);
    ImageBuffer img = random_image(18, 16, 3, rng);
    FeatureField f = extract_features(img);
    AestheticScoreMap map = score_features(s, f);
    for (int i = 0; i < 18; ++i) {
        for (int j = 0; j < 16; ++j) {
            for (int l = 0; l < 12; ++l) {
                double expected = s.bias[l];
                for (int d = 0; d < 9; ++d) expected += f.at(i, j, d) * s.weight(d, l);
                CHECK(map.at(i, j, l) == doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("scoring is linear in the parameters") {
    std::mt19937 rng(109);
    auto g = CompositionPattern::grid(3, 3);
    Scorer a = random_scorer(g, rng);
    Scorer b = random_scorer(g, rng);
    double alpha = 0.3, beta = -1.7;
    Scorer mix = Scorer::zeros(g);
    for (std::size_t k = 0; k < mix.weights.size(); ++k)
        mix.weights[k] = alpha * a.weights[k] + beta * b.weights[k];
    for (std::size_t k = 0; k < mix.bias.size(); ++k)
        mix.bias[k] = alpha * a.bias[k] + beta * b.bias[k];

    ImageBuffer img = random_image(16, 16, 3, rng);
    auto map_a = score_image(a, img);
    auto map_b = score_image(b, img);
    auto map_mix = score_image(mix, img);
    for (std::size_t k = 0; k < map_mix.data().size(); ++k)
        CHECK(map_mix.data()[k] ==
              doctest::Approx(alpha * map_a.data()[k] + beta * map_b.data()[k]).epsilon(1e-12));
}

TEST_CASE("scoring is bitwise deterministic") {
    std::mt19937 rng(113);
    auto cross = CompositionPattern::cross_rectangle();
    Scorer s = random_scorer(cross, rng);
    ImageBuffer img = random_image(16, 16, 3, rng);
    auto first = score_image(s, img);
    auto second = score_image(s, img);
    CHECK(first.data() == second.data());
}

TEST_CASE("crop scores are affine in the parameters") {
    std::mt19937 rng(127);
    auto g = CompositionPattern::grid(3, 3);
    Scorer a = random_scorer(g, rng);
    Scorer b = random_scorer(g, rng);
    ImageBuffer img = random_image(16, 16, 1, rng);
    CropRect crop{2, 1, 12, 12};

    double t = 0.37;
    Scorer mix = Scorer::zeros(g);
    for (std::size_t k = 0; k < mix.weights.size(); ++k)
        mix.weights[k] = (1 - t) * a.weights[k] + t * b.weights[k];
    for (std::size_t k = 0; k < mix.bias.size(); ++k)
        mix.bias[k] = (1 - t) * a.bias[k] + t * b.bias[k];

    double phi_a = crop_score_naive(score_image(a, img), g, crop);
    double phi_b = crop_score_naive(score_image(b, img), g, crop);
    double phi_mix = crop_score_naive(score_image(mix, img), g, crop);
    CHECK(phi_mix == doctest::Approx((1 - t) * phi_a + t * phi_b).epsilon(1e-12));
}

TEST_CASE("weight files round-trip bitwise") {
    TempDir dir("asmw");
    std::mt19937 rng(131);
    auto cross = CompositionPattern::cross_rectangle();
    Scorer s = random_scorer(cross, rng, FeatureConfig{.positional = true});
    save_scorer(s, dir.path / "model.asmw");
    Scorer loaded = load_scorer(dir.path / "model.asmw");
    CHECK(loaded.feature_dim == s.feature_dim);
    CHECK(loaded.channels == s.channels);
    CHECK(loaded.pattern_name == s.pattern_name);
    CHECK(loaded.feature_config.positional);
    CHECK(loaded.weights == s.weights);
    CHECK(loaded.bias == s.bias);
}

TEST_CASE("weight file loader rejects corrupt and inconsistent files") {
    TempDir dir("asmwbad");
    std::mt19937 rng(137);
    Scorer s = random_scorer(CompositionPattern::grid(2, 2), rng);
    save_scorer(s, dir.path / "ok.asmw");

    auto bytes = read_file(dir.path / "ok.asmw");
    bytes[0] = 'Z';
    atomic_write_file(dir.path / "badmagic.asmw", bytes);
    CHECK_THROWS(load_scorer(dir.path / "badmagic.asmw"));

    bytes = read_file(dir.path / "ok.asmw");
    bytes.resize(bytes.size() - 3);
    atomic_write_file(dir.path / "truncated.asmw", bytes);
    CHECK_THROWS(load_scorer(dir.path / "truncated.asmw"));

    // Channel count that disagrees with the stored pattern string.
    ByteWriter w;
    w.raw("ASMW", 4);
    w.u32(1);
    w.u32(9);
    w.u32(5);   // grid:3x3 needs 9 channels
    w.u8(0);
    std::string name = "grid:3x3";
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.raw(name.data(), name.size());
    for (int k = 0; k < 9 * 5 + 5; ++k) w.f64(0.0);
    atomic_write_file(dir.path / "mismatch.asmw", w.bytes);
    CHECK_THROWS(load_scorer(dir.path / "mismatch.asmw"));
}

TEST_CASE("PGM and PPM round-trip; malformed headers are rejected") {
    TempDir dir("pnm");
    std::mt19937 rng(139);
    ImageBuffer gray = random_image(16, 17, 1, rng);
    save_image(gray, dir.path / "img.pgm");
    ImageBuffer gray2 = load_image(dir.path / "img.pgm");
    CHECK(gray2.channels == 1);
    CHECK(gray2.width == 17);
    CHECK(gray2.data == gray.data);

    ImageBuffer rgb = random_image(16, 16, 3, rng);
    save_image(rgb, dir.path / "img.ppm");
    ImageBuffer rgb2 = load_image(dir.path / "img.ppm");
    CHECK(rgb2.channels == 3);
    CHECK(rgb2.data == rgb.data);

    atomic_write_file(dir.path / "bad1.pgm", std::string("P7\n4 4\n255\n0123456789abcdef"));
    CHECK_THROWS(load_image(dir.path / "bad1.pgm"));
    atomic_write_file(dir.path / "bad2.pgm", std::string("P5\n4 4\n100\n0123456789abcdef"));
    CHECK_THROWS(load_image(dir.path / "bad2.pgm"));
    atomic_write_file(dir.path / "bad3.pgm", std::string("P5\n4 4\n255\n01234"));
    CHECK_THROWS(load_image(dir.path / "bad3.pgm"));

    // Comments in the header are fine.
    std::string with_comment = "P5\n# a comment\n2 2\n255\nabcd";
    atomic_write_file(dir.path / "comment.pgm", with_comment);
    ImageBuffer c = load_image(dir.path / "comment.pgm");
    CHECK(c.width == 2);
    CHECK(c.data[0] == 'a');
}

}  // TEST_SUITE
