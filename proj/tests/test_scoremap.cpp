#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "asmcrop/io_util.hpp"
#include "asmcrop/scoremap.hpp"
#include "test_util.hpp"

using namespace asmcrop;
using testutil::TempDir;
using testutil::random_map;

namespace {

// Brute-force circle pooling with the same pixel-center membership rule,
// written independently of circle_score.
double circle_oracle(const AestheticScoreMap& map, const CompositionPattern& pattern,
                     const CropCircle& circle) {
    const CropRect& sq = circle.enclosing_square;
    double sum = 0.0;
    long long count = 0;
    for (int i = sq.y; i < sq.y + sq.h; ++i) {
        for (int j = sq.x; j < sq.x + sq.w; ++j) {
            double dx = j + 0.5 - circle.cx, dy = i + 0.5 - circle.cy;
            if (dx * dx + dy * dy > circle.r * circle.r) continue;
            sum += map.at(i, j, pattern.partition_index(sq, i, j) - 1);
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

CropRect random_divisible_crop(std::mt19937& rng, const CompositionPattern& p, int img_w, int img_h) {
    const auto& e = p.expansion();
    std::uniform_int_distribution<int> mw(1, img_w / e.cells_x);
    std::uniform_int_distribution<int> mh(1, img_h / e.cells_y);
    int w = e.cells_x * mw(rng);
    int h = e.cells_y * mh(rng);
    std::uniform_int_distribution<int> xd(0, img_w - w), yd(0, img_h - h);
    return CropRect{xd(rng), yd(rng), w, h};
}

}  // namespace

TEST_SUITE("scoremap") {

TEST_CASE("composition-aware score is a pure channel lookup") {
    auto g11 = CompositionPattern::grid(1, 1);
    std::mt19937 rng(3);
    auto map1 = random_map(8, 8, 1, g11.name(), rng);
    CropRect a{0, 0, 8, 8}, b{2, 2, 4, 4};
    CHECK(composition_aware_score(map1, g11, a, 3, 3) == map1.at(3, 3, 0));
    CHECK(composition_aware_score(map1, g11, b, 3, 3) == map1.at(3, 3, 0));

    // All channels equal at a pixel: every containing crop reads the same value.
    auto g33 = CompositionPattern::grid(3, 3);
    AestheticScoreMap map9(6, 6, 9, g33.name());
    for (int l = 0; l < 9; ++l) map9.at(4, 4, l) = 2.5;
    CHECK(composition_aware_score(map9, g33, CropRect{0, 0, 6, 6}, 4, 4) == 2.5);
    CHECK(composition_aware_score(map9, g33, CropRect{3, 3, 3, 3}, 4, 4) == 2.5);
}

TEST_CASE("composition-aware score follows the partition index per crop") {
    auto g33 = CompositionPattern::grid(3, 3);
    std::mt19937 rng(5);
    auto map = random_map(6, 6, 9, g33.name(), rng);
    for (const CropRect& crop : {CropRect{0, 0, 6, 6}, CropRect{3, 3, 3, 3}}) {
        for (int i = crop.y; i < crop.bottom(); ++i) {
            for (int j = crop.x; j < crop.right(); ++j) {
                int expected_channel = g33.partition_index(crop, i, j);
                CHECK(composition_aware_score(map, g33, crop, i, j) ==
                      map.at(i, j, expected_channel - 1));
            }
        }
    }
    CHECK_THROWS(composition_aware_score(map, g33, CropRect{3, 3, 3, 3}, 1, 1));
}

TEST_CASE("naive crop score averages the crop") {
    auto g11 = CompositionPattern::grid(1, 1);
    AestheticScoreMap map(2, 2, 1, g11.name());
    map.at(0, 0, 0) = 1;
    map.at(0, 1, 0) = 2;
    map.at(1, 0, 0) = 3;
    map.at(1, 1, 0) = 4;
    CHECK(crop_score_naive(map, g11, CropRect{0, 0, 2, 2}) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("constant maps score the constant under every pattern and path") {
    std::mt19937 rng(9);
    for (const auto& p : {CompositionPattern::grid(3, 3), CompositionPattern::multi_rectangle(3),
                          CompositionPattern::multi_direction(), CompositionPattern::cross_rectangle()}) {
        AestheticScoreMap map(24, 24, p.partition_count(), p.name());
        for (auto& v : map.data()) v = 0.75;
        SummedAreaTables tables(map);
        for (int trial = 0; trial < 5; ++trial) {
            CropRect crop = random_divisible_crop(rng, p, 24, 24);
            CHECK(crop_score_naive(map, p, crop) == doctest::Approx(0.75).epsilon(1e-12));
            CHECK(crop_score_fast(map, tables, p, crop) == doctest::Approx(0.75).epsilon(1e-12));
        }
    }
}

TEST_CASE("fast path equals naive on cell-divisible crops") {
    std::mt19937 rng(17);
    auto g55 = CompositionPattern::grid(5, 5);
    auto map = random_map(24, 24, 25, g55.name(), rng, -3.0, 3.0);
    SummedAreaTables tables(map);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        CropRect crop = random_divisible_crop(rng, g55, 24, 24);
        double naive = crop_score_naive(map, g55, crop);
        double fast = crop_score_fast(map, tables, g55, crop);
        worst = std::max(worst, std::abs(naive - fast));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("fast path equals naive for cross pattern on a 12x12 map") {
    std::mt19937 rng(23);
    auto cross = CompositionPattern::cross_rectangle();
    auto map = random_map(12, 12, 12, cross.name(), rng);
    SummedAreaTables tables(map);
    for (int trial = 0; trial < 50; ++trial) {
        CropRect crop = random_divisible_crop(rng, cross, 12, 12);
        CHECK(crop_score_fast(map, tables, cross, crop) ==
              doctest::Approx(crop_score_naive(map, cross, crop)).epsilon(1e-6));
    }
}

TEST_CASE("grid 1x1 fast path reduces to a plain SAT average") {
    std::mt19937 rng(29);
    auto g11 = CompositionPattern::grid(1, 1);
    auto map = random_map(16, 16, 1, g11.name(), rng);
    SummedAreaTables tables(map);
    std::uniform_int_distribution<int> dim(1, 16);
    for (int trial = 0; trial < 30; ++trial) {
        int w = dim(rng), h = dim(rng);
        std::uniform_int_distribution<int> xd(0, 16 - w), yd(0, 16 - h);
        CropRect crop{xd(rng), yd(rng), w, h};
        CHECK(crop_score_fast(map, tables, g11, crop) ==
              doctest::Approx(crop_score_naive(map, g11, crop)).epsilon(1e-12));
    }
}

TEST_CASE("non-divisible crops stay within the discretization bound") {
    std::mt19937 rng(31);
    for (const auto& p : {CompositionPattern::grid(3, 3), CompositionPattern::cross_rectangle()}) {
        auto map = random_map(40, 40, p.partition_count(), p.name(), rng, -2.0, 2.0);
        SummedAreaTables tables(map);
        const auto& e = p.expansion();
        long long cells = static_cast<long long>(e.cells_x) * e.cells_y;
        for (int trial = 0; trial < 60; ++trial) {
            std::uniform_int_distribution<int> wd(e.cells_x, 40), hd(e.cells_y, 40);
            int w = wd(rng), h = hd(rng);
            std::uniform_int_distribution<int> xd(0, 40 - w), yd(0, 40 - h);
            CropRect crop{xd(rng), yd(rng), w, h};
            double gap = std::abs(crop_score_fast(map, tables, p, crop) -
                                  crop_score_naive(map, p, crop));
            double bound = 2.0 * static_cast<double>(cells) * 2.0 / std::min(w, h);
            CHECK(gap <= bound);
        }
    }
}

TEST_CASE("identical channels reduce crop scores to plain average pooling") {
    std::mt19937 rng(37);
    for (const auto& p : {CompositionPattern::grid(3, 3), CompositionPattern::multi_direction()}) {
        int l_count = p.partition_count();
        AestheticScoreMap map(18, 18, l_count, p.name());
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int i = 0; i < 18; ++i)
            for (int j = 0; j < 18; ++j) {
                double v = dist(rng);
                for (int l = 0; l < l_count; ++l) map.at(i, j, l) = v;
            }
        SummedAreaTables tables(map);
        for (int trial = 0; trial < 10; ++trial) {
            CropRect crop = random_divisible_crop(rng, p, 18, 18);
            double plain = 0.0;
            for (int i = crop.y; i < crop.bottom(); ++i)
                for (int j = crop.x; j < crop.right(); ++j) plain += map.at(i, j, 0);
            plain /= static_cast<double>(crop.area());
            CHECK(crop_score_naive(map, p, crop) == doctest::Approx(plain).epsilon(1e-12));
            CHECK(crop_score_fast(map, tables, p, crop) == doctest::Approx(plain).epsilon(1e-12));
        }
    }
}

TEST_CASE("adding a constant shifts crop and circle scores by that constant") {
    std::mt19937 rng(41);
    auto cross = CompositionPattern::cross_rectangle();
    auto map = random_map(30, 30, 12, cross.name(), rng);
    auto shifted = map;
    for (auto& v : shifted.data()) v += 1.5;

    CropRect crop{3, 2, 18, 24};
    CHECK(crop_score_naive(shifted, cross, crop) ==
          doctest::Approx(crop_score_naive(map, cross, crop) + 1.5).epsilon(1e-9));

    CropCircle circle = CropCircle::from_center(15.0, 15.0, 7.0);
    CHECK(circle_score(shifted, cross, circle) ==
          doctest::Approx(circle_score(map, cross, circle) + 1.5).epsilon(1e-9));

    auto base_stats = channel_stats(map);
    auto shifted_stats = channel_stats(shifted);
    for (std::size_t k = 0; k < base_stats.stddev.values.size(); ++k)
        CHECK(shifted_stats.stddev.values[k] ==
              doctest::Approx(base_stats.stddev.values[k]).epsilon(1e-9));
}

TEST_CASE("circle score on a constant map returns the constant exactly") {
    auto g33 = CompositionPattern::grid(3, 3);
    AestheticScoreMap map(20, 20, 9, g33.name());
    for (auto& v : map.data()) v = -0.375;
    CropCircle circle = CropCircle::from_center(10.0, 10.0, 6.0);
    // Exact: a mean of identical values.
    CHECK(circle_score(map, g33, circle) == -0.375);
}

TEST_CASE("tiny circle pools a single pixel") {
    auto g33 = CompositionPattern::grid(3, 3);
    std::mt19937 rng(43);
    auto map = random_map(20, 20, 9, g33.name(), rng);
    // Center on the pixel center of (10, 10); only that pixel is within 0.6.
    CropCircle tiny = CropCircle::from_center(10.5, 10.5, 0.6);
    REQUIRE(tiny.enclosing_square.w >= 1);
    double expected = map.at(10, 10, g33.partition_index(tiny.enclosing_square, 10, 10) - 1);
    CHECK(circle_score(map, g33, tiny) == expected);
}

TEST_CASE("circle score matches the brute-force membership loop") {
    std::mt19937 rng(47);
    auto cross = CompositionPattern::cross_rectangle();
    auto map = random_map(48, 48, 12, cross.name(), rng);
    std::uniform_real_distribution<double> cd(14.0, 34.0);
    for (int trial = 0; trial < 25; ++trial) {
        CropCircle circle = CropCircle::from_center(cd(rng), cd(rng), 10.0);
        REQUIRE(circle.inside_image(48, 48));
        CHECK(circle_score(map, cross, circle) ==
              doctest::Approx(circle_oracle(map, cross, circle)).epsilon(1e-12));
    }
    CHECK_THROWS(circle_score(map, cross, CropCircle::from_center(2.0, 24.0, 10.0)));
}

TEST_CASE("channel statistics on fixed fixtures") {
    auto g = CompositionPattern::grid(2, 1);
    AestheticScoreMap map(1, 1, 2, g.name());
    map.at(0, 0, 0) = 1.0;
    map.at(0, 0, 1) = 3.0;
    auto stats = channel_stats(map);
    CHECK(stats.mean.at(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(stats.stddev.at(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

    auto g11 = CompositionPattern::grid(1, 1);
    std::mt19937 rng(53);
    auto flat = random_map(6, 6, 1, g11.name(), rng);
    auto flat_stats = channel_stats(flat);
    for (double v : flat_stats.stddev.values) CHECK(v == 0.0);
}

TEST_CASE("channel statistics match an independent two-pass oracle") {
    std::mt19937 rng(59);
    auto cross = CompositionPattern::cross_rectangle();
    auto map = random_map(8, 8, 12, cross.name(), rng, -4.0, 4.0);
    auto stats = channel_stats(map);
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            double mean = 0.0;
            for (int l = 0; l < 12; ++l) mean += map.at(i, j, l);
            mean /= 12.0;
            double var = 0.0;
            for (int l = 0; l < 12; ++l) {
                double d = map.at(i, j, l) - mean;
                var += d * d;
            }
            double sd = std::sqrt(var / 12.0);
            CHECK(stats.mean.at(i, j) == doctest::Approx(mean).epsilon(1e-12));
            CHECK(stats.stddev.at(i, j) == doctest::Approx(sd).epsilon(1e-12));

            CHECK(stats.stddev.at(i, j) >= 0.0);
            double dev_sum = 0.0;
            for (int l = 0; l < 12; ++l) dev_sum += map.at(i, j, l) - stats.mean.at(i, j);
            CHECK(std::abs(dev_sum / 12.0) <= 1e-12);
        }
    }
}

TEST_CASE("stddev is zero exactly when all channels agree") {
    auto g = CompositionPattern::grid(3, 1);
    AestheticScoreMap map(1, 2, 3, g.name());
    for (int l = 0; l < 3; ++l) map.at(0, 0, l) = 7.0;
    map.at(0, 1, 0) = 1.0;
    map.at(0, 1, 1) = 1.0;
    map.at(0, 1, 2) = 1.0 + 1e-9;
    auto stats = channel_stats(map);
    CHECK(stats.stddev.at(0, 0) == 0.0);
    CHECK(stats.stddev.at(0, 1) > 0.0);
}

TEST_CASE("summed-area tables are exact on integer fixtures") {
    std::mt19937 rng(61);
    auto g = CompositionPattern::grid(2, 2);
    AestheticScoreMap map(15, 13, 4, g.name());
    std::uniform_int_distribution<int> vals(-9, 9);
    for (auto& v : map.data()) v = static_cast<double>(vals(rng));
    SummedAreaTables tables(map);
    std::uniform_int_distribution<int> wd(1, 13), hd(1, 15);
    for (int trial = 0; trial < 100; ++trial) {
        int w = wd(rng), h = hd(rng);
        std::uniform_int_distribution<int> xd(0, 13 - w), yd(0, 15 - h);
        int x = xd(rng), y = yd(rng);
        for (int l = 0; l < 4; ++l) {
            double direct = 0.0;
            for (int i = y; i < y + h; ++i)
                for (int j = x; j < x + w; ++j) direct += map.at(i, j, l);
            CHECK(tables.rect_sum(l, x, y, w, h) == direct);
        }
    }
}

TEST_CASE("heat map export normalizes and handles constant fields") {
    TempDir dir("heatmap");

    const std::string zeros_header = "P5\n3 2\n255\n";
    ScalarField zeros(2, 3, 0.0);
    write_heatmap(zeros, dir.path / "zeros.pgm");
    auto bytes = read_file(dir.path / "zeros.pgm");
    REQUIRE(bytes.size() == zeros_header.size() + 6);
    for (std::size_t k = zeros_header.size(); k < bytes.size(); ++k) CHECK(bytes[k] == 0);

    const std::string pair_header = "P5\n2 1\n255\n";
    ScalarField pair(1, 2);
    pair.at(0, 0) = 0.0;
    pair.at(0, 1) = 1.0;
    write_heatmap(pair, dir.path / "pair.pgm");
    bytes = read_file(dir.path / "pair.pgm");
    REQUIRE(bytes.size() == pair_header.size() + 2);
    CHECK(bytes[pair_header.size()] == 0);
    CHECK(bytes[pair_header.size() + 1] == 255);
}

TEST_CASE("score map files round-trip") {
    TempDir dir("asm1");
    std::mt19937 rng(67);
    auto cross = CompositionPattern::cross_rectangle();
    auto map = random_map(7, 9, 12, cross.name(), rng, -5.0, 5.0);

    save_score_map(map, dir.path / "map64.asm1", MapDtype::F64);
    auto loaded64 = load_score_map(dir.path / "map64.asm1");
    CHECK(loaded64.height() == 7);
    CHECK(loaded64.width() == 9);
    CHECK(loaded64.channels() == 12);
    for (std::size_t k = 0; k < map.data().size(); ++k)
        CHECK(loaded64.data()[k] == map.data()[k]);   // bitwise for f64

    save_score_map(map, dir.path / "map32.asm1", MapDtype::F32);
    auto loaded32 = load_score_map(dir.path / "map32.asm1");
    for (std::size_t k = 0; k < map.data().size(); ++k)
        CHECK(loaded32.data()[k] ==
              doctest::Approx(map.data()[k]).epsilon(1e-5));   // f32 storage tolerance
}

TEST_CASE("score map loader rejects corrupt files") {
    TempDir dir("asm1bad");
    std::mt19937 rng(71);
    auto g = CompositionPattern::grid(2, 2);
    auto map = random_map(4, 4, 4, g.name(), rng);
    save_score_map(map, dir.path / "ok.asm1");

    auto bytes = read_file(dir.path / "ok.asm1");
    bytes[0] = 'X';
    atomic_write_file(dir.path / "badmagic.asm1", bytes);
    CHECK_THROWS(load_score_map(dir.path / "badmagic.asm1"));

    bytes = read_file(dir.path / "ok.asm1");
    bytes.resize(bytes.size() - 5);
    atomic_write_file(dir.path / "truncated.asm1", bytes);
    CHECK_THROWS(load_score_map(dir.path / "truncated.asm1"));
}

TEST_CASE("crop pixel scores export the per-crop field") {
    std::mt19937 rng(73);
    auto g33 = CompositionPattern::grid(3, 3);
    auto map = random_map(12, 12, 9, g33.name(), rng);
    CropRect crop{2, 3, 6, 6};
    ScalarField field = crop_pixel_scores(map, g33, crop);
    REQUIRE(field.width == 6);
    REQUIRE(field.height == 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            CHECK(field.at(i, j) == composition_aware_score(map, g33, crop, crop.y + i, crop.x + j));
}

}  // TEST_SUITE
