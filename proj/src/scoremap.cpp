#include "asmcrop/scoremap.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "asmcrop/image.hpp"
#include "asmcrop/io_util.hpp"

namespace asmcrop {

namespace {

void require_pattern_match(const AestheticScoreMap& map, const CompositionPattern& pattern) {
    if (map.channels() != pattern.partition_count()) {
        throw std::invalid_argument("score map has " + std::to_string(map.channels()) +
                                    " channels but pattern '" + pattern.name() + "' has " +
                                    std::to_string(pattern.partition_count()) + " partitions");
    }
}

void require_poolable(const CompositionPattern& pattern, const CropRect& crop) {
    if (!pattern.crop_big_enough(crop)) {
        throw std::invalid_argument("crop " + std::to_string(crop.w) + "x" + std::to_string(crop.h) +
                                    " is smaller than the pattern's fine grid (" +
                                    std::to_string(pattern.expansion().cells_x) + "x" +
                                    std::to_string(pattern.expansion().cells_y) + ")");
    }
}

}  // namespace

AestheticScoreMap::AestheticScoreMap(int height, int width, int channels, std::string pattern_name)
    : height_(height), width_(width), channels_(channels), pattern_name_(std::move(pattern_name)) {
    if (height < 1 || width < 1 || channels < 1)
        throw std::invalid_argument("score map dimensions must be positive");
    data_.assign(static_cast<std::size_t>(height) * width * channels, 0.0);
}

void AestheticScoreMap::require_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) throw std::runtime_error("score map contains a non-finite entry");
    }
}

SummedAreaTables::SummedAreaTables(const AestheticScoreMap& map)
    : height_(map.height()), width_(map.width()), channels_(map.channels()) {
    stride_ = static_cast<std::size_t>(height_ + 1) * (width_ + 1);
    tables_.assign(stride_ * channels_, 0.0);
    for (int l = 0; l < channels_; ++l) {
        double* t = tables_.data() + static_cast<std::size_t>(l) * stride_;
        for (int i = 0; i < height_; ++i) {
            double row_sum = 0.0;
            std::size_t cur = static_cast<std::size_t>(i + 1) * (width_ + 1);
            std::size_t prev = static_cast<std::size_t>(i) * (width_ + 1);
            for (int j = 0; j < width_; ++j) {
                row_sum += map.at(i, j, l);
                t[cur + j + 1] = t[prev + j + 1] + row_sum;
            }
        }
    }
}

double composition_aware_score(const AestheticScoreMap& map, const CompositionPattern& pattern,
                               const CropRect& crop, int i, int j) {
    require_pattern_match(map, pattern);
    require_crop_in_image(crop, map.width(), map.height());
    int l = pattern.partition_index(crop, i, j);   // throws if outside the crop
    return map.at(i, j, l - 1);
}

double crop_score_naive(const AestheticScoreMap& map, const CompositionPattern& pattern,
                        const CropRect& crop) {
    require_pattern_match(map, pattern);
    require_crop_in_image(crop, map.width(), map.height());
    require_poolable(pattern, crop);

    double sum = 0.0;
    for (int i = crop.y; i < crop.bottom(); ++i) {
        for (int j = crop.x; j < crop.right(); ++j) {
            sum += map.at(i, j, pattern.partition_index(crop, i, j) - 1);
        }
    }
    return sum / static_cast<double>(crop.area());
}

double crop_score_fast(const AestheticScoreMap& map, const SummedAreaTables& tables,
                       const CompositionPattern& pattern, const CropRect& crop) {
    require_pattern_match(map, pattern);
    if (!tables.matches(map)) throw std::invalid_argument("summed-area tables do not match the map");
    require_crop_in_image(crop, map.width(), map.height());
    require_poolable(pattern, crop);

    const GridExpansion& e = pattern.expansion();
    double total = 0.0;
    for (int cr = 0; cr < e.cells_y; ++cr) {
        int y0 = crop.y + fine_cell_begin(cr, e.cells_y, crop.h);
        int y1 = crop.y + fine_cell_begin(cr + 1, e.cells_y, crop.h);
        for (int cc = 0; cc < e.cells_x; ++cc) {
            int x0 = crop.x + fine_cell_begin(cc, e.cells_x, crop.w);
            int x1 = crop.x + fine_cell_begin(cc + 1, e.cells_x, crop.w);
            int channel = e.channel_map[static_cast<std::size_t>(cr) * e.cells_x + cc] - 1;
            double cell_sum = tables.rect_sum(channel, x0, y0, x1 - x0, y1 - y0);
            total += cell_sum / (static_cast<double>(x1 - x0) * (y1 - y0));
        }
    }
    return total / (static_cast<double>(e.cells_x) * e.cells_y);
}

double circle_score(const AestheticScoreMap& map, const CompositionPattern& pattern,
                    const CropCircle& circle) {
    require_pattern_match(map, pattern);
    if (!circle.inside_image(map.width(), map.height()))
        throw std::invalid_argument("circle does not lie inside the image");
    // Partition indices stay well defined below the fine-grid size, so tiny
    // circles (down to a single pixel) are allowed here, unlike cell pooling.
    const CropRect& sq = circle.enclosing_square;

    double sum = 0.0;
    long long count = 0;
    for (int i = sq.y; i < sq.bottom(); ++i) {
        for (int j = sq.x; j < sq.right(); ++j) {
            if (!circle.contains_pixel(i, j)) continue;
            sum += map.at(i, j, pattern.partition_index(sq, i, j) - 1);
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("circle contains no pixel centers");
    return sum / static_cast<double>(count);
}

ScalarField crop_pixel_scores(const AestheticScoreMap& map, const CompositionPattern& pattern,
                              const CropRect& crop) {
    require_pattern_match(map, pattern);
    require_crop_in_image(crop, map.width(), map.height());
    ScalarField field(crop.h, crop.w);
    for (int i = 0; i < crop.h; ++i)
        for (int j = 0; j < crop.w; ++j)
            field.at(i, j) = map.at(crop.y + i, crop.x + j,
                                    pattern.partition_index(crop, crop.y + i, crop.x + j) - 1);
    return field;
}

ChannelStats channel_stats(const AestheticScoreMap& map) {
    ChannelStats stats;
    stats.mean = ScalarField(map.height(), map.width());
    stats.stddev = ScalarField(map.height(), map.width());
    const int L = map.channels();
    for (int i = 0; i < map.height(); ++i) {
        for (int j = 0; j < map.width(); ++j) {
            auto px = map.pixel(i, j);
            double mean = 0.0;
            for (double v : px) mean += v;
            mean /= L;
            double var = 0.0;
            for (double v : px) var += (v - mean) * (v - mean);
            var /= L;   // population variance
            stats.mean.at(i, j) = mean;
            stats.stddev.at(i, j) = std::sqrt(var);
        }
    }
    return stats;
}

void write_heatmap(const ScalarField& field, const std::filesystem::path& path) {
    if (field.values.empty()) throw std::invalid_argument("empty field");
    for (double v : field.values)
        if (!std::isfinite(v)) throw std::invalid_argument("field contains a non-finite value");

    auto [mn_it, mx_it] = std::minmax_element(field.values.begin(), field.values.end());
    double mn = *mn_it, mx = *mx_it;
    std::vector<std::uint8_t> bytes(field.values.size(), 0);
    if (mx > mn) {
        double scale = 255.0 / (mx - mn);
        for (std::size_t k = 0; k < field.values.size(); ++k)
            bytes[k] = static_cast<std::uint8_t>(std::lround((field.values[k] - mn) * scale));
    }
    write_pgm_bytes(bytes, field.width, field.height, path);
}

void save_score_map(const AestheticScoreMap& map, const std::filesystem::path& path, MapDtype dtype) {
    map.require_finite();
    ByteWriter w;
    w.raw("ASM1", 4);
    w.u32(static_cast<std::uint32_t>(map.height()));
    w.u32(static_cast<std::uint32_t>(map.width()));
    w.u32(static_cast<std::uint32_t>(map.channels()));
    w.u8(static_cast<std::uint8_t>(dtype));
    if (dtype == MapDtype::F32) {
        for (double v : map.data()) w.f32(static_cast<float>(v));
    } else {
        for (double v : map.data()) w.f64(v);
    }
    atomic_write_file(path, w.bytes);
}

AestheticScoreMap load_score_map(const std::filesystem::path& path) {
    auto bytes = read_file(path);
    ByteReader r{bytes.data(), bytes.size()};
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, "ASM1", 4) != 0)
        throw std::runtime_error("not a score map file (bad magic): " + path.string());
    auto h = r.u32(), w = r.u32(), l = r.u32();
    if (h < 1 || w < 1 || l < 1) throw std::runtime_error("bad score map dimensions: " + path.string());
    auto dtype = r.u8();
    if (dtype > 1) throw std::runtime_error("unknown score map dtype tag: " + path.string());

    AestheticScoreMap map(static_cast<int>(h), static_cast<int>(w), static_cast<int>(l), "");
    std::size_t n = map.data().size();
    std::size_t elem = dtype == 0 ? 4 : 8;
    if (r.remaining() != n * elem)
        throw std::runtime_error("score map payload size mismatch (truncated?): " + path.string());
    for (std::size_t k = 0; k < n; ++k)
        map.data()[k] = dtype == 0 ? static_cast<double>(r.f32()) : r.f64();
    map.require_finite();
    return map;
}

}  // namespace asmcrop
