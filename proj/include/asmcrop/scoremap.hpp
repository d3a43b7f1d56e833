#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "asmcrop/geometry.hpp"
#include "asmcrop/patterns.hpp"

namespace asmcrop {

// Per-pixel, per-partition aesthetic scores: an H x W x L tensor where
// channel l holds the score a pixel earns when it lands in partition l of
// a crop.  Immutable once filled; every scoring operation is read-only.
class AestheticScoreMap {
public:
    AestheticScoreMap() = default;
    AestheticScoreMap(int height, int width, int channels, std::string pattern_name);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }   // L (pre-expansion)
    const std::string& pattern_name() const { return pattern_name_; }

    double at(int i, int j, int l) const { return data_[offset(i, j) + l]; }
    double& at(int i, int j, int l) { return data_[offset(i, j) + l]; }
    std::span<const double> pixel(int i, int j) const { return {data_.data() + offset(i, j), static_cast<std::size_t>(channels_)}; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    // Throws if any entry is NaN or infinite.
    void require_finite() const;

private:
    std::size_t offset(int i, int j) const {
        return (static_cast<std::size_t>(i) * width_ + j) * channels_;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::string pattern_name_;
    std::vector<double> data_;
};

// Per-channel 2-D prefix sums of a score map, (H+1) x (W+1) each, for O(1)
// rectangle sums.  Built once per map; queries are read-only.
class SummedAreaTables {
public:
    SummedAreaTables() = default;
    explicit SummedAreaTables(const AestheticScoreMap& map);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }

    // Sum of channel l over pixel rows [y0, y0+h) and cols [x0, x0+w).
    double rect_sum(int l, int x0, int y0, int w, int h) const {
        const double* t = tables_.data() + static_cast<std::size_t>(l) * stride_;
        std::size_t row0 = static_cast<std::size_t>(y0) * (width_ + 1);
        std::size_t row1 = static_cast<std::size_t>(y0 + h) * (width_ + 1);
        return t[row1 + x0 + w] - t[row0 + x0 + w] - t[row1 + x0] + t[row0 + x0];
    }

    bool matches(const AestheticScoreMap& map) const {
        return map.height() == height_ && map.width() == width_ && map.channels() == channels_;
    }

private:
    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::size_t stride_ = 0;
    std::vector<double> tables_;
};

// Score of pixel (i, j) inside `crop`: the map entry of the channel matching
// the pixel's partition index in that crop.
double composition_aware_score(const AestheticScoreMap& map, const CompositionPattern& pattern,
                               const CropRect& crop, int i, int j);

// Crop-level score: plain average of composition-aware pixel scores.
// Reference path; exact but O(w*h) per crop.
double crop_score_naive(const AestheticScoreMap& map, const CompositionPattern& pattern,
                        const CropRect& crop);

// Fast crop-level score: average of per-fine-cell means, each cell pulling
// from the channel its partition maps to, via summed-area tables.  Equals
// the naive path exactly when w, h are divisible by the fine grid; differs
// only by cell-boundary discretization otherwise.
double crop_score_fast(const AestheticScoreMap& map, const SummedAreaTables& tables,
                       const CompositionPattern& pattern, const CropRect& crop);

// Circular crop score: average of composition-aware scores over pixels whose
// centers fall inside the circle, using the enclosing square's partitions.
double circle_score(const AestheticScoreMap& map, const CompositionPattern& pattern,
                    const CropCircle& circle);

// Per-pixel composition-aware scores of one crop, as a w x h field
// (used for crop-level heat maps).
ScalarField crop_pixel_scores(const AestheticScoreMap& map, const CompositionPattern& pattern,
                              const CropRect& crop);

// Per-pixel mean and population standard deviation across channels.
// High mean marks content-important regions, high deviation marks
// composition-sensitive ones.
struct ChannelStats {
    ScalarField mean;
    ScalarField stddev;
};
ChannelStats channel_stats(const AestheticScoreMap& map);

// Min-max normalizes a field to 0..255 and writes binary PGM.
// A constant field maps to all zeros.
void write_heatmap(const ScalarField& field, const std::filesystem::path& path);

// Score map file codec ("ASM1"): magic, LE u32 H, W, L, u8 dtype
// (0 = f32, 1 = f64), row-major [H][W][L] payload.
enum class MapDtype : std::uint8_t { F32 = 0, F64 = 1 };
void save_score_map(const AestheticScoreMap& map, const std::filesystem::path& path,
                    MapDtype dtype = MapDtype::F64);
AestheticScoreMap load_score_map(const std::filesystem::path& path);

}  // namespace asmcrop
