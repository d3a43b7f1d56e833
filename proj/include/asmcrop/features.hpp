#pragma once

#include <span>
#include <vector>

#include "asmcrop/image.hpp"

namespace asmcrop {

// Fixed hand-crafted per-pixel features, all deterministic:
//   0..2  red, green, blue in [0,1] (gray images replicate the single channel)
//   3     intensity (channel mean)
//   4     horizontal gradient magnitude, |central difference| / 2, clamped borders
//   5     vertical gradient magnitude, same rule
//   6..8  box-blurred intensity at radii 2, 4, 8 px (window clipped to the image)
// With `positional` on, three more:
//   9     i / H
//   10    j / W
//   11    distance of the pixel center from the image center, scaled to [0,1]
struct FeatureConfig {
    bool positional = false;

    static constexpr int kBaseDim = 9;
    static constexpr int kPositionalDim = 3;
    int dim() const { return positional ? kBaseDim + kPositionalDim : kBaseDim; }

    friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

struct FeatureField {
    int height = 0;
    int width = 0;
    int dim = 0;
    FeatureConfig config;
    std::vector<double> data;   // row-major [H][W][D]

    double at(int i, int j, int d) const {
        return data[(static_cast<std::size_t>(i) * width + j) * dim + d];
    }
    std::span<const double> pixel(int i, int j) const {
        return {data.data() + (static_cast<std::size_t>(i) * width + j) * dim,
                static_cast<std::size_t>(dim)};
    }
};

// Throws if the image is smaller than kMinImageSide on either side.
FeatureField extract_features(const ImageBuffer& img, const FeatureConfig& config = {});

}  // namespace asmcrop
