#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "asmcrop/features.hpp"
#include "asmcrop/patterns.hpp"
#include "asmcrop/scoremap.hpp"

namespace asmcrop {

// Learnable per-pixel linear map from features to L score channels: the
// score of pixel p in channel l is dot(features(p), weights[:, l]) + bias[l].
struct Scorer {
    int feature_dim = 0;                 // D
    int channels = 0;                    // L
    std::vector<double> weights;         // row-major [D][L]
    std::vector<double> bias;            // [L]
    std::string pattern_name;
    FeatureConfig feature_config;

    static Scorer zeros(const CompositionPattern& pattern, const FeatureConfig& config = {});

    double weight(int d, int l) const { return weights[static_cast<std::size_t>(d) * channels + l]; }
    double& weight(int d, int l) { return weights[static_cast<std::size_t>(d) * channels + l]; }

    CompositionPattern pattern() const { return CompositionPattern::parse(pattern_name); }

    void validate() const;   // finite parameters, consistent dimensions
};

// Applies the linear map per pixel.  Deterministic: identical image, config,
// and weights give a bitwise-identical map.
AestheticScoreMap score_image(const Scorer& scorer, const ImageBuffer& img);
AestheticScoreMap score_features(const Scorer& scorer, const FeatureField& features);

// Weight file codec ("ASMW"): magic, u32 version=1, u32 D, u32 L,
// u8 positional flag, pattern string (u16 length + UTF-8), f64 weights
// row-major [D][L], f64 bias [L].  Round trips bitwise.
void save_scorer(const Scorer& scorer, const std::filesystem::path& path);
Scorer load_scorer(const std::filesystem::path& path);

}  // namespace asmcrop
