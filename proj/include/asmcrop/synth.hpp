#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "asmcrop/annotations.hpp"
#include "asmcrop/image.hpp"

namespace asmcrop {

// Synthetic benchmark generator.  Each image is a textured background plus
// one bright Gaussian blob (the salient object); the saliency map is the
// normalized blob mask.  Crops are scored by a planted rule:
//
//   score = base
//         - thirds_weight * thirds_distance * (1 - truncation)
//         - truncation_weight * truncation
//         + noise,   noise ~ N(0, sigma^2)
//
// where thirds_distance is the distance of the blob center from the nearest
// of the crop's four rule-of-thirds power points (normalized by the crop
// diagonal) and truncation is the fraction of blob pixels the crop cuts off.
// Grid 1x1 pooling cannot express the thirds term; composition-aware
// patterns can, which makes pattern comparisons testable by construction.
struct SynthConfig {
    int n_images = 20;
    int image_w = 96;
    int image_h = 96;
    int crops_per_image = 24;
    std::uint64_t seed = 0;
    double blob_radius_min = 12.0;
    double blob_radius_max = 16.0;
    double base_score = 5.0;
    double thirds_weight = 2.0;
    double truncation_weight = 2.5;
    double noise_sigma = 0.05;
    int min_crop_side = 40;   // rounded up to the crop side step

    void validate() const;
};

// Generated crop sides are multiples of this step so that every built-in
// composition pattern's fine grid divides them exactly.
inline constexpr int kCropSideStep = 12;

struct SynthBlob {
    double cx = 0.0;   // column coordinate of the blob center
    double cy = 0.0;   // row coordinate
    double radius = 0.0;
};

// Blob mask membership: pixel centers within the radius.
bool blob_contains(const SynthBlob& blob, int i, int j);

// Components of the planted rule, exposed so tests can recompute any
// emitted score independently.
double thirds_distance(const SynthBlob& blob, const CropRect& crop);
double truncation_fraction(const SynthBlob& blob, const CropRect& crop);
double planted_score(const SynthConfig& config, const SynthBlob& blob, const CropRect& crop,
                     double noise);

struct SynthCropInfo {
    double thirds_distance = 0.0;
    double truncation = 0.0;
    double noise = 0.0;
};

struct SynthImage {
    ImageBuffer image;
    SaliencyMap saliency;
    SynthBlob blob;
    std::vector<AnnotatedCrop> crops;
    std::vector<SynthCropInfo> crop_info;
};

// Deterministic for a given config; the rendered rasters, blobs, crops, and
// scores are all drawn from one seeded stream.
std::vector<SynthImage> generate_synth_images(const SynthConfig& config);

// Writes images/ (PPM), saliency/ (PGM), annotations.jsonl, and
// manifest.json (config, formula, and per-crop rule components) under out_dir.
void synth_generate(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace asmcrop
