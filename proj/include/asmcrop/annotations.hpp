#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "asmcrop/geometry.hpp"
#include "asmcrop/image.hpp"

namespace asmcrop {

struct AnnotatedCrop {
    CropRect rect;
    double score = 0.0;
};

// One training record: an image, its K scored crops, and an optional
// saliency map path.  Paths are stored as written in the annotation file
// and resolved relative to that file's directory.
struct AnnotatedImage {
    std::string image_path;
    std::optional<std::string> saliency_path;
    std::vector<AnnotatedCrop> crops;
};

// Per-pixel saliency in [0,1]; dimensions must match the image it belongs to.
struct SaliencyMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * width + j]; }
};

// JSON Lines, one object per image:
// {"image": "...", "saliency": "...|null", "crops": [{"x","y","w","h","score"}, ...]}
std::vector<AnnotatedImage> load_annotations(const std::filesystem::path& path);
void save_annotations(const std::vector<AnnotatedImage>& images, const std::filesystem::path& path);

// Binary PGM, values / 255, clamped to [0,1].
SaliencyMap load_saliency(const std::filesystem::path& path);

// Resolves a path from an annotation file relative to that file's directory.
std::filesystem::path resolve_relative(const std::filesystem::path& annotations_path,
                                       const std::string& entry_path);

}  // namespace asmcrop
