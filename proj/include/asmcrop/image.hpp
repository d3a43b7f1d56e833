#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "asmcrop/geometry.hpp"

namespace asmcrop {

// 8-bit raster, 1 (gray) or 3 (RGB) interleaved channels, row-major.
struct ImageBuffer {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> data;

    ImageBuffer() = default;
    ImageBuffer(int h, int w, int ch)
        : width(w), height(h), channels(ch),
          data(static_cast<std::size_t>(h) * w * ch, 0) {}

    std::uint8_t sample(int i, int j, int c) const {
        return data[(static_cast<std::size_t>(i) * width + j) * channels + c];
    }
    std::uint8_t& sample(int i, int j, int c) {
        return data[(static_cast<std::size_t>(i) * width + j) * channels + c];
    }
};

// Minimum raster size accepted by the scoring pipeline.
inline constexpr int kMinImageSide = 16;

// Binary PGM (P5) / PPM (P6), maxval 255 only.
ImageBuffer load_image(const std::filesystem::path& path);
void save_image(const ImageBuffer& img, const std::filesystem::path& path);

// Grayscale field as binary PGM; values are the caller's bytes verbatim.
void write_pgm_bytes(const std::vector<std::uint8_t>& bytes, int width, int height,
                     const std::filesystem::path& path);

}  // namespace asmcrop
