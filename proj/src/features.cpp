#include "asmcrop/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace asmcrop {

namespace {

constexpr double kBlurRadii[3] = {2, 4, 8};

// (H+1)x(W+1) prefix sums of a plane for clipped box averages.
std::vector<double> prefix_sums(const std::vector<double>& plane, int h, int w) {
    std::vector<double> t(static_cast<std::size_t>(h + 1) * (w + 1), 0.0);
    for (int i = 0; i < h; ++i) {
        double row = 0.0;
        for (int j = 0; j < w; ++j) {
            row += plane[static_cast<std::size_t>(i) * w + j];
            t[static_cast<std::size_t>(i + 1) * (w + 1) + j + 1] =
                t[static_cast<std::size_t>(i) * (w + 1) + j + 1] + row;
        }
    }
    return t;
}

}  // namespace

FeatureField extract_features(const ImageBuffer& img, const FeatureConfig& config) {
    if (img.height < kMinImageSide || img.width < kMinImageSide) {
        throw std::invalid_argument("image is " + std::to_string(img.width) + "x" +
                                    std::to_string(img.height) + "; minimum side is " +
                                    std::to_string(kMinImageSide));
    }
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("image must have 1 or 3 channels");

    const int h = img.height, w = img.width;
    FeatureField field;
    field.height = h;
    field.width = w;
    field.dim = config.dim();
    field.config = config;
    field.data.assign(static_cast<std::size_t>(h) * w * field.dim, 0.0);

    std::vector<double> intensity(static_cast<std::size_t>(h) * w);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            double sum = 0.0;
            for (int c = 0; c < img.channels; ++c) sum += img.sample(i, j, c) / 255.0;
            intensity[static_cast<std::size_t>(i) * w + j] = sum / img.channels;
        }
    }
    auto sums = prefix_sums(intensity, h, w);
    auto box_mean = [&](int i, int j, int radius) {
        int y0 = std::max(0, i - radius), y1 = std::min(h - 1, i + radius);
        int x0 = std::max(0, j - radius), x1 = std::min(w - 1, j + radius);
        double s = sums[static_cast<std::size_t>(y1 + 1) * (w + 1) + x1 + 1] -
                   sums[static_cast<std::size_t>(y0) * (w + 1) + x1 + 1] -
                   sums[static_cast<std::size_t>(y1 + 1) * (w + 1) + x0] +
                   sums[static_cast<std::size_t>(y0) * (w + 1) + x0];
        return s / (static_cast<double>(y1 - y0 + 1) * (x1 - x0 + 1));
    };

    const double inv_center_norm = 1.0 / std::sqrt(0.5);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            double* f = field.data.data() + (static_cast<std::size_t>(i) * w + j) * field.dim;
            if (img.channels == 3) {
                f[0] = img.sample(i, j, 0) / 255.0;
                f[1] = img.sample(i, j, 1) / 255.0;
                f[2] = img.sample(i, j, 2) / 255.0;
            } else {
                f[0] = f[1] = f[2] = img.sample(i, j, 0) / 255.0;
            }
            f[3] = intensity[static_cast<std::size_t>(i) * w + j];

            int jl = std::max(0, j - 1), jr = std::min(w - 1, j + 1);
            int iu = std::max(0, i - 1), id = std::min(h - 1, i + 1);
            f[4] = std::abs(intensity[static_cast<std::size_t>(i) * w + jr] -
                            intensity[static_cast<std::size_t>(i) * w + jl]) / 2.0;
            f[5] = std::abs(intensity[static_cast<std::size_t>(id) * w + j] -
                            intensity[static_cast<std::size_t>(iu) * w + j]) / 2.0;

            for (int b = 0; b < 3; ++b) f[6 + b] = box_mean(i, j, static_cast<int>(kBlurRadii[b]));

            if (config.positional) {
                f[9] = static_cast<double>(i) / h;
                f[10] = static_cast<double>(j) / w;
                double du = (i + 0.5) / h - 0.5;
                double dv = (j + 0.5) / w - 0.5;
                f[11] = std::sqrt(du * du + dv * dv) * inv_center_norm;
            }
        }
    }
    return field;
}

}  // namespace asmcrop
