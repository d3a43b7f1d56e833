#include "asmcrop/synth.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "asmcrop/io_util.hpp"

namespace asmcrop {

using nlohmann::json;

void SynthConfig::validate() const {
    if (n_images < 1) throw std::invalid_argument("need at least one image");
    if (image_w < kMinImageSide || image_h < kMinImageSide)
        throw std::invalid_argument("synthetic images must be at least " +
                                    std::to_string(kMinImageSide) + " px per side");
    if (crops_per_image < 2) throw std::invalid_argument("need at least 2 crops per image");
    if (!(blob_radius_min > 0.0) || blob_radius_max < blob_radius_min)
        throw std::invalid_argument("bad blob radius range");
    if (2.0 * blob_radius_max + 4.0 >= std::min(image_w, image_h))
        throw std::invalid_argument("blob radius too large for the image size");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
    int rounded_min = kCropSideStep * ((min_crop_side + kCropSideStep - 1) / kCropSideStep);
    if (min_crop_side < kMinImageSide || rounded_min > std::min(image_w, image_h))
        throw std::invalid_argument("bad minimum crop side");
}

bool blob_contains(const SynthBlob& blob, int i, int j) {
    double dx = j + 0.5 - blob.cx;
    double dy = i + 0.5 - blob.cy;
    return dx * dx + dy * dy <= blob.radius * blob.radius;
}

double thirds_distance(const SynthBlob& blob, const CropRect& crop) {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 1; a <= 2; ++a) {
        for (int b = 1; b <= 2; ++b) {
            double px = crop.x + crop.w * (a / 3.0);
            double py = crop.y + crop.h * (b / 3.0);
            best = std::min(best, std::hypot(blob.cx - px, blob.cy - py));
        }
    }
    return best / std::hypot(static_cast<double>(crop.w), static_cast<double>(crop.h));
}

double truncation_fraction(const SynthBlob& blob, const CropRect& crop) {
    int i0 = static_cast<int>(std::floor(blob.cy - blob.radius - 1.0));
    int i1 = static_cast<int>(std::ceil(blob.cy + blob.radius + 1.0));
    int j0 = static_cast<int>(std::floor(blob.cx - blob.radius - 1.0));
    int j1 = static_cast<int>(std::ceil(blob.cx + blob.radius + 1.0));
    long long total = 0, inside = 0;
    for (int i = i0; i <= i1; ++i) {
        for (int j = j0; j <= j1; ++j) {
            if (!blob_contains(blob, i, j)) continue;
            ++total;
            if (crop.contains_pixel(i, j)) ++inside;
        }
    }
    if (total == 0) return 1.0;
    return 1.0 - static_cast<double>(inside) / static_cast<double>(total);
}

double planted_score(const SynthConfig& config, const SynthBlob& blob, const CropRect& crop,
                     double noise) {
    double trunc = truncation_fraction(blob, crop);
    double dist = thirds_distance(blob, crop);
    return config.base_score - config.thirds_weight * dist * (1.0 - trunc) -
           config.truncation_weight * trunc + noise;
}

namespace {

struct Wave {
    double fx, fy, phase, amp;
};

}  // namespace

std::vector<SynthImage> generate_synth_images(const SynthConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const int w = config.image_w, h = config.image_h;
    std::vector<SynthImage> out;
    out.reserve(static_cast<std::size_t>(config.n_images));

    for (int n = 0; n < config.n_images; ++n) {
        SynthImage rec;
        rec.image = ImageBuffer(h, w, 3);
        rec.saliency.width = w;
        rec.saliency.height = h;
        rec.saliency.values.assign(static_cast<std::size_t>(w) * h, 0.0);

        rec.blob.radius = config.blob_radius_min +
                          unit(rng) * (config.blob_radius_max - config.blob_radius_min);
        double margin = rec.blob.radius + 2.0;
        rec.blob.cx = margin + unit(rng) * (w - 2.0 * margin);
        rec.blob.cy = margin + unit(rng) * (h - 2.0 * margin);

        Wave waves[3];
        for (auto& wave : waves) {
            wave.fx = 0.5 + 1.5 * unit(rng);
            wave.fy = 0.5 + 1.5 * unit(rng);
            wave.phase = 2.0 * std::numbers::pi * unit(rng);
            wave.amp = 0.015 + 0.025 * unit(rng);
        }

        double sigma = rec.blob.radius / 1.3;
        for (int i = 0; i < h; ++i) {
            for (int j = 0; j < w; ++j) {
                double base = 0.26;
                for (const auto& wave : waves)
                    base += wave.amp * std::cos(2.0 * std::numbers::pi *
                                                    (wave.fx * j / w + wave.fy * i / h) +
                                                wave.phase);
                base += 0.04 * (unit(rng) - 0.5);

                double dx = j + 0.5 - rec.blob.cx;
                double dy = i + 0.5 - rec.blob.cy;
                double bump = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
                rec.saliency.values[static_cast<std::size_t>(i) * w + j] = bump;

                // Cool dim background, bright warm blob.
                double r = base * 0.80 + 0.65 * bump;
                double g = base * 0.90 + 0.50 * bump;
                double b = base * 1.00 + 0.20 * bump;
                auto to_byte = [](double v) {
                    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
                };
                rec.image.sample(i, j, 0) = to_byte(r);
                rec.image.sample(i, j, 1) = to_byte(g);
                rec.image.sample(i, j, 2) = to_byte(b);
            }
        }

        // Crop sides are multiples of 12, so every built-in pattern's fine
        // grid divides them exactly (positions stay free).
        int min_steps = (config.min_crop_side + kCropSideStep - 1) / kCropSideStep;
        std::uniform_int_distribution<int> wdist(min_steps, w / kCropSideStep);
        std::uniform_int_distribution<int> hdist(min_steps, h / kCropSideStep);
        for (int k = 0; k < config.crops_per_image; ++k) {
            int cw = kCropSideStep * wdist(rng);
            int ch = kCropSideStep * hdist(rng);
            std::uniform_int_distribution<int> xdist(0, w - cw);
            std::uniform_int_distribution<int> ydist(0, h - ch);
            CropRect crop{xdist(rng), ydist(rng), cw, ch};

            SynthCropInfo info;
            info.thirds_distance = thirds_distance(rec.blob, crop);
            info.truncation = truncation_fraction(rec.blob, crop);
            info.noise = config.noise_sigma * gauss(rng);
            double score = planted_score(config, rec.blob, crop, info.noise);
            rec.crops.push_back(AnnotatedCrop{crop, score});
            rec.crop_info.push_back(info);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

void synth_generate(const SynthConfig& config, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    auto images = generate_synth_images(config);

    fs::create_directories(out_dir / "images");
    fs::create_directories(out_dir / "saliency");

    auto numbered = [](const char* stem, int n, const char* ext) {
        std::ostringstream name;
        name << stem << std::setw(4) << std::setfill('0') << n << ext;
        return name.str();
    };

    std::vector<AnnotatedImage> records;
    json manifest_images = json::array();
    for (std::size_t n = 0; n < images.size(); ++n) {
        const SynthImage& rec = images[n];
        std::string image_rel = "images/" + numbered("img_", static_cast<int>(n), ".ppm");
        std::string sal_rel = "saliency/" + numbered("sal_", static_cast<int>(n), ".pgm");
        save_image(rec.image, out_dir / image_rel);

        ImageBuffer sal_img(rec.saliency.height, rec.saliency.width, 1);
        for (std::size_t k = 0; k < rec.saliency.values.size(); ++k)
            sal_img.data[k] = static_cast<std::uint8_t>(
                std::lround(std::clamp(rec.saliency.values[k], 0.0, 1.0) * 255.0));
        save_image(sal_img, out_dir / sal_rel);

        AnnotatedImage ann;
        ann.image_path = image_rel;
        ann.saliency_path = sal_rel;
        ann.crops = rec.crops;
        records.push_back(ann);

        json entry;
        entry["image"] = image_rel;
        entry["saliency"] = sal_rel;
        entry["blob"] = {{"cx", rec.blob.cx}, {"cy", rec.blob.cy}, {"radius", rec.blob.radius}};
        json crops = json::array();
        for (std::size_t k = 0; k < rec.crops.size(); ++k) {
            const auto& c = rec.crops[k];
            const auto& info = rec.crop_info[k];
            crops.push_back({{"x", c.rect.x},
                             {"y", c.rect.y},
                             {"w", c.rect.w},
                             {"h", c.rect.h},
                             {"thirds_distance", info.thirds_distance},
                             {"truncation", info.truncation},
                             {"noise", info.noise},
                             {"score", c.score}});
        }
        entry["crops"] = std::move(crops);
        manifest_images.push_back(std::move(entry));
    }

    save_annotations(records, out_dir / "annotations.jsonl");

    json manifest;
    manifest["config"] = {{"n_images", config.n_images},
                          {"image_w", config.image_w},
                          {"image_h", config.image_h},
                          {"crops_per_image", config.crops_per_image},
                          {"seed", config.seed},
                          {"blob_radius_min", config.blob_radius_min},
                          {"blob_radius_max", config.blob_radius_max},
                          {"base_score", config.base_score},
                          {"thirds_weight", config.thirds_weight},
                          {"truncation_weight", config.truncation_weight},
                          {"noise_sigma", config.noise_sigma},
                          {"min_crop_side", config.min_crop_side}};
    manifest["formula"] =
        "score = base_score - thirds_weight * thirds_distance * (1 - truncation) - "
        "truncation_weight * truncation + noise";
    manifest["images"] = std::move(manifest_images);
    atomic_write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace asmcrop
