#include "asmcrop/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace asmcrop {

namespace {

std::uint64_t rect_key(const CropRect& r) {
    return (static_cast<std::uint64_t>(r.x) << 48) | (static_cast<std::uint64_t>(r.y) << 32) |
           (static_cast<std::uint64_t>(r.w) << 16) | static_cast<std::uint64_t>(r.h);
}

constexpr double kCenterOffsets[] = {-0.05, 0.0, 0.05};
constexpr double kScaleFactors[] = {0.95, 1.0, 1.05};
constexpr double kAspectFactors[] = {0.95, 1.0, 1.05};

// Perturbations of one seed crop: every combination of center offset per
// axis, scale factor, and width/height ratio multiplier, rounded to pixels.
// Out-of-bounds or undersized results are dropped, not clamped.
std::vector<CropRect> perturbations(const CropRect& seed, int image_w, int image_h, int min_side,
                                    bool keep_aspect) {
    std::vector<CropRect> out;
    double cx0 = seed.x + seed.w / 2.0;
    double cy0 = seed.y + seed.h / 2.0;
    for (double dx : kCenterOffsets) {
        for (double dy : kCenterOffsets) {
            for (double s : kScaleFactors) {
                for (double m : kAspectFactors) {
                    if (keep_aspect && m != 1.0) continue;
                    double ratio = std::sqrt(m);
                    int w = static_cast<int>(std::lround(seed.w * s * ratio));
                    int h = keep_aspect ? w : static_cast<int>(std::lround(seed.h * s / ratio));
                    if (w < min_side || h < min_side) continue;
                    double cx = cx0 + dx * seed.w;
                    double cy = cy0 + dy * seed.h;
                    CropRect r{static_cast<int>(std::lround(cx - w / 2.0)),
                               static_cast<int>(std::lround(cy - h / 2.0)), w, h};
                    if (r.inside_image(image_w, image_h)) out.push_back(r);
                }
            }
        }
    }
    return out;
}

}  // namespace

void AnchorConfig::validate() const {
    if (aspect_ratios.empty() || scales.empty())
        throw std::invalid_argument("anchor config needs aspect ratios and scales");
    for (auto [ax, ay] : aspect_ratios)
        if (ax < 1 || ay < 1) throw std::invalid_argument("aspect ratio terms must be positive");
    for (double s : scales)
        if (!(s > 0.0) || s > 1.0) throw std::invalid_argument("anchor scales must lie in (0, 1]");
    if (center_grid < 1) throw std::invalid_argument("center grid must be at least 1x1");
    if (min_side_px < 1) throw std::invalid_argument("min side must be positive");
}

std::vector<CropRect> generate_anchors(int image_w, int image_h, const AnchorConfig& config,
                                       std::optional<std::pair<int, int>> aspect_override) {
    config.validate();
    if (image_w < config.min_side_px || image_h < config.min_side_px)
        throw std::invalid_argument("image is smaller than the minimum crop side");

    std::vector<std::pair<int, int>> aspects =
        aspect_override ? std::vector<std::pair<int, int>>{*aspect_override} : config.aspect_ratios;

    std::vector<CropRect> anchors;
    std::unordered_set<std::uint64_t> seen;
    const int n = config.center_grid;
    for (auto [ax, ay] : aspects) {
        if (ax < 1 || ay < 1) throw std::invalid_argument("aspect ratio terms must be positive");
        // Largest crop of this ratio that fits the image.
        double w0, h0;
        if (static_cast<long long>(image_w) * ay <= static_cast<long long>(image_h) * ax) {
            w0 = image_w;
            h0 = static_cast<double>(image_w) * ay / ax;
        } else {
            h0 = image_h;
            w0 = static_cast<double>(image_h) * ax / ay;
        }
        for (double s : config.scales) {
            int w = static_cast<int>(std::lround(w0 * s));
            int h = static_cast<int>(std::lround(h0 * s));
            if (w < config.min_side_px || h < config.min_side_px) continue;
            if (w > image_w || h > image_h) continue;
            for (int v = 0; v < n; ++v) {
                for (int u = 0; u < n; ++u) {
                    double cx = (u + 0.5) * image_w / n;
                    double cy = (v + 0.5) * image_h / n;
                    int x = std::clamp(static_cast<int>(std::lround(cx - w / 2.0)), 0, image_w - w);
                    int y = std::clamp(static_cast<int>(std::lround(cy - h / 2.0)), 0, image_h - h);
                    CropRect r{x, y, w, h};
                    if (seen.insert(rect_key(r)).second) anchors.push_back(r);
                }
            }
        }
    }
    if (anchors.empty()) throw std::runtime_error("no feasible anchor crops for this image");
    return anchors;
}

bool search_rank_less(const ScoredCrop& a, const ScoredCrop& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.rect.area() != b.rect.area()) return a.rect.area() > b.rect.area();
    if (a.rect.y != b.rect.y) return a.rect.y < b.rect.y;
    if (a.rect.x != b.rect.x) return a.rect.x < b.rect.x;
    return a.rect.w > b.rect.w;
}

SearchResult two_stage_search(const AestheticScoreMap& map, const CompositionPattern& pattern,
                              const AnchorConfig& config, int top_k_refine) {
    if (top_k_refine < 0) throw std::invalid_argument("top_k_refine must be >= 0");
    SummedAreaTables tables(map);

    std::vector<CropRect> anchors = generate_anchors(map.width(), map.height(), config);
    std::unordered_set<std::uint64_t> seen;
    SearchResult result;
    for (const auto& rect : anchors) {
        if (!pattern.crop_big_enough(rect)) continue;
        seen.insert(rect_key(rect));
        result.ranked.push_back(
            ScoredCrop{rect, crop_score_fast(map, tables, pattern, rect), Provenance::Coarse});
    }
    if (result.ranked.empty())
        throw std::runtime_error("no anchor crop is large enough for pattern '" + pattern.name() + "'");

    std::sort(result.ranked.begin(), result.ranked.end(), search_rank_less);

    std::size_t refine = std::min<std::size_t>(static_cast<std::size_t>(top_k_refine),
                                               result.ranked.size());
    std::vector<ScoredCrop> refined;
    for (std::size_t k = 0; k < refine; ++k) {
        for (const auto& rect : perturbations(result.ranked[k].rect, map.width(), map.height(),
                                              config.min_side_px, /*keep_aspect=*/false)) {
            if (!pattern.crop_big_enough(rect)) continue;
            if (!seen.insert(rect_key(rect)).second) continue;
            refined.push_back(
                ScoredCrop{rect, crop_score_fast(map, tables, pattern, rect), Provenance::Refined});
        }
    }
    result.ranked.insert(result.ranked.end(), refined.begin(), refined.end());
    std::sort(result.ranked.begin(), result.ranked.end(), search_rank_less);
    return result;
}

namespace {

bool circle_rank_less(const ScoredCircle& a, const ScoredCircle& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.circle.r != b.circle.r) return a.circle.r > b.circle.r;
    if (a.circle.enclosing_square.y != b.circle.enclosing_square.y)
        return a.circle.enclosing_square.y < b.circle.enclosing_square.y;
    return a.circle.enclosing_square.x < b.circle.enclosing_square.x;
}

}  // namespace

std::vector<ScoredCircle> best_circles(const AestheticScoreMap& map,
                                       const CompositionPattern& pattern,
                                       const AnchorConfig& config, int top_k_refine) {
    if (top_k_refine < 0) throw std::invalid_argument("top_k_refine must be >= 0");
    std::vector<CropRect> anchors =
        generate_anchors(map.width(), map.height(), config, std::pair<int, int>{1, 1});

    std::unordered_set<std::uint64_t> seen;
    std::vector<ScoredCircle> ranked;
    for (const auto& rect : anchors) {
        if (!pattern.crop_big_enough(rect)) continue;
        seen.insert(rect_key(rect));
        CropCircle circle = CropCircle::inscribed(rect);
        ranked.push_back(ScoredCircle{circle, circle_score(map, pattern, circle), Provenance::Coarse});
    }
    if (ranked.empty())
        throw std::runtime_error("no square anchor is large enough for pattern '" + pattern.name() + "'");

    std::sort(ranked.begin(), ranked.end(), circle_rank_less);

    std::size_t refine = std::min<std::size_t>(static_cast<std::size_t>(top_k_refine), ranked.size());
    std::vector<ScoredCircle> refined;
    for (std::size_t k = 0; k < refine; ++k) {
        for (const auto& rect : perturbations(ranked[k].circle.enclosing_square, map.width(),
                                              map.height(), config.min_side_px, /*keep_aspect=*/true)) {
            if (!pattern.crop_big_enough(rect)) continue;
            if (!seen.insert(rect_key(rect)).second) continue;
            CropCircle circle = CropCircle::inscribed(rect);
            refined.push_back(
                ScoredCircle{circle, circle_score(map, pattern, circle), Provenance::Refined});
        }
    }
    ranked.insert(ranked.end(), refined.begin(), refined.end());
    std::sort(ranked.begin(), ranked.end(), circle_rank_less);
    return ranked;
}

}  // namespace asmcrop
