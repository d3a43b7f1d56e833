#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "asmcrop/geometry.hpp"
#include "asmcrop/patterns.hpp"
#include "asmcrop/scoremap.hpp"

namespace asmcrop {

// Candidate generation grid: every (aspect, scale, center) combination,
// clipped into the image and deduplicated.
struct AnchorConfig {
    std::vector<std::pair<int, int>> aspect_ratios{{1, 1}, {4, 3}, {3, 4}, {16, 9}, {9, 16}};
    std::vector<double> scales{0.5, 0.6, 0.7, 0.8, 0.9};   // fraction of the largest fit
    int center_grid = 5;                                    // n x n uniform centers
    int min_side_px = 32;

    void validate() const;
};

// Deduplicated in-bounds anchor crops.  `aspect_override` restricts the set
// to one ratio.  Throws if no feasible anchor exists.
std::vector<CropRect> generate_anchors(int image_w, int image_h, const AnchorConfig& config,
                                       std::optional<std::pair<int, int>> aspect_override = {});

enum class Provenance { Coarse, Refined };

struct ScoredCrop {
    CropRect rect;
    double score = 0.0;
    Provenance provenance = Provenance::Coarse;
};

// All evaluated candidates (coarse anchors plus refined perturbations),
// ranked by score descending with a total tie-break: larger area first,
// then smaller y, then smaller x.
struct SearchResult {
    std::vector<ScoredCrop> ranked;

    const ScoredCrop& best() const { return ranked.front(); }
};

// Orders a, b by the search ranking rule; usable with std::sort.
bool search_rank_less(const ScoredCrop& a, const ScoredCrop& b);

// Stage 1 scores every anchor with the fast pooling path; stage 2 perturbs
// the top `top_k_refine` crops over center offsets {-0.05, 0, +0.05} of the
// size per axis, scale factors {0.95, 1, 1.05}, and aspect multipliers
// {0.95, 1, 1.05}, dropping out-of-bounds results.  The returned ranking
// covers the union of both stages, so the best score never falls below the
// best coarse score.
SearchResult two_stage_search(const AestheticScoreMap& map, const CompositionPattern& pattern,
                              const AnchorConfig& config = {}, int top_k_refine = 10);

struct ScoredCircle {
    CropCircle circle;
    double score = 0.0;
    Provenance provenance = Provenance::Coarse;
};

// Same two-stage scheme over square anchors, scoring the inscribed circle of
// each square; refinement keeps the aspect square.
std::vector<ScoredCircle> best_circles(const AestheticScoreMap& map,
                                       const CompositionPattern& pattern,
                                       const AnchorConfig& config = {}, int top_k_refine = 10);

}  // namespace asmcrop
