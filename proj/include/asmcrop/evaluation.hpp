#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asmcrop/geometry.hpp"
#include "asmcrop/training.hpp"

namespace asmcrop {

// Intersection over union of two rectangles, in [0, 1].
double iou(const CropRect& a, const CropRect& b);

// Boundary displacement: mean of the four edge offsets, each normalized by
// the image side it runs along.
double disp(const CropRect& a, const CropRect& b, int image_w, int image_h);

// Spearman rank correlation with average ranks on ties.  Returns nullopt
// when either list has zero rank variance (correlation undefined).
std::optional<double> srcc(std::span<const double> a, std::span<const double> b);

// 1 iff `top_prediction` is among the n best crops by annotated score
// (score ties broken by annotation order).  Throws if n exceeds the count.
bool acc_top_n(int top_prediction, std::span<const double> annotated_scores, int n);

// Fraction of the four image corner points the crop covers (0, 0.25, ... 1);
// a spatial-bias diagnostic.
double corner_coverage(const CropRect& crop, int image_w, int image_h);

struct ImageMetrics {
    std::string id;
    double iou = 0.0;                 // predicted best vs annotated best crop
    double disp = 0.0;
    std::optional<double> srcc;       // over all annotated crops
    bool acc5 = false;
    bool acc10 = false;
    long long pair_count = 0;
    double pair_correct = 0.0;        // ties counted 0.5
    double corner_coverage = 0.0;     // of the predicted best crop
};

struct MetricReport {
    std::vector<std::string> metrics;   // which metrics were computed
    std::vector<ImageMetrics> images;
    double mean_iou = 0.0;
    double mean_disp = 0.0;
    std::optional<double> mean_srcc;   // images with undefined SRCC excluded
    double acc5 = 0.0;
    double acc10 = 0.0;
    double pair_accuracy = 0.0;        // pooled over all pairs
    long long total_pairs = 0;
};

inline const std::vector<std::string> kAllMetrics{"iou", "disp", "srcc",
                                                  "acc5", "acc10", "pairacc"};

// Scores every annotated crop with the model and aggregates the selected
// metrics (empty = all).  The "predicted best" is the model's top-ranked
// annotated crop; the ground truth is the top crop by annotated score.
// acc5/acc10 require at least that many crops per image.
MetricReport evaluate(const Scorer& scorer, std::span<const TrainSample> samples,
                      const CompositionPattern& pattern,
                      const std::vector<std::string>& metrics = {});

// Pooled ranking accuracy over pairs regenerated at `min_score_gap`.
double pair_ranking_accuracy(const Scorer& scorer, std::span<const TrainSample> samples,
                             const CompositionPattern& pattern, double min_score_gap);

void write_report_json(const MetricReport& report, const std::filesystem::path& path);
void write_report_csv(const MetricReport& report, const std::filesystem::path& path);

}  // namespace asmcrop
