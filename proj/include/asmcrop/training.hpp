#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asmcrop/annotations.hpp"
#include "asmcrop/features.hpp"
#include "asmcrop/patterns.hpp"
#include "asmcrop/scorer.hpp"

namespace asmcrop {

// Ordered crop pair: the winner's annotated score beats the loser's by at
// least the generation threshold (and strictly, so ties never pair up).
struct CropPair {
    int winner = 0;
    int loser = 0;
};

struct PairSet {
    std::vector<CropPair> pairs;
    double min_score_gap = 0.0;   // the threshold the set was generated with
};

// All ordered pairs (k, t) with score_k - score_t >= gap and score_k > score_t.
// With K crops this yields at most (K^2 - K) / 2 pairs.  Needs K >= 2.
PairSet generate_pairs(const std::vector<AnnotatedCrop>& crops, double min_score_gap);

// One training record with its pixel data loaded.
struct TrainSample {
    ImageBuffer image;
    std::vector<AnnotatedCrop> crops;
    PairSet pairs;
    std::optional<SaliencyMap> saliency;
    std::string id;
};

TrainSample make_sample(ImageBuffer image, std::vector<AnnotatedCrop> crops,
                        std::optional<SaliencyMap> saliency, double min_score_gap,
                        std::string id = {});

// Loads the images and saliency maps referenced by annotation records;
// relative paths resolve against the annotation file's directory.
std::vector<TrainSample> load_samples(const std::vector<AnnotatedImage>& records,
                                      const std::filesystem::path& annotations_path,
                                      double min_score_gap);

// Per-image state reused across optimization steps: the feature field plus,
// for every crop, the per-channel pooled feature sums and pixel counts.
// Crop scores become O(D*L) dot products and, because scores are linear in
// the parameters, the same sums are the exact score gradients.
class PreparedSample {
public:
    PreparedSample(const TrainSample& sample, const CompositionPattern& pattern,
                   const FeatureConfig& config);

    struct CropAggregate {
        std::vector<double> feature_sums;   // [D][L]: per-channel feature totals
        std::vector<double> pixel_counts;   // [L]
        double area = 0.0;
    };

    const FeatureField& features() const { return features_; }
    const std::vector<AnnotatedCrop>& crops() const { return crops_; }
    const PairSet& pairs() const { return pairs_; }
    const std::optional<SaliencyMap>& saliency() const { return saliency_; }
    const std::vector<CropAggregate>& aggregates() const { return aggregates_; }
    const std::string& id() const { return id_; }
    int width() const { return features_.width; }
    int height() const { return features_.height; }

private:
    FeatureField features_;
    std::vector<AnnotatedCrop> crops_;
    PairSet pairs_;
    std::optional<SaliencyMap> saliency_;
    std::vector<CropAggregate> aggregates_;
    std::string id_;
};

// Crop-level score of one annotated crop; bit-for-bit the same value the
// optimizer and the evaluation metrics see.  Agrees with crop_score_naive up
// to floating-point summation order.
double prepared_crop_score(const Scorer& scorer, const PreparedSample& sample, std::size_t crop_index);
std::vector<double> prepared_crop_scores(const Scorer& scorer, const PreparedSample& sample);

struct LossBreakdown {
    double rank = 0.0;       // hinge ranking loss
    double saliency = 0.0;   // saliency term before weighting
    double total = 0.0;      // rank + weight * saliency
};

struct Gradient {
    std::vector<double> weights;   // [D][L]
    std::vector<double> bias;      // [L]
};

// Hinge ranking loss over a sample's pairs: sum of max{0, 1 + phi_loser - phi_winner}.
double ranking_loss(const Scorer& scorer, const PreparedSample& sample);
double ranking_loss(const Scorer& scorer, const ImageBuffer& image,
                    const std::vector<AnnotatedCrop>& crops, const PairSet& pairs);

// Saliency-aware regularizer: mean over pixels of (1 - s) * stddev / mean_stddev.
// Defined as 0 when the image-mean channel stddev falls below std_floor.
double saliency_loss(const Scorer& scorer, const PreparedSample& sample, double std_floor = 1e-8);
double saliency_loss(const Scorer& scorer, const ImageBuffer& image, const SaliencyMap& saliency,
                     double std_floor = 1e-8);

// Batch loss: sum over samples of rank + saliency_weight * saliency terms.
// A positive weight requires every sample to carry a saliency map.
LossBreakdown total_loss(const Scorer& scorer, std::span<const PreparedSample> batch,
                         double saliency_weight, double std_floor = 1e-8);

// Full analytic gradient of the batch loss, including the dependence of the
// image-mean stddev normalizer on the parameters.  The hinge subgradient at
// an exactly-zero argument is 0, as is the stddev subgradient at zero spread.
Gradient loss_gradient(const Scorer& scorer, std::span<const PreparedSample> batch,
                       double saliency_weight, double std_floor = 1e-8,
                       LossBreakdown* breakdown = nullptr);

// Fraction of pairs with phi(winner) > phi(loser), pooled over all samples;
// exact ties count 0.5.  Throws if no sample has pairs.
double pair_accuracy(const Scorer& scorer, std::span<const PreparedSample> samples);

struct TrainConfig {
    double saliency_weight = 0.1;    // trade-off on the saliency term
    double min_score_gap = 0.3;      // pair-generation threshold
    int epochs = 200;
    double learning_rate = 1e-2;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    double std_floor = 1e-8;
    double validation_fraction = 0.1;
    FeatureConfig features;

    void validate() const;
};

struct EpochLog {
    int epoch = 0;                // 1-based
    double loss_rank = 0.0;       // summed over training images
    double loss_saliency = 0.0;   // unweighted saliency term, summed
    double loss_total = 0.0;
    double val_pair_accuracy = 0.0;
};

struct TrainResult {
    Scorer scorer;                // snapshot of the best validation epoch
    std::vector<EpochLog> log;
    int best_epoch = 0;
    double best_val_accuracy = 0.0;
};

// The held-out split: indices of the validation images, a pure function of
// (n, fraction, seed) so callers can reconstruct the same split.
std::vector<std::size_t> validation_indices(std::size_t n, double fraction, std::uint64_t seed);

// Gradient descent with momentum, one step per training image per epoch,
// image order reshuffled each epoch from the seeded generator.  Weights start
// at zero, so runs are fully reproducible from (data, config).  Returns the
// scorer snapshot with the best validation pair accuracy (earliest epoch on
// ties).  If the validation split is empty the training set doubles as the
// validation set.
TrainResult train(const std::vector<TrainSample>& samples, const CompositionPattern& pattern,
                  const TrainConfig& config);

// epoch,loss_rank,loss_sal,loss_total,val_pair_acc
void write_train_log_csv(const std::vector<EpochLog>& log, const std::filesystem::path& path);

}  // namespace asmcrop
