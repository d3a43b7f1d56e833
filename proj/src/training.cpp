#include "asmcrop/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "asmcrop/io_util.hpp"
#include "asmcrop/scoremap.hpp"

namespace asmcrop {

PairSet generate_pairs(const std::vector<AnnotatedCrop>& crops, double min_score_gap) {
    if (crops.size() < 2) throw std::invalid_argument("pair generation needs at least 2 crops");
    if (!(min_score_gap >= 0.0)) throw std::invalid_argument("pair threshold must be >= 0");
    PairSet set;
    set.min_score_gap = min_score_gap;
    const int k_count = static_cast<int>(crops.size());
    for (int k = 0; k < k_count; ++k) {
        for (int t = 0; t < k_count; ++t) {
            if (k == t) continue;
            double gap = crops[k].score - crops[t].score;
            if (gap >= min_score_gap && crops[k].score > crops[t].score)
                set.pairs.push_back(CropPair{k, t});
        }
    }
    return set;
}

TrainSample make_sample(ImageBuffer image, std::vector<AnnotatedCrop> crops,
                        std::optional<SaliencyMap> saliency, double min_score_gap,
                        std::string id) {
    TrainSample s;
    s.pairs = generate_pairs(crops, min_score_gap);
    s.image = std::move(image);
    s.crops = std::move(crops);
    s.saliency = std::move(saliency);
    s.id = std::move(id);
    return s;
}

std::vector<TrainSample> load_samples(const std::vector<AnnotatedImage>& records,
                                      const std::filesystem::path& annotations_path,
                                      double min_score_gap) {
    std::vector<TrainSample> samples;
    samples.reserve(records.size());
    for (const auto& rec : records) {
        ImageBuffer img = load_image(resolve_relative(annotations_path, rec.image_path));
        for (const auto& crop : rec.crops) {
            if (!crop.rect.inside_image(img.width, img.height))
                throw std::runtime_error("crop outside image in record '" + rec.image_path + "'");
        }
        std::optional<SaliencyMap> sal;
        if (rec.saliency_path) {
            sal = load_saliency(resolve_relative(annotations_path, *rec.saliency_path));
            if (sal->width != img.width || sal->height != img.height)
                throw std::runtime_error("saliency dimensions do not match image '" +
                                         rec.image_path + "'");
        }
        samples.push_back(
            make_sample(std::move(img), rec.crops, std::move(sal), min_score_gap, rec.image_path));
    }
    return samples;
}

PreparedSample::PreparedSample(const TrainSample& sample, const CompositionPattern& pattern,
                               const FeatureConfig& config)
    : crops_(sample.crops), pairs_(sample.pairs), saliency_(sample.saliency), id_(sample.id) {
    features_ = extract_features(sample.image, config);
    const int h = features_.height, w = features_.width, d_dim = features_.dim;
    if (saliency_ && (saliency_->width != w || saliency_->height != h))
        throw std::invalid_argument("saliency dimensions do not match the image");

    // Per-feature prefix sums, used only while pooling the crop aggregates.
    std::vector<double> tables(static_cast<std::size_t>(d_dim) * (h + 1) * (w + 1), 0.0);
    const std::size_t plane = static_cast<std::size_t>(h + 1) * (w + 1);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            const double* f = features_.data.data() + (static_cast<std::size_t>(i) * w + j) * d_dim;
            for (int d = 0; d < d_dim; ++d) {
                double* t = tables.data() + d * plane;
                t[static_cast<std::size_t>(i + 1) * (w + 1) + j + 1] = f[d] +
                    t[static_cast<std::size_t>(i) * (w + 1) + j + 1] +
                    t[static_cast<std::size_t>(i + 1) * (w + 1) + j] -
                    t[static_cast<std::size_t>(i) * (w + 1) + j];
            }
        }
    }
    auto rect_sum = [&](int d, int x0, int y0, int x1, int y1) {
        const double* t = tables.data() + d * plane;
        return t[static_cast<std::size_t>(y1) * (w + 1) + x1] -
               t[static_cast<std::size_t>(y0) * (w + 1) + x1] -
               t[static_cast<std::size_t>(y1) * (w + 1) + x0] +
               t[static_cast<std::size_t>(y0) * (w + 1) + x0];
    };

    const GridExpansion& e = pattern.expansion();
    const int l_count = pattern.partition_count();
    aggregates_.reserve(crops_.size());
    for (const auto& annotated : crops_) {
        const CropRect& crop = annotated.rect;
        require_crop_in_image(crop, w, h);
        if (!pattern.crop_big_enough(crop))
            throw std::invalid_argument("annotated crop is smaller than the pattern's fine grid");

        CropAggregate agg;
        agg.feature_sums.assign(static_cast<std::size_t>(d_dim) * l_count, 0.0);
        agg.pixel_counts.assign(static_cast<std::size_t>(l_count), 0.0);
        agg.area = static_cast<double>(crop.area());
        for (int cr = 0; cr < e.cells_y; ++cr) {
            int y0 = crop.y + fine_cell_begin(cr, e.cells_y, crop.h);
            int y1 = crop.y + fine_cell_begin(cr + 1, e.cells_y, crop.h);
            for (int cc = 0; cc < e.cells_x; ++cc) {
                int x0 = crop.x + fine_cell_begin(cc, e.cells_x, crop.w);
                int x1 = crop.x + fine_cell_begin(cc + 1, e.cells_x, crop.w);
                int l = e.channel_map[static_cast<std::size_t>(cr) * e.cells_x + cc] - 1;
                for (int d = 0; d < d_dim; ++d)
                    agg.feature_sums[static_cast<std::size_t>(d) * l_count + l] +=
                        rect_sum(d, x0, y0, x1, y1);
                agg.pixel_counts[static_cast<std::size_t>(l)] +=
                    static_cast<double>(x1 - x0) * (y1 - y0);
            }
        }
        aggregates_.push_back(std::move(agg));
    }
}

double prepared_crop_score(const Scorer& scorer, const PreparedSample& sample,
                           std::size_t crop_index) {
    const auto& agg = sample.aggregates().at(crop_index);
    const int l_count = scorer.channels;
    if (sample.features().dim != scorer.feature_dim)
        throw std::invalid_argument("scorer feature dimension does not match the prepared sample");
    double total = 0.0;
    for (int d = 0; d < scorer.feature_dim; ++d) {
        const double* sums = agg.feature_sums.data() + static_cast<std::size_t>(d) * l_count;
        const double* wrow = scorer.weights.data() + static_cast<std::size_t>(d) * l_count;
        for (int l = 0; l < l_count; ++l) total += sums[l] * wrow[l];
    }
    for (int l = 0; l < l_count; ++l) total += agg.pixel_counts[l] * scorer.bias[l];
    return total / agg.area;
}

std::vector<double> prepared_crop_scores(const Scorer& scorer, const PreparedSample& sample) {
    std::vector<double> scores(sample.crops().size());
    for (std::size_t k = 0; k < scores.size(); ++k)
        scores[k] = prepared_crop_score(scorer, sample, k);
    return scores;
}

namespace {

struct SaliencyWorkspace {
    std::vector<double> channel_scores;   // [H*W][L]
    std::vector<double> mean;             // [H*W]
    std::vector<double> stddev;           // [H*W]
};

// Rank term and (optionally) its gradient for one sample.
double sample_ranking(const Scorer& scorer, const PreparedSample& sample, Gradient* grad) {
    const auto& pairs = sample.pairs().pairs;
    if (pairs.empty()) return 0.0;
    std::vector<double> scores = prepared_crop_scores(scorer, sample);

    double loss = 0.0;
    std::vector<double> crop_coef(scores.size(), 0.0);
    for (const auto& pair : pairs) {
        double z = 1.0 + scores[pair.loser] - scores[pair.winner];
        if (z > 0.0) {
            loss += z;
            crop_coef[pair.loser] += 1.0;
            crop_coef[pair.winner] -= 1.0;
        }
    }
    if (grad) {
        const int l_count = scorer.channels;
        for (std::size_t k = 0; k < crop_coef.size(); ++k) {
            if (crop_coef[k] == 0.0) continue;
            const auto& agg = sample.aggregates()[k];
            double c = crop_coef[k] / agg.area;
            for (int d = 0; d < scorer.feature_dim; ++d) {
                const double* sums = agg.feature_sums.data() + static_cast<std::size_t>(d) * l_count;
                double* g = grad->weights.data() + static_cast<std::size_t>(d) * l_count;
                for (int l = 0; l < l_count; ++l) g[l] += c * sums[l];
            }
            for (int l = 0; l < l_count; ++l) grad->bias[l] += c * agg.pixel_counts[l];
        }
    }
    return loss;
}

// Saliency term and (optionally) its gradient, scaled by `weight`, for one
// sample.  Returns the unweighted term.
double sample_saliency(const Scorer& scorer, const PreparedSample& sample, double std_floor,
                       double weight, Gradient* grad, SaliencyWorkspace& ws) {
    if (!sample.saliency())
        throw std::invalid_argument("saliency term requested but the sample has no saliency map");
    const FeatureField& feats = sample.features();
    const SaliencyMap& sal = *sample.saliency();
    const int l_count = scorer.channels, d_dim = scorer.feature_dim;
    const std::size_t pixels = static_cast<std::size_t>(feats.height) * feats.width;

    ws.channel_scores.resize(pixels * l_count);
    ws.mean.resize(pixels);
    ws.stddev.resize(pixels);

    double stddev_total = 0.0;
    double weighted_total = 0.0;
    const double* f = feats.data.data();
    for (std::size_t p = 0; p < pixels; ++p, f += d_dim) {
        double* m = ws.channel_scores.data() + p * l_count;
        for (int l = 0; l < l_count; ++l) m[l] = scorer.bias[l];
        for (int d = 0; d < d_dim; ++d) {
            double fv = f[d];
            const double* wrow = scorer.weights.data() + static_cast<std::size_t>(d) * l_count;
            for (int l = 0; l < l_count; ++l) m[l] += fv * wrow[l];
        }
        double mean = 0.0;
        for (int l = 0; l < l_count; ++l) mean += m[l];
        mean /= l_count;
        double var = 0.0;
        for (int l = 0; l < l_count; ++l) var += (m[l] - mean) * (m[l] - mean);
        double sd = std::sqrt(var / l_count);
        ws.mean[p] = mean;
        ws.stddev[p] = sd;
        stddev_total += sd;
        weighted_total += (1.0 - sal.values[p]) * sd;
    }

    double mean_stddev = stddev_total / static_cast<double>(pixels);
    if (!(mean_stddev >= std_floor)) return 0.0;   // degenerate flat map

    double loss = weighted_total / stddev_total;
    if (grad) {
        std::vector<double> coef(static_cast<std::size_t>(l_count));
        const double* fp = feats.data.data();
        for (std::size_t p = 0; p < pixels; ++p, fp += d_dim) {
            double sd = ws.stddev[p];
            if (sd <= 0.0) continue;   // subgradient 0 at zero spread
            const double* m = ws.channel_scores.data() + p * l_count;
            double outer = weight * ((1.0 - sal.values[p]) - loss) / (stddev_total * l_count * sd);
            for (int l = 0; l < l_count; ++l) coef[l] = outer * (m[l] - ws.mean[p]);
            for (int d = 0; d < d_dim; ++d) {
                double fv = fp[d];
                double* g = grad->weights.data() + static_cast<std::size_t>(d) * l_count;
                for (int l = 0; l < l_count; ++l) g[l] += fv * coef[l];
            }
            for (int l = 0; l < l_count; ++l) grad->bias[l] += coef[l];
        }
    }
    return loss;
}

Gradient zero_gradient(const Scorer& scorer) {
    Gradient g;
    g.weights.assign(scorer.weights.size(), 0.0);
    g.bias.assign(scorer.bias.size(), 0.0);
    return g;
}

}  // namespace

double ranking_loss(const Scorer& scorer, const PreparedSample& sample) {
    return sample_ranking(scorer, sample, nullptr);
}

double ranking_loss(const Scorer& scorer, const ImageBuffer& image,
                    const std::vector<AnnotatedCrop>& crops, const PairSet& pairs) {
    TrainSample s;
    s.image = image;
    s.crops = crops;
    s.pairs = pairs;
    PreparedSample prepared(s, scorer.pattern(), scorer.feature_config);
    return ranking_loss(scorer, prepared);
}

double saliency_loss(const Scorer& scorer, const PreparedSample& sample, double std_floor) {
    SaliencyWorkspace ws;
    return sample_saliency(scorer, sample, std_floor, 1.0, nullptr, ws);
}

double saliency_loss(const Scorer& scorer, const ImageBuffer& image, const SaliencyMap& saliency,
                     double std_floor) {
    // Direct route through the score map; no crops involved.
    if (saliency.width != image.width || saliency.height != image.height)
        throw std::invalid_argument("saliency dimensions do not match the image");
    AestheticScoreMap map = score_image(scorer, image);
    ChannelStats stats = channel_stats(map);
    const std::size_t pixels = stats.stddev.values.size();
    double stddev_total = 0.0, weighted_total = 0.0;
    for (std::size_t p = 0; p < pixels; ++p) {
        stddev_total += stats.stddev.values[p];
        weighted_total += (1.0 - saliency.values[p]) * stats.stddev.values[p];
    }
    double mean_stddev = stddev_total / static_cast<double>(pixels);
    if (!(mean_stddev >= std_floor)) return 0.0;
    return weighted_total / stddev_total;
}

LossBreakdown total_loss(const Scorer& scorer, std::span<const PreparedSample> batch,
                         double saliency_weight, double std_floor) {
    if (saliency_weight < 0.0) throw std::invalid_argument("saliency weight must be >= 0");
    LossBreakdown sum;
    SaliencyWorkspace ws;
    for (const auto& sample : batch) {
        sum.rank += sample_ranking(scorer, sample, nullptr);
        if (saliency_weight > 0.0)
            sum.saliency += sample_saliency(scorer, sample, std_floor, saliency_weight, nullptr, ws);
    }
    sum.total = sum.rank + saliency_weight * sum.saliency;
    return sum;
}

Gradient loss_gradient(const Scorer& scorer, std::span<const PreparedSample> batch,
                       double saliency_weight, double std_floor, LossBreakdown* breakdown) {
    if (saliency_weight < 0.0) throw std::invalid_argument("saliency weight must be >= 0");
    Gradient grad = zero_gradient(scorer);
    LossBreakdown sum;
    SaliencyWorkspace ws;
    for (const auto& sample : batch) {
        sum.rank += sample_ranking(scorer, sample, &grad);
        if (saliency_weight > 0.0)
            sum.saliency += sample_saliency(scorer, sample, std_floor, saliency_weight, &grad, ws);
    }
    sum.total = sum.rank + saliency_weight * sum.saliency;
    if (breakdown) *breakdown = sum;
    return grad;
}

double pair_accuracy(const Scorer& scorer, std::span<const PreparedSample> samples) {
    double correct = 0.0;
    long long total = 0;
    for (const auto& sample : samples) {
        if (sample.pairs().pairs.empty()) continue;
        std::vector<double> scores = prepared_crop_scores(scorer, sample);
        for (const auto& pair : sample.pairs().pairs) {
            double diff = scores[pair.winner] - scores[pair.loser];
            if (diff > 0.0)
                correct += 1.0;
            else if (diff == 0.0)
                correct += 0.5;
            ++total;
        }
    }
    if (total == 0) throw std::invalid_argument("no pairs to evaluate");
    return correct / static_cast<double>(total);
}

void TrainConfig::validate() const {
    if (!(saliency_weight >= 0.0) || !std::isfinite(saliency_weight))
        throw std::invalid_argument("saliency weight must be finite and >= 0");
    if (!(min_score_gap >= 0.0) || !std::isfinite(min_score_gap))
        throw std::invalid_argument("pair threshold must be finite and >= 0");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("learning rate must be positive");
    if (!(momentum >= 0.0) || !(momentum < 1.0))
        throw std::invalid_argument("momentum must lie in [0, 1)");
    if (!(std_floor > 0.0)) throw std::invalid_argument("std floor must be positive");
    if (!(validation_fraction >= 0.0) || !(validation_fraction < 1.0))
        throw std::invalid_argument("validation fraction must lie in [0, 1)");
}

std::vector<std::size_t> validation_indices(std::size_t n, double fraction, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    auto count = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction));
    order.resize(count);
    std::sort(order.begin(), order.end());
    return order;
}

TrainResult train(const std::vector<TrainSample>& samples, const CompositionPattern& pattern,
                  const TrainConfig& config) {
    config.validate();
    if (samples.empty()) throw std::invalid_argument("training needs at least one sample");
    if (config.saliency_weight > 0.0) {
        for (const auto& s : samples)
            if (!s.saliency)
                throw std::invalid_argument("saliency weight > 0 but sample '" + s.id +
                                            "' has no saliency map");
    }

    std::vector<PreparedSample> prepared;
    prepared.reserve(samples.size());
    for (const auto& s : samples) prepared.emplace_back(s, pattern, config.features);

    auto val_idx = validation_indices(samples.size(), config.validation_fraction, config.seed);
    std::vector<bool> is_val(samples.size(), false);
    for (auto k : val_idx) is_val[k] = true;

    std::vector<std::size_t> train_order;
    std::vector<const PreparedSample*> val_set;
    for (std::size_t k = 0; k < prepared.size(); ++k) {
        if (is_val[k])
            val_set.push_back(&prepared[k]);
        else
            train_order.push_back(k);
    }
    if (train_order.empty()) throw std::invalid_argument("validation split left no training samples");

    long long train_pairs = 0;
    for (auto k : train_order) train_pairs += static_cast<long long>(prepared[k].pairs().pairs.size());
    if (train_pairs == 0)
        throw std::invalid_argument("no training pairs (every image's crop scores tie below the threshold)");

    // Empty validation split: measure accuracy on the training images instead.
    auto eval_accuracy = [&](const Scorer& s) {
        if (val_set.empty()) return pair_accuracy(s, prepared);
        double correct = 0.0;
        long long total = 0;
        for (const auto* sample : val_set) {
            if (sample->pairs().pairs.empty()) continue;
            std::vector<double> scores = prepared_crop_scores(s, *sample);
            for (const auto& pair : sample->pairs().pairs) {
                double diff = scores[pair.winner] - scores[pair.loser];
                if (diff > 0.0)
                    correct += 1.0;
                else if (diff == 0.0)
                    correct += 0.5;
                ++total;
            }
        }
        return total == 0 ? 0.5 : correct / static_cast<double>(total);
    };

    Scorer scorer = Scorer::zeros(pattern, config.features);
    Gradient velocity = zero_gradient(scorer);
    Gradient grad = zero_gradient(scorer);
    SaliencyWorkspace ws;

    // Epoch shuffling draws from its own stream so the validation split stays
    // reconstructible from the seed alone.
    std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

    TrainResult result;
    result.best_val_accuracy = -std::numeric_limits<double>::infinity();

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(train_order.begin(), train_order.end(), shuffle_rng);
        LossBreakdown epoch_loss;
        for (auto k : train_order) {
            const PreparedSample& sample = prepared[k];
            std::fill(grad.weights.begin(), grad.weights.end(), 0.0);
            std::fill(grad.bias.begin(), grad.bias.end(), 0.0);

            double rank = sample_ranking(scorer, sample, &grad);
            double sal = 0.0;
            if (config.saliency_weight > 0.0)
                sal = sample_saliency(scorer, sample, config.std_floor, config.saliency_weight,
                                      &grad, ws);
            epoch_loss.rank += rank;
            epoch_loss.saliency += sal;

            for (std::size_t p = 0; p < scorer.weights.size(); ++p) {
                velocity.weights[p] = config.momentum * velocity.weights[p] -
                                      config.learning_rate * grad.weights[p];
                scorer.weights[p] += velocity.weights[p];
            }
            for (std::size_t p = 0; p < scorer.bias.size(); ++p) {
                velocity.bias[p] = config.momentum * velocity.bias[p] -
                                   config.learning_rate * grad.bias[p];
                scorer.bias[p] += velocity.bias[p];
            }
        }
        epoch_loss.total = epoch_loss.rank + config.saliency_weight * epoch_loss.saliency;
        for (double v : scorer.weights)
            if (!std::isfinite(v))
                throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                                         "; lower the learning rate");

        double val_acc = eval_accuracy(scorer);
        result.log.push_back(EpochLog{epoch, epoch_loss.rank, epoch_loss.saliency,
                                      epoch_loss.total, val_acc});
        if (val_acc > result.best_val_accuracy) {
            result.best_val_accuracy = val_acc;
            result.best_epoch = epoch;
            result.scorer = scorer;
        }
    }
    return result;
}

void write_train_log_csv(const std::vector<EpochLog>& log, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "epoch,loss_rank,loss_sal,loss_total,val_pair_acc\n";
    out.precision(17);
    for (const auto& row : log) {
        out << row.epoch << ',' << row.loss_rank << ',' << row.loss_saliency << ','
            << row.loss_total << ',' << row.val_pair_accuracy << '\n';
    }
    atomic_write_file(path, out.str());
}

}  // namespace asmcrop
