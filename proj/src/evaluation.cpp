#include "asmcrop/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "asmcrop/io_util.hpp"

namespace asmcrop {

using nlohmann::json;

double iou(const CropRect& a, const CropRect& b) {
    if (!a.well_formed() || !b.well_formed()) throw std::invalid_argument("malformed rectangle");
    long long ix = std::max(0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
    long long iy = std::max(0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
    long long inter = ix * iy;
    long long uni = a.area() + b.area() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double disp(const CropRect& a, const CropRect& b, int image_w, int image_h) {
    require_crop_in_image(a, image_w, image_h);
    require_crop_in_image(b, image_w, image_h);
    double dx = (std::abs(a.x - b.x) + std::abs(a.right() - b.right())) / static_cast<double>(image_w);
    double dy = (std::abs(a.y - b.y) + std::abs(a.bottom() - b.bottom())) / static_cast<double>(image_h);
    return (dx + dy) / 4.0;
}

namespace {

// Average ranks, 1-based, ties get the mean rank of their run.
std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size(), 0.0);
    std::size_t k = 0;
    while (k < order.size()) {
        std::size_t end = k;
        while (end + 1 < order.size() && values[order[end + 1]] == values[order[k]]) ++end;
        double mean_rank = (static_cast<double>(k) + static_cast<double>(end)) / 2.0 + 1.0;
        for (std::size_t p = k; p <= end; ++p) ranks[order[p]] = mean_rank;
        k = end + 1;
    }
    return ranks;
}

}  // namespace

std::optional<double> srcc(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("score lists differ in length");
    if (a.size() < 2) throw std::invalid_argument("rank correlation needs at least 2 items");
    std::vector<double> ra = average_ranks(a);
    std::vector<double> rb = average_ranks(b);

    double n = static_cast<double>(a.size());
    double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t k = 0; k < ra.size(); ++k) {
        double da = ra[k] - ma, db = rb[k] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) return std::nullopt;
    return cov / std::sqrt(va * vb);
}

bool acc_top_n(int top_prediction, std::span<const double> annotated_scores, int n) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (static_cast<std::size_t>(n) > annotated_scores.size())
        throw std::invalid_argument("top-n exceeds the number of annotated crops");
    if (top_prediction < 0 || static_cast<std::size_t>(top_prediction) >= annotated_scores.size())
        throw std::invalid_argument("prediction index out of range");

    std::vector<std::size_t> order(annotated_scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return annotated_scores[a] > annotated_scores[b];
    });
    for (int k = 0; k < n; ++k)
        if (order[static_cast<std::size_t>(k)] == static_cast<std::size_t>(top_prediction)) return true;
    return false;
}

double corner_coverage(const CropRect& crop, int image_w, int image_h) {
    require_crop_in_image(crop, image_w, image_h);
    int covered = 0;
    covered += crop.contains_pixel(0, 0);
    covered += crop.contains_pixel(0, image_w - 1);
    covered += crop.contains_pixel(image_h - 1, 0);
    covered += crop.contains_pixel(image_h - 1, image_w - 1);
    return covered / 4.0;
}

namespace {

bool wants(const std::vector<std::string>& metrics, const std::string& name) {
    return std::find(metrics.begin(), metrics.end(), name) != metrics.end();
}

std::size_t argmax_by_score(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k)
        if (scores[k] > scores[best]) best = k;
    return best;
}

}  // namespace

MetricReport evaluate(const Scorer& scorer, std::span<const TrainSample> samples,
                      const CompositionPattern& pattern, const std::vector<std::string>& metrics) {
    if (samples.empty()) throw std::invalid_argument("nothing to evaluate");
    MetricReport report;
    report.metrics = metrics.empty() ? kAllMetrics : metrics;
    for (const auto& m : report.metrics) {
        if (std::find(kAllMetrics.begin(), kAllMetrics.end(), m) == kAllMetrics.end())
            throw std::invalid_argument("unknown metric '" + m + "'");
    }

    double sum_iou = 0.0, sum_disp = 0.0, sum_srcc = 0.0;
    long long srcc_count = 0, acc5_hits = 0, acc10_hits = 0;
    double pooled_correct = 0.0;
    long long pooled_pairs = 0;

    for (const auto& sample : samples) {
        PreparedSample prepared(sample, pattern, scorer.feature_config);
        std::vector<double> predicted = prepared_crop_scores(scorer, prepared);
        std::vector<double> annotated(sample.crops.size());
        for (std::size_t k = 0; k < annotated.size(); ++k) annotated[k] = sample.crops[k].score;

        std::size_t pred_best = argmax_by_score(predicted);
        std::size_t true_best = argmax_by_score(annotated);

        ImageMetrics im;
        im.id = sample.id;
        im.iou = iou(sample.crops[pred_best].rect, sample.crops[true_best].rect);
        im.disp = disp(sample.crops[pred_best].rect, sample.crops[true_best].rect,
                       sample.image.width, sample.image.height);
        im.corner_coverage =
            corner_coverage(sample.crops[pred_best].rect, sample.image.width, sample.image.height);
        if (annotated.size() >= 2) im.srcc = srcc(predicted, annotated);
        if (wants(report.metrics, "acc5"))
            im.acc5 = acc_top_n(static_cast<int>(pred_best), annotated, 5);
        if (wants(report.metrics, "acc10"))
            im.acc10 = acc_top_n(static_cast<int>(pred_best), annotated, 10);

        for (const auto& pair : sample.pairs.pairs) {
            double diff = predicted[pair.winner] - predicted[pair.loser];
            if (diff > 0.0)
                im.pair_correct += 1.0;
            else if (diff == 0.0)
                im.pair_correct += 0.5;
            ++im.pair_count;
        }

        sum_iou += im.iou;
        sum_disp += im.disp;
        if (im.srcc) {
            sum_srcc += *im.srcc;
            ++srcc_count;
        }
        acc5_hits += im.acc5 ? 1 : 0;
        acc10_hits += im.acc10 ? 1 : 0;
        pooled_correct += im.pair_correct;
        pooled_pairs += im.pair_count;
        report.images.push_back(std::move(im));
    }

    double n = static_cast<double>(samples.size());
    report.mean_iou = sum_iou / n;
    report.mean_disp = sum_disp / n;
    if (srcc_count > 0) report.mean_srcc = sum_srcc / static_cast<double>(srcc_count);
    report.acc5 = acc5_hits / n;
    report.acc10 = acc10_hits / n;
    report.total_pairs = pooled_pairs;
    if (wants(report.metrics, "pairacc")) {
        if (pooled_pairs == 0) throw std::invalid_argument("no pairs for ranking accuracy");
        report.pair_accuracy = pooled_correct / static_cast<double>(pooled_pairs);
    }
    return report;
}

double pair_ranking_accuracy(const Scorer& scorer, std::span<const TrainSample> samples,
                             const CompositionPattern& pattern, double min_score_gap) {
    std::vector<PreparedSample> prepared;
    prepared.reserve(samples.size());
    for (const auto& s : samples) {
        TrainSample regen = s;
        regen.pairs = generate_pairs(s.crops, min_score_gap);
        prepared.emplace_back(regen, pattern, scorer.feature_config);
    }
    return pair_accuracy(scorer, prepared);
}

namespace {

json corpus_json(const MetricReport& report) {
    json corpus;
    corpus["n_images"] = report.images.size();
    if (wants(report.metrics, "iou")) corpus["iou"] = report.mean_iou;
    if (wants(report.metrics, "disp")) corpus["disp"] = report.mean_disp;
    if (wants(report.metrics, "srcc"))
        corpus["srcc"] = report.mean_srcc ? json(*report.mean_srcc) : json(nullptr);
    if (wants(report.metrics, "acc5")) corpus["acc5"] = report.acc5;
    if (wants(report.metrics, "acc10")) corpus["acc10"] = report.acc10;
    if (wants(report.metrics, "pairacc")) {
        corpus["pair_accuracy"] = report.pair_accuracy;
        corpus["n_pairs"] = report.total_pairs;
    }
    return corpus;
}

}  // namespace

void write_report_json(const MetricReport& report, const std::filesystem::path& path) {
    json root;
    root["corpus"] = corpus_json(report);
    json images = json::array();
    for (const auto& im : report.images) {
        json row;
        row["image"] = im.id;
        if (wants(report.metrics, "iou")) row["iou"] = im.iou;
        if (wants(report.metrics, "disp")) row["disp"] = im.disp;
        if (wants(report.metrics, "srcc")) row["srcc"] = im.srcc ? json(*im.srcc) : json(nullptr);
        if (wants(report.metrics, "acc5")) row["acc5"] = im.acc5 ? 1 : 0;
        if (wants(report.metrics, "acc10")) row["acc10"] = im.acc10 ? 1 : 0;
        if (wants(report.metrics, "pairacc")) {
            row["pairs"] = im.pair_count;
            row["pair_accuracy"] =
                im.pair_count > 0 ? json(im.pair_correct / static_cast<double>(im.pair_count))
                                  : json(nullptr);
        }
        row["corner_coverage"] = im.corner_coverage;
        images.push_back(std::move(row));
    }
    root["images"] = std::move(images);
    atomic_write_file(path, root.dump(2) + "\n");
}

void write_report_csv(const MetricReport& report, const std::filesystem::path& path) {
    std::ostringstream out;
    out.precision(17);
    out << "metric,value\n";
    json corpus = corpus_json(report);
    for (auto it = corpus.begin(); it != corpus.end(); ++it)
        out << it.key() << ',' << (it.value().is_null() ? "" : it.value().dump()) << '\n';

    out << "image,iou,disp,srcc,acc5,acc10,pairs,pair_accuracy,corner_coverage\n";
    for (const auto& im : report.images) {
        out << im.id << ',' << im.iou << ',' << im.disp << ',';
        if (im.srcc) out << *im.srcc;
        out << ',' << (im.acc5 ? 1 : 0) << ',' << (im.acc10 ? 1 : 0) << ',' << im.pair_count << ',';
        if (im.pair_count > 0) out << im.pair_correct / static_cast<double>(im.pair_count);
        out << ',' << im.corner_coverage << '\n';
    }
    atomic_write_file(path, out.str());
}

}  // namespace asmcrop
