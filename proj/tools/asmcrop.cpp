// Command-line front end: train, score, crop, crop-circle, heatmap, eval, synth.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "asmcrop/annotations.hpp"
#include "asmcrop/evaluation.hpp"
#include "asmcrop/image.hpp"
#include "asmcrop/io_util.hpp"
#include "asmcrop/patterns.hpp"
#include "asmcrop/scoremap.hpp"
#include "asmcrop/scorer.hpp"
#include "asmcrop/search.hpp"
#include "asmcrop/synth.hpp"
#include "asmcrop/training.hpp"

namespace {

using namespace asmcrop;
using nlohmann::json;

std::pair<int, int> parse_aspect(const std::string& text) {
    auto sep = text.find(':');
    if (sep == std::string::npos || sep == 0 || sep + 1 >= text.size())
        throw std::invalid_argument("aspect must look like W:H, got '" + text + "'");
    int aw = std::stoi(text.substr(0, sep));
    int ah = std::stoi(text.substr(sep + 1));
    if (aw < 1 || ah < 1) throw std::invalid_argument("aspect terms must be positive");
    return {aw, ah};
}

std::vector<std::string> parse_metric_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto sep = text.find(',', start);
        std::string item = text.substr(start, sep == std::string::npos ? sep : sep - start);
        if (!item.empty()) out.push_back(item);
        if (sep == std::string::npos) break;
        start = sep + 1;
    }
    if (out.empty()) throw std::invalid_argument("empty metric list");
    return out;
}

void write_crops_json(const SearchResult& result, int top_k, const std::filesystem::path& path) {
    json arr = json::array();
    int count = 0;
    for (const auto& entry : result.ranked) {
        if (count++ >= top_k) break;
        arr.push_back({{"x", entry.rect.x},
                       {"y", entry.rect.y},
                       {"w", entry.rect.w},
                       {"h", entry.rect.h},
                       {"score", entry.score}});
    }
    atomic_write_file(path, arr.dump(2) + "\n");
}

void write_circles_json(const std::vector<ScoredCircle>& ranked, int top_k,
                        const std::filesystem::path& path) {
    json arr = json::array();
    int count = 0;
    for (const auto& entry : ranked) {
        if (count++ >= top_k) break;
        arr.push_back({{"cx", entry.circle.cx},
                       {"cy", entry.circle.cy},
                       {"r", entry.circle.r},
                       {"score", entry.score}});
    }
    atomic_write_file(path, arr.dump(2) + "\n");
}

int run(int argc, char** argv) {
    CLI::App app{"Composition-aware aesthetic image cropping"};
    app.require_subcommand(1);

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a scorer from annotated crops");
    std::string train_data, train_pattern = "cross", train_out, train_log;
    TrainConfig tc;
    bool positional = false;
    train_cmd->add_option("--data", train_data, "annotations JSONL")->required();
    train_cmd->add_option("--pattern", train_pattern, "grid:XxY | multirect:R | multidir | cross");
    train_cmd->add_option("--lambda", tc.saliency_weight, "saliency loss weight");
    train_cmd->add_option("--delta", tc.min_score_gap, "pair score-gap threshold");
    train_cmd->add_option("--epochs", tc.epochs, "training epochs");
    train_cmd->add_option("--lr", tc.learning_rate, "learning rate");
    train_cmd->add_option("--seed", tc.seed, "random seed");
    train_cmd->add_option("--out", train_out, "output weight file (ASMW)")->required();
    train_cmd->add_option("--log", train_log, "optional per-epoch CSV log");
    train_cmd->add_flag("--positional", positional, "add normalized-coordinate features");

    // score
    auto* score_cmd = app.add_subcommand("score", "Write the score map of an image");
    std::string score_model, score_image_path, score_out, score_dtype = "f64";
    score_cmd->add_option("--model", score_model, "weight file")->required();
    score_cmd->add_option("--image", score_image_path, "input PPM/PGM")->required();
    score_cmd->add_option("--out", score_out, "output score map (ASM1)")->required();
    score_cmd->add_option("--dtype", score_dtype, "f32 | f64 (default f64)");

    // crop
    auto* crop_cmd = app.add_subcommand("crop", "Find the best rectangular crops");
    std::string crop_model, crop_image, crop_out, crop_aspect;
    int crop_topk = 10;
    crop_cmd->add_option("--model", crop_model, "weight file")->required();
    crop_cmd->add_option("--image", crop_image, "input PPM/PGM")->required();
    crop_cmd->add_option("--aspect", crop_aspect, "restrict to one W:H aspect ratio");
    crop_cmd->add_option("--topk", crop_topk, "number of crops to emit");
    crop_cmd->add_option("--out", crop_out, "output JSON")->required();

    // crop-circle
    auto* circle_cmd = app.add_subcommand("crop-circle", "Find the best circular crops");
    std::string circle_model, circle_image, circle_out;
    circle_cmd->add_option("--model", circle_model, "weight file")->required();
    circle_cmd->add_option("--image", circle_image, "input PPM/PGM")->required();
    circle_cmd->add_option("--out", circle_out, "output JSON")->required();

    // heatmap
    auto* heat_cmd = app.add_subcommand("heatmap", "Export a channel-statistics heat map");
    std::string heat_model, heat_image, heat_stat, heat_out;
    heat_cmd->add_option("--model", heat_model, "weight file")->required();
    heat_cmd->add_option("--image", heat_image, "input PPM/PGM")->required();
    heat_cmd->add_option("--stat", heat_stat, "avg | std")->required();
    heat_cmd->add_option("--out", heat_out, "output PGM")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on annotated crops");
    std::string eval_model, eval_data, eval_metrics = "iou,disp,srcc,acc5,acc10,pairacc";
    std::string eval_out, eval_csv;
    double eval_delta = 0.3;
    eval_cmd->add_option("--model", eval_model, "weight file")->required();
    eval_cmd->add_option("--data", eval_data, "annotations JSONL")->required();
    eval_cmd->add_option("--metrics", eval_metrics, "comma list: iou,disp,srcc,acc5,acc10,pairacc");
    eval_cmd->add_option("--delta", eval_delta, "pair score-gap threshold for pairacc");
    eval_cmd->add_option("--out", eval_out, "output JSON report")->required();
    eval_cmd->add_option("--csv", eval_csv, "optional CSV report");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate the synthetic benchmark dataset");
    std::string synth_out;
    SynthConfig sc;
    synth_cmd->add_option("--out", synth_out, "output directory")->required();
    synth_cmd->add_option("--n", sc.n_images, "number of images");
    synth_cmd->add_option("--seed", sc.seed, "random seed");

    CLI11_PARSE(app, argc, argv);

    if (train_cmd->parsed()) {
        tc.features.positional = positional;
        auto records = load_annotations(train_data);
        auto samples = load_samples(records, train_data, tc.min_score_gap);
        auto pattern = CompositionPattern::parse(train_pattern);
        TrainResult result = train(samples, pattern, tc);
        save_scorer(result.scorer, train_out);
        if (!train_log.empty()) write_train_log_csv(result.log, train_log);
        std::cout << "trained " << pattern.name() << " on " << samples.size() << " images; best epoch "
                  << result.best_epoch << " val_pair_acc " << result.best_val_accuracy << "\n";
        return 0;
    }
    if (score_cmd->parsed()) {
        MapDtype dtype;
        if (score_dtype == "f32")
            dtype = MapDtype::F32;
        else if (score_dtype == "f64")
            dtype = MapDtype::F64;
        else
            throw std::invalid_argument("--dtype must be f32 or f64");
        Scorer scorer = load_scorer(score_model);
        AestheticScoreMap map = score_image(scorer, load_image(score_image_path));
        save_score_map(map, score_out, dtype);
        return 0;
    }
    if (crop_cmd->parsed()) {
        if (crop_topk < 1) throw std::invalid_argument("--topk must be positive");
        Scorer scorer = load_scorer(crop_model);
        AestheticScoreMap map = score_image(scorer, load_image(crop_image));
        AnchorConfig config;
        if (!crop_aspect.empty()) config.aspect_ratios = {parse_aspect(crop_aspect)};
        SearchResult result = two_stage_search(map, scorer.pattern(), config);
        write_crops_json(result, crop_topk, crop_out);
        return 0;
    }
    if (circle_cmd->parsed()) {
        Scorer scorer = load_scorer(circle_model);
        AestheticScoreMap map = score_image(scorer, load_image(circle_image));
        auto ranked = best_circles(map, scorer.pattern(), AnchorConfig{});
        write_circles_json(ranked, 10, circle_out);
        return 0;
    }
    if (heat_cmd->parsed()) {
        if (heat_stat != "avg" && heat_stat != "std")
            throw std::invalid_argument("--stat must be avg or std");
        Scorer scorer = load_scorer(heat_model);
        AestheticScoreMap map = score_image(scorer, load_image(heat_image));
        ChannelStats stats = channel_stats(map);
        write_heatmap(heat_stat == "avg" ? stats.mean : stats.stddev, heat_out);
        return 0;
    }
    if (eval_cmd->parsed()) {
        Scorer scorer = load_scorer(eval_model);
        auto records = load_annotations(eval_data);
        auto samples = load_samples(records, eval_data, eval_delta);
        MetricReport report =
            evaluate(scorer, samples, scorer.pattern(), parse_metric_list(eval_metrics));
        write_report_json(report, eval_out);
        if (!eval_csv.empty()) write_report_csv(report, eval_csv);
        return 0;
    }
    if (synth_cmd->parsed()) {
        synth_generate(sc, synth_out);
        std::cout << "wrote " << sc.n_images << " synthetic images to " << synth_out << "\n";
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "asmcrop: " << e.what() << std::endl;
        return 1;
    }
}
