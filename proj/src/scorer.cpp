#include "asmcrop/scorer.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "asmcrop/io_util.hpp"

namespace asmcrop {

Scorer Scorer::zeros(const CompositionPattern& pattern, const FeatureConfig& config) {
    Scorer s;
    s.feature_dim = config.dim();
    s.channels = pattern.partition_count();
    s.weights.assign(static_cast<std::size_t>(s.feature_dim) * s.channels, 0.0);
    s.bias.assign(static_cast<std::size_t>(s.channels), 0.0);
    s.pattern_name = pattern.name();
    s.feature_config = config;
    return s;
}

void Scorer::validate() const {
    if (feature_dim < 1 || channels < 1) throw std::invalid_argument("scorer has empty dimensions");
    if (feature_dim != feature_config.dim())
        throw std::invalid_argument("scorer feature_dim does not match its feature config");
    if (weights.size() != static_cast<std::size_t>(feature_dim) * channels ||
        bias.size() != static_cast<std::size_t>(channels))
        throw std::invalid_argument("scorer parameter size mismatch");
    CompositionPattern pattern = CompositionPattern::parse(pattern_name);
    if (pattern.partition_count() != channels)
        throw std::invalid_argument("scorer channel count does not match pattern '" + pattern_name + "'");
    for (double v : weights)
        if (!std::isfinite(v)) throw std::invalid_argument("scorer has non-finite weights");
    for (double v : bias)
        if (!std::isfinite(v)) throw std::invalid_argument("scorer has non-finite bias");
}

AestheticScoreMap score_features(const Scorer& scorer, const FeatureField& features) {
    scorer.validate();
    if (features.dim != scorer.feature_dim || !(features.config == scorer.feature_config))
        throw std::invalid_argument("feature field does not match the scorer's feature config");

    const int L = scorer.channels, D = scorer.feature_dim;
    AestheticScoreMap map(features.height, features.width, L, scorer.pattern_name);
    double* out = map.data().data();
    const double* f = features.data.data();
    const std::size_t pixels = static_cast<std::size_t>(features.height) * features.width;
    for (std::size_t p = 0; p < pixels; ++p, f += D, out += L) {
        for (int l = 0; l < L; ++l) out[l] = scorer.bias[l];
        for (int d = 0; d < D; ++d) {
            double fv = f[d];
            const double* wrow = scorer.weights.data() + static_cast<std::size_t>(d) * L;
            for (int l = 0; l < L; ++l) out[l] += fv * wrow[l];
        }
    }
    return map;
}

AestheticScoreMap score_image(const Scorer& scorer, const ImageBuffer& img) {
    return score_features(scorer, extract_features(img, scorer.feature_config));
}

void save_scorer(const Scorer& scorer, const std::filesystem::path& path) {
    scorer.validate();
    ByteWriter w;
    w.raw("ASMW", 4);
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(scorer.feature_dim));
    w.u32(static_cast<std::uint32_t>(scorer.channels));
    w.u8(scorer.feature_config.positional ? 1 : 0);
    if (scorer.pattern_name.size() > 0xffff) throw std::invalid_argument("pattern name too long");
    w.u16(static_cast<std::uint16_t>(scorer.pattern_name.size()));
    w.raw(scorer.pattern_name.data(), scorer.pattern_name.size());
    for (double v : scorer.weights) w.f64(v);
    for (double v : scorer.bias) w.f64(v);
    atomic_write_file(path, w.bytes);
}

Scorer load_scorer(const std::filesystem::path& path) {
    auto bytes = read_file(path);
    ByteReader r{bytes.data(), bytes.size()};
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, "ASMW", 4) != 0)
        throw std::runtime_error("not a weight file (bad magic): " + path.string());
    auto version = r.u32();
    if (version != 1)
        throw std::runtime_error("unsupported weight file version " + std::to_string(version) +
                                 ": " + path.string());
    Scorer s;
    s.feature_dim = static_cast<int>(r.u32());
    s.channels = static_cast<int>(r.u32());
    s.feature_config.positional = r.u8() != 0;
    auto name_len = r.u16();
    s.pattern_name.resize(name_len);
    if (name_len > 0) r.raw(s.pattern_name.data(), name_len);
    if (s.feature_dim < 1 || s.channels < 1)
        throw std::runtime_error("bad weight file dimensions: " + path.string());
    std::size_t n_weights = static_cast<std::size_t>(s.feature_dim) * s.channels;
    if (r.remaining() != (n_weights + s.channels) * 8)
        throw std::runtime_error("weight file payload size mismatch (truncated?): " + path.string());
    s.weights.resize(n_weights);
    for (auto& v : s.weights) v = r.f64();
    s.bias.resize(static_cast<std::size_t>(s.channels));
    for (auto& v : s.bias) v = r.f64();
    s.validate();   // rejects channel counts that disagree with the stored pattern
    return s;
}

}  // namespace asmcrop
