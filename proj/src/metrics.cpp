#include "carepipe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "carepipe/transport.hpp"

namespace carepipe::metrics {

ProportionEstimate wilson_interval(std::size_t successes, std::size_t n, double z) {
    if (n == 0) throw MetricError(MetricError::Kind::ZeroSample, "wilson_interval: n must be >= 1");
    if (successes > n)
        throw MetricError(MetricError::Kind::LengthMismatch, "wilson_interval: successes > n");

    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = p + z2 / (2.0 * nn);
    const double radius = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));

    ProportionEstimate est;
    est.successes = successes;
    est.n = n;
    est.p_hat = p;
    est.ci_low = std::clamp((center - radius) / denom, 0.0, 1.0);
    est.ci_high = std::clamp((center + radius) / denom, 0.0, 1.0);
    return est;
}

double accuracy(const ConfusionMatrix& cm) {
    if (cm.total() == 0)
        throw MetricError(MetricError::Kind::UndefinedRate, "accuracy: empty confusion matrix");
    return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double precision(const ConfusionMatrix& cm) {
    if (cm.tp + cm.fp == 0)
        throw MetricError(MetricError::Kind::UndefinedRate, "precision: tp+fp is zero");
    return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
}

double recall(const ConfusionMatrix& cm) {
    if (cm.tp + cm.fn == 0)
        throw MetricError(MetricError::Kind::UndefinedRate, "recall: tp+fn is zero");
    return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
}

ProportionEstimate joint_id_category_accuracy(const std::vector<IdCategory>& predictions,
                                              const std::vector<IdCategory>& truths, double z) {
    if (predictions.size() != truths.size())
        throw MetricError(MetricError::Kind::LengthMismatch,
                          "joint accuracy: prediction/truth lists differ in length");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == truths[i]) ++hits;
    return wilson_interval(hits, predictions.size(), z);
}

double cosine_similarity(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw MetricError(MetricError::Kind::DimensionMismatch, "cosine: dimension mismatch");
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        nx += x[i] * x[i];
        ny += y[i] * y[i];
    }
    if (nx == 0.0 || ny == 0.0)
        throw MetricError(MetricError::Kind::ZeroVector, "cosine: zero-norm vector");
    return dot / (std::sqrt(nx) * std::sqrt(ny));
}

double cosine_distance(std::span<const double> x, std::span<const double> y) {
    return 1.0 - cosine_similarity(x, y);
}

namespace {

constexpr std::size_t kWmdTokenCap = 64;

std::pair<std::vector<std::string>, std::vector<int64_t>> type_counts(
    const std::vector<std::string>& doc) {
    std::map<std::string, int64_t> counts;
    for (const auto& tok : doc) ++counts[tok];
    std::pair<std::vector<std::string>, std::vector<int64_t>> out;
    for (const auto& [tok, count] : counts) {
        out.first.push_back(tok);
        out.second.push_back(count);
    }
    return out;
}

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

double wmd(const std::vector<std::string>& doc1, const std::vector<std::string>& doc2,
           const Embedder& embedder) {
    if (doc1.empty() || doc2.empty())
        throw MetricError(MetricError::Kind::EmptyDocument, "wmd: empty document");
    if (doc1.size() > kWmdTokenCap || doc2.size() > kWmdTokenCap)
        throw MetricError(MetricError::Kind::LengthMismatch, "wmd: document exceeds 64 tokens");

    auto [words1, counts1] = type_counts(doc1);
    auto [words2, counts2] = type_counts(doc2);
    const int64_t m1 = std::accumulate(counts1.begin(), counts1.end(), int64_t{0});
    const int64_t m2 = std::accumulate(counts2.begin(), counts2.end(), int64_t{0});

    // Scale normalized frequencies (c/m1, d/m2) to a common integral grid.
    std::vector<int64_t> supplies(counts1.size()), demands(counts2.size());
    for (std::size_t i = 0; i < counts1.size(); ++i) supplies[i] = counts1[i] * m2;
    for (std::size_t j = 0; j < counts2.size(); ++j) demands[j] = counts2[j] * m1;

    std::vector<std::vector<double>> emb1, emb2;
    emb1.reserve(words1.size());
    emb2.reserve(words2.size());
    for (const auto& w : words1) emb1.push_back(embedder.embed(w));
    for (const auto& w : words2) emb2.push_back(embedder.embed(w));

    const auto result = solve_transport(supplies, demands, [&](std::size_t i, std::size_t j) {
        if (words1[i] == words2[j]) return 0.0;
        return euclidean(emb1[i], emb2[j]);
    });
    return result.cost / (static_cast<double>(m1) * static_cast<double>(m2));
}

double percentile(const std::vector<double>& sorted, double q) {
    if (sorted.empty())
        throw MetricError(MetricError::Kind::EmptySample, "percentile: empty sample");
    if (sorted.size() == 1) return sorted.front();
    const double rank = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

DistanceSummary distance_summary(std::vector<double> samples) {
    if (samples.empty())
        throw MetricError(MetricError::Kind::EmptySample, "distance_summary: empty sample");
    std::sort(samples.begin(), samples.end());
    DistanceSummary s;
    s.n = samples.size();
    s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
             static_cast<double>(samples.size());
    s.p25 = percentile(samples, 0.25);
    s.p75 = percentile(samples, 0.75);
    return s;
}

double round_percent(double fraction) {
    return std::floor(fraction * 10000.0 + 0.5) / 100.0;
}

}  // namespace carepipe::metrics
