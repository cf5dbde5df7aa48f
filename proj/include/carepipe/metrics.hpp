#pragma once
// Evaluation formulas: Wilson intervals, confusion-matrix rates, joint
// id+category accuracy, cosine similarity, Word Mover's Distance, and
// percentile summaries. All pure functions.

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "carepipe/embedder.hpp"

namespace carepipe::metrics {

class MetricError : public std::runtime_error {
public:
    enum class Kind {
        ZeroSample,
        UndefinedRate,
        LengthMismatch,
        ZeroVector,
        DimensionMismatch,
        EmptyDocument,
        EmptySample,
    };

    MetricError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind(kind) {}

    Kind kind;
};

struct ProportionEstimate {
    std::size_t successes = 0;
    std::size_t n = 0;
    double p_hat = 0.0;
    double ci_low = 0.0;   // 95% Wilson unless z overridden
    double ci_high = 0.0;
};

// Wilson score interval, both branches evaluated exactly and clamped to [0,1].
ProportionEstimate wilson_interval(std::size_t successes, std::size_t n, double z = 1.96);

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
};

double accuracy(const ConfusionMatrix& cm);   // (tp+tn)/total
double precision(const ConfusionMatrix& cm);  // tp/(tp+fp)
double recall(const ConfusionMatrix& cm);     // tp/(tp+fn)

struct IdCategory {
    std::string resident_id;
    std::string category_id;

    bool operator==(const IdCategory&) const = default;
};

// Success iff resident AND category both correct; Wilson CI attached.
ProportionEstimate joint_id_category_accuracy(const std::vector<IdCategory>& predictions,
                                              const std::vector<IdCategory>& truths, double z = 1.96);

double cosine_similarity(std::span<const double> x, std::span<const double> y);
double cosine_distance(std::span<const double> x, std::span<const double> y);

// Exact Word Mover's Distance between token multisets under the embedder's
// Euclidean ground metric. Documents are capped at 64 tokens.
double wmd(const std::vector<std::string>& doc1, const std::vector<std::string>& doc2,
           const Embedder& embedder);

struct DistanceSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double p25 = 0.0;
    double p75 = 0.0;
};

DistanceSummary distance_summary(std::vector<double> samples);

// Linear interpolation between order statistics at rank q*(n-1);
// input must be sorted ascending.
double percentile(const std::vector<double>& sorted, double q);

// Half-up rounding to percent with 2 decimals, as used in report tables.
double round_percent(double fraction);

}  // namespace carepipe::metrics
