#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "affdistill/classes.hpp"

namespace affd {

struct ConfusionMatrix {
    int num_classes = 0;
    std::vector<long long> counts;  // rows = true, cols = predicted

    long long at(int true_cls, int pred_cls) const {
        return counts[static_cast<std::size_t>(true_cls) * num_classes + pred_cls];
    }
    long long total() const;
};

struct ClassScore {
    int cls = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long long support = 0;
};

struct MetricsReport {
    double acc = 0.0;
    double macro_f1 = 0.0;
    double bacc = 0.0;
    std::optional<double> macro_auroc;
    std::vector<ClassScore> per_class;       // aligned with evaluated_classes
    std::vector<int> evaluated_classes;
    std::string protocol = "eight_way";      // or "present_only"
    ConfusionMatrix confusion;
};

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels,
                          int num_classes);

/// Acc, Macro-F1, bACC over all classes; zero-support classes contribute
/// recall/F1 = 0 (never NaN).
MetricsReport metrics_from_confusion(const ConfusionMatrix& cm);

/// Mean over classes of rank-based one-vs-rest AUROC; ties count 0.5.
/// Classes without both a positive and a negative are skipped.
double macro_auroc(const std::vector<std::vector<double>>& scores, std::span<const int> labels);

/// Averages restricted to target_classes; predictions of absent classes stay
/// in the confusion matrix and count as errors against the true class.
MetricsReport present_only(std::span<const int> preds, std::span<const int> labels,
                           int num_classes, const std::vector<int>& target_classes);

struct BootstrapCI {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    int resamples = 1000;
    std::uint64_t seed = 0;
};

using MetricFn = std::function<double(std::span<const int> preds, std::span<const int> labels)>;

/// Resamples with replacement within each true-class stratum, preserving
/// per-class counts; CI = nearest-rank 2.5/97.5 percentiles. Deterministic
/// under seed (per-resample generators derived from (seed, index)).
BootstrapCI bootstrap_ci(const MetricFn& metric, std::span<const int> preds,
                         std::span<const int> labels, int resamples = 1000,
                         std::uint64_t seed = 0);

nlohmann::json report_to_json(const MetricsReport& report,
                              const std::vector<std::pair<std::string, BootstrapCI>>& cis = {});

}  // namespace affd
