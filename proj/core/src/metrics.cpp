#include "affdistill/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "affdistill/errors.hpp"

namespace affd {

long long ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0LL);
}

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels,
                          int num_classes) {
    if (preds.size() != labels.size()) throw ShapeError("confusion: preds/labels size mismatch");
    if (num_classes < 1) throw InvalidArgument("confusion: num_classes must be >= 1");
    ConfusionMatrix cm;
    cm.num_classes = num_classes;
    cm.counts.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes || preds[i] < 0 || preds[i] >= num_classes)
            throw InvalidArgument("confusion: class id out of range");
        ++cm.counts[static_cast<std::size_t>(labels[i]) * num_classes + preds[i]];
    }
    return cm;
}

namespace {

ClassScore class_score(const ConfusionMatrix& cm, int c) {
    long long tp = cm.at(c, c), row = 0, col = 0;
    for (int j = 0; j < cm.num_classes; ++j) {
        row += cm.at(c, j);
        col += cm.at(j, c);
    }
    ClassScore s;
    s.cls = c;
    s.support = row;
    s.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    s.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

MetricsReport report_over(const ConfusionMatrix& cm, const std::vector<int>& classes,
                          const std::string& protocol) {
    long long total = cm.total();
    if (total == 0) throw NumericError("metrics: empty confusion matrix");
    MetricsReport r;
    r.protocol = protocol;
    r.confusion = cm;
    r.evaluated_classes = classes;
    long long trace = 0;
    for (int c = 0; c < cm.num_classes; ++c) trace += cm.at(c, c);
    r.acc = static_cast<double>(trace) / static_cast<double>(total);
    double f1_sum = 0.0, recall_sum = 0.0;
    for (int c : classes) {
        auto s = class_score(cm, c);
        f1_sum += s.f1;
        recall_sum += s.recall;
        r.per_class.push_back(s);
    }
    r.macro_f1 = f1_sum / static_cast<double>(classes.size());
    r.bacc = recall_sum / static_cast<double>(classes.size());
    return r;
}

}  // namespace

MetricsReport metrics_from_confusion(const ConfusionMatrix& cm) {
    std::vector<int> all(cm.num_classes);
    std::iota(all.begin(), all.end(), 0);
    return report_over(cm, all, "eight_way");
}

MetricsReport present_only(std::span<const int> preds, std::span<const int> labels,
                           int num_classes, const std::vector<int>& target_classes) {
    if (target_classes.empty()) throw InvalidArgument("present_only: empty target class set");
    std::vector<bool> in_target(num_classes, false);
    for (int c : target_classes) {
        if (c < 0 || c >= num_classes)
            throw InvalidArgument("present_only: target class out of range");
        in_target[c] = true;
    }
    for (int l : labels)
        if (l < 0 || l >= num_classes || !in_target[l])
            throw InvalidArgument("present_only: label outside target class set");
    auto cm = confusion(preds, labels, num_classes);
    auto sorted = target_classes;
    std::sort(sorted.begin(), sorted.end());
    return report_over(cm, sorted, "present_only");
}

double macro_auroc(const std::vector<std::vector<double>>& scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ShapeError("macro_auroc: size mismatch");
    if (scores.empty()) throw NumericError("macro_auroc: no samples");
    const std::size_t k = scores[0].size();
    double sum = 0.0;
    int evaluated = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t n_pos = 0;
        for (int l : labels)
            if (static_cast<std::size_t>(l) == c) ++n_pos;
        std::size_t n_neg = labels.size() - n_pos;
        if (n_pos == 0 || n_neg == 0) continue;  // skipped with a warning upstream

        // rank-based one-vs-rest AUROC with midranks for ties
        std::vector<std::size_t> order(labels.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return scores[a][c] < scores[b][c];
        });
        std::vector<double> rank(labels.size());
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j + 1 < order.size() && scores[order[j + 1]][c] == scores[order[i]][c]) ++j;
            double mid = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based midrank
            for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
            i = j + 1;
        }
        double pos_rank_sum = 0.0;
        for (std::size_t s = 0; s < labels.size(); ++s)
            if (static_cast<std::size_t>(labels[s]) == c) pos_rank_sum += rank[s];
        double auroc = (pos_rank_sum - static_cast<double>(n_pos) * (n_pos + 1) / 2.0) /
                       (static_cast<double>(n_pos) * static_cast<double>(n_neg));
        sum += auroc;
        ++evaluated;
    }
    if (evaluated == 0) throw NumericError("macro_auroc: no evaluable class");
    return sum / static_cast<double>(evaluated);
}

BootstrapCI bootstrap_ci(const MetricFn& metric, std::span<const int> preds,
                         std::span<const int> labels, int resamples, std::uint64_t seed) {
    if (preds.size() != labels.size()) throw ShapeError("bootstrap_ci: size mismatch");
    if (preds.empty()) throw NumericError("bootstrap_ci: empty input");
    if (resamples < 1) throw InvalidArgument("bootstrap_ci: resamples must be >= 1");

    // strata of sample indices by true class, ascending class order
    int max_cls = *std::max_element(labels.begin(), labels.end());
    std::vector<std::vector<std::size_t>> strata(static_cast<std::size_t>(max_cls) + 1);
    for (std::size_t i = 0; i < labels.size(); ++i)
        strata[static_cast<std::size_t>(labels[i])].push_back(i);

    BootstrapCI ci;
    ci.resamples = resamples;
    ci.seed = seed;
    ci.point = metric(preds, labels);

    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(resamples));
    std::vector<int> rp(preds.size()), rl(labels.size());
    for (int r = 0; r < resamples; ++r) {
        std::seed_seq seq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(r)};
        std::mt19937_64 rng(seq);
        std::size_t out = 0;
        for (const auto& stratum : strata) {
            if (stratum.empty()) continue;
            std::uniform_int_distribution<std::size_t> pick(0, stratum.size() - 1);
            for (std::size_t j = 0; j < stratum.size(); ++j) {
                std::size_t idx = stratum[pick(rng)];
                rp[out] = preds[idx];
                rl[out] = labels[idx];
                ++out;
            }
        }
        values.push_back(metric(std::span<const int>(rp), std::span<const int>(rl)));
    }
    std::sort(values.begin(), values.end());
    auto nearest_rank = [&](double p) {
        auto n = static_cast<double>(values.size());
        auto idx = static_cast<std::size_t>(std::ceil(p * n));
        if (idx > 0) --idx;
        return values[std::min(idx, values.size() - 1)];
    };
    ci.lower = nearest_rank(0.025);
    ci.upper = nearest_rank(0.975);
    return ci;
}

nlohmann::json report_to_json(const MetricsReport& report,
                              const std::vector<std::pair<std::string, BootstrapCI>>& cis) {
    nlohmann::json j;
    j["protocol"] = report.protocol;
    std::vector<std::string> names;
    for (int c : report.evaluated_classes) names.emplace_back(kClassNames.at(c));
    j["classes"] = names;
    j["acc"] = report.acc;
    j["macro_f1"] = report.macro_f1;
    j["bacc"] = report.bacc;
    if (report.macro_auroc)
        j["macro_auroc"] = *report.macro_auroc;
    else
        j["macro_auroc"] = nullptr;
    nlohmann::json per = nlohmann::json::array();
    for (const auto& s : report.per_class) {
        per.push_back({{"class", std::string(kClassNames.at(s.cls))},
                       {"precision", s.precision},
                       {"recall", s.recall},
                       {"f1", s.f1},
                       {"support", s.support}});
    }
    j["per_class"] = per;
    nlohmann::json ci = nlohmann::json::object();
    for (const auto& [name, c] : cis)
        ci[name] = {{"point", c.point}, {"lower", c.lower}, {"upper", c.upper},
                    {"resamples", c.resamples}, {"seed", c.seed}};
    j["ci"] = ci;
    nlohmann::json cmj = nlohmann::json::array();
    for (int r = 0; r < report.confusion.num_classes; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < report.confusion.num_classes; ++c)
            row.push_back(report.confusion.at(r, c));
        cmj.push_back(row);
    }
    j["confusion"] = cmj;
    return j;
}

}  // namespace affd
