#include "affdistill/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "affdistill/errors.hpp"

namespace affd {

namespace {

std::vector<double> softmax(std::span<const double> z) {
    double zmax = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - zmax);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

double log_sum_exp(std::span<const double> z) {
    double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    return zmax + std::log(sum);
}

}  // namespace

void LossConfig::validate(int num_classes) const {
    if (t_kd <= 0.0 || tau_proto <= 0.0) throw ConfigError("LossConfig: temperatures must be > 0");
    if (lambda_kd < 0.0 || lambda_proto < 0.0 || lambda_geo < 0.0)
        throw ConfigError("LossConfig: lambdas must be >= 0");
    if (ramp_start >= ramp_end) throw ConfigError("LossConfig: ramp_start must be < ramp_end");
    if (!class_weights.empty() && static_cast<int>(class_weights.size()) != num_classes)
        throw ConfigError("LossConfig: class_weights size mismatch");
    for (int c : high_valence_classes)
        if (c < 0 || c >= num_classes)
            throw ConfigError("LossConfig: high-valence class out of range");
}

double LossConfig::class_weight(int cls) const {
    if (class_weights.empty()) return 1.0;
    return class_weights.at(static_cast<std::size_t>(cls));
}

std::vector<double> label_smooth(int cls, double alpha, int num_classes) {
    if (cls < 0 || cls >= num_classes) throw InvalidArgument("label_smooth: class out of range");
    if (alpha < 0.0 || alpha >= 1.0) throw InvalidArgument("label_smooth: alpha outside [0,1)");
    std::vector<double> t(num_classes, alpha / num_classes);
    t[cls] += 1.0 - alpha;
    return t;
}

std::vector<double> label_smooth(std::span<const double> dist, double alpha) {
    if (alpha < 0.0 || alpha >= 1.0) throw InvalidArgument("label_smooth: alpha outside [0,1)");
    const auto k = static_cast<double>(dist.size());
    std::vector<double> t(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) t[i] = (1.0 - alpha) * dist[i] + alpha / k;
    return t;
}

LossResult ce_loss(std::span<const double> target, std::span<const double> logits,
                   double weight) {
    if (target.size() != logits.size()) throw ShapeError("ce_loss: size mismatch");
    double lse = log_sum_exp(logits);
    double dot = 0.0;
    for (std::size_t c = 0; c < target.size(); ++c) dot += target[c] * logits[c];
    LossResult r;
    r.value = weight * (lse - dot);
    auto p = softmax(logits);
    r.grad.resize(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) r.grad[c] = weight * (p[c] - target[c]);
    return r;
}

LossResult kd_loss(std::span<const double> teacher_logits,
                   std::span<const double> student_logits, double temperature, bool mse) {
    if (teacher_logits.size() != student_logits.size()) throw ShapeError("kd_loss: size mismatch");
    if (temperature <= 0.0) throw InvalidArgument("kd_loss: temperature must be > 0");
    const std::size_t k = student_logits.size();
    std::vector<double> zt(k), zs(k);
    for (std::size_t i = 0; i < k; ++i) {
        zt[i] = teacher_logits[i] / temperature;
        zs[i] = student_logits[i] / temperature;
    }
    auto p = softmax(zt);
    auto q = softmax(zs);

    LossResult r;
    r.grad.assign(k, 0.0);
    if (!mse) {
        for (std::size_t i = 0; i < k; ++i)
            if (p[i] > 0.0) r.value += p[i] * (std::log(p[i]) - std::log(q[i]));
        for (std::size_t i = 0; i < k; ++i) r.grad[i] = (q[i] - p[i]) / temperature;
    } else {
        std::vector<double> dq(k);
        for (std::size_t i = 0; i < k; ++i) {
            double diff = q[i] - p[i];
            r.value += diff * diff / static_cast<double>(k);
            dq[i] = 2.0 * diff / static_cast<double>(k);
        }
        double inner = 0.0;
        for (std::size_t i = 0; i < k; ++i) inner += q[i] * dq[i];
        for (std::size_t i = 0; i < k; ++i) r.grad[i] = q[i] * (dq[i] - inner) / temperature;
    }
    return r;
}

LossResult proto_kd_loss(std::span<const double> feature, const PrototypeBank& bank, double tau) {
    if (feature.size() != bank.dim) throw ShapeError("proto_kd_loss: feature/bank dim mismatch");
    if (tau <= 0.0) throw InvalidArgument("proto_kd_loss: tau must be > 0");
    const int K = bank.bin_count();
    const std::size_t D = bank.dim;

    double fn2 = 0.0;
    for (double v : feature) fn2 += v * v;
    double fn = std::sqrt(fn2);
    if (fn < 1e-12) throw NumericError("proto_kd_loss: zero feature");

    // unit prototypes and cosine similarities
    std::vector<double> pnorm(K);
    std::vector<double> sims(K);
    for (int k = 0; k < K; ++k) {
        const double* p = bank.prototype(k);
        double pn2 = 0.0, dot = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
            pn2 += p[d] * p[d];
            dot += p[d] * feature[d];
        }
        double pn = std::sqrt(pn2);
        if (pn < 1e-12) throw NumericError("proto_kd_loss: degenerate prototype");
        pnorm[k] = pn;
        sims[k] = dot / (pn * fn);
    }
    std::vector<double> scaled(K);
    for (int k = 0; k < K; ++k) scaled[k] = sims[k] / tau;
    auto qs = softmax(scaled);

    LossResult r;
    for (int k = 0; k < K; ++k) {
        double qp = bank.prior[k];
        if (qp > 0.0) r.value += qp * (std::log(qp) - std::log(qs[k]));
    }
    // d/ds_k = (qs_k - qp_k)/tau; d cos_k/df = (p_hat - cos_k * f_hat) / ||f||
    r.grad.assign(D, 0.0);
    for (int k = 0; k < K; ++k) {
        double ds = (qs[k] - bank.prior[k]) / tau;
        const double* p = bank.prototype(k);
        for (std::size_t d = 0; d < D; ++d) {
            double phat = p[d] / pnorm[k];
            double fhat = feature[d] / fn;
            r.grad[d] += ds * (phat - sims[k] * fhat) / fn;
        }
    }
    return r;
}

double geo_schedule(int epoch, int ramp_start, int ramp_end) {
    if (ramp_start >= ramp_end) throw InvalidArgument("geo_schedule: ramp_start must be < ramp_end");
    if (epoch <= ramp_start) return 0.0;
    if (epoch >= ramp_end) return 1.0;
    double t = static_cast<double>(epoch - ramp_start) / static_cast<double>(ramp_end - ramp_start);
    return 0.5 * (1.0 - std::cos(std::numbers::pi * t));
}

DGeoResult dgeoloss_impl(const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, const LossConfig& cfg) {
    const std::size_t B = features.size();
    const std::size_t D = features[0].size();

    // group sample indices per class
    std::vector<std::vector<std::size_t>> members(kNumClasses);
    for (std::size_t i = 0; i < B; ++i) {
        int c = labels[i];
        if (c < 0 || c >= kNumClasses) throw InvalidArgument("dgeo_loss: label out of range");
        if (features[i].size() != D) throw ShapeError("dgeo_loss: inconsistent feature dims");
        members[c].push_back(i);
    }

    std::vector<std::vector<double>> means(kNumClasses);
    for (int c = 0; c < kNumClasses; ++c) {
        if (members[c].empty()) continue;
        means[c].assign(D, 0.0);
        for (auto i : members[c])
            for (std::size_t d = 0; d < D; ++d) means[c][d] += features[i][d];
        for (double& v : means[c]) v /= static_cast<double>(members[c].size());
    }

    DGeoResult r;
    r.dfeatures.assign(B, std::vector<double>(D, 0.0));

    // variance cap on high-valence classes with >= 2 samples
    for (int c : cfg.high_valence_classes) {
        std::size_t n = members[c].size();
        if (n < 2) continue;
        double var = 0.0;
        for (auto i : members[c])
            for (std::size_t d = 0; d < D; ++d) {
                double diff = features[i][d] - means[c][d];
                var += diff * diff;
            }
        var /= static_cast<double>(n);
        double excess = var - cfg.sigma2_max;
        if (excess > 0.0) {
            r.variance_term += excess;
            double scale = cfg.alpha_var * 2.0 / static_cast<double>(n);
            for (auto i : members[c])
                for (std::size_t d = 0; d < D; ++d)
                    r.dfeatures[i][d] += scale * (features[i][d] - means[c][d]);
        }
    }

    // ordered-pair margins between class means
    for (int c = 0; c < kNumClasses; ++c) {
        if (members[c].empty()) continue;
        for (int c2 = 0; c2 < kNumClasses; ++c2) {
            if (c2 == c || members[c2].empty()) continue;
            double d2 = 0.0;
            for (std::size_t d = 0; d < D; ++d) {
                double diff = means[c][d] - means[c2][d];
                d2 += diff * diff;
            }
            double dist = std::sqrt(d2);
            double gap = cfg.margin - dist;
            if (gap > 0.0 && dist > 0.0) {  // subgradient 0 at coincident means
                r.margin_term += gap;
                // dL/dmu_c = -(mu_c - mu_c2)/dist, spread over class members
                double scale = -cfg.alpha_mar / (dist * static_cast<double>(members[c].size()));
                for (auto i : members[c])
                    for (std::size_t d = 0; d < D; ++d)
                        r.dfeatures[i][d] += scale * (means[c][d] - means[c2][d]);
                double scale2 = cfg.alpha_mar / (dist * static_cast<double>(members[c2].size()));
                for (auto i : members[c2])
                    for (std::size_t d = 0; d < D; ++d)
                        r.dfeatures[i][d] += scale2 * (means[c][d] - means[c2][d]);
            } else if (gap > 0.0) {
                r.margin_term += gap;
            }
        }
    }

    r.value = cfg.alpha_var * r.variance_term + cfg.alpha_mar * r.margin_term;
    return r;
}

DGeoResult dgeo_loss(const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels, const LossConfig& cfg) {
    if (features.empty()) throw NumericError("dgeo_loss: empty batch");
    if (features.size() != labels.size()) throw ShapeError("dgeo_loss: features/labels mismatch");
    return dgeoloss_impl(features, labels, cfg);
}

TotalLoss total_loss(double ce, double kd, double proto, double geo, const LossConfig& cfg,
                     int epoch) {
    TotalLoss t;
    t.ce = ce;
    t.kd = kd;
    t.proto = proto;
    t.geo = geo;
    t.s_geo = geo_schedule(epoch, cfg.ramp_start, cfg.ramp_end);
    t.value = ce + cfg.lambda_kd * kd + cfg.lambda_proto * proto +
              cfg.lambda_geo * t.s_geo * geo;
    return t;
}

}  // namespace affd
