#pragma once

#include <span>
#include <vector>

#include "affdistill/classes.hpp"
#include "affdistill/protobank.hpp"

namespace affd {

struct LossConfig {
    double alpha_smooth = 0.055;
    std::vector<double> class_weights;  // empty = unit weights; else mean 1
    double t_kd = 5.0;
    double tau_proto = 0.90;
    double lambda_kd = 0.5;
    double lambda_proto = 0.12;
    double lambda_geo = 0.05;
    double sigma2_max = 0.5;
    double margin = 0.5;
    double alpha_var = 1.0;
    double alpha_mar = 1.0;
    int ramp_start = 20;
    int ramp_end = 60;
    std::vector<int> high_valence_classes = {kHappiness, kSurprise};
    bool kd_mse = false;  // tempered-logit MSE alternative, off by default

    void validate(int num_classes = kNumClasses) const;
    double class_weight(int cls) const;
};

/// (1 - alpha) * y + alpha / K, for a hard class index.
std::vector<double> label_smooth(int cls, double alpha, int num_classes = kNumClasses);
/// Same, for an input distribution.
std::vector<double> label_smooth(std::span<const double> dist, double alpha);

struct LossResult {
    double value = 0.0;
    std::vector<double> grad;  // w.r.t. the operation's student-side input
};

/// Weighted cross-entropy with a smoothed target; weight is the hard-label
/// class weight. grad is w.r.t. the logits.
LossResult ce_loss(std::span<const double> target, std::span<const double> logits,
                   double weight = 1.0);

/// KL(softmax(teacher/T) || softmax(student/T)); grad flows to student logits
/// only. With mse=true, mean squared error of the tempered softmax outputs.
LossResult kd_loss(std::span<const double> teacher_logits,
                   std::span<const double> student_logits, double temperature = 5.0,
                   bool mse = false);

/// KL(q_pro || softmax(cos(f, p_k)/tau)); grad is w.r.t. the feature, with the
/// full cosine Jacobian (valid on and off the unit sphere).
LossResult proto_kd_loss(std::span<const double> feature, const PrototypeBank& bank,
                         double tau = 0.90);

/// Cosine ramp: 0 at/before ramp_start, 1 at/after ramp_end.
double geo_schedule(int epoch, int ramp_start = 20, int ramp_end = 60);

struct DGeoResult {
    double value = 0.0;      // alpha_var * variance_term + alpha_mar * margin_term
    double variance_term = 0.0;
    double margin_term = 0.0;
    std::vector<std::vector<double>> dfeatures;  // per sample
};

/// Variance cap on high-valence classes plus ordered-pair mean margins.
/// Classes with < 2 samples are skipped in the variance term; classes with
/// >= 1 sample contribute a mean to the margin term. Subgradient 0 at hinge
/// kinks. The late-ramp factor is applied by the composer, not here.
DGeoResult dgeo_loss(const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels, const LossConfig& cfg);

struct TotalLoss {
    double value = 0.0;
    double ce = 0.0, kd = 0.0, proto = 0.0, geo = 0.0;  // unweighted terms
    double s_geo = 0.0;
};

/// L = ce + lambda_kd * kd + lambda_proto * proto + lambda_geo * s_geo(epoch) * geo
TotalLoss total_loss(double ce, double kd, double proto, double geo, const LossConfig& cfg,
                     int epoch);

}  // namespace affd
