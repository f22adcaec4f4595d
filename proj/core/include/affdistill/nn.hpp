#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace affd {

// Small dense network: input -> hidden (ReLU) ... -> projection -> L2Norm ->
// head. The projection output is the unit-norm feature; the head maps the
// feature to logits with no activation.

struct DenseModel {
    std::vector<std::size_t> sizes;        // input, hidden..., feature_dim, outputs
    std::vector<std::vector<double>> w;    // w[i]: sizes[i+1] x sizes[i], row-major
    std::vector<std::vector<double>> b;    // b[i]: sizes[i+1]

    std::size_t layer_count() const { return w.size(); }
    std::size_t input_dim() const { return sizes.front(); }
    std::size_t feature_dim() const { return sizes[sizes.size() - 2]; }
    std::size_t output_dim() const { return sizes.back(); }
    std::size_t parameter_count() const;

    /// Fan-in-scaled uniform init, zero biases. sizes must have >= 3 entries
    /// (input, feature, outputs at minimum).
    static DenseModel init(std::vector<std::size_t> sizes, std::uint64_t seed);
};

/// Activation record from a forward evaluation, consumed by backward().
struct ForwardPass {
    std::vector<std::vector<double>> post;  // post[i]: activated output of layer i
    std::vector<double> feature;            // unit-norm projection output
    std::vector<double> logits;
    double feature_norm = 0.0;              // pre-normalization norm
    bool degenerate_feature = false;        // zero-vector fallback engaged
};

ForwardPass forward(const DenseModel& m, std::span<const double> x);

struct GradientSet {
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> b;

    static GradientSet zeros(const DenseModel& m);
    void accumulate(const GradientSet& other, double scale = 1.0);
    void scale(double s);
    double global_norm() const;
};

/// Accumulates analytic gradients into `out` given upstream gradients on the
/// normalized feature and on the logits. The L2-normalization Jacobian
/// (I - ff^T)/||v|| is applied; for a degenerate feature the norm gradient is
/// dropped (the fallback output is constant).
void backward(const DenseModel& m, std::span<const double> x, const ForwardPass& fp,
              std::span<const double> dfeature, std::span<const double> dlogits,
              GradientSet& out);

/// Global L2-norm clipping, in place.
void clip_grad_norm(GradientSet& g, double max_norm = 1.0);

struct OptimizerState {
    std::vector<std::vector<double>> m_w, v_w, m_b, v_b;  // Adam moments
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.05;

    static OptimizerState zeros(const DenseModel& m, double weight_decay = 0.05);
};

/// One AdamW step with decoupled weight decay (decay applies to weights only,
/// not biases).
void adamw_step(DenseModel& m, const GradientSet& g, OptimizerState& s, double lr);

/// base_lr * 0.5 * (1 + cos(pi * step / total_steps)).
double cosine_lr(long step, long total_steps, double base_lr = 2e-4);

struct EMAState {
    std::vector<std::vector<double>> w, b;  // shadow parameters
    double decay = 0.999;

    static EMAState from(const DenseModel& m, double decay);
    /// shadow <- decay * shadow + (1 - decay) * param
    void update(const DenseModel& m);
    DenseModel to_model(const DenseModel& like) const;
};

/// Checkpoint: NPZ with layer{i}_w / layer{i}_b plus a JSON sidecar
/// (path + ".json") holding sizes, hyperparameters, and the NPZ digest.
std::string save_checkpoint(const DenseModel& m, const std::filesystem::path& path,
                            const nlohmann::json& hyper = nlohmann::json::object());
DenseModel load_checkpoint(const std::filesystem::path& path,
                           nlohmann::json* hyper_out = nullptr);

}  // namespace affd
