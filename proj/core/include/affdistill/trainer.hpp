#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "affdistill/losses.hpp"
#include "affdistill/nn.hpp"
#include "affdistill/protobank.hpp"
#include "affdistill/synth.hpp"

namespace affd {

/// Ablation lattice: B0 CE only; B1 adds logit KD; B2 adds Proto-KD;
/// B3 adds the late-ramped geometric term.
enum class Variant { B0, B1, B2, B3 };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct TeacherConfig {
    int epochs = 100;
    int batch_size = 128;
    double base_lr = 2e-4;
    double weight_decay = 0.05;
    double clip = 1.0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden = {128, 128};
    std::size_t feature_dim = 256;
    double ema_decay = 0.999;
    double valid_fraction = 0.2;
};

struct TeacherResult {
    DenseModel model;
    EMAState ema;
    std::vector<std::array<double, 2>> val_ccc;  // per epoch: (valence, arousal)
};

/// V/A regression teacher: MSE objective, AdamW + cosine schedule, gradient
/// clipping, EMA shadow, per-epoch validation CCC on both axes.
TeacherResult train_teacher(const std::vector<std::vector<double>>& inputs,
                            const std::vector<VAPoint>& labels, const TeacherConfig& cfg);

/// Concordance correlation: 2 cov / (var_p + var_t + (mean_p - mean_t)^2),
/// population moments. Both series constant -> NumericError.
double ccc(std::span<const double> pred, std::span<const double> truth);

/// Unit-norm penultimate features of each input.
std::vector<std::vector<double>> extract_embeddings(const DenseModel& model,
                                                    const std::vector<std::vector<double>>& inputs);

struct TrainConfig {
    int epochs = 100;
    int batch_size = 128;
    double base_lr = 2e-4;
    double weight_decay = 0.05;
    double clip = 1.0;
    std::uint64_t seed = 0;
    Variant variant = Variant::B3;
    LossConfig loss;
    std::vector<std::size_t> hidden = {128, 128};
    std::size_t feature_dim = 256;
    bool student_ema = false;  // exposed but off; not tuned
    double ema_decay = 0.999;
    double valid_fraction = 0.2;
    bool auto_class_weights = true;  // inverse-frequency^0.5, mean 1
};

struct EpochLog {
    int epoch = 0;
    double loss = 0, ce = 0, kd = 0, proto = 0, geo = 0;
    double acc = 0, macro_f1 = 0, bacc = 0;
    double lr = 0, s_geo = 0;
};

struct StudentResult {
    DenseModel model;
    std::vector<EpochLog> logs;
    LossConfig effective_loss;  // after variant gating and weight resolution
};

/// Deterministic student loop: forward -> loss terms -> clip -> AdamW with a
/// per-epoch cosine schedule. B1+ requires teacher; B2+ requires bank with
/// dim == feature_dim.
StudentResult train_student(const Dataset& train, const Dataset* valid,
                            const PrototypeBank* bank, const DenseModel* teacher,
                            const TrainConfig& cfg);

/// Canonical (sorted-key) JSON of every configuration field plus input
/// digests; byte-stable for identical inputs.
nlohmann::json fingerprint(const TrainConfig& cfg, const std::string& bank_digest = "",
                           const std::string& dataset_digest = "");

/// CSV: epoch,loss,ce,kd,proto,geo,acc,macro_f1,bacc,lr,s_geo
void write_epoch_logs_csv(const std::vector<EpochLog>& logs, const std::filesystem::path& path);

std::vector<double> inverse_freq_class_weights(const std::vector<int>& labels, int num_classes);

/// Seeded stratified index split; every class is represented in the train side.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const std::vector<int>& labels, double valid_fraction, std::uint64_t seed);

}  // namespace affd
