#include "affdistill/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "affdistill/errors.hpp"
#include "affdistill/metrics.hpp"

namespace affd {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::B0: return "b0";
        case Variant::B1: return "b1";
        case Variant::B2: return "b2";
        case Variant::B3: return "b3";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "b0" || name == "B0") return Variant::B0;
    if (name == "b1" || name == "B1") return Variant::B1;
    if (name == "b2" || name == "B2") return Variant::B2;
    if (name == "b3" || name == "B3") return Variant::B3;
    throw ConfigError("unknown variant: " + name);
}

double ccc(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size()) throw ShapeError("ccc: size mismatch");
    if (pred.size() < 2) throw InvalidArgument("ccc: need at least 2 samples");
    const auto n = static_cast<double>(pred.size());
    double mp = 0, mt = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        mp += pred[i];
        mt += truth[i];
    }
    mp /= n;
    mt /= n;
    double vp = 0, vt = 0, cov = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        vp += (pred[i] - mp) * (pred[i] - mp);
        vt += (truth[i] - mt) * (truth[i] - mt);
        cov += (pred[i] - mp) * (truth[i] - mt);
    }
    vp /= n;
    vt /= n;
    cov /= n;
    double denom = vp + vt + (mp - mt) * (mp - mt);
    if (denom <= 0.0) throw NumericError("ccc: both series constant and equal");
    return 2.0 * cov / denom;
}

std::vector<std::vector<double>> extract_embeddings(
    const DenseModel& model, const std::vector<std::vector<double>>& inputs) {
    std::vector<std::vector<double>> out;
    out.reserve(inputs.size());
    for (const auto& x : inputs) out.push_back(forward(model, x).feature);
    return out;
}

std::vector<double> inverse_freq_class_weights(const std::vector<int>& labels, int num_classes) {
    std::vector<double> counts(num_classes, 0.0);
    for (int l : labels) {
        if (l < 0 || l >= num_classes) throw InvalidArgument("class_weights: label out of range");
        counts[static_cast<std::size_t>(l)] += 1.0;
    }
    std::vector<double> w(num_classes);
    for (int c = 0; c < num_classes; ++c)
        w[c] = counts[c] > 0.0 ? 1.0 / std::sqrt(counts[c]) : 0.0;
    // absent classes take the mean weight of present classes, then normalize
    double sum = 0.0;
    int present = 0;
    for (double v : w)
        if (v > 0.0) {
            sum += v;
            ++present;
        }
    if (present == 0) throw InvalidArgument("class_weights: no labels");
    double mean_present = sum / present;
    for (double& v : w)
        if (v == 0.0) v = mean_present;
    double mean = std::accumulate(w.begin(), w.end(), 0.0) / num_classes;
    for (double& v : w) v /= mean;
    return w;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    const std::vector<int>& labels, double valid_fraction, std::uint64_t seed) {
    if (valid_fraction <= 0.0 || valid_fraction >= 1.0)
        throw ConfigError("stratified_split: fraction outside (0,1)");
    int max_cls = *std::max_element(labels.begin(), labels.end());
    std::vector<std::vector<std::size_t>> strata(static_cast<std::size_t>(max_cls) + 1);
    for (std::size_t i = 0; i < labels.size(); ++i)
        strata[static_cast<std::size_t>(labels[i])].push_back(i);

    std::mt19937_64 rng(seed ^ 0x5714D5EEDULL);
    std::vector<std::size_t> train_idx, valid_idx;
    for (auto& s : strata) {
        if (s.empty()) continue;
        std::shuffle(s.begin(), s.end(), rng);
        auto n_valid = static_cast<std::size_t>(
            std::floor(valid_fraction * static_cast<double>(s.size())));
        if (n_valid >= s.size()) n_valid = s.size() - 1;  // keep every class trainable
        for (std::size_t i = 0; i < s.size(); ++i)
            (i < n_valid ? valid_idx : train_idx).push_back(s[i]);
    }
    if (train_idx.empty() || valid_idx.empty())
        throw ConfigError("stratified_split: dataset too small to split");
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(valid_idx.begin(), valid_idx.end());
    return {train_idx, valid_idx};
}

// ---------------------------------------------------------------------------
// teacher
// ---------------------------------------------------------------------------

TeacherResult train_teacher(const std::vector<std::vector<double>>& inputs,
                            const std::vector<VAPoint>& labels, const TeacherConfig& cfg) {
    if (inputs.empty()) throw InvalidArgument("train_teacher: empty dataset");
    if (inputs.size() != labels.size()) throw ShapeError("train_teacher: inputs/labels mismatch");
    if (inputs.size() < 2) throw ConfigError("train_teacher: cannot form a validation split");

    const std::size_t input_dim = inputs[0].size();
    std::vector<std::size_t> sizes;
    sizes.push_back(input_dim);
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(cfg.feature_dim);
    sizes.push_back(2);  // V/A heads

    TeacherResult res{DenseModel::init(sizes, cfg.seed), EMAState{}, {}};
    res.ema = EMAState::from(res.model, cfg.ema_decay);
    if (cfg.epochs == 0) return res;

    // plain random split (labels are continuous)
    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 split_rng(cfg.seed ^ 0x7EAC4E55ULL);
    std::shuffle(order.begin(), order.end(), split_rng);
    auto n_valid = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                                cfg.valid_fraction * inputs.size())));
    if (n_valid >= inputs.size()) n_valid = inputs.size() - 1;
    std::vector<std::size_t> valid_idx(order.begin(), order.begin() + n_valid);
    std::vector<std::size_t> train_idx(order.begin() + n_valid, order.end());

    OptimizerState opt = OptimizerState::zeros(res.model, cfg.weight_decay);
    const std::vector<double> zero_feature(cfg.feature_dim, 0.0);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        double lr = cosine_lr(epoch - 1, cfg.epochs, cfg.base_lr);
        std::mt19937_64 rng(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(epoch));
        auto batch_order = train_idx;
        std::shuffle(batch_order.begin(), batch_order.end(), rng);

        for (std::size_t start = 0; start < batch_order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t end = std::min(batch_order.size(),
                                       start + static_cast<std::size_t>(cfg.batch_size));
            auto bsz = static_cast<double>(end - start);
            GradientSet grads = GradientSet::zeros(res.model);
            for (std::size_t bi = start; bi < end; ++bi) {
                std::size_t i = batch_order[bi];
                auto fp = forward(res.model, inputs[i]);
                std::vector<double> dlogits = {
                    2.0 * (fp.logits[0] - labels[i].valence) / bsz,
                    2.0 * (fp.logits[1] - labels[i].arousal) / bsz};
                backward(res.model, inputs[i], fp, zero_feature, dlogits, grads);
            }
            clip_grad_norm(grads, cfg.clip);
            adamw_step(res.model, grads, opt, lr);
            res.ema.update(res.model);
        }

        std::vector<double> pv, pa, tv, ta;
        for (auto i : valid_idx) {
            auto fp = forward(res.model, inputs[i]);
            pv.push_back(fp.logits[0]);
            pa.push_back(fp.logits[1]);
            tv.push_back(labels[i].valence);
            ta.push_back(labels[i].arousal);
        }
        res.val_ccc.push_back({ccc(pv, tv), ccc(pa, ta)});
    }
    return res;
}

// ---------------------------------------------------------------------------
// student
// ---------------------------------------------------------------------------

namespace {

struct GatedLambdas {
    double kd = 0, proto = 0, geo = 0;
};

GatedLambdas gate(Variant v, const LossConfig& loss) {
    GatedLambdas g;
    if (v == Variant::B1 || v == Variant::B2 || v == Variant::B3) g.kd = loss.lambda_kd;
    if (v == Variant::B2 || v == Variant::B3) g.proto = loss.lambda_proto;
    if (v == Variant::B3) g.geo = loss.lambda_geo;
    return g;
}

}  // namespace

StudentResult train_student(const Dataset& train, const Dataset* valid,
                            const PrototypeBank* bank, const DenseModel* teacher,
                            const TrainConfig& cfg) {
    if (train.size() == 0) throw InvalidArgument("train_student: empty dataset");
    if (cfg.epochs < 1) throw ConfigError("train_student: epochs must be >= 1");
    cfg.loss.validate();
    GatedLambdas lam = gate(cfg.variant, cfg.loss);
    if (lam.kd > 0.0 && teacher == nullptr)
        throw ConfigError("train_student: variant requires a vision teacher");
    if (lam.proto > 0.0 && bank == nullptr)
        throw ConfigError("train_student: variant requires a prototype bank");
    if (bank != nullptr && lam.proto > 0.0 && bank->dim != cfg.feature_dim)
        throw ConfigError("train_student: bank dimension != student feature dim");
    if (teacher != nullptr && teacher->output_dim() != static_cast<std::size_t>(kNumClasses))
        throw ConfigError("train_student: teacher output dim mismatch");

    LossConfig loss = cfg.loss;
    if (loss.class_weights.empty() && cfg.auto_class_weights)
        loss.class_weights = inverse_freq_class_weights(train.labels, kNumClasses);

    // split when no validation set is given
    std::vector<std::size_t> train_idx, valid_idx;
    const Dataset* vset = valid;
    if (vset == nullptr) {
        std::tie(train_idx, valid_idx) =
            stratified_split(train.labels, cfg.valid_fraction, cfg.seed);
    } else {
        train_idx.resize(train.size());
        std::iota(train_idx.begin(), train_idx.end(), 0);
    }

    const std::size_t input_dim = train.features[0].size();
    std::vector<std::size_t> sizes;
    sizes.push_back(input_dim);
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(cfg.feature_dim);
    sizes.push_back(static_cast<std::size_t>(kNumClasses));

    StudentResult res;
    res.model = DenseModel::init(sizes, cfg.seed);
    res.effective_loss = loss;
    OptimizerState opt = OptimizerState::zeros(res.model, cfg.weight_decay);
    EMAState ema = EMAState::from(res.model, cfg.ema_decay);

    const std::vector<double> zero_feature(cfg.feature_dim, 0.0);
    const std::vector<double> zero_logits(kNumClasses, 0.0);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        double lr = cosine_lr(epoch - 1, cfg.epochs, cfg.base_lr);
        double s_geo = geo_schedule(epoch, loss.ramp_start, loss.ramp_end);
        std::mt19937_64 rng(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(epoch));
        auto batch_order = train_idx;
        std::shuffle(batch_order.begin(), batch_order.end(), rng);

        double sum_ce = 0, sum_kd = 0, sum_proto = 0, sum_geo = 0, sum_total = 0;
        std::size_t n_batches = 0;

        for (std::size_t start = 0; start < batch_order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t end = std::min(batch_order.size(),
                                       start + static_cast<std::size_t>(cfg.batch_size));
            std::size_t bsz = end - start;
            auto bszd = static_cast<double>(bsz);

            std::vector<ForwardPass> passes(bsz);
            std::vector<std::vector<double>> feats(bsz);
            std::vector<int> blabels(bsz);
            for (std::size_t b = 0; b < bsz; ++b) {
                std::size_t i = batch_order[start + b];
                passes[b] = forward(res.model, train.features[i]);
                feats[b] = passes[b].feature;
                blabels[b] = train.labels[i];
            }

            double ce_mean = 0, kd_mean = 0, proto_mean = 0;
            std::vector<std::vector<double>> dlogits(bsz, zero_logits);
            std::vector<std::vector<double>> dfeat(bsz, zero_feature);

            for (std::size_t b = 0; b < bsz; ++b) {
                std::size_t i = batch_order[start + b];
                auto target = label_smooth(train.labels[i], loss.alpha_smooth, kNumClasses);
                auto ce = ce_loss(target, passes[b].logits,
                                  loss.class_weight(train.labels[i]));
                ce_mean += ce.value / bszd;
                for (int c = 0; c < kNumClasses; ++c) dlogits[b][c] += ce.grad[c] / bszd;

                if (lam.kd > 0.0) {
                    auto tfp = forward(*teacher, train.features[i]);
                    auto kd = kd_loss(tfp.logits, passes[b].logits, loss.t_kd, loss.kd_mse);
                    kd_mean += kd.value / bszd;
                    for (int c = 0; c < kNumClasses; ++c)
                        dlogits[b][c] += lam.kd * kd.grad[c] / bszd;
                }
                if (lam.proto > 0.0) {
                    auto pr = proto_kd_loss(passes[b].feature, *bank, loss.tau_proto);
                    proto_mean += pr.value / bszd;
                    for (std::size_t d = 0; d < cfg.feature_dim; ++d)
                        dfeat[b][d] += lam.proto * pr.grad[d] / bszd;
                }
            }

            double geo_value = 0.0;
            if (lam.geo > 0.0 && s_geo > 0.0) {
                auto dg = dgeo_loss(feats, blabels, loss);
                geo_value = dg.value;
                for (std::size_t b = 0; b < bsz; ++b)
                    for (std::size_t d = 0; d < cfg.feature_dim; ++d)
                        dfeat[b][d] += lam.geo * s_geo * dg.dfeatures[b][d];
            }

            GradientSet grads = GradientSet::zeros(res.model);
            for (std::size_t b = 0; b < bsz; ++b) {
                std::size_t i = batch_order[start + b];
                backward(res.model, train.features[i], passes[b], dfeat[b], dlogits[b], grads);
            }
            clip_grad_norm(grads, cfg.clip);
            adamw_step(res.model, grads, opt, lr);
            if (cfg.student_ema) ema.update(res.model);

            sum_ce += ce_mean;
            sum_kd += kd_mean;
            sum_proto += proto_mean;
            sum_geo += s_geo * geo_value;
            sum_total += ce_mean + lam.kd * kd_mean + lam.proto * proto_mean +
                         lam.geo * s_geo * geo_value;
            ++n_batches;
        }

        // validation
        std::vector<int> preds, vlabels;
        if (vset != nullptr) {
            for (std::size_t i = 0; i < vset->size(); ++i) {
                auto fp = forward(res.model, vset->features[i]);
                preds.push_back(static_cast<int>(std::distance(
                    fp.logits.begin(), std::max_element(fp.logits.begin(), fp.logits.end()))));
                vlabels.push_back(vset->labels[i]);
            }
        } else {
            for (auto i : valid_idx) {
                auto fp = forward(res.model, train.features[i]);
                preds.push_back(static_cast<int>(std::distance(
                    fp.logits.begin(), std::max_element(fp.logits.begin(), fp.logits.end()))));
                vlabels.push_back(train.labels[i]);
            }
        }
        auto report = metrics_from_confusion(confusion(preds, vlabels, kNumClasses));

        auto nb = static_cast<double>(std::max<std::size_t>(1, n_batches));
        EpochLog log;
        log.epoch = epoch;
        log.loss = sum_total / nb;
        log.ce = sum_ce / nb;
        log.kd = sum_kd / nb;
        log.proto = sum_proto / nb;
        log.geo = sum_geo / nb;
        log.acc = report.acc;
        log.macro_f1 = report.macro_f1;
        log.bacc = report.bacc;
        log.lr = lr;
        log.s_geo = lam.geo > 0.0 ? s_geo : 0.0;
        res.logs.push_back(log);
    }

    if (cfg.student_ema) res.model = ema.to_model(res.model);
    return res;
}

nlohmann::json fingerprint(const TrainConfig& cfg, const std::string& bank_digest,
                           const std::string& dataset_digest) {
    nlohmann::json j;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["base_lr"] = cfg.base_lr;
    j["weight_decay"] = cfg.weight_decay;
    j["clip"] = cfg.clip;
    j["seed"] = cfg.seed;
    j["variant"] = variant_name(cfg.variant);
    j["hidden"] = cfg.hidden;
    j["feature_dim"] = cfg.feature_dim;
    j["student_ema"] = cfg.student_ema;
    j["ema_decay"] = cfg.ema_decay;
    j["valid_fraction"] = cfg.valid_fraction;
    j["auto_class_weights"] = cfg.auto_class_weights;
    nlohmann::json l;
    l["alpha_smooth"] = cfg.loss.alpha_smooth;
    l["class_weights"] = cfg.loss.class_weights;
    l["t_kd"] = cfg.loss.t_kd;
    l["tau_proto"] = cfg.loss.tau_proto;
    l["lambda_kd"] = cfg.loss.lambda_kd;
    l["lambda_proto"] = cfg.loss.lambda_proto;
    l["lambda_geo"] = cfg.loss.lambda_geo;
    l["sigma2_max"] = cfg.loss.sigma2_max;
    l["margin"] = cfg.loss.margin;
    l["alpha_var"] = cfg.loss.alpha_var;
    l["alpha_mar"] = cfg.loss.alpha_mar;
    l["ramp_start"] = cfg.loss.ramp_start;
    l["ramp_end"] = cfg.loss.ramp_end;
    l["high_valence_classes"] = cfg.loss.high_valence_classes;
    l["kd_mse"] = cfg.loss.kd_mse;
    j["loss"] = l;
    j["bank_digest"] = bank_digest;
    j["dataset_digest"] = dataset_digest;
    return j;
}

void write_epoch_logs_csv(const std::vector<EpochLog>& logs, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("epoch_logs: cannot open " + path.string());
    out << "epoch,loss,ce,kd,proto,geo,acc,macro_f1,bacc,lr,s_geo\n";
    out.precision(12);
    for (const auto& l : logs)
        out << l.epoch << ',' << l.loss << ',' << l.ce << ',' << l.kd << ',' << l.proto << ','
            << l.geo << ',' << l.acc << ',' << l.macro_f1 << ',' << l.bacc << ',' << l.lr << ','
            << l.s_geo << '\n';
}

}  // namespace affd
