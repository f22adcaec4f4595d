// Pipeline driver: synthetic data generation, topomap rendering, teacher and
// student training, prototype formation, evaluation, table emission, and
// artifact verification.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "affdistill/classes.hpp"
#include "affdistill/digest.hpp"
#include "affdistill/errors.hpp"
#include "affdistill/losses.hpp"
#include "affdistill/metrics.hpp"
#include "affdistill/nn.hpp"
#include "affdistill/npz.hpp"
#include "affdistill/protobank.hpp"
#include "affdistill/synth.hpp"
#include "affdistill/topomap.hpp"
#include "affdistill/trainer.hpp"
#include "affdistill/vagrid.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// exit codes: 0 success, 1 usage, 2 integrity failure, 3 numeric failure
constexpr int kExitUsage = 1;
constexpr int kExitIntegrity = 2;
constexpr int kExitNumeric = 3;

std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    auto t = std::chrono::system_clock::to_time_t(now);
    std::ostringstream oss;
    oss << std::put_time(std::gmtime(&t), "%Y-%m-%dT%H:%M:%SZ");
    return oss.str();
}

// Maintains <out>/SHA256SUMS.txt: replaces or appends entries, keeps order.
void record_outputs(const fs::path& out_dir, const std::vector<std::string>& rel_paths) {
    fs::path sums = out_dir / "SHA256SUMS.txt";
    std::vector<affd::ChecksumEntry> entries;
    if (fs::exists(sums)) entries = affd::read_checksums(sums);
    for (const auto& rel : rel_paths) {
        std::string digest = affd::sha256_file(out_dir / rel);
        bool found = false;
        for (auto& e : entries)
            if (e.path == rel) {
                e.digest = digest;
                found = true;
            }
        if (!found) entries.push_back({digest, rel});
    }
    affd::write_checksums(entries, sums);
}

void write_run_manifest(const fs::path& out_dir, const std::string& command,
                        const json& config, const std::vector<std::string>& input_paths,
                        const std::vector<std::string>& output_rel_paths) {
    json m;
    m["command"] = command;
    m["config_fingerprint"] = affd::sha256_bytes(config.dump());
    json inputs = json::object();
    for (const auto& p : input_paths) inputs[p] = affd::sha256_file(p);
    m["inputs"] = inputs;
    m["outputs"] = output_rel_paths;
    m["timestamp"] = iso_timestamp();
    std::ofstream out(out_dir / "run_manifest.json", std::ios::trunc);
    out << m.dump(2) << "\n";
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw affd::Error("cannot open " + path.string());
    out << j.dump(2) << "\n";
}

std::vector<std::size_t> parse_hidden(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stoull(tok));
    if (out.empty()) throw affd::ConfigError("hidden: empty layer list");
    return out;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string out;
    int n_train = 2000, n_valid = 500, n_test = 500;
    int input_dim = 16;
    double noise = 0.25, va_jitter = 0.08, label_noise = 0.0;
    double shift_rotation = 0.0;
    double prevalence_skew = 0.0;
    std::uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& a) {
    fs::create_directories(a.out);
    affd::SyntheticSpec spec;
    spec.input_dim = a.input_dim;
    spec.noise = a.noise;
    spec.va_jitter = a.va_jitter;
    spec.label_noise = a.label_noise;
    if (a.prevalence_skew != 0.0) {
        spec.prevalence.resize(affd::kNumClasses);
        for (int c = 0; c < affd::kNumClasses; ++c)
            spec.prevalence[c] = std::exp(-a.prevalence_skew * c /
                                          static_cast<double>(affd::kNumClasses - 1));
    }

    // per-split seeds derived from the root seed
    struct Split {
        const char* name;
        int n;
        double rotation;
        std::uint64_t salt;
    };
    std::vector<Split> splits = {{"train", a.n_train, 0.0, 0},
                                 {"valid", a.n_valid, 0.0, 1},
                                 {"test", a.n_test, 0.0, 2}};
    if (a.shift_rotation != 0.0)
        splits.push_back({"shifted_test", a.n_test, a.shift_rotation, 3});

    std::vector<std::string> outputs;
    for (const auto& s : splits) {
        affd::SyntheticSpec sp = spec;
        sp.n_samples = s.n;
        sp.shift_rotation = s.rotation;
        sp.seed = a.seed * 1000003ULL + s.salt;
        auto d = affd::synth_dataset(sp);
        std::string file = std::string(s.name) + ".npz";
        affd::save_dataset(d, fs::path(a.out) / file);
        outputs.push_back(file);
    }
    record_outputs(a.out, outputs);
    json cfg = {{"seed", a.seed},          {"n_train", a.n_train},
                {"n_valid", a.n_valid},    {"n_test", a.n_test},
                {"input_dim", a.input_dim}, {"noise", a.noise},
                {"va_jitter", a.va_jitter}, {"label_noise", a.label_noise},
                {"shift_rotation", a.shift_rotation}, {"prevalence_skew", a.prevalence_skew}};
    write_run_manifest(a.out, "synth", cfg, {}, outputs);
    std::cout << "wrote " << outputs.size() << " dataset files to " << a.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// render-topomaps
// ---------------------------------------------------------------------------

struct RenderArgs {
    std::string out;
    int n_segments = 200, channels = 8, resolution = 16, subjects = 4;
    double sample_rate = 128.0, duration = 4.0;
    std::uint64_t seed = 0;
};

int cmd_render_topomaps(const RenderArgs& a) {
    fs::create_directories(a.out);
    affd::EEGSynthSpec spec;
    spec.n_segments = a.n_segments;
    spec.channels = a.channels;
    spec.sample_rate = a.sample_rate;
    spec.duration_seconds = a.duration;
    spec.n_subjects = a.subjects;
    spec.seed = a.seed;
    auto samples = affd::synth_eeg(spec);
    auto layout = affd::ring_layout(a.channels);

    const std::size_t B = affd::kAllBands.size();
    const auto N = static_cast<std::size_t>(a.n_segments);

    // band power per segment, then per-(subject, band) normalization
    std::vector<std::vector<std::vector<double>>> powers(
        N, std::vector<std::vector<double>>(B));
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t b = 0; b < B; ++b)
            powers[i][b] = affd::band_power(samples[i].segment,
                                            affd::band_range(affd::kAllBands[b]));

    std::map<std::string, std::vector<std::size_t>> by_subject;
    for (std::size_t i = 0; i < N; ++i) by_subject[samples[i].segment.subject_id].push_back(i);
    for (auto& [subject, idxs] : by_subject) {
        for (std::size_t b = 0; b < B; ++b) {
            std::vector<std::vector<double>> pooled;
            for (auto i : idxs) pooled.push_back(powers[i][b]);
            auto norm = affd::normalize_subject_band(pooled);
            for (std::size_t j = 0; j < idxs.size(); ++j) powers[idxs[j]][b] = norm[j];
        }
    }

    const auto R = static_cast<std::size_t>(a.resolution);
    std::vector<double> images;
    images.reserve(N * B * R * R);
    std::vector<double> va;
    std::vector<std::string> subject_ids;
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t b = 0; b < B; ++b) {
            auto img = affd::render_topomap(powers[i][b], layout, a.resolution);
            images.insert(images.end(), img.pixels.begin(), img.pixels.end());
        }
        va.push_back(samples[i].va.valence);
        va.push_back(samples[i].va.arousal);
        subject_ids.push_back(samples[i].segment.subject_id);
    }

    affd::ArrayContainer c;
    c.add("images", affd::Array::from_f64({N, B, R, R}, std::move(images)));
    c.add("va", affd::Array::from_f64({N, 2}, std::move(va)));
    c.add("subject_ids", affd::Array::from_str({N}, subject_ids));
    affd::write_container(c, fs::path(a.out) / "topomaps.npz");

    {
        std::ofstream csv(fs::path(a.out) / "topomaps_manifest.csv", std::ios::trunc);
        csv << "segment_id,subject_id,band,valence,arousal,file\n";
        csv.precision(10);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t b = 0; b < B; ++b)
                csv << i << ',' << subject_ids[i] << ','
                    << affd::band_name(affd::kAllBands[b]) << ',' << samples[i].va.valence
                    << ',' << samples[i].va.arousal << ",topomaps.npz#images[" << i << ','
                    << b << "]\n";
    }

    std::vector<std::string> outputs = {"topomaps.npz", "topomaps_manifest.csv"};
    record_outputs(a.out, outputs);
    json cfg = {{"seed", a.seed},       {"n_segments", a.n_segments},
                {"channels", a.channels}, {"resolution", a.resolution},
                {"subjects", a.subjects}, {"sample_rate", a.sample_rate},
                {"duration", a.duration}};
    write_run_manifest(a.out, "render-topomaps", cfg, {}, outputs);
    std::cout << "rendered " << N << " segments x " << B << " bands to " << a.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// topomap archive loading (teacher input)
// ---------------------------------------------------------------------------

struct TopomapData {
    std::vector<std::vector<double>> inputs;  // flattened per segment
    std::vector<affd::VAPoint> va;
};

TopomapData load_topomaps(const fs::path& path) {
    auto c = affd::read_container(path);
    const auto& images = c.get("images");
    const auto& va = c.get("va");
    if (images.shape.size() != 4 || va.shape.size() != 2 || va.shape[1] != 2 ||
        images.shape[0] != va.shape[0])
        throw affd::FormatError("topomaps: unexpected array shapes");
    std::size_t n = images.shape[0];
    std::size_t per = images.element_count() / std::max<std::size_t>(1, n);
    TopomapData d;
    for (std::size_t i = 0; i < n; ++i) {
        d.inputs.emplace_back(images.f64.begin() + static_cast<std::ptrdiff_t>(i * per),
                              images.f64.begin() + static_cast<std::ptrdiff_t>((i + 1) * per));
        d.va.emplace_back(va.f64[2 * i], va.f64[2 * i + 1]);
    }
    return d;
}

// ---------------------------------------------------------------------------
// train-teacher
// ---------------------------------------------------------------------------

struct TrainTeacherArgs {
    std::string topomaps, out;
    int epochs = 50;
    std::uint64_t seed = 0;
    std::string hidden = "64";
    std::size_t feature_dim = 32;
    double lr = 1e-3;
};

int cmd_train_teacher(const TrainTeacherArgs& a) {
    fs::create_directories(a.out);
    auto data = load_topomaps(a.topomaps);
    affd::TeacherConfig cfg;
    cfg.epochs = a.epochs;
    cfg.seed = a.seed;
    cfg.hidden = parse_hidden(a.hidden);
    cfg.feature_dim = a.feature_dim;
    cfg.base_lr = a.lr;
    auto res = affd::train_teacher(data.inputs, data.va, cfg);

    json hyper = {{"role", "va_teacher"}, {"epochs", a.epochs}, {"seed", a.seed},
                  {"base_lr", a.lr}};
    affd::save_checkpoint(res.model, fs::path(a.out) / "teacher.ckpt", hyper);
    affd::save_checkpoint(res.ema.to_model(res.model), fs::path(a.out) / "teacher_ema.ckpt",
                          hyper);
    {
        std::ofstream csv(fs::path(a.out) / "teacher_ccc.csv", std::ios::trunc);
        csv << "epoch,ccc_valence,ccc_arousal\n";
        csv.precision(10);
        for (std::size_t e = 0; e < res.val_ccc.size(); ++e)
            csv << (e + 1) << ',' << res.val_ccc[e][0] << ',' << res.val_ccc[e][1] << '\n';
    }
    std::vector<std::string> outputs = {"teacher.ckpt", "teacher.ckpt.json",
                                        "teacher_ema.ckpt", "teacher_ema.ckpt.json",
                                        "teacher_ccc.csv"};
    record_outputs(a.out, outputs);
    write_run_manifest(a.out, "train-teacher", hyper, {a.topomaps}, outputs);
    if (!res.val_ccc.empty())
        std::cout << "final val CCC: V=" << res.val_ccc.back()[0]
                  << " A=" << res.val_ccc.back()[1] << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// build-prototypes
// ---------------------------------------------------------------------------

struct BuildProtoArgs {
    std::string teacher, topomaps, out;
    int grid = 5;
    double epsilon = 1.0;
};

int cmd_build_prototypes(const BuildProtoArgs& a) {
    auto model = affd::load_checkpoint(a.teacher);
    auto data = load_topomaps(a.topomaps);
    auto embeddings = affd::extract_embeddings(model, data.inputs);
    auto bank = affd::build_bank(embeddings, data.va, affd::make_grid(a.grid), a.epsilon);

    fs::path out_path(a.out);
    fs::create_directories(out_path.parent_path().empty() ? "." : out_path.parent_path());
    std::string digest = affd::save_bank(bank, out_path);

    fs::path dir = out_path.parent_path().empty() ? "." : out_path.parent_path();
    record_outputs(dir, {out_path.filename().string(),
                         out_path.filename().string() + ".json"});
    json cfg = {{"grid", a.grid}, {"epsilon", a.epsilon}};
    write_run_manifest(dir, "build-prototypes", cfg, {a.teacher, a.topomaps},
                       {out_path.filename().string()});
    std::cout << "bank K=" << bank.bin_count() << " D=" << bank.dim << " digest=" << digest
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train-student
// ---------------------------------------------------------------------------

struct TrainStudentArgs {
    std::string data, bank, teacher, out;
    std::string variant = "b3";
    int epochs = 100, batch_size = 128;
    double lr = 2e-4;
    std::uint64_t seed = 0;
    std::string hidden = "128,128";
    std::size_t feature_dim = 256;
    double lambda_kd = 0.5, lambda_proto = 0.12, lambda_geo = 0.05;
    double t_kd = 5.0, tau_proto = 0.90;
};

int cmd_train_student(const TrainStudentArgs& a) {
    fs::create_directories(a.out);
    auto train = affd::load_dataset(fs::path(a.data) / "train.npz");
    affd::Dataset valid;
    const affd::Dataset* valid_ptr = nullptr;
    if (fs::exists(fs::path(a.data) / "valid.npz")) {
        valid = affd::load_dataset(fs::path(a.data) / "valid.npz");
        valid_ptr = &valid;
    }

    affd::TrainConfig cfg;
    cfg.variant = affd::variant_from_name(a.variant);
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch_size;
    cfg.base_lr = a.lr;
    cfg.seed = a.seed;
    cfg.hidden = parse_hidden(a.hidden);
    cfg.feature_dim = a.feature_dim;
    cfg.loss.lambda_kd = a.lambda_kd;
    cfg.loss.lambda_proto = a.lambda_proto;
    cfg.loss.lambda_geo = a.lambda_geo;
    cfg.loss.t_kd = a.t_kd;
    cfg.loss.tau_proto = a.tau_proto;

    affd::PrototypeBank bank;
    const affd::PrototypeBank* bank_ptr = nullptr;
    std::string bank_digest;
    if (!a.bank.empty()) {
        bank = affd::load_bank(a.bank);
        bank_ptr = &bank;
        bank_digest = bank.digest;
    }
    affd::DenseModel teacher;
    const affd::DenseModel* teacher_ptr = nullptr;
    if (!a.teacher.empty()) {
        teacher = affd::load_checkpoint(a.teacher);
        teacher_ptr = &teacher;
    }

    auto res = affd::train_student(train, valid_ptr, bank_ptr, teacher_ptr, cfg);

    std::string dataset_digest = affd::sha256_file(fs::path(a.data) / "train.npz");
    json fp = affd::fingerprint(cfg, bank_digest, dataset_digest);
    write_json(fs::path(a.out) / "fingerprint.json", fp);

    json hyper = {{"role", "student"}, {"variant", a.variant},
                  {"fingerprint_digest", affd::sha256_bytes(fp.dump())}};
    affd::save_checkpoint(res.model, fs::path(a.out) / "student.ckpt", hyper);
    affd::write_epoch_logs_csv(res.logs, fs::path(a.out) / "epoch_log.csv");

    std::vector<std::string> outputs = {"student.ckpt", "student.ckpt.json", "epoch_log.csv",
                                        "fingerprint.json"};
    record_outputs(a.out, outputs);
    std::vector<std::string> inputs = {(fs::path(a.data) / "train.npz").string()};
    if (!a.bank.empty()) inputs.push_back(a.bank);
    if (!a.teacher.empty()) inputs.push_back(a.teacher);
    write_run_manifest(a.out, "train-student", fp, inputs, outputs);

    if (!res.logs.empty())
        std::cout << "final valid acc=" << res.logs.back().acc
                  << " macro_f1=" << res.logs.back().macro_f1 << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::string model, data, out;
    std::string protocol = "both";  // eight-way | present-only | both
    std::string target_classes;     // comma-separated names; empty = present labels
    int resamples = 1000;
    std::uint64_t seed = 0;
};

int class_index_from_name(const std::string& name) {
    for (int c = 0; c < affd::kNumClasses; ++c)
        if (name == affd::kClassNames[static_cast<std::size_t>(c)]) return c;
    throw affd::ConfigError("unknown class name: " + name);
}

int cmd_evaluate(const EvaluateArgs& a) {
    fs::create_directories(a.out);
    auto model = affd::load_checkpoint(a.model);
    auto data = affd::load_dataset(a.data);

    std::vector<int> preds;
    std::vector<std::vector<double>> scores;
    for (const auto& x : data.features) {
        auto fp = affd::forward(model, x);
        double zmax = *std::max_element(fp.logits.begin(), fp.logits.end());
        std::vector<double> p(fp.logits.size());
        double sum = 0;
        for (std::size_t c = 0; c < p.size(); ++c) {
            p[c] = std::exp(fp.logits[c] - zmax);
            sum += p[c];
        }
        for (double& v : p) v /= sum;
        preds.push_back(static_cast<int>(std::distance(
            fp.logits.begin(), std::max_element(fp.logits.begin(), fp.logits.end()))));
        scores.push_back(std::move(p));
    }

    auto add_cis = [&](const std::vector<int>& target) {
        std::vector<std::pair<std::string, affd::BootstrapCI>> cis;
        auto run = [&](const char* name, auto fn) {
            cis.emplace_back(name, affd::bootstrap_ci(fn, preds, data.labels, a.resamples,
                                                      a.seed));
        };
        run("acc", [](std::span<const int> p, std::span<const int> l) {
            return affd::metrics_from_confusion(affd::confusion(p, l, affd::kNumClasses)).acc;
        });
        run("macro_f1", [target](std::span<const int> p, std::span<const int> l) {
            if (target.empty())
                return affd::metrics_from_confusion(affd::confusion(p, l, affd::kNumClasses))
                    .macro_f1;
            return affd::present_only(p, l, affd::kNumClasses, target).macro_f1;
        });
        run("bacc", [target](std::span<const int> p, std::span<const int> l) {
            if (target.empty())
                return affd::metrics_from_confusion(affd::confusion(p, l, affd::kNumClasses))
                    .bacc;
            return affd::present_only(p, l, affd::kNumClasses, target).bacc;
        });
        return cis;
    };

    std::vector<std::string> outputs;
    if (a.protocol == "eight-way" || a.protocol == "both") {
        auto report = affd::metrics_from_confusion(
            affd::confusion(preds, data.labels, affd::kNumClasses));
        report.macro_auroc = affd::macro_auroc(scores, data.labels);
        write_json(fs::path(a.out) / "metrics_eight_way.json",
                   affd::report_to_json(report, add_cis({})));
        outputs.push_back("metrics_eight_way.json");
    }
    if (a.protocol == "present-only" || a.protocol == "both") {
        std::vector<int> target;
        if (!a.target_classes.empty()) {
            std::stringstream ss(a.target_classes);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) target.push_back(class_index_from_name(tok));
        } else {
            std::set<int> present(data.labels.begin(), data.labels.end());
            target.assign(present.begin(), present.end());
        }
        auto report = affd::present_only(preds, data.labels, affd::kNumClasses, target);
        write_json(fs::path(a.out) / "metrics_present_only.json",
                   affd::report_to_json(report, add_cis(target)));
        outputs.push_back("metrics_present_only.json");
    }
    if (outputs.empty()) throw affd::ConfigError("evaluate: unknown protocol " + a.protocol);

    record_outputs(a.out, outputs);
    json cfg = {{"protocol", a.protocol}, {"resamples", a.resamples}, {"seed", a.seed}};
    write_run_manifest(a.out, "evaluate", cfg, {a.model, a.data}, outputs);
    std::cout << "wrote " << outputs.size() << " report(s) to " << a.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// emit-tables
// ---------------------------------------------------------------------------

struct EmitTablesArgs {
    std::vector<std::string> metrics;  // metrics JSON paths, row order preserved
    std::string labels;                // comma-separated row labels, optional
    std::string out;
};

int cmd_emit_tables(const EmitTablesArgs& a) {
    fs::create_directories(a.out);
    std::vector<std::string> row_labels;
    if (!a.labels.empty()) {
        std::stringstream ss(a.labels);
        std::string tok;
        while (std::getline(ss, tok, ',')) row_labels.push_back(tok);
        if (row_labels.size() != a.metrics.size())
            throw affd::ConfigError("emit-tables: labels/metrics count mismatch");
    }

    struct Row {
        std::string label;
        double acc, macro_f1, bacc;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < a.metrics.size(); ++i) {
        std::ifstream in(a.metrics[i]);
        if (!in) throw affd::Error("emit-tables: cannot open " + a.metrics[i]);
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.contains("acc") || !j.contains("macro_f1") ||
            !j.contains("bacc"))
            throw affd::FormatError("emit-tables: schema mismatch in " + a.metrics[i]);
        std::string label = row_labels.empty() ? fs::path(a.metrics[i]).stem().string()
                                               : row_labels[i];
        rows.push_back({label, j["acc"].get<double>(), j["macro_f1"].get<double>(),
                        j["bacc"].get<double>()});
    }

    {
        std::ofstream csv(fs::path(a.out) / "table.csv", std::ios::trunc);
        csv << "variant,acc,macro_f1,bacc\n";
        csv << std::fixed << std::setprecision(4);
        for (const auto& r : rows)
            csv << r.label << ',' << 100.0 * r.acc << ',' << 100.0 * r.macro_f1 << ','
                << 100.0 * r.bacc << '\n';
    }
    {
        std::ofstream txt(fs::path(a.out) / "table.txt", std::ios::trunc);
        txt << std::left << std::setw(20) << "Variant" << std::right << std::setw(10)
            << "Acc(%)" << std::setw(14) << "Macro-F1(%)" << std::setw(10) << "bACC(%)"
            << "\n";
        txt << std::string(54, '-') << "\n";
        txt << std::fixed << std::setprecision(2);
        for (const auto& r : rows)
            txt << std::left << std::setw(20) << r.label << std::right << std::setw(10)
                << 100.0 * r.acc << std::setw(14) << 100.0 * r.macro_f1 << std::setw(10)
                << 100.0 * r.bacc << "\n";
    }
    record_outputs(a.out, {"table.csv", "table.txt"});
    std::cout << "wrote table.csv and table.txt to " << a.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int cmd_verify(const std::string& sums, const std::string& base) {
    fs::path sums_path(sums);
    fs::path base_dir = base.empty() ? sums_path.parent_path() : fs::path(base);
    if (base_dir.empty()) base_dir = ".";
    auto results = affd::verify_checksums(sums_path, base_dir);
    if (results.empty()) {
        std::cout << "warning: empty checksums file (vacuous pass)\n";
        return 0;
    }
    int failures = 0;
    for (const auto& r : results) {
        if (r.ok) {
            std::cout << r.path << ": OK\n";
        } else {
            std::cout << r.path << ": FAILED (" << r.reason << ")\n";
            ++failures;
        }
    }
    if (failures > 0) {
        std::cout << failures << " of " << results.size() << " files failed verification\n";
        return kExitIntegrity;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"prototype-distillation pipeline for categorical emotion classifiers"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate synthetic datasets");
    synth->add_option("--out", synth_args.out, "output directory")->required();
    synth->add_option("--seed", synth_args.seed, "root seed");
    synth->add_option("--n-train", synth_args.n_train, "training samples");
    synth->add_option("--n-valid", synth_args.n_valid, "validation samples");
    synth->add_option("--n-test", synth_args.n_test, "test samples");
    synth->add_option("--input-dim", synth_args.input_dim, "feature dimensionality");
    synth->add_option("--noise", synth_args.noise, "feature noise scale");
    synth->add_option("--va-jitter", synth_args.va_jitter, "V/A jitter around anchors");
    synth->add_option("--label-noise", synth_args.label_noise, "label flip probability");
    synth->add_option("--shift-rotation", synth_args.shift_rotation,
                      "anchor rotation (radians) for the shifted test split");
    synth->add_option("--prevalence-skew", synth_args.prevalence_skew,
                      "class prevalence skew (0 = uniform)");

    RenderArgs render_args;
    auto* render = app.add_subcommand("render-topomaps",
                                      "synthesize EEG and render band-power topomaps");
    render->add_option("--out", render_args.out, "output directory")->required();
    render->add_option("--seed", render_args.seed, "seed");
    render->add_option("--n-segments", render_args.n_segments, "number of segments");
    render->add_option("--channels", render_args.channels, "electrode count");
    render->add_option("--resolution", render_args.resolution, "image resolution");
    render->add_option("--subjects", render_args.subjects, "synthetic subject count");
    render->add_option("--sample-rate", render_args.sample_rate, "sample rate (Hz)");
    render->add_option("--duration", render_args.duration, "segment length (s)");

    TrainTeacherArgs teacher_args;
    auto* teach = app.add_subcommand("train-teacher", "train the V/A regression teacher");
    teach->add_option("--topomaps", teacher_args.topomaps, "topomap archive")->required();
    teach->add_option("--out", teacher_args.out, "output directory")->required();
    teach->add_option("--epochs", teacher_args.epochs, "epochs");
    teach->add_option("--seed", teacher_args.seed, "seed");
    teach->add_option("--hidden", teacher_args.hidden, "hidden sizes, comma-separated");
    teach->add_option("--feature-dim", teacher_args.feature_dim, "penultimate feature dim");
    teach->add_option("--lr", teacher_args.lr, "base learning rate");

    BuildProtoArgs proto_args;
    auto* proto = app.add_subcommand("build-prototypes",
                                     "form the frozen prototype bank from teacher embeddings");
    proto->add_option("--teacher", proto_args.teacher, "teacher checkpoint")->required();
    proto->add_option("--topomaps", proto_args.topomaps, "topomap archive")->required();
    proto->add_option("--out", proto_args.out, "bank output path (.npz)")->required();
    proto->add_option("--grid", proto_args.grid, "grid side G");
    proto->add_option("--epsilon", proto_args.epsilon, "Laplace smoothing epsilon");

    TrainStudentArgs student_args;
    auto* student = app.add_subcommand("train-student", "train a student variant");
    student->add_option("--data", student_args.data, "dataset directory")->required();
    student->add_option("--out", student_args.out, "output directory")->required();
    student->add_option("--bank", student_args.bank, "prototype bank (.npz)");
    student->add_option("--teacher", student_args.teacher, "vision teacher checkpoint");
    student->add_option("--variant", student_args.variant, "b0|b1|b2|b3");
    student->add_option("--epochs", student_args.epochs, "epochs");
    student->add_option("--batch-size", student_args.batch_size, "batch size");
    student->add_option("--lr", student_args.lr, "base learning rate");
    student->add_option("--seed", student_args.seed, "seed");
    student->add_option("--hidden", student_args.hidden, "hidden sizes, comma-separated");
    student->add_option("--feature-dim", student_args.feature_dim, "feature dim");
    student->add_option("--lambda-kd", student_args.lambda_kd, "logit KD weight");
    student->add_option("--lambda-proto", student_args.lambda_proto, "Proto-KD weight");
    student->add_option("--lambda-geo", student_args.lambda_geo, "geometric prior weight");
    student->add_option("--t-kd", student_args.t_kd, "KD temperature");
    student->add_option("--tau-proto", student_args.tau_proto, "Proto-KD temperature");

    EvaluateArgs eval_args;
    auto* eval = app.add_subcommand("evaluate", "evaluate a checkpoint on a dataset");
    eval->add_option("--model", eval_args.model, "student checkpoint")->required();
    eval->add_option("--data", eval_args.data, "dataset (.npz)")->required();
    eval->add_option("--out", eval_args.out, "output directory")->required();
    eval->add_option("--protocol", eval_args.protocol, "eight-way|present-only|both");
    eval->add_option("--target-classes", eval_args.target_classes,
                     "comma-separated class names for present-only");
    eval->add_option("--resamples", eval_args.resamples, "bootstrap resamples");
    eval->add_option("--seed", eval_args.seed, "bootstrap seed");

    EmitTablesArgs tables_args;
    auto* tables = app.add_subcommand("emit-tables", "emit CSV/text tables from metrics JSONs");
    tables->add_option("--out", tables_args.out, "output directory")->required();
    tables->add_option("--labels", tables_args.labels, "comma-separated row labels");
    tables->add_option("metrics", tables_args.metrics, "metrics JSON files")->required();

    std::string verify_sums, verify_base;
    auto* verify = app.add_subcommand("verify", "verify a SHA256SUMS file");
    verify->add_option("--sums", verify_sums, "checksums file")->required();
    verify->add_option("--base", verify_base, "base directory (default: sums location)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_args);
        if (render->parsed()) return cmd_render_topomaps(render_args);
        if (teach->parsed()) return cmd_train_teacher(teacher_args);
        if (proto->parsed()) return cmd_build_prototypes(proto_args);
        if (student->parsed()) return cmd_train_student(student_args);
        if (eval->parsed()) return cmd_evaluate(eval_args);
        if (tables->parsed()) return cmd_emit_tables(tables_args);
        if (verify->parsed()) return cmd_verify(verify_sums, verify_base);
    } catch (const affd::IntegrityError& e) {
        std::cerr << "integrity error: " << e.what() << "\n";
        return kExitIntegrity;
    } catch (const affd::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const affd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
