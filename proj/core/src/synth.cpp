#include "affdistill/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "affdistill/errors.hpp"
#include "affdistill/npz.hpp"

namespace affd {

std::array<double, 2> class_anchor(int cls) {
    // circumplex placement: happiness high-valence, fear high-arousal/low-valence, ...
    switch (cls) {
        case 0: return {0.0, 0.0};     // neutral
        case 1: return {0.8, 0.4};     // happiness
        case 2: return {0.4, 0.8};     // surprise
        case 3: return {-0.7, -0.4};   // sadness
        case 4: return {-0.6, 0.7};    // anger
        case 5: return {-0.7, 0.2};    // disgust
        case 6: return {-0.5, 0.85};   // fear
        case 7: return {-0.45, -0.15}; // contempt
    }
    throw InvalidArgument("class_anchor: class out of range");
}

namespace {

constexpr std::uint64_t kStructureSeed = 0x5eedface01u;

double clamp_va(double x) { return std::clamp(x, -1.0, 1.0); }

// Fixed smooth embedding of the V/A plane into input_dim dimensions, shared
// across all dataset seeds: random linear map plus sinusoidal lift so classes
// are not confined to a 2-D subspace.
std::vector<double> embed_va(double v, double a, int input_dim) {
    std::mt19937_64 rng(kStructureSeed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> x(input_dim);
    for (int d = 0; d < input_dim; ++d) {
        double w1 = gauss(rng), w2 = gauss(rng), p1 = gauss(rng), p2 = gauss(rng);
        x[d] = w1 * v + w2 * a + 0.5 * std::sin(p1 * v + p2 * a);
    }
    return x;
}

}  // namespace

Dataset synth_dataset(const SyntheticSpec& spec) {
    if (spec.n_samples < 1) throw ConfigError("synth: n_samples must be >= 1");
    if (spec.n_classes < 2 || spec.n_classes > kNumClasses)
        throw ConfigError("synth: bad n_classes");
    if (spec.input_dim < 2) throw ConfigError("synth: input_dim must be >= 2");
    std::vector<double> prev = spec.prevalence;
    if (prev.empty()) prev.assign(spec.n_classes, 1.0);
    if (static_cast<int>(prev.size()) != spec.n_classes)
        throw ConfigError("synth: prevalence size mismatch");
    for (double p : prev)
        if (p <= 0.0) throw ConfigError("synth: prevalence must be positive for every class");

    std::mt19937_64 rng(spec.seed);
    std::discrete_distribution<int> pick_class(prev.begin(), prev.end());
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const double cs = std::cos(spec.shift_rotation), sn = std::sin(spec.shift_rotation);

    Dataset d;
    d.features.reserve(spec.n_samples);
    d.labels.reserve(spec.n_samples);
    d.va.reserve(spec.n_samples);
    for (int i = 0; i < spec.n_samples; ++i) {
        int cls = pick_class(rng);
        auto [av, aa] = class_anchor(cls);
        // domain shift: rotate the anchor on the V/A plane
        double rv = cs * av - sn * aa;
        double ra = sn * av + cs * aa;
        double v = clamp_va(rv + spec.va_jitter * gauss(rng));
        double a = clamp_va(ra + spec.va_jitter * gauss(rng));

        auto x = embed_va(v, a, spec.input_dim);
        for (double& xi : x) xi += spec.noise * gauss(rng);

        int label = cls;
        if (spec.label_noise > 0.0 && unif(rng) < spec.label_noise) {
            std::uniform_int_distribution<int> other(0, spec.n_classes - 2);
            int o = other(rng);
            label = o >= cls ? o + 1 : o;
        }
        d.features.push_back(std::move(x));
        d.labels.push_back(label);
        d.va.emplace_back(v, a);
    }
    return d;
}

std::string save_dataset(const Dataset& d, const std::filesystem::path& path) {
    if (d.size() == 0) throw InvalidArgument("save_dataset: empty dataset");
    const std::size_t n = d.size(), dim = d.features[0].size();
    std::vector<double> flat;
    flat.reserve(n * dim);
    for (const auto& f : d.features) {
        if (f.size() != dim) throw ShapeError("save_dataset: inconsistent feature dims");
        flat.insert(flat.end(), f.begin(), f.end());
    }
    std::vector<std::int64_t> labels(d.labels.begin(), d.labels.end());
    std::vector<double> va;
    va.reserve(2 * n);
    for (const auto& p : d.va) {
        va.push_back(p.valence);
        va.push_back(p.arousal);
    }
    ArrayContainer c;
    c.add("features", Array::from_f64({n, dim}, std::move(flat)));
    c.add("labels", Array::from_i64({n}, std::move(labels)));
    c.add("va", Array::from_f64({n, 2}, std::move(va)));
    return write_container(c, path);
}

Dataset load_dataset(const std::filesystem::path& path) {
    ArrayContainer c = read_container(path);
    const Array& feats = c.get("features");
    const Array& labels = c.get("labels");
    const Array& va = c.get("va");
    if (feats.shape.size() != 2 || va.shape.size() != 2 || va.shape[1] != 2 ||
        labels.shape.size() != 1 || feats.shape[0] != labels.shape[0] ||
        va.shape[0] != labels.shape[0])
        throw FormatError("load_dataset: inconsistent array shapes");
    const std::size_t n = feats.shape[0], dim = feats.shape[1];
    Dataset d;
    for (std::size_t i = 0; i < n; ++i) {
        d.features.emplace_back(feats.f64.begin() + static_cast<std::ptrdiff_t>(i * dim),
                                feats.f64.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
        d.labels.push_back(static_cast<int>(labels.i64[i]));
        d.va.emplace_back(va.f64[2 * i], va.f64[2 * i + 1]);
    }
    return d;
}

std::vector<EEGSample> synth_eeg(const EEGSynthSpec& spec) {
    if (spec.n_segments < 1 || spec.channels < 1 || spec.n_subjects < 1)
        throw ConfigError("synth_eeg: bad spec");
    if (spec.duration_seconds < 2.0) throw ConfigError("synth_eeg: segments must be >= 2 s");
    if (spec.sample_rate <= 2.0 * band_range(Band::Gamma).hi_hz)
        throw ConfigError("synth_eeg: sample rate below 2x highest band edge");

    // fixed per-channel V/A sensitivities so band power carries the label
    std::mt19937_64 srng(kStructureSeed ^ 0x77);
    std::uniform_real_distribution<double> sens(-0.4, 0.4);
    std::vector<std::array<double, 2>> gain(static_cast<std::size_t>(spec.channels) *
                                            kAllBands.size());
    for (auto& g : gain) g = {sens(srng), sens(srng)};

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> uva(-0.9, 0.9);
    std::uniform_real_distribution<double> uphase(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const auto samples = static_cast<std::size_t>(
        std::lround(spec.duration_seconds * spec.sample_rate));
    std::vector<EEGSample> out;
    out.reserve(spec.n_segments);
    for (int i = 0; i < spec.n_segments; ++i) {
        double v = uva(rng), a = uva(rng);
        EEGSegment seg;
        seg.channels = static_cast<std::size_t>(spec.channels);
        seg.samples_per_channel = samples;
        seg.sample_rate = spec.sample_rate;
        seg.subject_id = "S" + std::to_string(i % spec.n_subjects);
        seg.samples.resize(seg.channels * samples);
        for (int c = 0; c < spec.channels; ++c) {
            for (std::size_t b = 0; b < kAllBands.size(); ++b) {
                auto range = band_range(kAllBands[b]);
                double f = 0.5 * (range.lo_hz + range.hi_hz);
                const auto& g = gain[static_cast<std::size_t>(c) * kAllBands.size() + b];
                double amp = std::max(0.05, 1.0 + g[0] * v + g[1] * a);
                double phase = uphase(rng);
                for (std::size_t s = 0; s < samples; ++s) {
                    double t = static_cast<double>(s) / spec.sample_rate;
                    seg.samples[static_cast<std::size_t>(c) * samples + s] +=
                        amp * std::sin(2.0 * std::numbers::pi * f * t + phase);
                }
            }
            if (spec.noise > 0.0)
                for (std::size_t s = 0; s < samples; ++s)
                    seg.samples[static_cast<std::size_t>(c) * samples + s] +=
                        spec.noise * gauss(rng);
        }
        out.push_back({std::move(seg), VAPoint(v, a)});
    }
    return out;
}

}  // namespace affd
