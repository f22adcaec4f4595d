#include "affdistill/nn.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "affdistill/digest.hpp"
#include "affdistill/errors.hpp"
#include "affdistill/npz.hpp"

namespace affd {

std::size_t DenseModel::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < w.size(); ++i) n += w[i].size() + b[i].size();
    return n;
}

DenseModel DenseModel::init(std::vector<std::size_t> sizes, std::uint64_t seed) {
    if (sizes.size() < 3)
        throw InvalidArgument("DenseModel: need at least input, feature, output sizes");
    for (auto s : sizes)
        if (s == 0) throw InvalidArgument("DenseModel: zero layer size");
    DenseModel m;
    m.sizes = std::move(sizes);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i + 1 < m.sizes.size(); ++i) {
        std::size_t fan_in = m.sizes[i], fan_out = m.sizes[i + 1];
        double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-limit, limit);
        std::vector<double> wi(fan_out * fan_in);
        for (double& v : wi) v = dist(rng);
        m.w.push_back(std::move(wi));
        m.b.emplace_back(fan_out, 0.0);
    }
    return m;
}

ForwardPass forward(const DenseModel& m, std::span<const double> x) {
    if (x.size() != m.input_dim()) throw ShapeError("forward: input size mismatch");
    for (double v : x)
        if (!std::isfinite(v)) throw NumericError("forward: non-finite input");

    const std::size_t layers = m.layer_count();
    ForwardPass fp;
    fp.post.resize(layers);

    std::span<const double> in = x;
    // hidden layers (ReLU), then the projection layer (identity)
    for (std::size_t i = 0; i + 1 < layers; ++i) {
        std::size_t rows = m.sizes[i + 1], cols = m.sizes[i];
        std::vector<double> out(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            double acc = m.b[i][r];
            const double* wr = m.w[i].data() + r * cols;
            for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * in[c];
            out[r] = acc;
        }
        const bool is_projection = (i + 2 == layers);
        if (!is_projection)
            for (double& v : out) v = v > 0.0 ? v : 0.0;
        fp.post[i] = std::move(out);
        in = fp.post[i];
    }

    // L2-normalize the projection output
    const auto& proj = fp.post[layers - 2];
    double norm2 = 0.0;
    for (double v : proj) norm2 += v * v;
    fp.feature_norm = std::sqrt(norm2);
    fp.feature.assign(proj.size(), 0.0);
    if (fp.feature_norm < 1e-12) {
        fp.feature[0] = 1.0;  // defined fallback for the zero vector
        fp.degenerate_feature = true;
    } else {
        for (std::size_t j = 0; j < proj.size(); ++j) fp.feature[j] = proj[j] / fp.feature_norm;
    }

    // head
    std::size_t rows = m.sizes.back(), cols = m.feature_dim();
    fp.logits.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = m.b[layers - 1][r];
        const double* wr = m.w[layers - 1].data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * fp.feature[c];
        fp.logits[r] = acc;
    }
    fp.post[layers - 1] = fp.logits;
    return fp;
}

GradientSet GradientSet::zeros(const DenseModel& m) {
    GradientSet g;
    for (std::size_t i = 0; i < m.layer_count(); ++i) {
        g.w.emplace_back(m.w[i].size(), 0.0);
        g.b.emplace_back(m.b[i].size(), 0.0);
    }
    return g;
}

void GradientSet::accumulate(const GradientSet& other, double s) {
    if (other.w.size() != w.size()) throw ShapeError("GradientSet: layer count mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (other.w[i].size() != w[i].size() || other.b[i].size() != b[i].size())
            throw ShapeError("GradientSet: buffer size mismatch");
        for (std::size_t j = 0; j < w[i].size(); ++j) w[i][j] += s * other.w[i][j];
        for (std::size_t j = 0; j < b[i].size(); ++j) b[i][j] += s * other.b[i][j];
    }
}

void GradientSet::scale(double s) {
    for (auto& buf : w)
        for (double& v : buf) v *= s;
    for (auto& buf : b)
        for (double& v : buf) v *= s;
}

double GradientSet::global_norm() const {
    double acc = 0.0;
    for (const auto& buf : w)
        for (double v : buf) acc += v * v;
    for (const auto& buf : b)
        for (double v : buf) acc += v * v;
    return std::sqrt(acc);
}

void backward(const DenseModel& m, std::span<const double> x, const ForwardPass& fp,
              std::span<const double> dfeature, std::span<const double> dlogits,
              GradientSet& out) {
    const std::size_t layers = m.layer_count();
    if (dfeature.size() != m.feature_dim() || dlogits.size() != m.output_dim())
        throw ShapeError("backward: upstream gradient size mismatch");
    if (out.w.size() != layers) throw ShapeError("backward: gradient set shape mismatch");

    // head layer
    {
        std::size_t rows = m.output_dim(), cols = m.feature_dim();
        for (std::size_t r = 0; r < rows; ++r) {
            double* gw = out.w[layers - 1].data() + r * cols;
            for (std::size_t c = 0; c < cols; ++c) gw[c] += dlogits[r] * fp.feature[c];
            out.b[layers - 1][r] += dlogits[r];
        }
    }

    // gradient w.r.t. the normalized feature
    std::vector<double> gf(m.feature_dim());
    {
        std::size_t rows = m.output_dim(), cols = m.feature_dim();
        for (std::size_t c = 0; c < cols; ++c) {
            double acc = dfeature[c];
            for (std::size_t r = 0; r < rows; ++r) acc += dlogits[r] * m.w[layers - 1][r * cols + c];
            gf[c] = acc;
        }
    }

    // through L2 normalization: dv = (g - (g.f) f) / ||v||
    std::vector<double> dcur(m.feature_dim(), 0.0);
    if (!fp.degenerate_feature) {
        double dot = 0.0;
        for (std::size_t j = 0; j < gf.size(); ++j) dot += gf[j] * fp.feature[j];
        for (std::size_t j = 0; j < gf.size(); ++j)
            dcur[j] = (gf[j] - dot * fp.feature[j]) / fp.feature_norm;
    }

    // projection layer and hidden layers, walking backwards
    for (std::size_t li = layers - 1; li-- > 0;) {
        std::size_t rows = m.sizes[li + 1], cols = m.sizes[li];
        const bool is_hidden = (li + 2 < layers);
        if (is_hidden) {
            // ReLU derivative on this layer's activated output (the incoming
            // dcur is already w.r.t. the activated output of layer li)
        }
        std::span<const double> in = (li == 0) ? x : std::span<const double>(fp.post[li - 1]);

        std::vector<double> dpre = dcur;
        if (is_hidden)
            for (std::size_t r = 0; r < rows; ++r)
                if (fp.post[li][r] <= 0.0) dpre[r] = 0.0;

        for (std::size_t r = 0; r < rows; ++r) {
            double* gw = out.w[li].data() + r * cols;
            for (std::size_t c = 0; c < cols; ++c) gw[c] += dpre[r] * in[c];
            out.b[li][r] += dpre[r];
        }
        if (li > 0) {
            std::vector<double> dprev(cols, 0.0);
            for (std::size_t r = 0; r < rows; ++r) {
                const double* wr = m.w[li].data() + r * cols;
                for (std::size_t c = 0; c < cols; ++c) dprev[c] += dpre[r] * wr[c];
            }
            dcur = std::move(dprev);
        }
    }
}

void clip_grad_norm(GradientSet& g, double max_norm) {
    double norm = g.global_norm();
    if (norm > max_norm && norm > 0.0) g.scale(max_norm / norm);
}

OptimizerState OptimizerState::zeros(const DenseModel& m, double weight_decay) {
    OptimizerState s;
    s.weight_decay = weight_decay;
    for (std::size_t i = 0; i < m.layer_count(); ++i) {
        s.m_w.emplace_back(m.w[i].size(), 0.0);
        s.v_w.emplace_back(m.w[i].size(), 0.0);
        s.m_b.emplace_back(m.b[i].size(), 0.0);
        s.v_b.emplace_back(m.b[i].size(), 0.0);
    }
    return s;
}

namespace {
void adamw_tensor(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m1,
                  std::vector<double>& m2, const OptimizerState& s, double lr, double bc1,
                  double bc2, double wd) {
    for (std::size_t j = 0; j < p.size(); ++j) {
        p[j] -= lr * wd * p[j];  // decoupled decay
        m1[j] = s.beta1 * m1[j] + (1.0 - s.beta1) * g[j];
        m2[j] = s.beta2 * m2[j] + (1.0 - s.beta2) * g[j] * g[j];
        double mhat = m1[j] / bc1;
        double vhat = m2[j] / bc2;
        p[j] -= lr * mhat / (std::sqrt(vhat) + s.eps);
    }
}
}  // namespace

void adamw_step(DenseModel& m, const GradientSet& g, OptimizerState& s, double lr) {
    if (lr < 0.0) throw InvalidArgument("adamw_step: negative lr");
    if (g.w.size() != m.layer_count()) throw ShapeError("adamw_step: gradient shape mismatch");
    ++s.step;
    double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    for (std::size_t i = 0; i < m.layer_count(); ++i) {
        adamw_tensor(m.w[i], g.w[i], s.m_w[i], s.v_w[i], s, lr, bc1, bc2, s.weight_decay);
        adamw_tensor(m.b[i], g.b[i], s.m_b[i], s.v_b[i], s, lr, bc1, bc2, 0.0);
    }
}

double cosine_lr(long step, long total_steps, double base_lr) {
    if (total_steps <= 0) throw ConfigError("cosine_lr: total_steps must be positive");
    if (step < 0 || step > total_steps) throw InvalidArgument("cosine_lr: step out of range");
    return base_lr * 0.5 *
           (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) /
                           static_cast<double>(total_steps)));
}

EMAState EMAState::from(const DenseModel& m, double decay) {
    if (decay < 0.0 || decay > 1.0) throw InvalidArgument("EMA: decay outside [0,1]");
    EMAState e;
    e.decay = decay;
    e.w = m.w;
    e.b = m.b;
    return e;
}

void EMAState::update(const DenseModel& m) {
    if (w.size() != m.layer_count()) throw ShapeError("EMA: layer count mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (std::size_t j = 0; j < w[i].size(); ++j)
            w[i][j] = decay * w[i][j] + (1.0 - decay) * m.w[i][j];
        for (std::size_t j = 0; j < b[i].size(); ++j)
            b[i][j] = decay * b[i][j] + (1.0 - decay) * m.b[i][j];
    }
}

DenseModel EMAState::to_model(const DenseModel& like) const {
    DenseModel m = like;
    m.w = w;
    m.b = b;
    return m;
}

std::string save_checkpoint(const DenseModel& m, const std::filesystem::path& path,
                            const nlohmann::json& hyper) {
    ArrayContainer c;
    for (std::size_t i = 0; i < m.layer_count(); ++i) {
        c.add("layer" + std::to_string(i) + "_w",
              Array::from_f64({m.sizes[i + 1], m.sizes[i]}, m.w[i]));
        c.add("layer" + std::to_string(i) + "_b", Array::from_f64({m.sizes[i + 1]}, m.b[i]));
    }
    std::string digest = write_container(c, path);

    nlohmann::json side;
    side["sizes"] = m.sizes;
    side["hyper"] = hyper;
    side["digest"] = digest;
    auto side_path = path;
    side_path += ".json";
    std::ofstream out(side_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("checkpoint: cannot open " + side_path.string());
    out << side.dump(2) << "\n";
    return digest;
}

DenseModel load_checkpoint(const std::filesystem::path& path, nlohmann::json* hyper_out) {
    auto side_path = path;
    side_path += ".json";
    std::ifstream in(side_path, std::ios::binary);
    if (!in) throw FormatError("checkpoint: missing sidecar " + side_path.string());
    nlohmann::json side = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (side.is_discarded()) throw FormatError("checkpoint: malformed sidecar");
    std::string expected = side.at("digest").get<std::string>();
    std::string actual = sha256_file(path);
    if (expected != actual)
        throw IntegrityError("checkpoint: digest mismatch for " + path.string());

    auto sizes = side.at("sizes").get<std::vector<std::size_t>>();
    ArrayContainer c = read_container(path);
    DenseModel m;
    m.sizes = sizes;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        const Array& aw = c.get("layer" + std::to_string(i) + "_w");
        const Array& ab = c.get("layer" + std::to_string(i) + "_b");
        if (aw.shape != std::vector<std::size_t>{sizes[i + 1], sizes[i]} ||
            ab.shape != std::vector<std::size_t>{sizes[i + 1]})
            throw FormatError("checkpoint: layer shape mismatch");
        m.w.push_back(aw.f64);
        m.b.push_back(ab.f64);
    }
    if (hyper_out) *hyper_out = side.value("hyper", nlohmann::json::object());
    return m;
}

}  // namespace affd
