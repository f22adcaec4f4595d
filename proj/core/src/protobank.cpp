#include "affdistill/protobank.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "affdistill/digest.hpp"
#include "affdistill/errors.hpp"
#include "affdistill/npz.hpp"

namespace affd {

std::vector<double> laplace_prior(const std::vector<long long>& counts, double epsilon) {
    if (epsilon <= 0.0) throw InvalidArgument("laplace_prior: epsilon must be > 0");
    double total = 0.0;
    for (auto c : counts) {
        if (c < 0) throw InvalidArgument("laplace_prior: negative count");
        total += static_cast<double>(c) + epsilon;
    }
    std::vector<double> prior(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k)
        prior[k] = (static_cast<double>(counts[k]) + epsilon) / total;
    return prior;
}

std::vector<double> nearest_nonempty_fill(const std::vector<double>& sums,
                                          const std::vector<long long>& counts,
                                          const GridSpec& grid, std::size_t dim) {
    const int G = grid.side;
    const int K = grid.bin_count();
    if (static_cast<int>(counts.size()) != K || sums.size() != static_cast<std::size_t>(K) * dim)
        throw ShapeError("nearest_nonempty_fill: shape mismatch");

    std::vector<double> out(sums.size(), 0.0);
    long long total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw InvalidArgument("nearest_nonempty_fill: all bins empty");

    // means for non-empty bins
    for (int k = 0; k < K; ++k) {
        if (counts[k] > 0)
            for (std::size_t d = 0; d < dim; ++d)
                out[k * dim + d] = sums[k * dim + d] / static_cast<double>(counts[k]);
    }
    // empty bins take the nearest non-empty mean (index-space distance,
    // ties to the lowest flat index)
    for (int k = 0; k < K; ++k) {
        if (counts[k] > 0) continue;
        int u = k / G, v = k % G;
        int best = -1;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int j = 0; j < K; ++j) {
            if (counts[j] == 0) continue;
            int ju = j / G, jv = j % G;
            double d2 = static_cast<double>((u - ju) * (u - ju) + (v - jv) * (v - jv));
            if (d2 < best_d2) {
                best_d2 = d2;
                best = j;
            }
        }
        for (std::size_t d = 0; d < dim; ++d) out[k * dim + d] = out[best * dim + d];
    }
    return out;
}

PrototypeBank build_bank(const std::vector<std::vector<double>>& embeddings,
                         const std::vector<VAPoint>& va, const GridSpec& grid, double epsilon) {
    if (embeddings.empty()) throw InvalidArgument("build_bank: empty input");
    if (embeddings.size() != va.size())
        throw ShapeError("build_bank: embeddings/va length mismatch");
    const std::size_t dim = embeddings[0].size();
    for (const auto& e : embeddings) {
        if (e.size() != dim) throw ShapeError("build_bank: inconsistent embedding dims");
        double n2 = 0.0;
        for (double x : e) n2 += x * x;
        if (std::abs(std::sqrt(n2) - 1.0) > 1e-6)
            throw InvalidArgument("build_bank: embedding not unit-norm");
    }

    const int K = grid.bin_count();
    std::vector<double> sums(static_cast<std::size_t>(K) * dim, 0.0);
    std::vector<long long> counts(K, 0);
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        int k = bin_va(va[i], grid).flat(grid.side);
        for (std::size_t d = 0; d < dim; ++d) sums[k * dim + d] += embeddings[i][d];
        ++counts[k];
    }

    PrototypeBank bank;
    bank.grid = grid;
    bank.dim = dim;
    bank.epsilon = epsilon;
    bank.counts = counts;
    bank.prototypes = nearest_nonempty_fill(sums, counts, grid, dim);
    bank.prior = laplace_prior(counts, epsilon);
    return bank;
}

std::string save_bank(const PrototypeBank& bank, const std::filesystem::path& path) {
    ArrayContainer c;
    c.add("prototypes", Array::from_f64({static_cast<std::size_t>(bank.bin_count()), bank.dim},
                                        bank.prototypes));
    c.add("prior", Array::from_f64({bank.prior.size()}, bank.prior));
    {
        std::vector<std::int64_t> counts(bank.counts.begin(), bank.counts.end());
        const std::size_t n = counts.size();
        c.add("counts", Array::from_i64({n}, std::move(counts)));
    }
    c.add("centers", Array::from_f64({bank.grid.centers.size()}, bank.grid.centers));
    std::string digest = write_container(c, path);

    nlohmann::json side;
    side["version"] = bank.version_tag;
    side["D"] = bank.dim;
    side["G"] = bank.grid.side;
    side["epsilon"] = bank.epsilon;
    side["digest"] = digest;
    auto side_path = path;
    side_path += ".json";
    std::ofstream out(side_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("save_bank: cannot open " + side_path.string());
    out << side.dump(2) << "\n";
    return digest;
}

PrototypeBank load_bank(const std::filesystem::path& path) {
    auto side_path = path;
    side_path += ".json";
    std::ifstream in(side_path, std::ios::binary);
    if (!in) throw FormatError("load_bank: missing sidecar " + side_path.string());
    nlohmann::json side = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (side.is_discarded()) throw FormatError("load_bank: malformed sidecar");

    std::string expected = side.at("digest").get<std::string>();
    std::string actual = sha256_file(path);
    if (expected != actual) throw IntegrityError("load_bank: digest mismatch for " + path.string());

    ArrayContainer c = read_container(path);
    PrototypeBank bank;
    bank.version_tag = side.at("version").get<std::string>();
    bank.dim = side.at("D").get<std::size_t>();
    bank.epsilon = side.at("epsilon").get<double>();
    int G = side.at("G").get<int>();
    bank.grid = make_grid(G);
    bank.digest = actual;

    const Array& protos = c.get("prototypes");
    if (protos.shape != std::vector<std::size_t>{static_cast<std::size_t>(G) * G, bank.dim})
        throw FormatError("load_bank: prototypes shape mismatch");
    bank.prototypes = protos.f64;
    bank.prior = c.get("prior").f64;
    const auto& counts = c.get("counts").i64;
    bank.counts.assign(counts.begin(), counts.end());
    if (bank.prior.size() != static_cast<std::size_t>(G) * G ||
        bank.counts.size() != static_cast<std::size_t>(G) * G)
        throw FormatError("load_bank: prior/counts shape mismatch");
    return bank;
}

}  // namespace affd
