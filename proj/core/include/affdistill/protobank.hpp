#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "affdistill/vagrid.hpp"

namespace affd {

/// Frozen bank of bin-averaged embeddings over the V/A grid, with a
/// Laplace-smoothed per-bin prior. Immutable after formation.
struct PrototypeBank {
    std::vector<double> prototypes;  // K x dim, row-major, flat bin index k = u*G + v
    std::vector<double> prior;       // K, positive, sums to 1
    std::vector<long long> counts;   // K
    GridSpec grid;
    std::size_t dim = 0;
    double epsilon = 1.0;
    std::string version_tag = "v1";
    std::string digest;  // SHA-256 of the serialized file; set by save/load

    int bin_count() const { return grid.bin_count(); }
    const double* prototype(int k) const { return prototypes.data() + static_cast<std::size_t>(k) * dim; }
};

/// Bin-averaged prototype formation: per-bin mean of member embeddings,
/// nearest-non-empty fill for empty bins, Laplace-smoothed prior.
/// Embeddings must be unit-norm within 1e-6.
PrototypeBank build_bank(const std::vector<std::vector<double>>& embeddings,
                         const std::vector<VAPoint>& va, const GridSpec& grid,
                         double epsilon = 1.0);

/// Fills empty bins with the mean of the nearest non-empty bin (Euclidean
/// distance on integer grid indices, ties to the lowest flat index).
/// sums is K x dim; returns the filled prototype matrix.
std::vector<double> nearest_nonempty_fill(const std::vector<double>& sums,
                                          const std::vector<long long>& counts,
                                          const GridSpec& grid, std::size_t dim);

/// (counts[k] + epsilon) / sum_j (counts[j] + epsilon)
std::vector<double> laplace_prior(const std::vector<long long>& counts, double epsilon = 1.0);

/// NPZ file with prototypes/prior/counts/centers plus a JSON sidecar
/// {version, D, G, epsilon, digest}. Returns the file digest.
std::string save_bank(const PrototypeBank& bank, const std::filesystem::path& path);

/// Loads and re-verifies the digest recorded in the sidecar.
PrototypeBank load_bank(const std::filesystem::path& path);

}  // namespace affd
