#pragma once

#include <span>
#include <vector>

namespace affd {

/// A point on the valence-arousal plane, both axes in [-1, 1].
/// Out-of-range or non-finite coordinates are rejected at construction;
/// inputs are normalized upstream.
struct VAPoint {
    double valence;
    double arousal;
    VAPoint(double valence, double arousal);
};

/// Square grid of bin centers on each axis, spanning [-0.8, 0.8] uniformly.
struct GridSpec {
    int side = 0;                 // G
    std::vector<double> centers;  // strictly increasing, symmetric about 0

    int bin_count() const { return side * side; }  // K = G^2
};

GridSpec make_grid(int side);

/// 0-based bin indices; flat index k = u*G + v.
struct BinIndex {
    int u = 0;  // valence axis
    int v = 0;  // arousal axis

    int flat(int side) const { return u * side + v; }
};

struct BinCounts {
    int side = 0;
    std::vector<long long> counts;  // G*G, flat-indexed

    long long total() const;
    long long at(int u, int v) const { return counts[static_cast<std::size_t>(u) * side + v]; }
};

/// Nearest-center binning on each axis; exact ties break toward the lower index.
BinIndex bin_va(const VAPoint& p, const GridSpec& g);

BinCounts coverage(std::span<const VAPoint> points, const GridSpec& g);

}  // namespace affd
