#include "affdistill/vagrid.hpp"

#include <cmath>
#include <numeric>

#include "affdistill/errors.hpp"

namespace affd {

VAPoint::VAPoint(double valence_, double arousal_) : valence(valence_), arousal(arousal_) {
    if (!std::isfinite(valence) || !std::isfinite(arousal))
        throw InvalidArgument("VAPoint: non-finite coordinate");
    if (valence < -1.0 || valence > 1.0 || arousal < -1.0 || arousal > 1.0)
        throw InvalidArgument("VAPoint: coordinate outside [-1, 1]");
}

GridSpec make_grid(int side) {
    if (side < 2) throw InvalidArgument("make_grid: side must be >= 2");
    GridSpec g;
    g.side = side;
    g.centers.resize(side);
    // uniform centers from -0.8 to +0.8
    for (int j = 0; j < side; ++j)
        g.centers[j] = -0.8 + 1.6 * j / (side - 1);
    return g;
}

namespace {
int nearest_center(double x, const std::vector<double>& centers) {
    int best = 0;
    double best_d = std::abs(x - centers[0]);
    for (int j = 1; j < static_cast<int>(centers.size()); ++j) {
        double d = std::abs(x - centers[j]);
        if (d < best_d) {  // strict: ties keep the lower index
            best_d = d;
            best = j;
        }
    }
    return best;
}
}  // namespace

BinIndex bin_va(const VAPoint& p, const GridSpec& g) {
    if (g.side < 2 || static_cast<int>(g.centers.size()) != g.side)
        throw InvalidArgument("bin_va: invalid grid");
    return {nearest_center(p.valence, g.centers), nearest_center(p.arousal, g.centers)};
}

long long BinCounts::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0LL);
}

BinCounts coverage(std::span<const VAPoint> points, const GridSpec& g) {
    BinCounts c;
    c.side = g.side;
    c.counts.assign(static_cast<std::size_t>(g.side) * g.side, 0);
    for (const auto& p : points) ++c.counts[bin_va(p, g).flat(g.side)];
    return c;
}

}  // namespace affd
