#include <doctest.h>

#include <cmath>
#include <random>

#include "affdistill/errors.hpp"
#include "affdistill/vagrid.hpp"

using namespace affd;

TEST_CASE("grid centers are uniform over [-0.8, 0.8]") {
    auto g5 = make_grid(5);
    std::vector<double> want5 = {-0.8, -0.4, 0.0, 0.4, 0.8};
    REQUIRE(g5.centers.size() == 5);
    for (std::size_t j = 0; j < 5; ++j) CHECK(g5.centers[j] == doctest::Approx(want5[j]).epsilon(1e-12));

    auto g2 = make_grid(2);
    CHECK(g2.centers[0] == doctest::Approx(-0.8));
    CHECK(g2.centers[1] == doctest::Approx(0.8));

    auto g7 = make_grid(7);
    for (int j = 0; j < 7; ++j)
        CHECK(g7.centers[j] == doctest::Approx(-0.8 + 1.6 * j / 6.0).epsilon(1e-12));
}

TEST_CASE("grid rejects degenerate sides") {
    CHECK_THROWS_AS(make_grid(1), InvalidArgument);
    CHECK_THROWS_AS(make_grid(0), InvalidArgument);
    CHECK_THROWS_AS(make_grid(-3), InvalidArgument);
}

TEST_CASE("VAPoint validates its range") {
    CHECK_NOTHROW(VAPoint(1.0, -1.0));
    CHECK_THROWS_AS(VAPoint(1.01, 0.0), InvalidArgument);
    CHECK_THROWS_AS(VAPoint(0.0, -1.5), InvalidArgument);
    CHECK_THROWS_AS(VAPoint(std::nan(""), 0.0), InvalidArgument);
}

TEST_CASE("nearest-center binning") {
    auto g = make_grid(5);
    auto b = bin_va(VAPoint(0.0, 0.0), g);
    CHECK(b.u == 2);
    CHECK(b.v == 2);

    b = bin_va(VAPoint(0.79, -0.81 + 0.01), g);  // (0.79, -0.80)
    CHECK(b.u == 4);
    CHECK(b.v == 0);

    // corners snap to the outermost centers
    b = bin_va(VAPoint(-1.0, 1.0), g);
    CHECK(b.u == 0);
    CHECK(b.v == 4);
}

TEST_CASE("exact ties break toward the lower index") {
    auto g = make_grid(5);
    // 0.2 is equidistant from centers 0.0 (index 2) and 0.4 (index 3)
    auto b = bin_va(VAPoint(0.2, 0.2), g);
    CHECK(b.u == 2);
    CHECK(b.v == 2);

    b = bin_va(VAPoint(-0.2, -0.2), g);  // tie between indices 1 and 2
    CHECK(b.u == 1);
    CHECK(b.v == 1);
}

TEST_CASE("flat index layout is u*G + v") {
    BinIndex b{3, 1};
    CHECK(b.flat(5) == 16);
    CHECK((BinIndex{0, 0}).flat(5) == 0);
    CHECK((BinIndex{4, 4}).flat(5) == 24);
}

TEST_CASE("coverage of an empty list is all zeros") {
    auto g = make_grid(5);
    auto c = coverage({}, g);
    CHECK(c.total() == 0);
    for (auto v : c.counts) CHECK(v == 0);
}

TEST_CASE("one point per center yields all-ones coverage") {
    auto g = make_grid(5);
    std::vector<VAPoint> pts;
    for (double u : g.centers)
        for (double v : g.centers) pts.emplace_back(u, v);
    auto c = coverage(pts, g);
    CHECK(c.total() == 25);
    for (auto v : c.counts) CHECK(v == 1);
}

TEST_CASE("coverage matches an independent re-binning of random points") {
    auto g = make_grid(5);
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<VAPoint> pts;
    for (int i = 0; i < 100; ++i) pts.emplace_back(unif(rng), unif(rng));

    auto c = coverage(pts, g);
    CHECK(c.total() == 100);

    // brute-force re-bin: argmin over centers per axis, lower index on ties
    std::vector<long long> want(25, 0);
    for (const auto& p : pts) {
        int bu = 0, bv = 0;
        for (int j = 1; j < 5; ++j) {
            if (std::abs(p.valence - g.centers[j]) < std::abs(p.valence - g.centers[bu])) bu = j;
            if (std::abs(p.arousal - g.centers[j]) < std::abs(p.arousal - g.centers[bv])) bv = j;
        }
        ++want[bu * 5 + bv];
    }
    for (int k = 0; k < 25; ++k) CHECK(c.counts[k] == want[k]);
}
