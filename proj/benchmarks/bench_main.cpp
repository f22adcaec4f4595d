#include <benchmark/benchmark.h>

#include <random>

#include "affdistill/losses.hpp"
#include "affdistill/metrics.hpp"
#include "affdistill/nn.hpp"
#include "affdistill/protobank.hpp"
#include "affdistill/topomap.hpp"
#include "affdistill/vagrid.hpp"

using namespace affd;

namespace {

std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(dim);
    double n2 = 0.0;
    for (auto& x : v) {
        x = gauss(rng);
        n2 += x * x;
    }
    for (auto& x : v) x /= std::sqrt(n2);
    return v;
}

void bench_forward_backward(benchmark::State& state) {
    auto m = DenseModel::init({16, 128, 128, 256, 8}, 1);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> x(16);
    for (auto& v : x) v = gauss(rng);
    std::vector<double> dlogits(8, 0.1), dfeature(256, 0.01);
    for (auto _ : state) {
        auto fp = forward(m, x);
        auto g = GradientSet::zeros(m);
        backward(m, x, fp, dfeature, dlogits, g);
        benchmark::DoNotOptimize(g.w[0][0]);
    }
}
BENCHMARK(bench_forward_backward);

void bench_build_bank(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<std::vector<double>> emb;
    std::vector<VAPoint> va;
    for (int i = 0; i < 1000; ++i) {
        emb.push_back(random_unit(rng, 256));
        va.emplace_back(unif(rng), unif(rng));
    }
    auto grid = make_grid(5);
    for (auto _ : state) {
        auto bank = build_bank(emb, va, grid, 1.0);
        benchmark::DoNotOptimize(bank.prototypes[0]);
    }
}
BENCHMARK(bench_build_bank);

void bench_proto_kd(benchmark::State& state) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<std::vector<double>> emb;
    std::vector<VAPoint> va;
    for (int i = 0; i < 200; ++i) {
        emb.push_back(random_unit(rng, 256));
        va.emplace_back(unif(rng), unif(rng));
    }
    auto bank = build_bank(emb, va, make_grid(5), 1.0);
    auto f = random_unit(rng, 256);
    for (auto _ : state) {
        auto res = proto_kd_loss(f, bank, 0.9);
        benchmark::DoNotOptimize(res.value);
    }
}
BENCHMARK(bench_proto_kd);

void bench_bootstrap_ci(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> cls(0, 7);
    std::vector<int> preds, labels;
    for (int i = 0; i < 1000; ++i) {
        preds.push_back(cls(rng));
        labels.push_back(cls(rng));
    }
    MetricFn acc = [](std::span<const int> p, std::span<const int> l) {
        return metrics_from_confusion(confusion(p, l, 8)).acc;
    };
    for (auto _ : state) {
        auto ci = bootstrap_ci(acc, preds, labels, 200, 1);
        benchmark::DoNotOptimize(ci.lower);
    }
}
BENCHMARK(bench_bootstrap_ci);

void bench_render_topomap(benchmark::State& state) {
    auto layout = ring_layout(8);
    std::vector<double> values = {0.1, 0.9, 0.4, 0.6, 0.2, 0.8, 0.3, 0.7};
    for (auto _ : state) {
        auto img = render_topomap(values, layout, 32);
        benchmark::DoNotOptimize(img.at(16, 16));
    }
}
BENCHMARK(bench_render_topomap);

}  // namespace

BENCHMARK_MAIN();
