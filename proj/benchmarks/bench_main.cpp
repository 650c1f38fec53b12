#include <benchmark/benchmark.h>

#include <random>

#include "autobid/auction.hpp"
#include "autobid/hindsight.hpp"
#include "autobid/meta_model.hpp"
#include "autobid/oracle.hpp"
#include "autobid/spline.hpp"

using namespace autobid;

namespace {

std::vector<Impression> bucket(std::size_t n) {
  std::mt19937_64 rng(1);
  std::lognormal_distribution<double> v(0.0, 0.5), e(-0.5, 0.4);
  std::vector<Impression> b;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = v(rng);
    b.push_back({x, e(rng) * x});
  }
  return b;
}

void BM_RunStep(benchmark::State& state) {
  const auto b = bucket(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_step(b, 0.8, 50.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunStep)->Arg(64)->Arg(1024);

void BM_MilpOracle(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  SelectionInstance in;
  double total = 0;
  for (int i = 0; i < state.range(0); ++i) {
    in.items.push_back({u(rng), u(rng)});
    total += in.items.back().cost;
  }
  in.budget = 0.4 * total;
  in.roi_target = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(milp_oracle(in));
}
BENCHMARK(BM_MilpOracle)->Arg(12)->Arg(20);

void BM_SplineEval(benchmark::State& state) {
  const SplineBasis basis(3, 16);
  std::vector<double> cp(basis.num_basis(), 0.0);
  for (std::size_t i = 0; i < cp.size(); ++i) cp[i] = std::sin(0.3 * static_cast<double>(i));
  const SplineCurve c(basis, cp);
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(c.eval(x));
    x = x > 1.0 ? 0.0 : x + 0.013;
  }
}
BENCHMARK(BM_SplineEval);

std::vector<LossExample> batch(std::size_t n, const SplineConfig& sc) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<LossExample> out(n);
  for (auto& ex : out) {
    ex.features.resize(kFeatureDim);
    for (auto& f : ex.features) f = g(rng);
    for (int a = 0; a < 10; ++a) ex.anchors.push_back({u(rng), g(rng), g(rng), {}});
  }
  attach_basis(sc.basis(), out);
  return out;
}

void BM_MetaModelForward(benchmark::State& state) {
  const SplineConfig sc;
  const auto m = MetaModel::random(kFeatureDim, 128, sc.num_control(), 1);
  const std::vector<double> s(kFeatureDim, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(forward(m, s));
}
BENCHMARK(BM_MetaModelForward);

void BM_MetaModelBackward(benchmark::State& state) {
  const SplineConfig sc;
  const auto m = MetaModel::random(kFeatureDim, 128, sc.num_control(), 1);
  const auto b = batch(64, sc);
  for (auto _ : state) benchmark::DoNotOptimize(backward(m, b));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_MetaModelBackward);

}  // namespace

BENCHMARK_MAIN();
