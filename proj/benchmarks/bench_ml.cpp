#include <benchmark/benchmark.h>

#include "fcpred/ml/model.hpp"
#include "fcpred/random.hpp"
#include "fcpred/selection.hpp"
#include "fcpred/shap.hpp"

namespace fcpred {
namespace {

// 784 features = 28 x 28 DTF grid.
struct Data {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Data make_data(int n, int p) {
  Rng rng(7);
  Data d{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < d.X.size(); ++i) d.X.data()[i] = rng.normal();
  for (int i = 0; i < n; ++i) d.y(i) = d.X(i, 0) - 0.5 * d.X(i, 1) + 0.1 * rng.normal();
  return d;
}

void fit_family(benchmark::State& state, ml::HyperparameterSet hp) {
  const Data d = make_data(40, static_cast<int>(state.range(0)));
  ml::FitOptions opts;
  opts.mlp_epochs = 300;
  opts.svr_tol = 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(ml::fit_model(d.X, d.y, hp, opts));
}

void BM_FitRidge(benchmark::State& s) { fit_family(s, {ml::Family::kRidge, {{"alpha", 1.0}}}); }
void BM_FitTree(benchmark::State& s) { fit_family(s, {ml::Family::kTree, {{"max_depth", 5LL}}}); }
void BM_FitForest(benchmark::State& s) {
  fit_family(s, {ml::Family::kForest, {{"n_estimators", 100LL}, {"max_depth", 5LL}}});
}
void BM_FitSvr(benchmark::State& s) {
  fit_family(s, {ml::Family::kSvr, {{"C", 1.0}, {"gamma", 0.01}, {"kernel", std::string("rbf")}}});
}
void BM_FitGboost(benchmark::State& s) {
  fit_family(s, {ml::Family::kGboost, {{"n_estimators", 100LL}, {"max_depth", 3LL}}});
}
void BM_FitMlp(benchmark::State& s) {
  fit_family(s, {ml::Family::kMlp, {{"hidden_layers", 1LL}, {"hidden_units", 50LL}}});
}
BENCHMARK(BM_FitRidge)->Arg(64)->Arg(784)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitTree)->Arg(64)->Arg(784)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitForest)->Arg(64)->Arg(784)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitSvr)->Arg(64)->Arg(784)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitGboost)->Arg(64)->Arg(784)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitMlp)->Arg(64)->Arg(784)->Unit(benchmark::kMillisecond);

void BM_TreeGridSearch(benchmark::State& state) {
  const Data raw = make_data(40, 64);
  Dataset d;
  d.X = raw.X;
  d.y = raw.y;
  d.subject_ids.resize(40);
  d.meta.index_map.resize(64);
  const FoldPlan plan = make_folds(40, 10, 3, 1);
  GridSpec grid = default_grid(ml::Family::kTree);
  grid.axes["min_samples_split"] = {2LL};
  for (auto _ : state) benchmark::DoNotOptimize(grid_search(d, grid, plan, 2));
}
BENCHMARK(BM_TreeGridSearch)->Unit(benchmark::kMillisecond);

void BM_KernelShap(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const Data d = make_data(40, p);
  const ml::FittedModel model =
      ml::fit_model(d.X, d.y, {ml::Family::kRidge, {{"alpha", 1.0}}}, {});
  const PredictFn f = [&model](const Eigen::MatrixXd& X) { return model.predict(X); };
  const Eigen::RowVectorXd x = d.X.row(0);
  for (auto _ : state) benchmark::DoNotOptimize(kernel_shap(f, x, d.X, 2048, 3));
}
BENCHMARK(BM_KernelShap)->Arg(10)->Arg(64)->Arg(784)->Unit(benchmark::kMillisecond);

void BM_ExactShapley(benchmark::State& state) {
  const Data d = make_data(40, 12);
  const ml::FittedModel model =
      ml::fit_model(d.X, d.y, {ml::Family::kTree, {{"max_depth", 4LL}}}, {});
  const PredictFn f = [&model](const Eigen::MatrixXd& X) { return model.predict(X); };
  std::vector<int> all(12);
  for (int j = 0; j < 12; ++j) all[static_cast<std::size_t>(j)] = j;
  const Eigen::RowVectorXd x = d.X.row(0);
  for (auto _ : state) benchmark::DoNotOptimize(exact_shapley(f, x, d.X.topRows(10), all));
}
BENCHMARK(BM_ExactShapley)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace fcpred
BENCHMARK_MAIN();
