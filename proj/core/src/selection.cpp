#include "fcpred/selection.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include "fcpred/error.hpp"
#include "fcpred/io_util.hpp"
#include "fcpred/parallel.hpp"
#include "fcpred/random.hpp"

namespace fcpred {

using ml::Family;
using ml::HyperparameterSet;
using ml::ParamValue;

std::vector<int> FoldPlan::train_indices(int repeat, int fold) const {
  std::vector<int> out;
  const auto& a = assignments.at(static_cast<std::size_t>(repeat));
  for (int i = 0; i < n; ++i) {
    if (a[i] != fold) out.push_back(i);
  }
  return out;
}

std::vector<int> FoldPlan::validation_indices(int repeat, int fold) const {
  std::vector<int> out;
  const auto& a = assignments.at(static_cast<std::size_t>(repeat));
  for (int i = 0; i < n; ++i) {
    if (a[i] == fold) out.push_back(i);
  }
  return out;
}

FoldPlan make_folds(int n, int k, int repeats, std::uint64_t seed) {
  require(k >= 2, ErrorCode::kInvalidSpec, "k must be >= 2");
  require(k <= n, ErrorCode::kInvalidSpec,
          "k = " + std::to_string(k) + " exceeds sample count " + std::to_string(n));
  require(repeats >= 1, ErrorCode::kInvalidSpec, "repeats must be >= 1");
  FoldPlan plan{n, k, repeats, seed, {}};
  for (int r = 0; r < repeats; ++r) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, 0x466f6c64ULL, static_cast<std::uint64_t>(r)));
    rng.shuffle(std::span<int>(perm));
    std::vector<int> assign(static_cast<std::size_t>(n));
    const int base = n / k;
    const int extra = n % k;
    int pos = 0;
    for (int f = 0; f < k; ++f) {
      const int size = base + (f < extra ? 1 : 0);
      for (int i = 0; i < size; ++i) assign[perm[pos++]] = f;
    }
    plan.assignments.push_back(std::move(assign));
  }
  return plan;
}

std::vector<HyperparameterSet> grid_expand(const GridSpec& spec) {
  for (const auto& [name, values] : spec.axes) {
    require(!values.empty(), ErrorCode::kInvalidSpec, "grid axis '" + name + "' has no values");
  }
  double count = 1.0;
  for (const auto& [name, values] : spec.axes) count *= static_cast<double>(values.size());
  require(count <= static_cast<double>(kMaxGridPoints), ErrorCode::kInvalidSpec,
          "grid has " + io::format_double(count) + " points; the limit is " +
              std::to_string(kMaxGridPoints));
  std::vector<HyperparameterSet> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<std::pair<std::string, const std::vector<ParamValue>*>> axes;
  for (const auto& [name, values] : spec.axes) axes.emplace_back(name, &values);
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    HyperparameterSet hp;
    hp.family = spec.family;
    for (std::size_t a = 0; a < axes.size(); ++a) hp.params[axes[a].first] = (*axes[a].second)[idx[a]];
    validate(hp, false);
    out.push_back(std::move(hp));
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axes[a].second->size()) break;
      idx[a] = 0;
      if (a == 0) return out;
    }
    if (axes.empty()) return out;
  }
}

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  require(lo > 0.0 && hi >= lo && per_decade >= 1, ErrorCode::kInvalidSpec,
          "log grid needs 0 < lo <= hi and per_decade >= 1");
  const double l0 = std::log10(lo);
  const double l1 = std::log10(hi);
  const int steps = static_cast<int>(std::ceil((l1 - l0) * per_decade - 1e-9));
  std::vector<double> out;
  for (int i = 0; i <= steps; ++i) {
    const double e = std::min(l1, l0 + static_cast<double>(i) / per_decade);
    // Round to 3 significant digits so grid values print cleanly.
    const double v = std::pow(10.0, e);
    const double mag = std::pow(10.0, std::floor(std::log10(v)) - 2);
    out.push_back(std::clamp(std::round(v / mag) * mag, lo, hi));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> linear_grid(double lo, double hi, double step) {
  require(step > 0.0 && hi >= lo, ErrorCode::kInvalidSpec, "linear grid needs step > 0");
  std::vector<double> out;
  const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  for (long long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

namespace {

template <typename T>
std::vector<ParamValue> values(const std::vector<T>& v) {
  std::vector<ParamValue> out;
  for (const auto& x : v) {
    if constexpr (std::is_same_v<T, int>) {
      out.emplace_back(static_cast<long long>(x));
    } else if constexpr (std::is_same_v<T, const char*>) {
      out.emplace_back(std::string(x));
    } else {
      out.emplace_back(x);
    }
  }
  return out;
}

std::vector<int> int_range(int lo, int hi, int step) {
  std::vector<int> out;
  for (int v = lo; v <= hi; v += step) out.push_back(v);
  return out;
}

// Literal steps that start at the step size, with the lower bound kept as
// its own first point ("0.00001 to 100, steps of 0.01").
std::vector<double> literal_axis(double lo, double hi, double step) {
  std::vector<double> out{lo};
  for (double v : linear_grid(step, hi, step)) {
    if (v > lo) out.push_back(v);
  }
  return out;
}

}  // namespace

GridSpec default_grid(Family family, bool full) {
  GridSpec g;
  g.family = family;
  auto& a = g.axes;
  switch (family) {
    case Family::kRidge:
      a["alpha"] = values(full ? literal_axis(1e-5, 100, 0.01) : log_grid(1e-5, 100, 9));
      a["fit_intercept"] = values(std::vector<bool>{true, false});
      a["solver"] = full ? values(std::vector<const char*>{"svd", "cholesky", "lsqr", "sag"})
                         : values(std::vector<const char*>{"svd"});
      break;
    case Family::kTree:
      a["max_depth"] = values(int_range(2, 10, 1));
      a["min_samples_split"] = values(int_range(2, 10, 1));
      a["min_samples_leaf"] = values(int_range(1, 10, 1));
      break;
    case Family::kForest:
      if (full) {
        a["max_depth"] = values(int_range(2, 10, 1));
        a["min_samples_split"] = values(int_range(2, 10, 1));
        a["min_samples_leaf"] = values(int_range(1, 10, 1));
        a["n_estimators"] = values(int_range(10, 100, 10));
      } else {
        a["max_depth"] = values(std::vector<int>{2, 5, 10});
        a["min_samples_split"] = values(std::vector<int>{2, 5, 10});
        a["min_samples_leaf"] = values(std::vector<int>{1, 4, 10});
        a["n_estimators"] = values(std::vector<int>{10, 50, 100});
      }
      break;
    case Family::kSvr:
      a["C"] = values(full ? literal_axis(0.01, 100, 0.01) : log_grid(0.01, 100, 9));
      a["gamma"] = values(full ? literal_axis(0.001, 1, 0.001) : log_grid(0.001, 1, 3));
      a["kernel"] = values(std::vector<const char*>{"linear", "poly", "rbf"});
      break;
    case Family::kGboost:
      if (full) {
        a["learning_rate"] = values(literal_axis(0.01, 0.5, 0.01));
        a["max_depth"] = values(int_range(2, 10, 1));
        a["subsample"] = values(std::vector<double>{0.2, 0.4, 0.6, 0.8, 1.0});
        a["colsample_bytree"] = values(std::vector<double>{0.2, 0.4, 0.6, 0.8, 1.0});
        a["n_estimators"] = values(int_range(10, 150, 10));
      } else {
        a["learning_rate"] = values(std::vector<double>{0.05, 0.1, 0.3});
        a["max_depth"] = values(std::vector<int>{2, 3, 5});
        a["subsample"] = values(std::vector<double>{0.6, 1.0});
        a["colsample_bytree"] = values(std::vector<double>{0.6, 1.0});
        a["n_estimators"] = values(std::vector<int>{50, 150});
      }
      break;
    case Family::kMlp:
      if (full) {
        a["hidden_layers"] = values(int_range(1, 3, 1));
        a["hidden_units"] = values(int_range(10, 1000, 10));
        a["activation"] = values(std::vector<const char*>{"logistic", "tanh", "relu"});
        a["solver"] = values(std::vector<const char*>{"adam", "lbfgs", "sgd"});
        a["alpha"] = values(literal_axis(1e-4, 0.1, 0.001));
      } else {
        a["hidden_layers"] = values(std::vector<int>{1});
        a["hidden_units"] = values(std::vector<int>{10, 50});
        a["activation"] = values(std::vector<const char*>{"tanh", "relu"});
        a["solver"] = values(std::vector<const char*>{"adam"});
        a["alpha"] = values(std::vector<double>{1e-4, 0.1});
      }
      break;
  }
  return g;
}

GridSpec grid_from_json(Family family, const nlohmann::json& j) {
  require(j.is_object(), ErrorCode::kInvalidSpec, "grid must be a JSON object");
  GridSpec g;
  g.family = family;
  for (const auto& [name, vals] : j.items()) {
    std::vector<ParamValue> axis;
    if (vals.is_array()) {
      for (const auto& v : vals) axis.push_back(ml::param_from_json(v));
    } else {
      axis.push_back(ml::param_from_json(vals));
    }
    g.axes[name] = std::move(axis);
  }
  // Checks names and value types.
  grid_expand(GridSpec{family, [&] {
                         std::map<std::string, std::vector<ParamValue>> first;
                         for (const auto& [n, v] : g.axes) first[n] = {v.front()};
                         return first;
                       }()});
  return g;
}

nlohmann::json to_json(const GridSpec& g) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, vals] : g.axes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& v : vals) arr.push_back(ml::to_json(v));
    j[name] = arr;
  }
  return j;
}

double rmse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual) {
  require(predicted.size() > 0, ErrorCode::kEmptyInput, "RMSE of empty input");
  require(predicted.size() == actual.size(), ErrorCode::kShapeMismatch,
          "prediction and target lengths differ");
  return std::sqrt((predicted - actual).squaredNorm() / static_cast<double>(actual.size()));
}

double evaluate_rmse(const ml::FittedModel& model, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y) {
  require(X.rows() > 0, ErrorCode::kEmptyInput, "RMSE of empty input");
  require(X.rows() == y.size(), ErrorCode::kShapeMismatch, "X rows and y length differ");
  return rmse(model.predict(X), y);
}

const ConfigResult& CvReport::best_config() const {
  require(best >= 0 && best < static_cast<int>(configs.size()), ErrorCode::kInvalidArgument,
          "report has no best configuration");
  return configs[static_cast<std::size_t>(best)];
}

namespace {

std::pair<double, double> mean_sd(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

struct Split {
  std::vector<int> train;
  std::vector<int> validation;
  Eigen::MatrixXd X_train, X_val;
  Eigen::VectorXd y_train, y_val;
};

}  // namespace

SearchResult grid_search(const Dataset& data, const GridSpec& grid, const FoldPlan& plan,
                         std::uint64_t seed, const SearchOptions& options) {
  data.validate();
  require(plan.n == data.rows(), ErrorCode::kShapeMismatch,
          "fold plan covers " + std::to_string(plan.n) + " samples but dataset has " +
              std::to_string(data.rows()));
  const std::vector<HyperparameterSet> configs = grid_expand(grid);
  require(!configs.empty(), ErrorCode::kInvalidSpec, "grid is empty");

  const int n_splits = plan.repeats * plan.k;
  std::vector<Split> splits(static_cast<std::size_t>(n_splits));
  for (int r = 0; r < plan.repeats; ++r) {
    for (int f = 0; f < plan.k; ++f) {
      Split& s = splits[static_cast<std::size_t>(r * plan.k + f)];
      s.train = plan.train_indices(r, f);
      s.validation = plan.validation_indices(r, f);
      s.X_train = data.X(s.train, Eigen::all);
      s.y_train = data.y(s.train);
      s.X_val = data.X(s.validation, Eigen::all);
      s.y_val = data.y(s.validation);
    }
  }

  const int n_configs = static_cast<int>(configs.size());
  const int n_tasks = n_configs * n_splits;
  std::vector<double> train_rmse(static_cast<std::size_t>(n_tasks), 0.0);
  std::vector<double> val_rmse(static_cast<std::size_t>(n_tasks), 0.0);
  std::vector<std::string> errors(static_cast<std::size_t>(n_tasks));
  std::vector<int> error_codes(static_cast<std::size_t>(n_tasks), -1);
  std::mutex audit_mu;

  parallel_for(n_tasks, options.threads, [&](int t) {
    const int c = t / n_splits;
    const int s = t % n_splits;
    const int r = s / plan.k;
    const int f = s % plan.k;
    const Split& sp = splits[static_cast<std::size_t>(s)];
    if (options.audit) {
      std::lock_guard lock(audit_mu);
      options.audit(FitAudit{c, r, f, sp.train, sp.validation});
    }
    ml::FitOptions fo = options.fit;
    fo.seed = derive_seed(seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(r),
                          static_cast<std::uint64_t>(f));
    try {
      const ml::FittedModel m = ml::fit_model(sp.X_train, sp.y_train, configs[c], fo);
      const double tr = rmse(m.predict(sp.X_train), sp.y_train);
      const double va = rmse(m.predict(sp.X_val), sp.y_val);
      require(std::isfinite(tr) && std::isfinite(va), ErrorCode::kDiverged,
              "non-finite RMSE");
      train_rmse[t] = tr;
      val_rmse[t] = va;
    } catch (const Error& e) {
      errors[t] = e.what();
      error_codes[t] = static_cast<int>(e.code());
    }
  });

  SearchResult result;
  CvReport& rep = result.report;
  rep.family = grid.family;
  rep.k = plan.k;
  rep.repeats = plan.repeats;
  rep.seed = seed;
  rep.n_samples = static_cast<int>(data.rows());
  int first_error = -1;
  for (int c = 0; c < n_configs; ++c) {
    ConfigResult cr;
    cr.hp = configs[c];
    for (int s = 0; s < n_splits; ++s) {
      const int t = c * n_splits + s;
      if (error_codes[t] >= 0) {
        cr.failed = true;
        cr.error = errors[t];
        if (first_error < 0) first_error = t;
        break;
      }
      cr.train_rmse.push_back(train_rmse[t]);
      cr.validation_rmse.push_back(val_rmse[t]);
    }
    if (cr.failed) {
      cr.train_rmse.clear();
      cr.validation_rmse.clear();
    } else {
      std::tie(cr.train_mean, cr.train_sd) = mean_sd(cr.train_rmse);
      std::tie(cr.validation_mean, cr.validation_sd) = mean_sd(cr.validation_rmse);
      if (rep.best < 0 || cr.validation_mean < rep.configs[rep.best].validation_mean) {
        rep.best = c;
      }
    }
    rep.configs.push_back(std::move(cr));
  }
  if (rep.best < 0) {
    throw Error(static_cast<ErrorCode>(error_codes[first_error]),
                "every configuration failed; first error: " + errors[first_error]);
  }

  ml::FitOptions fo = options.fit;
  fo.seed = derive_seed(seed, static_cast<std::uint64_t>(rep.best), 0xfffffffeULL);
  result.best_model = ml::fit_model(data.X, data.y, rep.configs[rep.best].hp, fo);
  if (options.test != nullptr) {
    options.test->validate();
    rep.test_rmse = evaluate_rmse(result.best_model, options.test->X, options.test->y);
    rep.n_test = static_cast<int>(options.test->rows());
  }
  return result;
}

nlohmann::json to_json(const CvReport& r) {
  nlohmann::json configs = nlohmann::json::array();
  for (const auto& c : r.configs) {
    nlohmann::json j;
    j["hyperparameters"] = ml::to_json(c.hp);
    j["failed"] = c.failed;
    if (c.failed) {
      j["error"] = c.error;
    } else {
      j["train_rmse"] = c.train_rmse;
      j["validation_rmse"] = c.validation_rmse;
      j["train_mean"] = c.train_mean;
      j["train_sd"] = c.train_sd;
      j["validation_mean"] = c.validation_mean;
      j["validation_sd"] = c.validation_sd;
    }
    configs.push_back(std::move(j));
  }
  nlohmann::json j;
  j["family"] = std::string(ml::to_string(r.family));
  j["k"] = r.k;
  j["repeats"] = r.repeats;
  j["seed"] = r.seed;
  j["n_samples"] = r.n_samples;
  j["configs"] = std::move(configs);
  j["best"] = r.best;
  j["test_rmse"] = r.test_rmse ? nlohmann::json(*r.test_rmse) : nlohmann::json(nullptr);
  j["n_test"] = r.n_test ? nlohmann::json(*r.n_test) : nlohmann::json(nullptr);
  return j;
}

CvReport cv_report_from_json(const nlohmann::json& j) {
  try {
    CvReport r;
    r.family = ml::parse_family(j.at("family").get<std::string>());
    r.k = j.at("k").get<int>();
    r.repeats = j.at("repeats").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.n_samples = j.at("n_samples").get<int>();
    for (const auto& c : j.at("configs")) {
      ConfigResult cr;
      cr.hp = ml::hyperparameters_from_json(c.at("hyperparameters"));
      cr.failed = c.at("failed").get<bool>();
      if (cr.failed) {
        cr.error = c.at("error").get<std::string>();
      } else {
        cr.train_rmse = c.at("train_rmse").get<std::vector<double>>();
        cr.validation_rmse = c.at("validation_rmse").get<std::vector<double>>();
        cr.train_mean = c.at("train_mean").get<double>();
        cr.train_sd = c.at("train_sd").get<double>();
        cr.validation_mean = c.at("validation_mean").get<double>();
        cr.validation_sd = c.at("validation_sd").get<double>();
      }
      r.configs.push_back(std::move(cr));
    }
    r.best = j.at("best").get<int>();
    if (!j.at("test_rmse").is_null()) r.test_rmse = j.at("test_rmse").get<double>();
    if (!j.at("n_test").is_null()) r.n_test = j.at("n_test").get<int>();
    require(r.best >= 0 && r.best < static_cast<int>(r.configs.size()), ErrorCode::kParse,
            "best index out of range");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed CV report: ") + e.what());
  }
}

}  // namespace fcpred
