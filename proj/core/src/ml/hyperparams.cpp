#include "fcpred/ml/hyperparams.hpp"

#include <algorithm>
#include <cmath>

#include "fcpred/error.hpp"
#include "fcpred/io_util.hpp"

namespace fcpred::ml {
namespace {

struct Range {
  double lo, hi;
};

struct ParamRule {
  enum class Type { kBool, kInt, kReal, kChoice } type;
  Range range{0, 0};
  std::vector<std::string> choices{};
};

const std::map<std::string, ParamRule>& rules(Family f) {
  using T = ParamRule::Type;
  static const std::map<std::string, ParamRule> ridge{
      {"alpha", {T::kReal, {1e-5, 100}}},
      {"fit_intercept", {T::kBool}},
      {"solver", {T::kChoice, {}, {"svd", "cholesky", "lsqr", "sag"}}}};
  static const std::map<std::string, ParamRule> tree{
      {"max_depth", {T::kInt, {2, 10}}},
      {"min_samples_split", {T::kInt, {2, 10}}},
      {"min_samples_leaf", {T::kInt, {1, 10}}}};
  static const std::map<std::string, ParamRule> forest{
      {"max_depth", {T::kInt, {2, 10}}},
      {"min_samples_split", {T::kInt, {2, 10}}},
      {"min_samples_leaf", {T::kInt, {1, 10}}},
      {"n_estimators", {T::kInt, {10, 100}}}};
  static const std::map<std::string, ParamRule> svr{
      {"C", {T::kReal, {0.01, 100}}},
      {"gamma", {T::kReal, {0.001, 1}}},
      {"kernel", {T::kChoice, {}, {"linear", "poly", "rbf"}}}};
  static const std::map<std::string, ParamRule> gboost{
      {"learning_rate", {T::kReal, {0.01, 0.5}}},
      {"max_depth", {T::kInt, {2, 10}}},
      {"subsample", {T::kReal, {0.2, 1.0}}},
      {"colsample_bytree", {T::kReal, {0.2, 1.0}}},
      {"n_estimators", {T::kInt, {10, 150}}}};
  static const std::map<std::string, ParamRule> mlp{
      {"hidden_layers", {T::kInt, {1, 3}}},
      {"hidden_units", {T::kInt, {10, 1000}}},
      {"activation", {T::kChoice, {}, {"logistic", "tanh", "relu"}}},
      {"solver", {T::kChoice, {}, {"adam", "lbfgs", "sgd"}}},
      {"alpha", {T::kReal, {1e-4, 0.1}}}};
  switch (f) {
    case Family::kRidge: return ridge;
    case Family::kTree: return tree;
    case Family::kForest: return forest;
    case Family::kSvr: return svr;
    case Family::kGboost: return gboost;
    case Family::kMlp: return mlp;
  }
  return ridge;
}

std::string pretty_name(Family f, const std::string& name) {
  if (f == Family::kMlp && name == "hidden_units") return "hidden layer sizes";
  if (name == "n_estimators") return "num of estimators";
  std::string out = name;
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::kRidge: return "ridge";
    case Family::kTree: return "tree";
    case Family::kForest: return "forest";
    case Family::kSvr: return "svr";
    case Family::kGboost: return "gboost";
    case Family::kMlp: return "mlp";
  }
  return "ridge";
}

Family parse_family(std::string_view s) {
  for (Family f : all_families()) {
    if (to_string(f) == s) return f;
  }
  throw Error(ErrorCode::kInvalidSpec, "unknown model family '" + std::string(s) + "'");
}

std::string_view display_name(Family f) {
  switch (f) {
    case Family::kRidge: return "Ridge Regression";
    case Family::kTree: return "Decision-tree regressor";
    case Family::kForest: return "Random forest regressor";
    case Family::kSvr: return "Support vector regressor";
    case Family::kGboost: return "XGBoost regressor";
    case Family::kMlp: return "Multi-layer perceptron";
  }
  return "";
}

const std::vector<Family>& all_families() {
  static const std::vector<Family> all{Family::kRidge, Family::kTree,   Family::kForest,
                                       Family::kSvr,   Family::kGboost, Family::kMlp};
  return all;
}

std::string to_display(const ParamValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return x ? "True" : "False";
        } else if constexpr (std::is_same_v<T, long long>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<T, double>) {
          return io::format_double(x);
        } else {
          return x;
        }
      },
      v);
}

nlohmann::json to_json(const ParamValue& v) {
  return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

ParamValue param_from_json(const nlohmann::json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw Error(ErrorCode::kParse, "hyperparameter values must be bool, number or string");
}

double HyperparameterSet::get_double(const std::string& name, double fallback) const {
  const auto it = params.find(name);
  if (it == params.end()) return fallback;
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  if (const auto* i = std::get_if<long long>(&it->second)) return static_cast<double>(*i);
  throw Error(ErrorCode::kInvalidSpec, "hyperparameter '" + name + "' must be numeric");
}

long long HyperparameterSet::get_int(const std::string& name, long long fallback) const {
  const auto it = params.find(name);
  if (it == params.end()) return fallback;
  if (const auto* i = std::get_if<long long>(&it->second)) return *i;
  if (const auto* d = std::get_if<double>(&it->second)) {
    if (std::floor(*d) == *d) return static_cast<long long>(*d);
  }
  throw Error(ErrorCode::kInvalidSpec, "hyperparameter '" + name + "' must be an integer");
}

bool HyperparameterSet::get_bool(const std::string& name, bool fallback) const {
  const auto it = params.find(name);
  if (it == params.end()) return fallback;
  if (const auto* b = std::get_if<bool>(&it->second)) return *b;
  throw Error(ErrorCode::kInvalidSpec, "hyperparameter '" + name + "' must be boolean");
}

std::string HyperparameterSet::get_string(const std::string& name,
                                          const std::string& fallback) const {
  const auto it = params.find(name);
  if (it == params.end()) return fallback;
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  throw Error(ErrorCode::kInvalidSpec, "hyperparameter '" + name + "' must be a string");
}

std::string HyperparameterSet::describe() const {
  std::string out;
  for (const auto& [name, value] : params) {
    if (family == Family::kMlp && name == "hidden_layers") continue;
    if (!out.empty()) out += ", ";
    out += pretty_name(family, name) + " = ";
    if (family == Family::kMlp && name == "hidden_units") {
      const long long layers = get_int("hidden_layers", 1);
      out += "(";
      for (long long l = 0; l < layers; ++l) out += to_display(value) + ",";
      if (layers > 1) out.pop_back();
      out += ")";
    } else {
      out += to_display(value);
    }
  }
  return out;
}

nlohmann::json to_json(const HyperparameterSet& hp) {
  nlohmann::json j;
  j["family"] = std::string(to_string(hp.family));
  j["params"] = nlohmann::json::object();
  for (const auto& [k, v] : hp.params) j["params"][k] = to_json(v);
  return j;
}

HyperparameterSet hyperparameters_from_json(const nlohmann::json& j) {
  try {
    HyperparameterSet hp;
    hp.family = parse_family(j.at("family").get<std::string>());
    for (const auto& [k, v] : j.at("params").items()) hp.params[k] = param_from_json(v);
    return hp;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed hyperparameters: ") + e.what());
  }
}

const std::vector<std::string>& parameter_names(Family f) {
  static std::map<Family, std::vector<std::string>> cache = [] {
    std::map<Family, std::vector<std::string>> m;
    for (Family fam : all_families()) {
      for (const auto& [name, rule] : rules(fam)) m[fam].push_back(name);
    }
    return m;
  }();
  return cache.at(f);
}

void validate(const HyperparameterSet& hp, bool enforce_ranges) {
  const auto& table = rules(hp.family);
  for (const auto& [name, value] : hp.params) {
    const auto it = table.find(name);
    require(it != table.end(), ErrorCode::kInvalidSpec,
            "'" + name + "' is not a hyperparameter of " + std::string(to_string(hp.family)));
    const ParamRule& rule = it->second;
    const std::string where = std::string(to_string(hp.family)) + "." + name;
    switch (rule.type) {
      case ParamRule::Type::kBool:
        require(std::holds_alternative<bool>(value), ErrorCode::kInvalidSpec,
                where + " must be boolean");
        break;
      case ParamRule::Type::kChoice: {
        const auto* s = std::get_if<std::string>(&value);
        require(s && std::find(rule.choices.begin(), rule.choices.end(), *s) !=
                         rule.choices.end(),
                ErrorCode::kInvalidSpec, where + " has an unsupported value " + to_display(value));
        break;
      }
      case ParamRule::Type::kInt:
      case ParamRule::Type::kReal: {
        const double v = rule.type == ParamRule::Type::kInt
                             ? static_cast<double>(hp.get_int(name, 0))
                             : hp.get_double(name, 0.0);
        require(std::isfinite(v), ErrorCode::kInvalidSpec, where + " must be finite");
        if (enforce_ranges) {
          // Relative slack so decimal grid values like 0.2*k pass.
          const double slack = 1e-9 * std::max(1.0, std::abs(rule.range.hi));
          require(v >= rule.range.lo - slack && v <= rule.range.hi + slack,
                  ErrorCode::kInvalidSpec,
                  where + " = " + to_display(value) + " outside [" +
                      io::format_double(rule.range.lo) + ", " +
                      io::format_double(rule.range.hi) + "]");
        }
        break;
      }
    }
  }
}

}  // namespace fcpred::ml
