#pragma once

#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fcpred::ml {

enum class Family { kRidge, kTree, kForest, kSvr, kGboost, kMlp };

std::string_view to_string(Family f);
Family parse_family(std::string_view s);
// Display name used in report tables ("Ridge Regression", ...).
std::string_view display_name(Family f);
const std::vector<Family>& all_families();

using ParamValue = std::variant<bool, long long, double, std::string>;

std::string to_display(const ParamValue& v);
nlohmann::json to_json(const ParamValue& v);
ParamValue param_from_json(const nlohmann::json& j);

// One grid point: family plus parameter name -> value (names as in the
// hyperparameter table, e.g. "alpha", "max_depth", "colsample_bytree").
struct HyperparameterSet {
  Family family = Family::kRidge;
  std::map<std::string, ParamValue> params;

  bool has(const std::string& name) const { return params.count(name) > 0; }
  double get_double(const std::string& name, double fallback) const;
  long long get_int(const std::string& name, long long fallback) const;
  bool get_bool(const std::string& name, bool fallback) const;
  std::string get_string(const std::string& name, const std::string& fallback) const;

  // "alpha = 0.00126, fit intercept = False, solver = sag"
  std::string describe() const;
};

nlohmann::json to_json(const HyperparameterSet& hp);
HyperparameterSet hyperparameters_from_json(const nlohmann::json& j);

// Parameter names accepted for a family.
const std::vector<std::string>& parameter_names(Family f);

// Throws kInvalidSpec for unknown names, wrong value types, or (when
// enforce_ranges) values outside the published search ranges.
void validate(const HyperparameterSet& hp, bool enforce_ranges = true);

}  // namespace fcpred::ml
