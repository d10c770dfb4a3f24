#include "fcpred/ml/model.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "fcpred/error.hpp"

namespace fcpred::ml {
namespace {

constexpr int kFormatVersion = 1;

nlohmann::json matrix_json(const Eigen::MatrixXd& M) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(M.size()));
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) flat.push_back(M(r, c));
  }
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"values", flat}};
}

Eigen::MatrixXd matrix_from(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto flat = j.at("values").get<std::vector<double>>();
  require(static_cast<Eigen::Index>(flat.size()) == rows * cols, ErrorCode::kParse,
          "matrix value count does not match its shape");
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = flat[r * cols + c];
  }
  return M;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json learned_json(const LearnedParams& learned) {
  struct Visitor {
    nlohmann::json operator()(const RidgeModel& m) const {
      return {{"weights", vector_json(m.weights)}, {"intercept", m.intercept}};
    }
    nlohmann::json operator()(const TreeModel& m) const { return {{"nodes", to_json(m)}}; }
    nlohmann::json operator()(const ForestModel& m) const {
      nlohmann::json trees = nlohmann::json::array();
      for (const auto& t : m.trees) trees.push_back(to_json(t));
      return {{"trees", trees}};
    }
    nlohmann::json operator()(const SvrModel& m) const {
      return {{"support", matrix_json(m.support)},
              {"coef", vector_json(m.coef)},
              {"bias", m.bias},
              {"kernel", std::string(to_string(m.params.kernel))},
              {"gamma", m.params.gamma},
              {"C", m.params.C},
              {"epsilon", m.params.epsilon},
              {"degree", m.params.degree},
              {"dual_objective", m.dual_objective}};
    }
    nlohmann::json operator()(const GboostModel& m) const {
      nlohmann::json trees = nlohmann::json::array();
      for (const auto& t : m.trees) trees.push_back(to_json(t));
      return {{"base", m.base},
              {"learning_rate", m.learning_rate},
              {"trees", trees},
              {"train_rmse", m.train_rmse}};
    }
    nlohmann::json operator()(const MlpModel& m) const {
      nlohmann::json w = nlohmann::json::array();
      nlohmann::json b = nlohmann::json::array();
      for (std::size_t l = 0; l < m.weights.size(); ++l) {
        w.push_back(matrix_json(m.weights[l]));
        b.push_back(vector_json(m.biases[l]));
      }
      return {{"activation", std::string(to_string(m.activation))},
              {"weights", w},
              {"biases", b},
              {"loss_history", m.loss_history}};
    }
  };
  return std::visit(Visitor{}, learned);
}

LearnedParams learned_from(Family family, const nlohmann::json& j) {
  switch (family) {
    case Family::kRidge: {
      RidgeModel m;
      m.weights = vector_from(j.at("weights"));
      m.intercept = j.at("intercept").get<double>();
      return m;
    }
    case Family::kTree:
      return tree_from_json(j.at("nodes"));
    case Family::kForest: {
      ForestModel m;
      for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
      return m;
    }
    case Family::kSvr: {
      SvrModel m;
      m.support = matrix_from(j.at("support"));
      m.coef = vector_from(j.at("coef"));
      m.bias = j.at("bias").get<double>();
      m.params.kernel = parse_kernel(j.at("kernel").get<std::string>());
      m.params.gamma = j.at("gamma").get<double>();
      m.params.C = j.at("C").get<double>();
      m.params.epsilon = j.at("epsilon").get<double>();
      m.params.degree = j.at("degree").get<int>();
      m.dual_objective = j.at("dual_objective").get<double>();
      return m;
    }
    case Family::kGboost: {
      GboostModel m;
      m.base = j.at("base").get<double>();
      m.learning_rate = j.at("learning_rate").get<double>();
      for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
      m.train_rmse = j.at("train_rmse").get<std::vector<double>>();
      return m;
    }
    case Family::kMlp: {
      MlpModel m;
      m.activation = parse_activation(j.at("activation").get<std::string>());
      for (const auto& w : j.at("weights")) m.weights.push_back(matrix_from(w));
      for (const auto& b : j.at("biases")) m.biases.push_back(vector_from(b));
      m.loss_history = j.at("loss_history").get<std::vector<double>>();
      require(!m.weights.empty() && m.weights.size() == m.biases.size(), ErrorCode::kParse,
              "MLP layer lists are inconsistent");
      return m;
    }
  }
  throw Error(ErrorCode::kParse, "unknown model family");
}

}  // namespace

RidgeParams ridge_params(const HyperparameterSet& hp) {
  RidgeParams p;
  p.alpha = hp.get_double("alpha", p.alpha);
  p.fit_intercept = hp.get_bool("fit_intercept", p.fit_intercept);
  p.solver = parse_ridge_solver(hp.get_string("solver", "svd"));
  return p;
}

TreeParams tree_params(const HyperparameterSet& hp) {
  TreeParams p;
  p.max_depth = static_cast<int>(hp.get_int("max_depth", p.max_depth));
  p.min_samples_split = static_cast<int>(hp.get_int("min_samples_split", p.min_samples_split));
  p.min_samples_leaf = static_cast<int>(hp.get_int("min_samples_leaf", p.min_samples_leaf));
  return p;
}

ForestParams forest_params(const HyperparameterSet& hp) {
  ForestParams p;
  p.tree = tree_params(hp);
  p.n_estimators = static_cast<int>(hp.get_int("n_estimators", p.n_estimators));
  return p;
}

SvrParams svr_params(const HyperparameterSet& hp, double tol) {
  SvrParams p;
  p.C = hp.get_double("C", p.C);
  p.gamma = hp.get_double("gamma", p.gamma);
  p.kernel = parse_kernel(hp.get_string("kernel", "rbf"));
  p.tol = tol;
  return p;
}

GboostParams gboost_params(const HyperparameterSet& hp) {
  GboostParams p;
  p.learning_rate = hp.get_double("learning_rate", p.learning_rate);
  p.max_depth = static_cast<int>(hp.get_int("max_depth", p.max_depth));
  p.subsample = hp.get_double("subsample", p.subsample);
  p.colsample_bytree = hp.get_double("colsample_bytree", p.colsample_bytree);
  p.n_estimators = static_cast<int>(hp.get_int("n_estimators", p.n_estimators));
  return p;
}

MlpParams mlp_params(const HyperparameterSet& hp, int epochs) {
  MlpParams p;
  const auto layers = hp.get_int("hidden_layers", 1);
  const auto units = hp.get_int("hidden_units", 50);
  require(layers >= 1 && layers <= 3, ErrorCode::kInvalidSpec, "hidden_layers must be 1..3");
  p.hidden.assign(static_cast<std::size_t>(layers), static_cast<int>(units));
  p.activation = parse_activation(hp.get_string("activation", "relu"));
  p.solver = parse_mlp_solver(hp.get_string("solver", "adam"));
  p.alpha = hp.get_double("alpha", p.alpha);
  p.epochs = epochs;
  return p;
}

Eigen::VectorXd FittedModel::predict(const Eigen::MatrixXd& X) const {
  require(X.cols() == n_features, ErrorCode::kShapeMismatch,
          "model expects " + std::to_string(n_features) + " features, got " +
              std::to_string(X.cols()));
  require(X.allFinite(), ErrorCode::kInvalidArgument, "prediction inputs must be finite");
  const Eigen::MatrixXd Z = scaler ? scaler->transform(X) : X;
  Eigen::VectorXd out = std::visit([&Z](const auto& m) { return m.predict(Z); }, learned);
  if (hp.family == Family::kMlp) out = (out.array() * target_scale + target_mean).matrix();
  return out;
}

FittedModel fit_model(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const HyperparameterSet& hp, const FitOptions& opts) {
  validate(hp, false);
  require(X.rows() > 0 && X.cols() > 0, ErrorCode::kEmptyInput, "no training data");
  require(X.rows() == y.size(), ErrorCode::kShapeMismatch, "X rows and y length differ");
  FittedModel fm;
  fm.hp = hp;
  fm.seed = opts.seed;
  fm.n_features = static_cast<int>(X.cols());
  switch (hp.family) {
    case Family::kRidge: {
      RidgeParams p = ridge_params(hp);
      p.seed = opts.seed;
      fm.scaler = Standardizer::fit(X);
      fm.learned = fit_ridge(fm.scaler->transform(X), y, p);
      break;
    }
    case Family::kTree:
      fm.learned = fit_tree(X, y, tree_params(hp));
      break;
    case Family::kForest:
      fm.learned = fit_forest(X, y, forest_params(hp), opts.seed, opts.threads);
      break;
    case Family::kSvr: {
      fm.scaler = Standardizer::fit(X);
      fm.learned = fit_svr(fm.scaler->transform(X), y, svr_params(hp, opts.svr_tol));
      break;
    }
    case Family::kGboost:
      fm.learned = fit_gboost(X, y, gboost_params(hp), opts.seed);
      break;
    case Family::kMlp: {
      fm.scaler = Standardizer::fit(X);
      fm.target_mean = y.mean();
      const double sd = std::sqrt((y.array() - fm.target_mean).square().mean());
      fm.target_scale = sd > 1e-12 ? sd : 1.0;
      const Eigen::VectorXd yz = ((y.array() - fm.target_mean) / fm.target_scale).matrix();
      fm.learned = fit_mlp(fm.scaler->transform(X), yz, mlp_params(hp, opts.mlp_epochs), opts.seed);
      break;
    }
  }
  return fm;
}

nlohmann::json to_json(const FittedModel& m) {
  nlohmann::json j;
  j["format"] = "fcpred-model";
  j["version"] = kFormatVersion;
  j["family"] = std::string(to_string(m.hp.family));
  j["hyperparameters"] = to_json(m.hp);
  j["seed"] = m.seed;
  j["n_features"] = m.n_features;
  j["standardizer"] = m.scaler ? to_json(*m.scaler) : nlohmann::json(nullptr);
  j["target_mean"] = m.target_mean;
  j["target_scale"] = m.target_scale;
  j["learned"] = learned_json(m.learned);
  return j;
}

FittedModel model_from_json(const nlohmann::json& j) {
  try {
    require(j.at("format").get<std::string>() == "fcpred-model", ErrorCode::kParse,
            "not a model file");
    require(j.at("version").get<int>() == kFormatVersion, ErrorCode::kParse,
            "unsupported model format version");
    FittedModel m;
    m.hp = hyperparameters_from_json(j.at("hyperparameters"));
    m.seed = j.at("seed").get<std::uint64_t>();
    m.n_features = j.at("n_features").get<int>();
    if (!j.at("standardizer").is_null()) m.scaler = standardizer_from_json(j.at("standardizer"));
    m.target_mean = j.at("target_mean").get<double>();
    m.target_scale = j.at("target_scale").get<double>();
    m.learned = learned_from(m.hp.family, j.at("learned"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed model JSON: ") + e.what());
  }
}

}  // namespace fcpred::ml
