#include "fcpred/shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <numeric>
#include <sstream>

#include "fcpred/error.hpp"
#include "fcpred/io_util.hpp"
#include "fcpred/parallel.hpp"
#include "fcpred/random.hpp"

namespace fcpred {
namespace {

constexpr Eigen::Index kMaxBatchRows = 1 << 14;

using Mask = std::vector<char>;

// Mean prediction per coalition. mask[k] refers to features[k]; every
// feature not listed in `features` is taken from the instance.
std::vector<double> coalition_values(const PredictFn& f, const Eigen::RowVectorXd& instance,
                                     const Eigen::MatrixXd& background,
                                     const std::vector<int>& features,
                                     const std::vector<Mask>& masks) {
  const Eigen::Index nb = background.rows();
  const Eigen::Index p = background.cols();
  std::vector<double> out(masks.size(), 0.0);
  // Template row: instance values everywhere except the coalition features,
  // which are refilled per mask.
  const std::size_t per_batch =
      std::max<std::size_t>(1, static_cast<std::size_t>(kMaxBatchRows / std::max<Eigen::Index>(nb, 1)));
  for (std::size_t start = 0; start < masks.size(); start += per_batch) {
    const std::size_t stop = std::min(masks.size(), start + per_batch);
    Eigen::MatrixXd batch(static_cast<Eigen::Index>(stop - start) * nb, p);
    for (std::size_t m = start; m < stop; ++m) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(m - start) * nb;
      batch.middleRows(r0, nb).rowwise() = instance;
      for (std::size_t k = 0; k < features.size(); ++k) {
        if (!masks[m][k]) batch.block(r0, features[k], nb, 1) = background.col(features[k]);
      }
    }
    const Eigen::VectorXd pred = f(batch);
    require(pred.size() == batch.rows(), ErrorCode::kShapeMismatch,
            "prediction function returned the wrong number of outputs");
    for (std::size_t m = start; m < stop; ++m) {
      out[m] = pred.segment(static_cast<Eigen::Index>(m - start) * nb, nb).mean();
    }
  }
  return out;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void check_inputs(const Eigen::RowVectorXd& instance, const Eigen::MatrixXd& background) {
  require(instance.size() > 0, ErrorCode::kEmptyInput, "instance has no features");
  require(background.rows() > 0, ErrorCode::kEmptyInput, "background is empty");
  require(background.cols() == instance.size(), ErrorCode::kShapeMismatch,
          "background and instance feature counts differ");
}

}  // namespace

Eigen::VectorXd exact_shapley(const PredictFn& f, const Eigen::RowVectorXd& instance,
                              const Eigen::MatrixXd& background, const std::vector<int>& subset) {
  check_inputs(instance, background);
  const int m = static_cast<int>(subset.size());
  require(m <= kMaxExactFeatures, ErrorCode::kInvalidArgument,
          "exact enumeration supports at most 12 features, got " + std::to_string(m));
  for (int j : subset) {
    require(j >= 0 && j < instance.size(), ErrorCode::kRange, "feature index out of range");
  }
  if (m == 0) return {};
  const std::size_t n_masks = std::size_t{1} << m;
  std::vector<Mask> masks(n_masks, Mask(static_cast<std::size_t>(m)));
  for (std::size_t s = 0; s < n_masks; ++s) {
    for (int k = 0; k < m; ++k) masks[s][k] = static_cast<char>((s >> k) & 1U);
  }
  const std::vector<double> v = coalition_values(f, instance, background, subset, masks);

  std::vector<double> weight(static_cast<std::size_t>(m));
  for (int s = 0; s < m; ++s) weight[s] = 1.0 / (m * binomial(m - 1, s));
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(m);
  for (std::size_t s = 0; s < n_masks; ++s) {
    const int size = std::popcount(s);
    for (int i = 0; i < m; ++i) {
      if ((s >> i) & 1U) continue;
      phi(i) += weight[size] * (v[s | (std::size_t{1} << i)] - v[s]);
    }
  }
  return phi;
}

KernelShapResult kernel_shap(const PredictFn& f, const Eigen::RowVectorXd& instance,
                             const Eigen::MatrixXd& background, int nsamples, std::uint64_t seed) {
  check_inputs(instance, background);
  const int p = static_cast<int>(instance.size());
  require(nsamples >= 2 * p + 2, ErrorCode::kInvalidArgument,
          "nsamples must be at least 2p + 2 = " + std::to_string(2 * p + 2));

  KernelShapResult res;
  res.values = Eigen::VectorXd::Zero(p);
  res.base_value = f(background).mean();
  res.prediction = f(instance)(0);

  std::vector<int> varying;
  for (int j = 0; j < p; ++j) {
    if ((background.col(j).array() != instance(j)).any()) varying.push_back(j);
  }
  const int M = static_cast<int>(varying.size());
  const double total = res.prediction - res.base_value;
  if (M == 0) return res;
  if (M == 1) {
    res.values(varying[0]) = total;
    return res;
  }
  if (M <= 30) nsamples = static_cast<int>(std::min<long long>(nsamples, (1LL << M) - 2));

  std::vector<Mask> masks;
  std::vector<double> weights;
  std::map<Mask, std::size_t> seen;
  auto add = [&](Mask mask, double w) {
    seen.emplace(mask, masks.size());
    masks.push_back(std::move(mask));
    weights.push_back(w);
  };

  const int n_sizes = M / 2;  // ceil((M - 1) / 2)
  const int n_paired = (M - 1) / 2;
  std::vector<double> wv(static_cast<std::size_t>(n_sizes));
  for (int s = 1; s <= n_sizes; ++s) {
    wv[s - 1] = (M - 1.0) / (s * static_cast<double>(M - s));
    if (s <= n_paired) wv[s - 1] *= 2.0;
  }
  const double wsum = std::accumulate(wv.begin(), wv.end(), 0.0);
  for (double& w : wv) w /= wsum;

  std::vector<double> remaining = wv;
  int n_full = 0;
  double left = nsamples;
  for (int s = 1; s <= n_sizes; ++s) {
    const bool paired = s <= n_paired;
    const double n_subsets = binomial(M, s) * (paired ? 2.0 : 1.0);
    if (left * remaining[s - 1] / n_subsets < 1.0 - 1e-8) break;
    ++n_full;
    left -= n_subsets;
    if (remaining[s - 1] < 1.0) {
      const double scale = 1.0 - remaining[s - 1];
      for (double& r : remaining) r /= scale;
    }
    double w = wv[s - 1] / binomial(M, s);
    if (paired) w /= 2.0;
    std::vector<int> comb(static_cast<std::size_t>(s));
    std::iota(comb.begin(), comb.end(), 0);
    while (true) {
      Mask mask(static_cast<std::size_t>(M), 0);
      for (int c : comb) mask[c] = 1;
      if (paired) {
        Mask inv(mask);
        for (auto& b : inv) b = static_cast<char>(!b);
        add(std::move(mask), w);
        add(std::move(inv), w);
      } else {
        add(std::move(mask), w);
      }
      int i = s - 1;
      while (i >= 0 && comb[i] == M - s + i) --i;
      if (i < 0) break;
      ++comb[i];
      for (int k = i + 1; k < s; ++k) comb[k] = comb[k - 1] + 1;
    }
  }

  const std::size_t n_fixed = masks.size();
  int samples_left = nsamples - static_cast<int>(n_fixed);
  if (n_full != n_sizes && samples_left > 0) {
    std::vector<double> rw(wv.begin() + n_full, wv.end());
    for (int s = n_full + 1; s <= n_paired; ++s) rw[s - n_full - 1] /= 2.0;
    const double rs = std::accumulate(rw.begin(), rw.end(), 0.0);
    std::vector<double> cdf(rw.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < rw.size(); ++i) cdf[i] = (acc += rw[i] / rs);

    Rng rng(seed);
    std::vector<int> perm(static_cast<std::size_t>(M));
    auto record = [&](Mask mask) {
      auto it = seen.find(mask);
      if (it != seen.end()) {
        weights[it->second] += 1.0;
      } else {
        add(std::move(mask), 1.0);
        --samples_left;
      }
    };
    for (int draw = 0; draw < 4 * (nsamples - static_cast<int>(n_fixed)) && samples_left > 0;
         ++draw) {
      const double u = rng.uniform();
      const auto ind = static_cast<int>(std::min<std::size_t>(
          std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(), cdf.size() - 1));
      const int s = ind + n_full + 1;
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(std::span<int>(perm));
      Mask mask(static_cast<std::size_t>(M), 0);
      for (int k = 0; k < s; ++k) mask[perm[k]] = 1;
      Mask inv(mask);
      for (auto& b : inv) b = static_cast<char>(!b);
      record(std::move(mask));
      if (samples_left > 0 && s <= n_paired) record(std::move(inv));
    }
    const double weight_left = std::accumulate(wv.begin() + n_full, wv.end(), 0.0);
    const double sampled = std::accumulate(weights.begin() + static_cast<long>(n_fixed),
                                           weights.end(), 0.0);
    if (sampled > 0.0) {
      for (std::size_t i = n_fixed; i < weights.size(); ++i) weights[i] *= weight_left / sampled;
    }
  }
  res.coalitions = static_cast<int>(masks.size());

  const std::vector<double> v = coalition_values(f, instance, background, varying, masks);
  const auto rows = static_cast<Eigen::Index>(masks.size());
  Eigen::MatrixXd A(rows, M - 1);
  Eigen::VectorXd b(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double sw = std::sqrt(weights[r]);
    const double last = masks[r][M - 1];
    for (int k = 0; k < M - 1; ++k) A(r, k) = sw * (masks[r][k] - last);
    b(r) = sw * (v[r] - res.base_value - last * total);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  require(qr.rank() == M - 1, ErrorCode::kSingularFit,
          "kernel SHAP regression is rank deficient; increase nsamples");
  const Eigen::VectorXd w = qr.solve(b);
  for (int k = 0; k < M - 1; ++k) res.values(varying[k]) = w(k);
  res.values(varying[M - 1]) = total - w.sum();
  return res;
}

std::vector<int> background_rows(const Eigen::VectorXd& y, int cap) {
  require(cap >= 1, ErrorCode::kInvalidSpec, "background cap must be >= 1");
  const int n = static_cast<int>(y.size());
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  if (n <= cap) return idx;
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return y(a) < y(b); });
  std::vector<int> out;
  for (int i = 0; i < cap; ++i) {
    out.push_back(idx[static_cast<std::size_t>(std::floor((i + 0.5) * n / cap))]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string matrix_fingerprint(const Eigen::MatrixXd& M) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const std::int64_t shape[2] = {M.rows(), M.cols()};
  mix(shape, sizeof shape);
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      const double v = M(r, c);
      mix(&v, sizeof v);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ShapExplanation explain(const PredictFn& f, const Eigen::MatrixXd& instances,
                        const Eigen::MatrixXd& background, const ShapOptions& options) {
  require(instances.rows() > 0, ErrorCode::kEmptyInput, "no instances to explain");
  ShapExplanation e;
  e.instances = instances;
  e.values.resize(instances.rows(), instances.cols());
  e.predictions.resize(instances.rows());
  e.background_ref = matrix_fingerprint(background);
  e.background_rows = static_cast<int>(background.rows());
  e.nsamples = options.nsamples;
  e.seed = options.seed;
  e.base_value = f(background).mean();
  parallel_for(static_cast<int>(instances.rows()), options.threads, [&](int i) {
    const KernelShapResult r = kernel_shap(f, instances.row(i), background, options.nsamples,
                                           derive_seed(options.seed, static_cast<std::uint64_t>(i)));
    e.values.row(i) = r.values.transpose();
    e.predictions(i) = r.prediction;
  });
  return e;
}

std::vector<ShapSummaryRow> shap_summary(const ShapExplanation& e, const FeatureMeta& meta) {
  require(e.values.rows() > 0 && e.values.cols() > 0, ErrorCode::kEmptyInput,
          "explanation is empty");
  const Eigen::VectorXd mean_abs = e.values.cwiseAbs().colwise().mean().transpose();
  std::vector<int> order(static_cast<std::size_t>(mean_abs.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return mean_abs(a) > mean_abs(b); });
  const bool labeled = meta.size() == static_cast<std::size_t>(mean_abs.size());
  std::vector<ShapSummaryRow> rows;
  for (std::size_t r = 0; r < order.size(); ++r) {
    ShapSummaryRow row;
    row.rank = static_cast<int>(r) + 1;
    row.feature_index = order[r];
    row.mean_abs = mean_abs(order[r]);
    if (labeled) {
      const auto [a, b] = meta.index_map[static_cast<std::size_t>(order[r])];
      row.roi_a = meta.roi_labels[static_cast<std::size_t>(a)];
      row.roi_b = meta.roi_labels[static_cast<std::size_t>(b)];
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string summary_csv(const std::vector<ShapSummaryRow>& rows) {
  std::ostringstream out;
  out << "rank,feature_index,roi_a,roi_b,mean_abs_shap\n";
  for (const auto& r : rows) {
    out << r.rank << ',' << r.feature_index << ',' << r.roi_a << ',' << r.roi_b << ','
        << io::format_double(r.mean_abs) << '\n';
  }
  return out.str();
}

std::string points_csv(const ShapExplanation& e) {
  std::ostringstream out;
  out << "instance,feature_index,shap_value,feature_value\n";
  for (Eigen::Index i = 0; i < e.values.rows(); ++i) {
    const std::string id = i < static_cast<Eigen::Index>(e.instance_ids.size())
                               ? e.instance_ids[static_cast<std::size_t>(i)]
                               : std::to_string(i);
    for (Eigen::Index j = 0; j < e.values.cols(); ++j) {
      out << id << ',' << j << ',' << io::format_double(e.values(i, j)) << ','
          << io::format_double(e.instances(i, j)) << '\n';
    }
  }
  return out.str();
}

namespace {

nlohmann::json rows_json(const Eigen::MatrixXd& M) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    out.push_back(std::vector<double>(M.cols()));
    for (Eigen::Index c = 0; c < M.cols(); ++c) out.back()[static_cast<std::size_t>(c)] = M(r, c);
  }
  return out;
}

Eigen::MatrixXd rows_from(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = j.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
    require(static_cast<Eigen::Index>(row.size()) == cols, ErrorCode::kParse, "ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = row[static_cast<std::size_t>(c)];
  }
  return M;
}

}  // namespace

nlohmann::json to_json(const ShapExplanation& e) {
  nlohmann::json j;
  j["base_value"] = e.base_value;
  j["values"] = rows_json(e.values);
  j["instances"] = rows_json(e.instances);
  j["predictions"] = std::vector<double>(e.predictions.data(),
                                         e.predictions.data() + e.predictions.size());
  j["instance_ids"] = e.instance_ids;
  j["background_ref"] = e.background_ref;
  j["background_rows"] = e.background_rows;
  j["nsamples"] = e.nsamples;
  j["seed"] = e.seed;
  return j;
}

ShapExplanation explanation_from_json(const nlohmann::json& j) {
  try {
    ShapExplanation e;
    e.base_value = j.at("base_value").get<double>();
    e.values = rows_from(j.at("values"));
    e.instances = rows_from(j.at("instances"));
    const auto pred = j.at("predictions").get<std::vector<double>>();
    e.predictions = Eigen::Map<const Eigen::VectorXd>(pred.data(), static_cast<Eigen::Index>(pred.size()));
    e.instance_ids = j.at("instance_ids").get<std::vector<std::string>>();
    e.background_ref = j.at("background_ref").get<std::string>();
    e.background_rows = j.at("background_rows").get<int>();
    e.nsamples = j.at("nsamples").get<int>();
    e.seed = j.at("seed").get<std::uint64_t>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("malformed explanation JSON: ") + ex.what());
  }
}

}  // namespace fcpred
