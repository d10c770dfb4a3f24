#include "fcpred/pipeline/config.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "fcpred/error.hpp"
#include "fcpred/io_util.hpp"

namespace fcpred::pipeline {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kInvalidSpec, "config '" + path + "': " + what);
}

// Walks one JSON object, remembering which keys were consumed so leftovers
// can be reported as typos.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) bad(at(key), "expected a number");
      out = v->get<double>();
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) bad(at(key), "expected an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->is_number_unsigned()) {
          out = v->get<Int>();
        } else {
          if (v->get<long long>() < 0) bad(at(key), "expected a non-negative integer");
          out = static_cast<Int>(v->get<long long>());
        }
      } else {
        out = static_cast<Int>(v->get<long long>());
      }
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) bad(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) bad(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) bad(at(k), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::pair<double, double> read_window(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    bad(path, "expected [start, end]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

std::optional<std::pair<double, double>> read_optional_window(Reader& r, const std::string& key,
                                                              bool allow_named) {
  const json* v = r.find(key);
  if (!v || v->is_null()) return std::nullopt;
  if (allow_named && v->is_string()) {
    try {
      return named_band(v->get<std::string>());
    } catch (const Error& e) {
      bad(r.at(key), e.what());
    }
  }
  return read_window(*v, r.at(key));
}

std::vector<std::pair<int, int>> read_positions(const json& v, const std::string& path) {
  if (!v.is_array()) bad(path, "expected a list of [row, col] pairs");
  std::vector<std::pair<int, int>> out;
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer()) {
      bad(path, "expected a list of [row, col] pairs");
    }
    out.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return out;
}

std::vector<double> read_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) bad(path, "expected a list of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) bad(path, "expected a list of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::string> read_strings(const json& v, const std::string& path) {
  if (!v.is_array()) bad(path, "expected a list of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) bad(path, "expected a list of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

template <typename F>
auto rethrow_as_spec(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    bad(path, e.what());
  }
}

FilterSpec read_filter(const json& j, const std::string& path) {
  Reader r(j, path);
  std::string kind = "bandpass";
  r.string("kind", kind);
  FilterSpec f;
  if (kind == "bandpass") {
    f.kind = FilterSpec::Kind::kBandpass;
    r.number("low_hz", f.low_hz);
    r.number("high_hz", f.high_hz);
    r.integer("order", f.order);
  } else if (kind == "notch") {
    f = FilterSpec::notch(50.0, 2.0);
    r.number("center_hz", f.center_hz);
    r.number("bandwidth_hz", f.bandwidth_hz);
  } else {
    bad(r.at("kind"), "expected 'bandpass' or 'notch'");
  }
  r.boolean("zero_phase", f.zero_phase);
  r.finish();
  if (f.kind == FilterSpec::Kind::kBandpass &&
      !(f.low_hz > 0.0 && f.high_hz > f.low_hz && f.order >= 1 && f.order <= 12)) {
    bad(path, "bandpass needs 0 < low_hz < high_hz and 1 <= order <= 12");
  }
  if (f.kind == FilterSpec::Kind::kNotch && !(f.center_hz > 0.0 && f.bandwidth_hz > 0.0)) {
    bad(path, "notch needs center_hz > 0 and bandwidth_hz > 0");
  }
  return f;
}

json filter_json(const FilterSpec& f) {
  if (f.kind == FilterSpec::Kind::kBandpass) {
    return {{"kind", "bandpass"}, {"low_hz", f.low_hz}, {"high_hz", f.high_hz},
            {"order", f.order}, {"zero_phase", f.zero_phase}};
  }
  return {{"kind", "notch"}, {"center_hz", f.center_hz}, {"bandwidth_hz", f.bandwidth_hz},
          {"zero_phase", f.zero_phase}};
}

json window_json(const std::optional<std::pair<double, double>>& w) {
  if (!w) return nullptr;
  return json::array({w->first, w->second});
}

json positions_json(const std::vector<std::pair<int, int>>& p) {
  json out = json::array();
  for (const auto& [a, b] : p) out.push_back({a, b});
  return out;
}

void read_inputs(const json& j, const fs::path& base, InputsConfig& in) {
  Reader r(j, "inputs");
  auto path = [&](const char* key, std::optional<fs::path>& out) {
    const json* v = r.find(key);
    if (!v || v->is_null()) return;
    std::string s;
    r.string(key, s);
    if (!s.empty()) out = fs::path(s).is_absolute() ? fs::path(s) : base / s;
  };
  path("recordings", in.recordings);
  path("matrices", in.matrices);
  path("targets", in.targets);
  path("dataset", in.dataset);
  path("model", in.model);
  r.finish();
}

void read_preprocess(const json& j, PreprocessConfig& p) {
  Reader r(j, "preprocess");
  if (const json* v = r.find("filters")) {
    if (!v->is_array()) bad("preprocess.filters", "expected a list");
    p.filters.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      p.filters.push_back(read_filter((*v)[i], "preprocess.filters[" + std::to_string(i) + "]"));
    }
  }
  if (const json* v = r.find("reference")) p.reference = read_strings(*v, r.at("reference"));
  if (r.find("baseline_s")) p.baseline_s = read_optional_window(r, "baseline_s", false);
  if (r.find("epoch_s")) p.epoch_s = read_optional_window(r, "epoch_s", false);
  r.finish();
  for (const auto* w : {&p.baseline_s, &p.epoch_s}) {
    if (*w && !((*w)->first >= 0.0 && (*w)->second > (*w)->first)) {
      bad("preprocess", "windows need 0 <= start < end");
    }
  }
}

void read_connect(const json& j, ConnectConfig& c) {
  Reader r(j, "connect");
  std::string metric(to_string(c.metric));
  r.string("metric", metric);
  c.metric = rethrow_as_spec("connect.metric", [&] { return parse_metric(metric); });
  if (c.metric == Metric::kPli) c.band_hz.reset();
  if (r.find("band_hz")) c.band_hz = read_optional_window(r, "band_hz", true);
  r.number("freq_step_hz", c.freq_step_hz);
  std::string policy(to_string(c.order_policy));
  r.string("order_policy", policy);
  if (policy == "fixed") {
    c.order_policy = OrderPolicy::kFixed;
  } else if (policy == "aic") {
    c.order_policy = OrderPolicy::kAic;
  } else if (policy == "bic") {
    c.order_policy = OrderPolicy::kBic;
  } else {
    bad("connect.order_policy", "expected fixed, aic or bic");
  }
  r.integer("order", c.order);
  r.integer("max_order", c.max_order);
  r.number("pli_edge_trim", c.pli_edge_trim);
  r.finish();
  if (c.metric == Metric::kDtf && !c.band_hz) bad("connect.band_hz", "DTF needs a band");
  if (c.band_hz && !(c.band_hz->first > 0.0 && c.band_hz->second >= c.band_hz->first)) {
    bad("connect.band_hz", "expected 0 < low <= high");
  }
  if (!(c.freq_step_hz > 0.0)) bad("connect.freq_step_hz", "must be > 0");
  if (c.order < 1 || c.max_order < 1) bad("connect", "MVAR orders must be >= 1");
  if (!(c.pli_edge_trim >= 0.0 && c.pli_edge_trim < 0.5)) {
    bad("connect.pli_edge_trim", "must lie in [0, 0.5)");
  }
}

void read_train(const json& j, TrainConfig& t) {
  Reader r(j, "train");
  if (const json* v = r.find("families")) {
    t.families.clear();
    for (const auto& name : read_strings(*v, "train.families")) {
      const ml::Family f = rethrow_as_spec("train.families", [&] { return ml::parse_family(name); });
      if (std::find(t.families.begin(), t.families.end(), f) != t.families.end()) {
        bad("train.families", "family '" + name + "' listed twice");
      }
      t.families.push_back(f);
    }
    if (t.families.empty()) bad("train.families", "at least one family is required");
  }
  r.boolean("full_grids", t.full_grids);
  if (const json* v = r.find("grids")) {
    if (!v->is_object()) bad("train.grids", "expected an object keyed by family");
    for (const auto& [name, axes] : v->items()) {
      const ml::Family f =
          rethrow_as_spec("train.grids." + name, [&] { return ml::parse_family(name); });
      // Parse now so a bad grid fails validation rather than training.
      rethrow_as_spec("train.grids." + name, [&] {
        for (const auto& [param, values] : grid_from_json(f, axes).axes) {
          for (const auto& v : values) ml::validate(ml::HyperparameterSet{f, {{param, v}}});
        }
        return 0;
      });
      t.grids[f] = axes;
    }
  }
  r.integer("k", t.k);
  r.integer("repeats", t.repeats);
  if (const json* v = r.find("cv_seed"); v && !v->is_null()) {
    std::uint64_t s = 0;
    r.integer("cv_seed", s);
    t.cv_seed = s;
  }
  r.integer("mlp_epochs", t.mlp_epochs);
  r.number("svr_tol", t.svr_tol);
  r.finish();
  if (t.k < 2) bad("train.k", "must be >= 2");
  if (t.repeats < 1) bad("train.repeats", "must be >= 1");
  if (t.mlp_epochs < 1) bad("train.mlp_epochs", "must be >= 1");
  if (!(t.svr_tol > 0.0)) bad("train.svr_tol", "must be > 0");
}

void read_explain(const json& j, ExplainConfig& e) {
  Reader r(j, "explain");
  r.integer("nsamples", e.nsamples);
  r.integer("background_cap", e.background_cap);
  if (const json* v = r.find("family"); v && !v->is_null()) {
    std::string name;
    r.string("family", name);
    e.family = rethrow_as_spec("explain.family", [&] { return ml::parse_family(name); });
  }
  r.finish();
  if (e.nsamples < 4) bad("explain.nsamples", "must be >= 4");
  if (e.background_cap < 1) bad("explain.background_cap", "must be >= 1");
}

void read_cohort(const json& j, PlantedCohort& c) {
  Reader r(j, "synth.cohort");
  r.integer("n_subjects", c.n_subjects);
  r.integer("rois", c.rois);
  std::string metric(to_string(c.metric));
  r.string("metric", metric);
  c.metric = rethrow_as_spec("synth.cohort.metric", [&] { return parse_metric(metric); });
  if (const json* v = r.find("informative")) c.informative = read_positions(*v, r.at("informative"));
  if (const json* v = r.find("effects")) c.effects = read_numbers(*v, r.at("effects"));
  r.number("noise", c.noise);
  r.number("target_offset", c.target_offset);
  r.number("target_gain", c.target_gain);
  r.number("target_noise", c.target_noise);
  r.finish();
  rethrow_as_spec("synth.cohort", [&] {
    c.validate();
    return 0;
  });
}

void read_recordings(const json& j, RecordingCohortSpec& s) {
  Reader r(j, "synth.recordings");
  r.integer("n_subjects", s.n_subjects);
  r.integer("channels", s.channels);
  r.integer("order", s.order);
  r.integer("n_samples", s.n_samples);
  r.number("rate_hz", s.rate_hz);
  if (const json* v = r.find("informative")) s.informative = read_positions(*v, r.at("informative"));
  if (const json* v = r.find("effects")) s.effects = read_numbers(*v, r.at("effects"));
  r.number("target_offset", s.target_offset);
  r.number("target_gain", s.target_gain);
  r.number("target_noise", s.target_noise);
  r.finish();
  if (s.n_subjects < 2 || s.channels < 2 || s.order < 1 || !(s.rate_hz > 0.0) ||
      s.n_samples <= 100L * s.order || s.informative.size() != s.effects.size()) {
    bad("synth.recordings", "needs n_subjects >= 2, channels >= 2, order >= 1, rate_hz > 0, "
                            "n_samples > 100 * order and one effect per informative position");
  }
}

void read_mvar(const json& j, MvarSynthConfig& m) {
  Reader r(j, "synth.mvar");
  r.integer("channels", m.channels);
  r.integer("order", m.order);
  r.number("radius", m.radius);
  r.integer("n_samples", m.n_samples);
  r.number("rate_hz", m.rate_hz);
  r.finish();
  if (m.channels < 1 || m.order < 1 || !(m.rate_hz > 0.0) || m.n_samples <= 100L * m.order) {
    bad("synth.mvar", "needs channels >= 1, order >= 1, rate_hz > 0, n_samples > 100 * order");
  }
  if (!(m.radius > 0.0 && m.radius < 1.0)) {
    throw Error(ErrorCode::kUnstable, "config 'synth.mvar.radius': a spectral radius of " +
                                          io::format_double(m.radius) +
                                          " gives an unstable system; it must lie in (0, 1)");
  }
}

void read_synth(const json& j, SynthConfig& s) {
  Reader r(j, "synth");
  std::string kind(to_string(s.kind));
  r.string("kind", kind);
  if (kind == "cohort") {
    s.kind = SynthKind::kCohort;
  } else if (kind == "recordings") {
    s.kind = SynthKind::kRecordings;
  } else if (kind == "mvar") {
    s.kind = SynthKind::kMvar;
  } else {
    bad("synth.kind", "expected cohort, recordings or mvar");
  }
  if (const json* v = r.find("cohort")) read_cohort(*v, s.cohort);
  if (const json* v = r.find("recordings")) read_recordings(*v, s.recordings);
  if (const json* v = r.find("mvar")) read_mvar(*v, s.mvar);
  r.finish();
}

}  // namespace

std::string_view to_string(OrderPolicy p) {
  switch (p) {
    case OrderPolicy::kFixed: return "fixed";
    case OrderPolicy::kAic: return "aic";
    case OrderPolicy::kBic: return "bic";
  }
  return "bic";
}

std::string_view to_string(SynthKind k) {
  switch (k) {
    case SynthKind::kCohort: return "cohort";
    case SynthKind::kRecordings: return "recordings";
    case SynthKind::kMvar: return "mvar";
  }
  return "cohort";
}

PipelineConfig parse_config(const json& j, const fs::path& base_dir) {
  PipelineConfig c;
  c.base_dir = base_dir;
  Reader r(j, "");
  r.integer("seed", c.seed);
  std::string out = c.out.string();
  r.string("out", out);
  c.out = fs::path(out).is_absolute() ? fs::path(out) : base_dir / out;
  r.integer("threads", c.threads);
  if (c.threads < 1) bad("threads", "must be >= 1");
  if (const json* v = r.find("inputs")) read_inputs(*v, base_dir, c.inputs);
  if (const json* v = r.find("preprocess")) read_preprocess(*v, c.preprocess);
  if (const json* v = r.find("connect")) read_connect(*v, c.connect);
  if (const json* v = r.find("features")) {
    Reader f(*v, "features");
    std::string mode(to_string(c.feature_mode));
    f.string("mode", mode);
    c.feature_mode = rethrow_as_spec("features.mode", [&] { return parse_diff_mode(mode); });
    f.finish();
  }
  if (const json* v = r.find("train")) read_train(*v, c.train);
  if (const json* v = r.find("explain")) read_explain(*v, c.explain);
  if (const json* v = r.find("synth")) read_synth(*v, c.synth);
  r.finish();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidSpec, "config '" + path.string() + "' is not valid JSON: " +
                                             e.what());
  }
  return parse_config(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

nlohmann::json hashed_view(const PipelineConfig& c) {
  json j;
  j["seed"] = c.seed;
  auto opt_path = [&](const std::optional<fs::path>& p) -> json {
    if (!p) return nullptr;
    return fs::relative(*p, c.base_dir).generic_string();
  };
  j["inputs"] = {{"recordings", opt_path(c.inputs.recordings)},
                 {"matrices", opt_path(c.inputs.matrices)},
                 {"targets", opt_path(c.inputs.targets)},
                 {"dataset", opt_path(c.inputs.dataset)},
                 {"model", opt_path(c.inputs.model)}};
  json filters = json::array();
  for (const auto& f : c.preprocess.filters) filters.push_back(filter_json(f));
  j["preprocess"] = {{"filters", filters},
                     {"reference", c.preprocess.reference},
                     {"baseline_s", window_json(c.preprocess.baseline_s)},
                     {"epoch_s", window_json(c.preprocess.epoch_s)}};
  j["connect"] = {{"metric", to_string(c.connect.metric)},
                  {"band_hz", window_json(c.connect.band_hz)},
                  {"freq_step_hz", c.connect.freq_step_hz},
                  {"order_policy", to_string(c.connect.order_policy)},
                  {"order", c.connect.order},
                  {"max_order", c.connect.max_order},
                  {"pli_edge_trim", c.connect.pli_edge_trim}};
  j["features"] = {{"mode", to_string(c.feature_mode)}};
  json families = json::array();
  for (ml::Family f : c.train.families) families.push_back(ml::to_string(f));
  json grids = json::object();
  for (const auto& [f, axes] : c.train.grids) grids[std::string(ml::to_string(f))] = axes;
  j["train"] = {{"families", families},
                {"full_grids", c.train.full_grids},
                {"grids", grids},
                {"k", c.train.k},
                {"repeats", c.train.repeats},
                {"cv_seed", c.train.cv_seed ? json(*c.train.cv_seed) : json(nullptr)},
                {"mlp_epochs", c.train.mlp_epochs},
                {"svr_tol", c.train.svr_tol}};
  j["explain"] = {{"nsamples", c.explain.nsamples},
                  {"background_cap", c.explain.background_cap},
                  {"family", c.explain.family ? json(ml::to_string(*c.explain.family))
                                              : json(nullptr)}};
  const auto& co = c.synth.cohort;
  const auto& re = c.synth.recordings;
  const auto& mv = c.synth.mvar;
  j["synth"] = {
      {"kind", to_string(c.synth.kind)},
      {"cohort",
       {{"n_subjects", co.n_subjects}, {"rois", co.rois}, {"metric", to_string(co.metric)},
        {"informative", positions_json(co.informative)}, {"effects", co.effects},
        {"noise", co.noise}, {"target_offset", co.target_offset},
        {"target_gain", co.target_gain}, {"target_noise", co.target_noise}}},
      {"recordings",
       {{"n_subjects", re.n_subjects}, {"channels", re.channels}, {"order", re.order},
        {"n_samples", re.n_samples}, {"rate_hz", re.rate_hz},
        {"informative", positions_json(re.informative)}, {"effects", re.effects},
        {"target_offset", re.target_offset}, {"target_gain", re.target_gain},
        {"target_noise", re.target_noise}}},
      {"mvar",
       {{"channels", mv.channels}, {"order", mv.order}, {"radius", mv.radius},
        {"n_samples", mv.n_samples}, {"rate_hz", mv.rate_hz}}}};
  return j;
}

nlohmann::json to_json(const PipelineConfig& c) {
  json j = hashed_view(c);
  j["out"] = fs::relative(c.out, c.base_dir).generic_string();
  j["threads"] = c.threads;
  return j;
}

const std::vector<KeyDoc>& key_docs() {
  static const std::vector<KeyDoc> docs = {
      {"seed", "Master seed. Every stage derives its own streams from it. Overridden by --seed."},
      {"out", "Run directory; each command writes into its own subdirectory. Overridden by --out."},
      {"threads", "Worker threads for grid search, forests and attribution. Results do not "
                  "depend on it. Overridden by --threads."},
      {"inputs.recordings", "Sessions CSV (subject_id, day1, day10) naming raw recording CSVs. "
                            "Default: synth/sessions.csv in the run directory."},
      {"inputs.matrices", "Matrices CSV (subject_id, day1, day10) naming connectivity JSON "
                          "files. Default: connect/matrices.csv, else synth/matrices.csv."},
      {"inputs.targets", "Targets CSV: subject_id plus either target or trace (path to a "
                         "cursor/target tracking CSV scored by targeting RMSE). Default: "
                         "synth/targets.csv."},
      {"inputs.dataset", "Feature dataset CSV. Default: features/dataset.csv."},
      {"inputs.model", "Fitted model JSON to explain. Default: the selected family's model "
                       "under train/."},
      {"preprocess.filters", "Filters applied in order. Bandpass: low_hz, high_hz, order "
                             "(Butterworth prototype). Notch: center_hz, bandwidth_hz. "
                             "zero_phase runs forward-backward."},
      {"preprocess.reference", "Channels whose mean becomes the new reference. Empty keeps "
                               "the recorded reference."},
      {"preprocess.baseline_s", "[start, end] seconds whose per-channel mean is subtracted. "
                                "null skips baseline correction."},
      {"preprocess.epoch_s", "[start, end] seconds kept after filtering. null keeps all."},
      {"connect.metric", "dtf or pli."},
      {"connect.band_hz", "[low, high] Hz or a band name (delta, theta, alpha, beta, gamma, "
                          "broadband). DTF averages over it; PLI bandpasses to it first. "
                          "Defaults to [1, 45] for DTF and null (broadband) for PLI."},
      {"connect.freq_step_hz", "DTF frequency grid spacing."},
      {"connect.order_policy", "MVAR order: fixed, aic or bic."},
      {"connect.order", "MVAR order for the fixed policy."},
      {"connect.max_order", "Largest order tried by aic/bic."},
      {"connect.pli_edge_trim", "Fraction of samples dropped at each end before averaging "
                                "phase-difference signs."},
      {"features.mode", "absolute (|day10 - day1|) or signed (day10 - day1)."},
      {"train.families", "Model families to search: ridge, tree, forest, svr, gboost, mlp."},
      {"train.full_grids", "Use the full literal hyperparameter grids instead of the "
                           "log-subsampled defaults. Much slower."},
      {"train.grids", "Per-family axis overrides, e.g. {\"ridge\": {\"alpha\": [0.1, 1]}}. "
                      "Axes not named keep their default values."},
      {"train.k", "Cross-validation folds."},
      {"train.repeats", "Cross-validation repeats, each with a fresh shuffle."},
      {"train.cv_seed", "Fold shuffling seed. null derives it from the master seed."},
      {"train.mlp_epochs", "Training epochs (or L-BFGS iterations) per MLP fit."},
      {"train.svr_tol", "Relative duality gap at which SVR training stops."},
      {"explain.nsamples", "Kernel SHAP coalition budget per explained row."},
      {"explain.background_cap", "Background rows, chosen evenly across the sorted target."},
      {"explain.family", "Family to explain. null picks the lowest validation RMSE."},
      {"synth.kind", "cohort (connectivity matrices), recordings (raw two-session signals) or "
                     "mvar (one recording from a random stable MVAR system)."},
      {"synth.cohort.n_subjects", "Subjects in the planted cohort."},
      {"synth.cohort.rois", "Matrix size."},
      {"synth.cohort.metric", "dtf (row-stochastic) or pli (symmetric) matrices."},
      {"synth.cohort.informative", "[row, col] positions that change between sessions."},
      {"synth.cohort.effects", "Mean change at each informative position."},
      {"synth.cohort.noise", "Std of the session-to-session change at every entry."},
      {"synth.cohort.target_offset", "Target intercept."},
      {"synth.cohort.target_gain", "Target decrease per unit of planted change."},
      {"synth.cohort.target_noise", "Std of Gaussian target noise."},
      {"synth.recordings.n_subjects", "Subjects with raw recordings."},
      {"synth.recordings.channels", "Channels per recording."},
      {"synth.recordings.order", "MVAR order of the simulated sources."},
      {"synth.recordings.n_samples", "Samples per session."},
      {"synth.recordings.rate_hz", "Sampling rate."},
      {"synth.recordings.informative", "[sink, source] lag-1 couplings added on day 10."},
      {"synth.recordings.effects", "Coupling strength at each informative position."},
      {"synth.recordings.target_offset", "Target intercept."},
      {"synth.recordings.target_gain", "Target decrease per unit of coupling."},
      {"synth.recordings.target_noise", "Std of Gaussian target noise."},
      {"synth.mvar.channels", "Channels."},
      {"synth.mvar.order", "Model order."},
      {"synth.mvar.radius", "Companion spectral radius, in (0, 1)."},
      {"synth.mvar.n_samples", "Samples written."},
      {"synth.mvar.rate_hz", "Sampling rate."},
  };
  return docs;
}

std::string defaults_markdown() {
  PipelineConfig c;
  c.base_dir = ".";
  c.out = "fcpred-run";
  const json full = to_json(c);
  std::ostringstream out;
  out << "# Configuration reference\n\n"
      << "Generated by `fcpred defaults`. A config file is one JSON object; every key is\n"
      << "optional and unknown keys are rejected. Relative paths resolve against the\n"
      << "directory holding the config file.\n\n"
      << "| Key | Default | Meaning |\n|---|---|---|\n";
  for (const KeyDoc& d : key_docs()) {
    const json::json_pointer ptr("/" + [&] {
      std::string s = d.key;
      std::replace(s.begin(), s.end(), '.', '/');
      return s;
    }());
    std::string value = full.contains(ptr) ? full.at(ptr).dump() : "";
    std::string cell;
    for (char ch : value) {
      if (ch == '|') cell += "\\";
      cell += ch;
    }
    out << "| `" << d.key << "` | `" << cell << "` | " << d.description << " |\n";
  }
  out << "\nFull default config:\n\n```json\n" << full.dump(2) << "\n```\n";
  return out.str();
}

}  // namespace fcpred::pipeline
