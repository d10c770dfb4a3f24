#include "fcpred/pipeline/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "fcpred/error.hpp"
#include "fcpred/io_util.hpp"
#include "fcpred/mvar.hpp"
#include "fcpred/parallel.hpp"
#include "fcpred/pli.hpp"
#include "fcpred/random.hpp"
#include "fcpred/recording_io.hpp"
#include "fcpred/report.hpp"
#include "fcpred/selection.hpp"
#include "fcpred/shap.hpp"
#include "fcpred/signal.hpp"
#include "fcpred/synth.hpp"

namespace fcpred::pipeline {

using nlohmann::json;

namespace {

// Stream ids for derive_seed(master, stream, ...).
enum Stream : std::uint64_t { kSynthStream = 1, kFoldStream = 2, kTrainStream = 3, kExplainStream = 4 };

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Table {
  fs::path path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
  int require_column(const std::string& name) const {
    const int i = column(name);
    require(i >= 0, ErrorCode::kParse,
            "'" + path.string() + "' has no '" + name + "' column in its header");
    return i;
  }
  std::string where(std::size_t row, int col) const {
    return path.string() + " line " + std::to_string(line_numbers[row]) + ", column " +
           std::to_string(col + 1);
  }
};

Table read_table(const fs::path& path) {
  Table t;
  t.path = path;
  std::istringstream in(io::read_text(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = io::split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw Error(ErrorCode::kParse, path.string() + " line " + std::to_string(line_no) +
                                         ": expected " + std::to_string(t.header.size()) +
                                         " columns, found " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  require(!t.header.empty(), ErrorCode::kParse, "'" + path.string() + "' is empty");
  return t;
}

void check_subject_id(const std::string& id, const std::string& where) {
  bool ok = !id.empty();
  for (char ch : id) {
    const bool plain = (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') ||
                       (ch >= '0' && ch <= '9') || ch == '_' || ch == '-' || ch == '.';
    ok = ok && plain;
  }
  require(ok, ErrorCode::kParse,
          "subject id '" + id + "' at " + where + " must use only letters, digits, '_', '-', '.'");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

fs::path require_file(const fs::path& p, const std::string& hint) {
  require(fs::is_regular_file(p), ErrorCode::kIo,
          "missing input '" + p.string() + "'" + (hint.empty() ? "" : "; " + hint));
  return p;
}

template <typename F>
auto with_context(const std::string& context, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), context + ": " + e.what());
  }
}

std::string sessions_csv(const std::vector<std::pair<std::string, std::pair<std::string, std::string>>>& rows) {
  std::string out = "subject_id,day1,day10\n";
  for (const auto& [id, files] : rows) out += id + "," + files.first + "," + files.second + "\n";
  return out;
}

std::vector<std::string> csv_header(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kParse,
          "'" + csv.string() + "' is empty");
  return io::split_csv_line(line);
}

json positions_json(const std::vector<std::pair<int, int>>& p) {
  json out = json::array();
  for (const auto& [a, b] : p) out.push_back({a, b});
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

// --- input resolution -----------------------------------------------------

fs::path raw_sessions_path(const PipelineConfig& c) {
  if (c.inputs.recordings) return *c.inputs.recordings;
  return c.out / "synth" / "sessions.csv";
}

fs::path matrices_path(const PipelineConfig& c) {
  if (c.inputs.matrices) return *c.inputs.matrices;
  const fs::path connected = c.out / "connect" / "matrices.csv";
  if (fs::exists(connected)) return connected;
  return c.out / "synth" / "matrices.csv";
}

fs::path targets_path(const PipelineConfig& c) {
  if (c.inputs.targets) return *c.inputs.targets;
  return c.out / "synth" / "targets.csv";
}

std::optional<fs::path> dataset_path(const PipelineConfig& c) {
  if (c.inputs.dataset) return *c.inputs.dataset;
  const fs::path built = c.out / "features" / "dataset.csv";
  if (fs::exists(built)) return built;
  return std::nullopt;
}

struct Inputs {
  std::vector<fs::path> files;
  void add(const fs::path& p) { files.push_back(p); }
  void to(StageWriter& w) const {
    for (const auto& f : files) w.input(f);
  }
};

// Sessions file whose recordings all exist with readable sidecars.
std::vector<SessionRow> checked_sessions(const fs::path& csv, const std::string& hint,
                                         Inputs& inputs) {
  require_file(csv, hint);
  std::vector<SessionRow> rows = read_sessions(csv);
  inputs.add(csv);
  for (const auto& r : rows) {
    for (const fs::path& p : {r.day1, r.day10}) {
      require_file(p, "listed for subject " + r.subject_id + " in '" + csv.string() + "'");
      read_recording_rate(p);
      inputs.add(p);
      inputs.add(io::sidecar_path(p));
    }
  }
  return rows;
}

struct Subjects {
  std::vector<SubjectSessions> list;
};

Subjects load_subjects(const PipelineConfig& c, Inputs& inputs) {
  const fs::path mcsv = require_file(
      matrices_path(c), "run `fcpred connect` or `fcpred synth`, or set inputs.matrices");
  const fs::path tcsv = require_file(targets_path(c), "set inputs.targets");
  const std::vector<SessionRow> rows = read_sessions(mcsv);
  const std::map<std::string, double> targets = read_targets(tcsv);
  inputs.add(mcsv);
  inputs.add(tcsv);
  Subjects s;
  for (const auto& r : rows) {
    const auto it = targets.find(r.subject_id);
    require(it != targets.end(), ErrorCode::kLabelMismatch,
            "subject " + r.subject_id + " has matrices but no target in '" + tcsv.string() + "'");
    SubjectSessions subj;
    subj.subject_id = r.subject_id;
    subj.day1 = with_context("subject " + r.subject_id + " day1",
                             [&] { return read_connectivity(require_file(r.day1, "")); });
    subj.day10 = with_context("subject " + r.subject_id + " day10",
                              [&] { return read_connectivity(require_file(r.day10, "")); });
    subj.target = it->second;
    inputs.add(r.day1);
    inputs.add(r.day10);
    s.list.push_back(std::move(subj));
  }
  for (const auto& [id, t] : targets) {
    bool found = false;
    for (const auto& r : rows) found = found || r.subject_id == id;
    require(found, ErrorCode::kLabelMismatch,
            "subject " + id + " has a target but no matrices in '" + mcsv.string() + "'");
  }
  return s;
}

Dataset load_dataset(const PipelineConfig& c, Inputs& inputs, std::ostream& log) {
  if (const auto path = dataset_path(c)) {
    require_file(*path, "set inputs.dataset or run `fcpred features`");
    Dataset d = read_dataset(*path);
    inputs.add(*path);
    inputs.add(io::sidecar_path(*path));
    return d;
  }
  log << "no feature dataset found; assembling one from matrices and targets\n";
  return assemble_dataset(load_subjects(c, inputs).list, c.feature_mode);
}

GridSpec family_grid(const TrainConfig& t, ml::Family f) {
  GridSpec g = default_grid(f, t.full_grids);
  if (const auto it = t.grids.find(f); it != t.grids.end()) {
    for (auto& [name, values] : grid_from_json(f, it->second).axes) g.axes[name] = values;
  }
  return g;
}

// --- per-recording work ---------------------------------------------------

MultichannelRecording preprocess_one(MultichannelRecording rec, const PreprocessConfig& p) {
  for (const FilterSpec& f : p.filters) rec = apply_filter(rec, f);
  if (!p.reference.empty()) rec = rereference(rec, p.reference);
  if (p.baseline_s) {
    rec = baseline_correct(rec, extract_epoch(rec, p.baseline_s->first, p.baseline_s->second));
  }
  if (p.epoch_s) rec = extract_epoch(rec, p.epoch_s->first, p.epoch_s->second);
  return rec;
}

struct ConnectResult {
  ConnectivityMatrix matrix;
  int order = 0;
  double spectral_radius = 0.0;
};

ConnectResult connect_one(const MultichannelRecording& rec, const ConnectConfig& cc) {
  ConnectResult out;
  if (cc.metric == Metric::kDtf) {
    int order = cc.order;
    if (cc.order_policy != OrderPolicy::kFixed) {
      order = select_order(rec, cc.max_order,
                           cc.order_policy == OrderPolicy::kAic ? OrderCriterion::kAic
                                                                : OrderCriterion::kBic);
    }
    const MvarModel model = fit_mvar(rec, order);
    const std::vector<double> freqs =
        frequency_grid(cc.band_hz->first, cc.band_hz->second, cc.freq_step_hz);
    out.matrix = dtf(model, freqs, *cc.band_hz);
    out.order = order;
    out.spectral_radius = model.spectral_radius;
  } else {
    const MultichannelRecording filtered =
        cc.band_hz ? apply_filter(rec, FilterSpec::bandpass(cc.band_hz->first, cc.band_hz->second))
                   : rec;
    out.matrix = pli_matrix(filtered, PliOptions{.edge_trim = cc.pli_edge_trim});
    out.matrix.band_hz = cc.band_hz;
  }
  return out;
}

}  // namespace

// --- shared readers -------------------------------------------------------

std::vector<SessionRow> read_sessions(const fs::path& csv) {
  const Table t = read_table(csv);
  const int id = t.require_column("subject_id");
  const int d1 = t.require_column("day1");
  const int d10 = t.require_column("day10");
  const fs::path base = csv.parent_path();
  std::vector<SessionRow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    check_subject_id(row[static_cast<std::size_t>(id)], t.where(r, id));
    for (const auto& prev : out) {
      require(prev.subject_id != row[static_cast<std::size_t>(id)], ErrorCode::kParse,
              "duplicate subject " + prev.subject_id + " at " + t.where(r, id));
    }
    require(!row[static_cast<std::size_t>(d1)].empty() && !row[static_cast<std::size_t>(d10)].empty(),
            ErrorCode::kParse, "empty path at " + t.where(r, d1));
    out.push_back({row[static_cast<std::size_t>(id)], resolve(base, row[static_cast<std::size_t>(d1)]),
                   resolve(base, row[static_cast<std::size_t>(d10)])});
  }
  require(!out.empty(), ErrorCode::kEmptyInput, "'" + csv.string() + "' lists no subjects");
  return out;
}

std::map<std::string, double> read_targets(const fs::path& csv) {
  const Table t = read_table(csv);
  const int id = t.require_column("subject_id");
  const int target = t.column("target");
  const int trace = t.column("trace");
  require(target >= 0 || trace >= 0, ErrorCode::kParse,
          "'" + csv.string() + "' needs a 'target' or a 'trace' column");
  std::map<std::string, double> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string& sid = row[static_cast<std::size_t>(id)];
    check_subject_id(sid, t.where(r, id));
    require(!out.count(sid), ErrorCode::kParse, "duplicate subject " + sid + " at " + t.where(r, id));
    double v = 0.0;
    if (target >= 0 && !row[static_cast<std::size_t>(target)].empty()) {
      v = io::parse_double(row[static_cast<std::size_t>(target)], t.where(r, target));
    } else {
      require(trace >= 0 && !row[static_cast<std::size_t>(trace)].empty(), ErrorCode::kParse,
              "no target or trace at " + t.where(r, id));
      const fs::path p = resolve(csv.parent_path(), row[static_cast<std::size_t>(trace)]);
      v = with_context("subject " + sid, [&] { return targeting_rmse(read_tracking_trace(p)); });
    }
    require(std::isfinite(v), ErrorCode::kParse, "non-finite target at " + t.where(r, target));
    out[sid] = v;
  }
  require(!out.empty(), ErrorCode::kEmptyInput, "'" + csv.string() + "' lists no subjects");
  return out;
}

std::string feature_label(Metric m) {
  return m == Metric::kDtf ? "directed transfer function (DTF)" : "phase lag index (PLI)";
}

std::string config_hash(const PipelineConfig& c) { return sha256_hex(hashed_view(c).dump()); }

// --- synth ----------------------------------------------------------------

RunManifest cmd_synth(const PipelineConfig& c, std::ostream& log) {
  const std::uint64_t seed = derive_seed(c.seed, kSynthStream);
  const SynthConfig& s = c.synth;
  RunLock lock(c.out);
  StageWriter w(c.out, "synth");
  Stopwatch clock;

  if (s.kind == SynthKind::kCohort) {
    PlantedCohort planted = s.cohort;
    planted.seed = seed;
    const Cohort cohort = gen_cohort(planted);
    std::vector<std::pair<std::string, std::pair<std::string, std::string>>> rows;
    std::string targets = "subject_id,target\n";
    json subjects = json::array();
    for (std::size_t i = 0; i < cohort.subjects.size(); ++i) {
      const SubjectSessions& subj = cohort.subjects[i];
      const std::string f1 = "matrices/" + subj.subject_id + "_day1.json";
      const std::string f10 = "matrices/" + subj.subject_id + "_day10.json";
      write_connectivity(subj.day1, w.path(f1));
      write_connectivity(subj.day10, w.path(f10));
      rows.push_back({subj.subject_id, {f1, f10}});
      targets += subj.subject_id + "," + io::format_double(subj.target) + "\n";
      subjects.push_back({{"subject_id", subj.subject_id},
                          {"responsiveness", cohort.responsiveness[i]}});
    }
    w.write("matrices.csv", sessions_csv(rows));
    w.write("targets.csv", targets);
    w.write("planted.json", json{{"kind", "cohort"},
                                 {"metric", to_string(planted.metric)},
                                 {"rois", planted.rois},
                                 {"informative", positions_json(planted.informative)},
                                 {"effects", planted.effects},
                                 {"noise", planted.noise},
                                 {"seed", seed},
                                 {"subjects", subjects}}
                                .dump(2) + "\n");
    log << "synth: cohort of " << cohort.subjects.size() << " subjects, "
        << 2 * cohort.subjects.size() << " matrices\n";
  } else if (s.kind == SynthKind::kRecordings) {
    RecordingCohortSpec spec = s.recordings;
    spec.seed = seed;
    const std::vector<RecordingSubject> subjects = gen_recording_cohort(spec);
    std::vector<std::pair<std::string, std::pair<std::string, std::string>>> rows;
    std::string targets = "subject_id,target\n";
    for (const auto& subj : subjects) {
      const std::string f1 = "recordings/" + subj.id + "_day1.csv";
      const std::string f10 = "recordings/" + subj.id + "_day10.csv";
      write_recording(subj.day1, w.path(f1));
      write_recording(subj.day10, w.path(f10));
      rows.push_back({subj.id, {f1, f10}});
      targets += subj.id + "," + io::format_double(subj.target) + "\n";
    }
    w.write("sessions.csv", sessions_csv(rows));
    w.write("targets.csv", targets);
    w.write("planted.json", json{{"kind", "recordings"},
                                 {"channels", spec.channels},
                                 {"informative", positions_json(spec.informative)},
                                 {"effects", spec.effects},
                                 {"seed", seed}}
                                .dump(2) + "\n");
    log << "synth: " << subjects.size() << " subjects, " << 2 * subjects.size()
        << " recordings\n";
  } else {
    const MvarSynthConfig& m = s.mvar;
    const PlantedMvar planted = random_stable_mvar(m.channels, m.order, seed, m.radius, m.rate_hz);
    write_recording(gen_mvar_signal(planted, m.n_samples), w.path("mvar.csv"));
    json coeffs = json::array();
    for (const auto& A : planted.coeffs) coeffs.push_back(matrix_json(A));
    const auto band = c.connect.band_hz.value_or(std::make_pair(1.0, 45.0));
    const std::pair<double, double> clipped{band.first, std::min(band.second, m.rate_hz / 2.0)};
    const std::vector<double> freqs =
        frequency_grid(clipped.first, clipped.second, c.connect.freq_step_hz);
    write_connectivity(analytic_dtf(planted, freqs, clipped), w.path("analytic_dtf.json"));
    w.write("planted.json", json{{"kind", "mvar"},
                                 {"coeffs", coeffs},
                                 {"noise_cov", matrix_json(planted.noise_cov)},
                                 {"rate_hz", planted.rate_hz},
                                 {"spectral_radius", planted.model().spectral_radius},
                                 {"seed", seed}}
                                .dump(2) + "\n");
    log << "synth: MVAR(" << m.order << ") recording, " << m.channels << " channels\n";
  }
  w.time("synth", clock.lap());
  return w.commit(config_hash(c), c.seed);
}

// --- preprocess -----------------------------------------------------------

RunManifest cmd_preprocess(const PipelineConfig& c, std::ostream& log) {
  Inputs inputs;
  const fs::path csv = raw_sessions_path(c);
  const std::vector<SessionRow> rows = checked_sessions(
      csv, "set inputs.recordings or run `fcpred synth` with synth.kind = \"recordings\"", inputs);
  for (const auto& r : rows) {
    for (const fs::path& p : {r.day1, r.day10}) {
      const double rate = read_recording_rate(p);
      for (const FilterSpec& f : c.preprocess.filters) {
        with_context("'" + p.string() + "'", [&] {
          f.validate(rate);
          return 0;
        });
      }
      if (!c.preprocess.reference.empty()) {
        const std::vector<std::string> labels = csv_header(p);
        for (const auto& ref : c.preprocess.reference) {
          require(std::find(labels.begin(), labels.end(), ref) != labels.end(),
                  ErrorCode::kMissingChannel,
                  "reference channel '" + ref + "' is not in '" + p.string() + "'");
        }
      }
    }
  }

  RunLock lock(c.out);
  StageWriter w(c.out, "preprocessed");
  inputs.to(w);
  Stopwatch clock;
  std::vector<std::pair<std::string, std::pair<std::string, std::string>>> out_rows;
  for (const auto& r : rows) {
    out_rows.push_back({r.subject_id,
                        {"recordings/" + r.subject_id + "_day1.csv",
                         "recordings/" + r.subject_id + "_day10.csv"}});
  }
  parallel_for(static_cast<int>(2 * rows.size()), c.threads, [&](int job) {
    const auto& r = rows[static_cast<std::size_t>(job / 2)];
    const bool day10 = job % 2 == 1;
    const std::string session = day10 ? "day10" : "day1";
    with_context("subject " + r.subject_id + " " + session, [&] {
      MultichannelRecording rec =
          preprocess_one(read_recording(day10 ? r.day10 : r.day1), c.preprocess);
      const auto& files = out_rows[static_cast<std::size_t>(job / 2)].second;
      write_recording(rec, w.path(day10 ? files.second : files.first));
      return 0;
    });
  });
  w.write("sessions.csv", sessions_csv(out_rows));
  w.time("preprocess", clock.lap());
  log << "preprocess: " << 2 * rows.size() << " recordings\n";
  return w.commit(config_hash(c), c.seed);
}

// --- connect --------------------------------------------------------------

RunManifest cmd_connect(const PipelineConfig& c, std::ostream& log) {
  Inputs inputs;
  fs::path csv = c.out / "preprocessed" / "sessions.csv";
  if (!fs::exists(csv)) {
    csv = raw_sessions_path(c);
    log << "warning: no preprocessed recordings in the run directory; connecting '"
        << csv.string() << "' as is\n";
  }
  const std::vector<SessionRow> rows = checked_sessions(
      csv, "run `fcpred preprocess`, or set inputs.recordings", inputs);
  const ConnectConfig& cc = c.connect;
  for (const auto& r : rows) {
    for (const fs::path& p : {r.day1, r.day10}) {
      const double rate = read_recording_rate(p);
      if (cc.band_hz) {
        require(cc.band_hz->second < rate / 2.0, ErrorCode::kInvalidSpec,
                "connect.band_hz upper edge " + io::format_double(cc.band_hz->second) +
                    " Hz is not below the Nyquist frequency of '" + p.string() + "' (" +
                    io::format_double(rate / 2.0) + " Hz)");
      }
    }
  }

  RunLock lock(c.out);
  StageWriter w(c.out, "connect");
  inputs.to(w);
  Stopwatch clock;
  const std::size_t n = rows.size();
  std::vector<ConnectResult> results(2 * n);
  std::vector<std::pair<std::string, std::pair<std::string, std::string>>> out_rows;
  for (const auto& r : rows) {
    out_rows.push_back({r.subject_id,
                        {"matrices/" + r.subject_id + "_day1.json",
                         "matrices/" + r.subject_id + "_day10.json"}});
  }
  parallel_for(static_cast<int>(2 * n), c.threads, [&](int job) {
    const auto& r = rows[static_cast<std::size_t>(job / 2)];
    const bool day10 = job % 2 == 1;
    const std::string session = day10 ? "day10" : "day1";
    auto& res = results[static_cast<std::size_t>(job)];
    res = with_context("subject " + r.subject_id + " " + session,
                       [&] { return connect_one(read_recording(day10 ? r.day10 : r.day1), cc); });
    const auto& files = out_rows[static_cast<std::size_t>(job / 2)].second;
    write_connectivity(res.matrix, w.path(day10 ? files.second : files.first));
  });
  w.write("matrices.csv", sessions_csv(out_rows));
  if (cc.metric == Metric::kDtf) {
    std::string models = "subject_id,session,order,spectral_radius\n";
    for (std::size_t i = 0; i < 2 * n; ++i) {
      models += rows[i / 2].subject_id + "," + (i % 2 ? "day10" : "day1") + "," +
                std::to_string(results[i].order) + "," +
                io::format_double(results[i].spectral_radius) + "\n";
    }
    w.write("models.csv", models);
  }
  w.time("connect", clock.lap());
  log << "connect: " << 2 * n << " " << to_string(cc.metric) << " matrices\n";
  return w.commit(config_hash(c), c.seed);
}

// --- features -------------------------------------------------------------

RunManifest cmd_features(const PipelineConfig& c, std::ostream& log) {
  Inputs inputs;
  const Subjects subjects = load_subjects(c, inputs);
  const Dataset data = assemble_dataset(subjects.list, c.feature_mode);

  RunLock lock(c.out);
  StageWriter w(c.out, "features");
  inputs.to(w);
  write_dataset(data, w.path("dataset.csv"));
  log << "features: " << data.rows() << " subjects x " << data.features() << " features ("
      << to_string(data.meta.metric) << ", " << to_string(data.meta.mode) << ")\n";
  return w.commit(config_hash(c), c.seed);
}

// --- train ----------------------------------------------------------------

RunManifest cmd_train(const PipelineConfig& c, std::ostream& log) {
  const TrainConfig& t = c.train;
  std::vector<GridSpec> grids;
  for (ml::Family f : t.families) {
    grids.push_back(family_grid(t, f));
    with_context("train grid for " + std::string(ml::to_string(f)),
                 [&] { return grid_expand(grids.back()).size(); });
  }
  Inputs inputs;
  const Dataset data = load_dataset(c, inputs, log);
  data.validate();
  const int n = static_cast<int>(data.rows());
  require(t.k <= n, ErrorCode::kInvalidSpec,
          "train.k = " + std::to_string(t.k) + " exceeds the " + std::to_string(n) + " subjects");
  const std::uint64_t fold_seed = t.cv_seed.value_or(derive_seed(c.seed, kFoldStream));
  const FoldPlan plan = make_folds(n, t.k, t.repeats, fold_seed);

  const bool constant_target = data.y.maxCoeff() == data.y.minCoeff();
  if (constant_target) {
    log << "warning: the target is constant across subjects; every model reduces to the mean\n";
  }

  RunLock lock(c.out);
  StageWriter w(c.out, "train");
  inputs.to(w);
  Stopwatch clock;

  // Constant predictor fitted on each training split.
  double baseline = 0.0;
  int folds = 0;
  for (int r = 0; r < plan.repeats; ++r) {
    for (int k = 0; k < plan.k; ++k) {
      const std::vector<int> tr = plan.train_indices(r, k);
      const std::vector<int> va = plan.validation_indices(r, k);
      double mean = 0.0;
      for (int i : tr) mean += data.y(i);
      mean /= static_cast<double>(tr.size());
      double ss = 0.0;
      for (int i : va) ss += (data.y(i) - mean) * (data.y(i) - mean);
      baseline += std::sqrt(ss / static_cast<double>(va.size()));
      ++folds;
    }
  }
  baseline /= folds;
  w.time("baseline", clock.lap());

  std::vector<CvReport> reports;
  json families = json::array();
  int selected = -1;
  for (std::size_t i = 0; i < t.families.size(); ++i) {
    const ml::Family f = t.families[i];
    const std::string name(ml::to_string(f));
    SearchOptions opts;
    opts.fit.mlp_epochs = t.mlp_epochs;
    opts.fit.svr_tol = t.svr_tol;
    opts.threads = c.threads;
    SearchResult res = with_context("training " + name, [&] {
      return grid_search(data, grids[i], plan, derive_seed(c.seed, kTrainStream, i), opts);
    });
    const ConfigResult& best = res.report.best_config();
    w.write("cv_" + name + ".json", to_json(res.report).dump(2) + "\n");
    w.write("model_" + name + ".json", ml::to_json(res.best_model).dump() + "\n");
    w.time(name, clock.lap());
    log << "train: " << name << " " << res.report.configs.size() << " configs, best "
        << best.hp.describe() << ", validation RMSE " << best.validation_mean << "\n";
    families.push_back({{"family", name},
                        {"configs", res.report.configs.size()},
                        {"best", ml::to_json(best.hp)},
                        {"train_rmse", best.train_mean},
                        {"validation_rmse", best.validation_mean},
                        {"validation_sd", best.validation_sd},
                        {"gain_over_baseline", 1.0 - best.validation_mean / baseline}});
    if (selected < 0 || best.validation_mean < reports[static_cast<std::size_t>(selected)]
                                                   .best_config()
                                                   .validation_mean) {
      selected = static_cast<int>(i);
    }
    reports.push_back(std::move(res.report));
  }

  std::string md = render_markdown(reports, feature_label(data.meta.metric));
  if (constant_target) md += "\nWarning: the target is constant; the scores carry no information.\n";
  w.write("report.md", md);
  const json summary = {
      {"n_samples", n},
      {"n_features", data.features()},
      {"metric", to_string(data.meta.metric)},
      {"feature_mode", to_string(data.meta.mode)},
      {"folds", {{"k", plan.k}, {"repeats", plan.repeats}, {"seed", plan.seed}}},
      {"constant_target", constant_target},
      {"baseline_validation_rmse", baseline},
      {"families", families},
      {"selected", ml::to_string(t.families[static_cast<std::size_t>(selected)])}};
  w.write("summary.json", summary.dump(2) + "\n");
  return w.commit(config_hash(c), c.seed);
}

// --- explain --------------------------------------------------------------

RunManifest cmd_explain(const PipelineConfig& c, std::ostream& log) {
  Inputs inputs;
  fs::path model_file;
  if (c.inputs.model) {
    model_file = *c.inputs.model;
  } else {
    std::string family;
    if (c.explain.family) {
      family = ml::to_string(*c.explain.family);
    } else {
      const fs::path summary = require_file(c.out / "train" / "summary.json",
                                            "run `fcpred train` or set inputs.model");
      try {
        family = json::parse(io::read_text(summary)).at("selected").get<std::string>();
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, "'" + summary.string() + "': " + e.what());
      }
    }
    model_file = c.out / "train" / ("model_" + family + ".json");
  }
  require_file(model_file, "run `fcpred train` or set inputs.model");
  ml::FittedModel model;
  try {
    model = ml::model_from_json(json::parse(io::read_text(model_file)));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "model '" + model_file.string() + "': " + e.what());
  }
  inputs.add(model_file);
  const Dataset data = load_dataset(c, inputs, log);
  require(model.n_features == data.features(), ErrorCode::kShapeMismatch,
          "model '" + model_file.string() + "' expects " + std::to_string(model.n_features) +
              " features but the dataset has " + std::to_string(data.features()));
  const long long min_samples = 2LL * data.features() + 2;
  require(c.explain.nsamples >= min_samples, ErrorCode::kInvalidSpec,
          "explain.nsamples must be at least " + std::to_string(min_samples) + " for " +
              std::to_string(data.features()) + " features");

  RunLock lock(c.out);
  StageWriter w(c.out, "explain");
  inputs.to(w);
  Stopwatch clock;
  const std::vector<int> bg = background_rows(data.y, c.explain.background_cap);
  const Eigen::MatrixXd background = data.X(bg, Eigen::all);
  ShapOptions opts;
  opts.nsamples = c.explain.nsamples;
  opts.seed = derive_seed(c.seed, kExplainStream);
  opts.threads = c.threads;
  ShapExplanation e =
      explain([&model](const Eigen::MatrixXd& X) { return model.predict(X); }, data.X, background,
              opts);
  e.instance_ids = data.subject_ids;
  const std::vector<ShapSummaryRow> summary = shap_summary(e, data.meta);
  w.write("shap.json", to_json(e).dump() + "\n");
  w.write("shap_summary.csv", summary_csv(summary));
  w.write("shap_points.csv", points_csv(e));
  w.time("explain", clock.lap());
  log << "explain: " << data.rows() << " subjects, " << bg.size() << " background rows\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(10, summary.size()); ++i) {
    const auto& r = summary[i];
    log << "  " << r.rank << ". feature " << r.feature_index << " (" << r.roi_a << " -> "
        << r.roi_b << ") " << r.mean_abs << "\n";
  }
  return w.commit(config_hash(c), c.seed);
}

// --- report ---------------------------------------------------------------

RunManifest cmd_report(const PipelineConfig& c, const std::vector<fs::path>& cv_reports,
                       std::ostream& log) {
  Inputs inputs;
  std::vector<fs::path> files = cv_reports;
  if (files.empty()) {
    for (ml::Family f : ml::all_families()) {
      const fs::path p = c.out / "train" / ("cv_" + std::string(ml::to_string(f)) + ".json");
      if (fs::exists(p)) files.push_back(p);
    }
    require(!files.empty(), ErrorCode::kIo,
            "no cross-validation reports under '" + (c.out / "train").string() +
                "'; run `fcpred train` or pass report files");
  }
  std::vector<CvReport> reports;
  for (const fs::path& p : files) {
    require_file(p, "");
    try {
      reports.push_back(cv_report_from_json(json::parse(io::read_text(p))));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, "'" + p.string() + "': " + e.what());
    }
    inputs.add(p);
  }
  Metric metric = c.connect.metric;
  const fs::path summary = c.out / "train" / "summary.json";
  if (cv_reports.empty() && fs::exists(summary)) {
    metric = parse_metric(json::parse(io::read_text(summary)).at("metric").get<std::string>());
    inputs.add(summary);
  }
  std::string md = render_markdown(reports, feature_label(metric));
  const fs::path shap = c.out / "explain" / "shap_summary.csv";
  if (cv_reports.empty() && fs::exists(shap)) {
    const Table t = read_table(shap);
    inputs.add(shap);
    md += "\nTop features by mean |SHAP|:\n\n| Rank | Feature | ROI pair | Mean \\|SHAP\\| |\n"
          "|---|---|---|---|\n";
    const int rank = t.require_column("rank");
    const int idx = t.require_column("feature_index");
    const int a = t.require_column("roi_a");
    const int b = t.require_column("roi_b");
    const int v = t.require_column("mean_abs_shap");
    for (std::size_t r = 0; r < std::min<std::size_t>(10, t.rows.size()); ++r) {
      const auto& row = t.rows[r];
      auto at = [&](int col) { return row[static_cast<std::size_t>(col)]; };
      md += "| " + at(rank) + " | " + at(idx) + " | " + at(a) + " - " + at(b) + " | " + at(v) +
            " |\n";
    }
  }

  RunLock lock(c.out);
  StageWriter w(c.out, "report");
  inputs.to(w);
  w.write("report.md", md);
  log << md;
  return w.commit(config_hash(c), c.seed);
}

}  // namespace fcpred::pipeline
