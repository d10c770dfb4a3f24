#include <CLI11.hpp>

#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fcpred/error.hpp"
#include "fcpred/io_util.hpp"
#include "fcpred/pipeline/commands.hpp"
#include "fcpred/pipeline/config.hpp"

namespace fs = std::filesystem;
using namespace fcpred;
using namespace fcpred::pipeline;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kValidation: return kExitValidation;
    case ErrorCategory::kData: return kExitData;
    case ErrorCategory::kNumerical: return kExitNumerical;
  }
  return kExitData;
}

const std::vector<std::string> kStages = {"synth",   "preprocess", "connect", "features",
                                          "train",   "explain",    "report"};

void run_stage(const std::string& stage, const PipelineConfig& c,
               const std::vector<fs::path>& reports) {
  std::ostream& log = std::cerr;
  if (stage == "synth") {
    cmd_synth(c, log);
  } else if (stage == "preprocess") {
    cmd_preprocess(c, log);
  } else if (stage == "connect") {
    cmd_connect(c, log);
  } else if (stage == "features") {
    cmd_features(c, log);
  } else if (stage == "train") {
    cmd_train(c, log);
  } else if (stage == "explain") {
    cmd_explain(c, log);
  } else if (stage == "report") {
    cmd_report(c, reports, log);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fcpred: predict behavioural change from EEG connectivity"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out", out, "run directory (overrides the config)");
  app.add_option("--threads", threads, "worker threads (overrides the config)")
      ->check(CLI::PositiveNumber);

  app.add_subcommand("synth", "write a synthetic cohort, recordings or MVAR signal");
  app.add_subcommand("preprocess", "filter, re-reference, baseline-correct and epoch recordings");
  app.add_subcommand("connect", "estimate one DTF or PLI matrix per subject and session");
  app.add_subcommand("features", "build the subject x feature dataset from matrices and targets");
  app.add_subcommand("train", "grid-search every model family with repeated k-fold CV");
  auto* explain = app.add_subcommand("explain", "kernel SHAP attributions for a trained model");
  std::string model_path;
  explain->add_option("--model", model_path, "fitted model JSON (default: the selected family)")
      ->check(CLI::ExistingFile);
  auto* report = app.add_subcommand("report", "render CV reports as a markdown table");
  std::vector<std::string> report_files;
  report->add_option("files", report_files, "CvReport JSON files (default: the run's train/)")
      ->check(CLI::ExistingFile);
  auto* run = app.add_subcommand("run", "run several stages in order");
  std::vector<std::string> stages;
  run->add_option("stages", stages, "stages to run")
      ->required()
      ->check(CLI::IsMember(kStages));
  auto* defaults = app.add_subcommand("defaults", "print the configuration reference");
  std::string defaults_out;
  defaults->add_option("-o,--output", defaults_out, "write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (defaults->parsed()) {
      if (defaults_out.empty()) {
        std::cout << defaults_markdown();
      } else {
        io::write_text(defaults_out, defaults_markdown());
      }
      return 0;
    }
    PipelineConfig c = config_path.empty() ? parse_config(nlohmann::json::object(), fs::current_path())
                                           : load_config(fs::absolute(config_path));
    if (seed) c.seed = *seed;
    if (!out.empty()) c.out = fs::absolute(out);
    if (threads) c.threads = *threads;
    if (!model_path.empty()) c.inputs.model = fs::absolute(model_path);
    std::vector<fs::path> reports;
    for (const auto& f : report_files) reports.push_back(fs::absolute(f));

    if (run->parsed()) {
      for (const auto& s : stages) run_stage(s, c, reports);
    } else {
      run_stage(app.get_subcommands().front()->get_name(), c, reports);
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
