#include "fcpred/pipeline/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>

#include "fcpred/error.hpp"
#include "fcpred/io_util.hpp"

namespace fcpred::pipeline {

namespace {

using MdCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

MdCtx new_ctx() {
  MdCtx ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "cannot initialise SHA-256");
  }
  return ctx;
}

std::string final_hex(EVP_MD_CTX* ctx) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx, md, &len) != 1) throw Error(ErrorCode::kIo, "SHA-256 failed");
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += digits[md[i] >> 4];
    out += digits[md[i] & 0xf];
  }
  return out;
}

nlohmann::json entries_json(const std::vector<ManifestEntry>& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : v) arr.push_back({{"path", e.path}, {"sha256", e.sha256}});
  return arr;
}

std::vector<ManifestEntry> entries_from_json(const nlohmann::json& j) {
  std::vector<ManifestEntry> out;
  for (const auto& e : j) {
    out.push_back({e.at("path").get<std::string>(), e.at("sha256").get<std::string>()});
  }
  return out;
}

constexpr const char* kManifest = "manifest.json";
constexpr const char* kTimings = "timings.json";

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  MdCtx ctx = new_ctx();
  EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size());
  return final_hex(ctx.get());
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for hashing");
  MdCtx ctx = new_ctx();
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) {
      EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
  }
  return final_hex(ctx.get());
}

nlohmann::json to_json(const RunManifest& m) {
  return {{"format", "fcpred-manifest"},
          {"version", 1},
          {"command", m.command},
          {"config_sha256", m.config_hash},
          {"seed", m.seed},
          {"inputs", entries_json(m.inputs)},
          {"outputs", entries_json(m.outputs)}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_sha256").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.inputs = entries_from_json(j.at("inputs"));
    m.outputs = entries_from_json(j.at("outputs"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed manifest: ") + e.what());
  }
}

RunManifest read_manifest(const fs::path& path) {
  try {
    return manifest_from_json(nlohmann::json::parse(io::read_text(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, "manifest '" + path.string() + "': " + e.what());
  }
}

StageWriter::StageWriter(fs::path run_dir, std::string stage)
    : run_dir_(std::move(run_dir)),
      stage_(std::move(stage)),
      staging_(run_dir_ / ("." + stage_ + ".partial")) {
  fs::remove_all(staging_);
  fs::create_directories(staging_);
}

StageWriter::~StageWriter() {
  if (!committed_) {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }
}

fs::path StageWriter::write(const std::string& rel, std::string_view content) {
  io::write_text(staging_ / rel, content);
  return final_dir() / rel;
}

std::string StageWriter::input_name(const fs::path& file) const {
  const fs::path rel =
      fs::weakly_canonical(file).lexically_relative(fs::weakly_canonical(run_dir_));
  const std::string s = rel.generic_string();
  // Files outside the run directory are named by file name only so the
  // manifest does not depend on where things live on disk.
  if (s.empty() || s.rfind("..", 0) == 0) return "external/" + file.filename().string();
  return s;
}

void StageWriter::input(const fs::path& file) {
  const std::string name = input_name(file);
  for (const auto& [n, d] : inputs_) {
    if (n == name) return;
  }
  inputs_.emplace_back(name, sha256_file(file));
}

void StageWriter::time(const std::string& step, double seconds) {
  timings_.emplace_back(step, seconds);
}

RunManifest StageWriter::commit(const std::string& config_hash, std::uint64_t seed) {
  RunManifest m;
  m.command = stage_;
  m.config_hash = config_hash;
  m.seed = seed;
  std::sort(inputs_.begin(), inputs_.end());
  for (const auto& [n, d] : inputs_) m.inputs.push_back({n, d});

  std::map<std::string, std::string> outputs;
  for (const auto& entry : fs::recursive_directory_iterator(staging_)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = entry.path().lexically_relative(staging_).generic_string();
    if (rel == kManifest || rel == kTimings) continue;
    outputs[stage_ + "/" + rel] = sha256_file(entry.path());
  }
  for (const auto& [p, d] : outputs) m.outputs.push_back({p, d});

  io::write_text(staging_ / kManifest, to_json(m).dump(2) + "\n");
  nlohmann::json t = nlohmann::json::object();
  for (const auto& [step, s] : timings_) t[step] = s;
  io::write_text(staging_ / kTimings, t.dump(2) + "\n");

  const fs::path dest = final_dir();
  fs::remove_all(dest);
  fs::rename(staging_, dest);
  committed_ = true;
  return m;
}

RunLock::RunLock(const fs::path& run_dir) : path_(run_dir / ".fcpred.lock") {
  fs::create_directories(run_dir);
  // "x" makes fopen fail when the file exists, so creating it is the lock.
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) {
    throw Error(ErrorCode::kIo, "run directory '" + run_dir.string() +
                                    "' is in use by another fcpred process (delete '" +
                                    path_.string() + "' if no such process exists)");
  }
  std::fclose(f);
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

}  // namespace fcpred::pipeline
