// Copyright 2026 The matchlp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "CLI11.hpp"
#include "matchlp/distributed.h"
#include "matchlp/generator.h"
#include "matchlp/instance_io.h"

namespace matchlp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string ToHex(const unsigned char* data, unsigned int length) {
  static const char* kDigits = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kDigits[data[i] >> 4]);
    hex.push_back(kDigits[data[i] & 0xf]);
  }
  return hex;
}

std::string Sha256Raw(const void* data, std::size_t size) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data, size, digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  return ToHex(digest, length);
}

std::string Bytes(const std::vector<std::uint8_t>& data) {
  return std::string(data.begin(), data.end());
}

bool HasMlpiMagic(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 4 && bytes[0] == 'M' && bytes[1] == 'L' &&
         bytes[2] == 'P' && bytes[3] == 'I';
}

MatchingInstance ParseInstanceBytes(const std::vector<std::uint8_t>& bytes) {
  if (HasMlpiMagic(bytes)) return ParseInstance(bytes);
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw FormatError(std::string("instance is neither MLPI nor JSON: ") + e.what());
  }
  return InstanceFromJson(doc);
}

std::string EncodeInstance(const fs::path& path, const MatchingInstance& inst) {
  if (path.extension() == ".json") return InstanceToJson(inst).dump(2) + "\n";
  return Bytes(SerializeInstance(inst));
}

std::string Format17(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

json NullableDouble(double value) {
  return std::isfinite(value) ? json(value) : json(nullptr);
}

json CountersJson(const CommCounters& c) {
  return {{"reduce_ops", c.reduce_ops},
          {"broadcast_ops", c.broadcast_ops},
          {"floats_reduced", c.floats_reduced},
          {"floats_broadcast", c.floats_broadcast},
          {"scalar_reductions", c.scalar_reductions},
          {"bytes", c.bytes}};
}

std::string DualText(std::span<const Real> values) {
  std::string text;
  for (Real v : values) {
    text += Format17(v);
    text += '\n';
  }
  return text;
}

Preconditioner ParsePreconditioner(const std::string& text) {
  if (text == "none") return Preconditioner::kNone;
  if (text == "jacobi") return Preconditioner::kJacobi;
  throw ConfigError("unknown preconditioner '" + text + "'");
}

const char* PreconditionerName(Preconditioner p) {
  return p == Preconditioner::kJacobi ? "jacobi" : "none";
}

struct SolveOptions {
  std::string instance;
  std::string replay;
  Index iters = 1000;
  std::optional<double> gamma0;
  std::string schedule = "fixed";
  std::string precondition = "none";
  std::string primal_scale = "none";
  Index workers = 1;
  std::string trace = "trace.csv";
  std::string manifest;
  Index trace_stride = 1;
  std::string warm_start;
  std::optional<double> tolerance;
  double max_step = 1e-3;
  double initial_step = 1e-5;
  std::optional<double> reference_g;
  std::string duals_out;
  std::string primal_out;
  std::uint64_t seed = 0;
};

struct GenerateOptions {
  GeneratorConfig cfg;
  std::string out = "instance.mlpi";
  std::string manifest;
  std::string from_manifest;
};

struct CompareOptions {
  std::vector<std::string> traces;
  std::string reference;
  std::optional<double> g_hat;
  double threshold = 1e-3;
  std::string out;
  std::string table;
};

// Fills config and, for file-backed settings, their content hashes.
SolverConfig BuildConfig(const SolveOptions& o, json& inputs) {
  SolverConfig config;
  config.max_iterations = o.iters;
  config.initial_step_size = o.initial_step;
  config.max_step_size = o.max_step;
  config.gamma0 = o.gamma0;
  config.gamma_schedule = GammaSchedule::Parse(o.schedule);
  config.precondition = ParsePreconditioner(o.precondition);
  config.trace_stride = o.trace_stride;
  config.tolerance = o.tolerance;
  config.reference_g = o.reference_g;
  if (o.primal_scale == "none") {
    config.primal_scale = PrimalScaleMode::kNone;
  } else if (o.primal_scale == "auto") {
    config.primal_scale = PrimalScaleMode::kAuto;
  } else if (o.primal_scale.rfind("file:", 0) == 0) {
    const fs::path path = o.primal_scale.substr(5);
    config.primal_scale = PrimalScaleMode::kFile;
    config.primal_scale_factors = ReadDualFile(path);
    inputs["primal_scale_sha256"] = Sha256Hex(ReadFileBytes(path));
  } else {
    throw ConfigError("unknown primal scaling '" + o.primal_scale +
                      "' (expected none, auto or file:<path>)");
  }
  if (!o.warm_start.empty()) {
    config.warm_start = ReadDualFile(o.warm_start);
    inputs["warm_start_sha256"] = Sha256Hex(ReadFileBytes(o.warm_start));
  }
  ValidateConfig(config);
  return config;
}

json SolveOptionsJson(const SolveOptions& o) {
  json doc = {{"iters", o.iters},
              {"gamma_schedule", o.schedule},
              {"precondition", o.precondition},
              {"primal_scale", o.primal_scale},
              {"trace_stride", o.trace_stride},
              {"warm_start", o.warm_start},
              {"max_step_size", o.max_step},
              {"initial_step_size", o.initial_step},
              {"seed", o.seed}};
  doc["gamma0"] = o.gamma0 ? json(*o.gamma0) : json(nullptr);
  doc["tolerance"] = o.tolerance ? json(*o.tolerance) : json(nullptr);
  doc["reference_g"] = o.reference_g ? json(*o.reference_g) : json(nullptr);
  return doc;
}

void LoadReplay(SolveOptions& o) {
  const auto bytes = ReadFileBytes(o.replay);
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw FormatError(std::string("unreadable run manifest: ") + e.what());
  }
  try {
    const json& opts = doc.at("options");
    o.instance = doc.at("instance").at("path").get<std::string>();
    o.workers = doc.at("workers").get<Index>();
    o.iters = opts.at("iters").get<Index>();
    o.schedule = opts.at("gamma_schedule").get<std::string>();
    o.precondition = opts.at("precondition").get<std::string>();
    o.primal_scale = opts.at("primal_scale").get<std::string>();
    o.trace_stride = opts.at("trace_stride").get<Index>();
    o.warm_start = opts.at("warm_start").get<std::string>();
    o.max_step = opts.at("max_step_size").get<double>();
    o.initial_step = opts.at("initial_step_size").get<double>();
    o.seed = opts.at("seed").get<std::uint64_t>();
    auto optional = [&](const char* key) -> std::optional<double> {
      if (opts.at(key).is_null()) return std::nullopt;
      return opts.at(key).get<double>();
    };
    o.gamma0 = optional("gamma0");
    o.tolerance = optional("tolerance");
    o.reference_g = optional("reference_g");
  } catch (const json::exception& e) {
    throw FormatError(std::string("incomplete run manifest: ") + e.what());
  }
  const std::string expected = doc["instance"]["sha256"].get<std::string>();
  const std::string actual = Sha256Hex(ReadFileBytes(o.instance));
  if (expected != actual) {
    throw FormatError("instance " + o.instance +
                      " does not match the manifest hash");
  }
}

int CmdSolve(SolveOptions o, std::ostream& out, std::ostream& err) {
  if (!o.replay.empty()) LoadReplay(o);
  if (o.instance.empty()) {
    err << "solve: an instance path or --replay is required\n";
    return kExitUsage;
  }
  const auto bytes = ReadFileBytes(o.instance);
  const MatchingInstance inst = ParseInstanceBytes(bytes);
  ValidateInstance(inst);
  json inputs = json::object();
  const SolverConfig config = BuildConfig(o, inputs);
  const SolveReport report = DistributedSolve(inst, config, o.workers);
  if (report.termination == TerminationReason::kDiverged) {
    err << "solve diverged: " << report.diagnostic << "\n";
    return kExitDiverged;
  }
  const IterationRecord& last = report.last;
  json manifest = {
      {"artifact", "matchlp"},
      {"version", kArtifactVersion},
      {"instance",
       {{"path", o.instance}, {"sha256", Sha256Hex(bytes)}, {"bytes", bytes.size()}}},
      {"options", SolveOptionsJson(o)},
      {"config", SolverConfigToJson(config)},
      {"inputs", inputs},
      {"workers", o.workers},
      {"deterministic_reduction", DeterministicReductionEnabled()},
      {"trace", o.trace},
      {"conditioning",
       {{"row_normalized", report.row_normalized},
        {"unscaled_rows", report.unscaled_rows},
        {"primal_scaled", report.primal_scaled},
        {"order", "primal scaling, then row normalization"}}},
      {"summary",
       {{"final_g", last.g},
        {"best_g", report.best_g},
        {"final_infeasibility_bound", NullableDouble(last.infeas_bound)},
        {"final_bound_best", NullableDouble(last.bound_best)},
        {"final_bound_ref", NullableDouble(last.bound_ref)},
        {"iterations", report.iterations},
        {"total_ms", report.total_ms},
        {"final_gamma", report.final_gamma},
        {"termination", TerminationReasonName(report.termination)}}},
      {"comm_setup", CountersJson(report.comm_setup)},
  };
  const std::string manifest_path =
      o.manifest.empty() ? o.trace + ".manifest.json" : o.manifest;
  std::vector<std::pair<fs::path, std::string>> files;
  files.emplace_back(o.trace, TraceCsv(report, true));
  files.emplace_back(manifest_path, manifest.dump(2) + "\n");
  if (!o.duals_out.empty()) files.emplace_back(o.duals_out, DualText(report.lam.view()));
  if (!o.primal_out.empty()) {
    files.emplace_back(o.primal_out, DualText(report.primal.view()));
  }
  WriteFilesAtomically(files);
  out << "iterations " << report.iterations << " final_g " << Format17(last.g)
      << " best_g " << Format17(report.best_g) << " termination "
      << TerminationReasonName(report.termination) << "\n";
  return kExitOk;
}

int CmdGenerate(GenerateOptions o, bool have_sources, bool have_dests,
                std::ostream& out, std::ostream& err) {
  if (!o.from_manifest.empty()) {
    const auto bytes = ReadFileBytes(o.from_manifest);
    try {
      const json doc = json::parse(bytes.begin(), bytes.end());
      o.cfg = GeneratorConfigFromJson(doc.at("generator"));
    } catch (const json::exception& e) {
      throw FormatError(std::string("unreadable generator manifest: ") + e.what());
    }
  } else if (!have_sources || !have_dests) {
    err << "generate: --sources and --destinations are required\n";
    return kExitUsage;
  }
  const GeneratedInstance generated = GenerateInstanceWithStats(o.cfg);
  const std::string encoded = EncodeInstance(o.out, generated.instance);
  const std::string hash = Sha256Hex(encoded);
  json manifest = {
      {"artifact", "matchlp"},
      {"version", kArtifactVersion},
      {"generator", GeneratorConfigToJson(o.cfg)},
      {"instance", {{"path", o.out}, {"sha256", hash}, {"bytes", encoded.size()}}},
      {"stats", GeneratorStatsToJson(generated.stats)},
  };
  const std::string manifest_path =
      o.manifest.empty() ? o.out + ".manifest.json" : o.manifest;
  WriteFilesAtomically({{o.out, encoded}, {manifest_path, manifest.dump(2) + "\n"}});
  out << "wrote " << o.out << " nnz " << generated.stats.nnz << " sha256 " << hash
      << "\n";
  return kExitOk;
}

int CmdCompare(const CompareOptions& o, std::ostream& out) {
  std::vector<Trace> traces;
  for (const std::string& path : o.traces) traces.push_back(ReadTrace(path));
  for (const Trace& t : traces) {
    if (t.iter.empty()) throw FormatError("empty trace");
    if (t.iter != traces.front().iter) {
      throw ConfigError("traces do not share an iteration grid");
    }
  }
  double g_hat = 0;
  if (o.g_hat) {
    g_hat = *o.g_hat;
  } else {
    const Trace reference =
        o.reference.empty() ? traces.front() : ReadTrace(o.reference);
    if (reference.g.empty()) throw FormatError("empty reference trace");
    g_hat = *std::max_element(reference.g.begin(), reference.g.end());
  }
  std::vector<std::string> names;
  for (const std::string& path : o.traces) names.push_back(fs::path(path).stem().string());

  std::string table = "trace,final_g,best_g,final_rel_err,iters_to_threshold\n";
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const Trace& trace = traces[t];
    const auto reached = IterationsToThreshold(trace, g_hat, o.threshold);
    const double rel = std::abs(trace.g.back() - g_hat) / std::abs(g_hat);
    table += names[t] + "," + Format17(trace.g.back()) + "," +
             Format17(*std::max_element(trace.g.begin(), trace.g.end())) + "," +
             Format17(rel) + "," + (reached ? std::to_string(*reached) : "never") +
             "\n";
  }
  std::vector<std::pair<fs::path, std::string>> files;
  if (!o.out.empty()) {
    std::string plot = "iter";
    for (const std::string& n : names) plot += ",log10_gap_" + n + ",rel_err_" + n;
    plot += "\n";
    for (std::size_t r = 0; r < traces.front().iter.size(); ++r) {
      plot += std::to_string(traces.front().iter[r]);
      for (const Trace& trace : traces) {
        const double gap = std::abs(trace.g[r] - g_hat);
        plot += "," + Format17(std::log10(gap)) + "," +
                Format17(gap / std::abs(g_hat));
      }
      plot += "\n";
    }
    files.emplace_back(o.out, plot);
  }
  if (!o.table.empty()) files.emplace_back(o.table, table);
  WriteFilesAtomically(files);
  out << "g_hat " << Format17(g_hat) << " threshold " << Format17(o.threshold)
      << "\n"
      << table;
  return kExitOk;
}

int CmdValidate(const std::string& path, std::ostream& out, std::ostream& err) {
  const MatchingInstance inst = ParseInstanceBytes(ReadFileBytes(path));
  const auto issues = CheckInstance(inst);
  if (!issues.empty()) {
    for (const std::string& issue : issues) err << "invalid: " << issue << "\n";
    return kExitInstance;
  }
  out << "valid m " << inst.num_families() << " I " << inst.num_sources() << " J "
      << inst.num_destinations() << " nnz " << inst.nnz() << "\n";
  return kExitOk;
}

int Dispatch(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Ridge-regularized dual ascent for matching LPs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kArtifactVersion);

  GenerateOptions gen;
  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic instance");
  auto* sources = generate->add_option("--sources", gen.cfg.num_sources, "Requests I");
  auto* dests = generate->add_option("--destinations", gen.cfg.num_destinations,
                                     "Resources J");
  generate->add_option("--sparsity", gen.cfg.sparsity, "Target nnz/(I*J)")
      ->capture_default_str();
  generate->add_option("--mean-degree", gen.cfg.mean_degree,
                       "Mean edges per request; overrides --sparsity");
  generate->add_option("--seed", gen.cfg.seed, "Random seed")->capture_default_str();
  generate->add_option("--families", gen.cfg.num_families, "Constraint families m")
      ->capture_default_str();
  generate->add_option("--coef-sigma", gen.cfg.coefficient_scale.sigma,
                       "Lognormal sigma of s_j")
      ->capture_default_str();
  generate->add_option("--breadth-sigma", gen.cfg.breadth.sigma,
                       "Lognormal sigma of resource breadth")
      ->capture_default_str();
  generate->add_option("--c-max", gen.cfg.c_max, "Value cap")->capture_default_str();
  generate->add_option("--slack", gen.cfg.slack, "Capacity slack")->capture_default_str();
  generate->add_option("--cap", gen.cfg.cap, "Per-request simplex cap")
      ->capture_default_str();
  generate->add_option("--gamma0", gen.cfg.gamma0, "Stored ridge parameter")
      ->capture_default_str();
  generate->add_option("-o,--out", gen.out, "Instance path (.json for text)")
      ->capture_default_str();
  generate->add_option("--manifest", gen.manifest, "Manifest path");
  generate->add_option("--from-manifest", gen.from_manifest,
                       "Regenerate from a generator manifest");

  SolveOptions sol;
  CLI::App* solve = app.add_subcommand("solve", "Run accelerated dual ascent");
  solve->add_option("instance", sol.instance, "Instance file (MLPI or JSON)");
  solve->add_option("--replay", sol.replay, "Re-run the settings of a run manifest");
  solve->add_option("--iters", sol.iters, "Iterations")->capture_default_str();
  solve->add_option("--gamma0,--gamma", sol.gamma0, "Initial ridge parameter");
  solve->add_option("--gamma-schedule", sol.schedule, "fixed or halve:<period>:<floor>")
      ->capture_default_str();
  solve->add_option("--precondition", sol.precondition, "none or jacobi")
      ->check(CLI::IsMember({"none", "jacobi"}))
      ->capture_default_str();
  solve->add_option("--primal-scale", sol.primal_scale, "none, auto or file:<path>")
      ->capture_default_str();
  solve->add_option("--workers", sol.workers, "Worker count")->capture_default_str();
  solve->add_option("--trace", sol.trace, "Trace CSV path")->capture_default_str();
  solve->add_option("--manifest", sol.manifest, "Run manifest path");
  solve->add_option("--trace-stride", sol.trace_stride, "Trace every k-th iteration")
      ->capture_default_str();
  solve->add_option("--warm-start", sol.warm_start, "Initial duals, one per line");
  solve->add_option("--tol", sol.tolerance, "Stop when ||(grad g)_+||_inf <= tol");
  solve->add_option("--max-step", sol.max_step, "Step size cap at gamma0")
      ->capture_default_str();
  solve->add_option("--initial-step", sol.initial_step, "First step size")
      ->capture_default_str();
  solve->add_option("--reference-g", sol.reference_g,
                    "Reference dual value for the infeasibility bound");
  solve->add_option("--duals-out", sol.duals_out, "Write final duals");
  solve->add_option("--primal-out", sol.primal_out, "Write final primal candidate");
  solve->add_option("--seed", sol.seed, "Recorded in the manifest")->capture_default_str();

  CompareOptions cmp;
  CLI::App* compare = app.add_subcommand("compare", "Dual-gap comparison of traces");
  compare->add_option("traces", cmp.traces, "Trace CSVs")->required();
  compare->add_option("--reference", cmp.reference,
                      "Trace whose best g is g_hat (default: first trace)");
  compare->add_option("--g-hat", cmp.g_hat, "Explicit g_hat");
  compare->add_option("--threshold", cmp.threshold, "Relative gap threshold")
      ->capture_default_str();
  compare->add_option("-o,--out", cmp.out, "Plot-data CSV");
  compare->add_option("--table", cmp.table, "Summary CSV");

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "Check instance invariants");
  validate->add_option("instance", validate_path, "Instance file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kArtifactVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (generate->parsed()) {
    return CmdGenerate(gen, sources->count() > 0, dests->count() > 0, out, err);
  }
  if (solve->parsed()) return CmdSolve(sol, out, err);
  if (compare->parsed()) return CmdCompare(cmp, out);
  return CmdValidate(validate_path, out, err);
}

}  // namespace

std::string Sha256Hex(const std::string& data) {
  return Sha256Raw(data.data(), data.size());
}

std::string Sha256Hex(const std::vector<std::uint8_t>& data) {
  return Sha256Raw(data.data(), data.size());
}

void WriteFilesAtomically(
    const std::vector<std::pair<fs::path, std::string>>& files) {
  std::vector<fs::path> staged;
  const std::string suffix = ".tmp." + std::to_string(::getpid());
  auto discard = [&staged] {
    std::error_code ignored;
    for (const fs::path& p : staged) fs::remove(p, ignored);
  };
  for (const auto& [path, content] : files) {
    fs::path temp = path;
    temp += suffix;
    std::ofstream stream(temp, std::ios::binary | std::ios::trunc);
    if (!stream) {
      discard();
      throw std::runtime_error("cannot write " + path.string());
    }
    staged.push_back(temp);
    stream.write(content.data(), static_cast<std::streamsize>(content.size()));
    stream.close();
    if (!stream) {
      discard();
      throw std::runtime_error("failed writing " + path.string());
    }
  }
  for (std::size_t k = 0; k < files.size(); ++k) {
    std::error_code ec;
    fs::rename(staged[k], files[k].first, ec);
    if (ec) {
      discard();
      throw std::runtime_error("cannot rename into " + files[k].first.string() +
                               ": " + ec.message());
    }
  }
}

Trace ReadTrace(const fs::path& path) {
  std::ifstream stream(path);
  if (!stream) throw std::runtime_error("cannot open trace " + path.string());
  std::string line;
  if (!std::getline(stream, line)) throw FormatError("empty trace " + path.string());
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  auto column = [&](const std::string& name) -> int {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return static_cast<int>(c);
    }
    return -1;
  };
  const int iter_col = column("iter");
  const int g_col = column("g");
  const int gamma_col = column("gamma");
  if (iter_col < 0 || g_col < 0) {
    throw FormatError("trace " + path.string() + " lacks iter or g columns");
  }
  Trace trace;
  while (std::getline(stream, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw FormatError("ragged row in trace " + path.string());
    }
    try {
      trace.iter.push_back(std::stoll(cells[static_cast<std::size_t>(iter_col)]));
      trace.g.push_back(std::stod(cells[static_cast<std::size_t>(g_col)]));
      if (gamma_col >= 0) {
        trace.gamma.push_back(std::stod(cells[static_cast<std::size_t>(gamma_col)]));
      }
    } catch (const std::logic_error&) {
      throw FormatError("non-numeric cell in trace " + path.string());
    }
  }
  return trace;
}

std::optional<Index> IterationsToThreshold(const Trace& trace, double g_hat,
                                           double rel_threshold) {
  const double limit = rel_threshold * std::abs(g_hat);
  std::optional<Index> reached;
  for (std::size_t r = 0; r < trace.g.size(); ++r) {
    if (std::abs(trace.g[r] - g_hat) <= limit) {
      if (!reached) reached = trace.iter[r];
    } else {
      reached.reset();
    }
  }
  return reached;
}

json SolverConfigToJson(const SolverConfig& config) {
  json doc = {
      {"max_iterations", config.max_iterations},
      {"initial_step_size", config.initial_step_size},
      {"max_step_size", config.max_step_size},
      {"gamma_schedule", config.gamma_schedule.ToString()},
      {"precondition", PreconditionerName(config.precondition)},
      {"trace_stride", config.trace_stride},
      {"warm_start_length", config.warm_start.size()},
  };
  doc["gamma0"] = config.gamma0 ? json(*config.gamma0) : json(nullptr);
  doc["tolerance"] = config.tolerance ? json(*config.tolerance) : json(nullptr);
  doc["reference_g"] = config.reference_g ? json(*config.reference_g) : json(nullptr);
  switch (config.primal_scale) {
    case PrimalScaleMode::kNone:
      doc["primal_scale"] = "none";
      break;
    case PrimalScaleMode::kAuto:
      doc["primal_scale"] = "auto";
      break;
    case PrimalScaleMode::kFile:
      doc["primal_scale"] = "file";
      break;
  }
  return doc;
}

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    return Dispatch(argc, argv, out, err);
  } catch (const ConfigError& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    err << "diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInstance;
  }
}

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("matchlp");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return Run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace matchlp::cli
