// qasched: command-line front end for instance generation, gap scans,
// QAOA parameter optimisation and schedule derivation.
//
// Every run writes `<command>.manifest.json` into the output directory with
// the configuration, input and output SHA-256 digests, and the wall time.
// Data files themselves carry no timestamps, so identical flags give
// byte-identical data.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "qasched/qasched.hpp"

namespace fs = std::filesystem;
namespace qs = qasched;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw qs::Error(qs::ErrorKind::io, "SHA-256 digest failed");
  }
  EVP_MD_CTX_free(ctx);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xF];
  }
  return out;
}

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string out = ".";
  std::size_t jobs = 1;
  std::string format = "all";

  bool csv() const { return format == "csv" || format == "all"; }
  bool json_out() const { return format == "json" || format == "all"; }
};

/// Collects inputs and outputs of one command and writes the manifest.
class Run {
 public:
  Run(std::string command, const GlobalOptions& g)
      : command_(std::move(command)), dir_(g.out), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
    config_["seed"] = g.seed;
    config_["out"] = g.out;
    config_["jobs"] = g.jobs;
    config_["format"] = g.format;
  }

  json& config() { return config_; }
  const fs::path& dir() const { return dir_; }

  std::string read_input(const fs::path& path) {
    std::string content = qs::read_file(path);
    inputs_.push_back({{"path", path.string()}, {"sha256", sha256_hex(content)}});
    input_paths_.push_back(fs::weakly_canonical(path));
    return content;
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    const auto canonical = fs::weakly_canonical(path);
    for (const auto& in : input_paths_)
      if (in == canonical) throw qs::Error(qs::ErrorKind::io, "refusing to overwrite input " + path.string());
    qs::write_file(path, content);
    outputs_.push_back({{"path", name}, {"sha256", sha256_hex(content)}});
  }

  void finish(std::uint64_t seed) {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json manifest{{"command", command_},  {"config", config_},   {"inputs", inputs_},
                  {"outputs", outputs_},  {"seed", seed},       {"version", kVersion},
                  {"wall_time_seconds", seconds}};
    qs::write_file(dir_ / (command_ + ".manifest.json"), manifest.dump(2) + "\n");
  }

 private:
  std::string command_;
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  json config_ = json::object();
  json inputs_ = json::array();
  json outputs_ = json::array();
  std::vector<fs::path> input_paths_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// File name stem without any of the tool's own suffixes.
std::string stem_of(const fs::path& path) {
  std::string name = path.filename().string();
  for (const char* suffix : {".trace.json", ".gap.json", ".qubo", ".json", ".txt"}) {
    const std::string s(suffix);
    if (name.size() > s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0)
      return name.substr(0, name.size() - s.size());
  }
  return path.stem().string();
}

qs::QuboInstance parse_instance(const fs::path& path, const std::string& content) {
  if (path.extension() == ".json") {
    try {
      return qs::qubo_from_json(json::parse(content));
    } catch (const json::exception& e) {
      throw qs::Error(qs::ErrorKind::parse, path.string() + ": " + e.what());
    }
  }
  return qs::parse_text(content);
}

json parse_json(const fs::path& path, const std::string& content) {
  try {
    return json::parse(content);
  } catch (const json::exception& e) {
    throw qs::Error(qs::ErrorKind::parse, path.string() + ": " + e.what());
  }
}

std::vector<std::size_t> parse_edges(const std::vector<std::size_t>& edges) {
  if (edges.size() < 2) throw qs::Error(qs::ErrorKind::validation, "--buckets needs at least two edges");
  return edges;
}

std::string pad(std::size_t k, std::size_t width) {
  std::string s = std::to_string(k);
  return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

// ---------------------------------------------------------------------------

struct GenerateOptions {
  std::size_t count = 1;
  qs::GeneratorConfig gen;
};

void cmd_generate(const GlobalOptions& g, const GenerateOptions& o) {
  Run run("generate", g);
  auto& c = run.config();
  c["count"] = o.count;
  c["layers"] = o.gen.layers;
  c["tracks"] = o.gen.tracks;
  c["noise"] = o.gen.noise_hits;
  c["angular_window"] = o.gen.angular_window;
  c["curvature_window"] = o.gen.curvature_window;
  c["segment_width"] = o.gen.segment_width;
  c["max_curvature"] = o.gen.max_curvature;
  c["hit_jitter"] = o.gen.hit_jitter;
  c["reward"] = o.gen.reward;
  c["penalty"] = o.gen.conflict_penalty;
  c["implausible_bias"] = o.gen.implausible_bias;
  c["max_vars"] = o.gen.max_vars;
  o.gen.validate();

  std::string table = "index,seed,status,candidates,n,file,truth\n";
  json summary = json::array();
  std::size_t discarded = 0;
  for (std::size_t k = 0; k < o.count; ++k) {
    auto cfg = o.gen;
    cfg.seed = g.seed + k;
    const auto result = qs::generate_triplet_instance(cfg);
    std::string status = result.status == qs::GenerationStatus::ok         ? "ok"
                         : result.status == qs::GenerationStatus::oversized ? "oversized"
                                                                            : "empty";
    std::string file, truth;
    std::size_t n = 0;
    if (!result.discarded()) {
      const auto& inst = *result.instance;
      n = inst.qubo.size();
      file = "instance_" + pad(k, 4) + ".qubo";
      run.write(file, qs::to_text(inst.qubo));
      for (auto b : inst.truth().bits) truth += static_cast<char>('0' + b);
      std::cout << file << " n=" << n << "\n";
    } else {
      ++discarded;
      std::cout << "seed " << cfg.seed << " discarded (" << status << ", " << result.candidate_count
                << " candidates)\n";
    }
    table += std::to_string(k) + ',' + std::to_string(cfg.seed) + ',' + status + ',' +
             std::to_string(result.candidate_count) + ',' + std::to_string(n) + ',' + file + ',' + truth + '\n';
    summary.push_back({{"index", k},
                       {"seed", cfg.seed},
                       {"status", status},
                       {"candidates", result.candidate_count},
                       {"n", n},
                       {"file", file},
                       {"truth", truth}});
  }
  std::cout << "generated " << o.count - discarded << ", discarded " << discarded << "\n";
  if (g.csv()) run.write("instances.csv", table);
  if (g.json_out()) run.write("instances.json", dump(summary));
  run.finish(g.seed);
}

// ---------------------------------------------------------------------------

struct ScanOptions {
  std::vector<std::string> inputs;
  std::size_t points = 50;
  double tolerance = 1e-8;
  std::size_t dense_threshold = 12;
  std::size_t max_qubits = qs::kDefaultSimulationBound;
  std::size_t max_iterations = 0;  // 0: solver default
  std::vector<std::size_t> buckets{4, 8, 12, 16, 20, 24};
};

void write_aggregate(Run& run, const GlobalOptions& g, const std::vector<qs::GapScan>& scans,
                     const std::vector<std::size_t>& edges) {
  const auto table = qs::aggregate_scans(scans, edges);
  if (g.csv()) {
    run.write("aggregate.csv", qs::aggregate_csv(table));
    run.write("aggregate_curves.csv", qs::aggregate_curves_csv(table));
  }
  if (g.json_out()) run.write("aggregate.json", dump(qs::to_json(table)));
  for (const auto& b : table.buckets)
    std::cout << "bucket [" << b.lo << ", " << b.hi << "): " << b.count << " scans, s_min mean "
              << qs::format_real(b.s_min_mean) << "\n";
}

void cmd_gap_scan(const GlobalOptions& g, const ScanOptions& o) {
  Run run("gap-scan", g);
  auto& c = run.config();
  c["inputs"] = o.inputs;
  c["points"] = o.points;
  c["tolerance"] = o.tolerance;
  c["dense_threshold"] = o.dense_threshold;
  c["max_qubits"] = o.max_qubits;
  c["max_iterations"] = o.max_iterations;
  c["buckets"] = o.buckets;

  qs::SolverOptions solver;
  solver.tolerance = o.tolerance;
  solver.dense_threshold = o.dense_threshold;
  solver.seed = g.seed;
  if (o.max_iterations > 0) solver.max_iterations = o.max_iterations;

  std::vector<qs::GapScan> scans;
  for (const auto& input : o.inputs) {
    const fs::path path(input);
    const auto q = parse_instance(path, run.read_input(path));
    const auto diag = qs::cost_diagonal(q, o.max_qubits);
    auto scan = qs::gap_scan(diag, o.points, solver, g.jobs, q.label());
    const std::string stem = stem_of(path);
    if (g.csv()) run.write(stem + ".gap.csv", qs::gap_scan_csv(scan));
    if (g.json_out()) run.write(stem + ".gap.json", dump(qs::to_json(scan)));
    std::cout << stem << ": n=" << scan.qubits << " s_min=" << qs::format_real(scan.s_min)
              << " gap_min=" << qs::format_real(scan.gap_min) << "\n";
    scans.push_back(std::move(scan));
  }
  if (scans.size() > 1) write_aggregate(run, g, scans, parse_edges(o.buckets));
  run.finish(g.seed);
}

struct AggregateOptions {
  std::vector<std::string> inputs;
  std::vector<std::size_t> buckets{4, 8, 12, 16, 20, 24};
};

void cmd_aggregate(const GlobalOptions& g, const AggregateOptions& o) {
  Run run("aggregate", g);
  run.config()["inputs"] = o.inputs;
  run.config()["buckets"] = o.buckets;
  std::vector<qs::GapScan> scans;
  for (const auto& input : o.inputs) {
    const fs::path path(input);
    scans.push_back(qs::gap_scan_from_json(parse_json(path, run.read_input(path))));
  }
  write_aggregate(run, g, scans, parse_edges(o.buckets));
  run.finish(g.seed);
}

// ---------------------------------------------------------------------------

struct OptimiseOptions {
  std::string input;
  std::string strategy = "fourier";
  std::vector<std::size_t> q_max{5};
  std::size_t p_max = 50;
  std::size_t max_evaluations = 1000;
  double initial_step = 0.5;
  double final_tolerance = 1e-4;
  std::string optimiser = "cobyla";
  std::string reference;
  std::size_t max_qubits = qs::kDefaultSimulationBound;
};

void cmd_optimise(const GlobalOptions& g, const OptimiseOptions& o) {
  Run run("optimise", g);
  auto& c = run.config();
  c["input"] = o.input;
  c["strategy"] = o.strategy;
  c["q_max"] = o.q_max;
  c["p_max"] = o.p_max;
  c["max_evals"] = o.max_evaluations;
  c["step"] = o.initial_step;
  c["tol"] = o.final_tolerance;
  c["optimiser"] = o.optimiser;
  c["reference"] = o.reference;
  c["max_qubits"] = o.max_qubits;

  const fs::path path(o.input);
  const auto q = parse_instance(path, run.read_input(path));
  const auto diag = qs::cost_diagonal(q, o.max_qubits);

  qs::StrategyConfig cfg;
  cfg.p_max = o.p_max;
  cfg.seed = g.seed;
  cfg.optimiser.max_evaluations = o.max_evaluations;
  cfg.optimiser.initial_step = o.initial_step;
  cfg.optimiser.final_tolerance = o.final_tolerance;
  cfg.optimiser.method = o.optimiser == "nelder-mead" ? qs::MinimiserMethod::nelder_mead
                                                      : qs::MinimiserMethod::linear_trust_region;

  std::optional<qs::OptimisationTrace> reference;
  if (!o.reference.empty()) {
    const fs::path ref_path(o.reference);
    reference = qs::trace_from_json(parse_json(ref_path, run.read_input(ref_path)));
  }

  const std::string stem = stem_of(path);
  auto emit = [&](qs::OptimisationTrace trace, const std::string& name) {
    trace.label = q.label();
    if (g.csv()) run.write(name + ".trace.csv", qs::trace_csv(trace));
    if (g.json_out()) run.write(name + ".trace.json", dump(qs::to_json(trace)));
    const auto& last = trace.levels.back();
    std::cout << name << ": p=" << last.p << " energy=" << qs::format_real(last.energy)
              << " ratio=" << qs::format_real(last.ratio_normalised) << "\n";
    return trace;
  };

  if (o.strategy == "ri") {
    cfg.q_max = 1;  // unused by random initialisation
    emit(qs::random_init_strategy(diag, cfg), stem + ".ri.s" + std::to_string(g.seed));
  } else {
    // Ascending q_max; each run is warm-start dominated by the previous one.
    auto caps = o.q_max;
    std::sort(caps.begin(), caps.end());
    caps.erase(std::unique(caps.begin(), caps.end()), caps.end());
    std::optional<qs::OptimisationTrace> previous = reference;
    for (std::size_t cap : caps) {
      cfg.q_max = cap;
      auto trace = qs::fourier_strategy(diag, cfg, previous ? &*previous : nullptr);
      previous = emit(std::move(trace), stem + ".fourier.q" + std::to_string(cap) + ".s" + std::to_string(g.seed));
    }
  }
  run.finish(g.seed);
}

// ---------------------------------------------------------------------------

struct ScheduleOptions {
  std::string trace;
  std::size_t level = 0;  // 0: deepest
  std::string gap_scan;
};

void cmd_schedule(const GlobalOptions& g, const ScheduleOptions& o) {
  Run run("schedule", g);
  run.config()["trace"] = o.trace;
  run.config()["level"] = o.level;
  run.config()["gap_scan"] = o.gap_scan;

  const fs::path path(o.trace);
  const auto trace = qs::trace_from_json(parse_json(path, run.read_input(path)));
  const std::size_t p = o.level == 0 ? trace.levels.size() : o.level;
  const auto& level = trace.level(p);
  const auto schedule = qs::derive_schedule(level.params());

  const std::string name = stem_of(path) + ".p" + std::to_string(p);
  json report = qs::to_json(schedule);
  report["source"] = {{"trace", path.filename().string()}, {"level", p},
                      {"strategy", qs::to_string(trace.strategy)}, {"q_max", trace.q_max}};
  report["max_linear_deviation"] = qs::max_linear_deviation(schedule);
  std::cout << name << ": T=" << qs::format_real(schedule.total_time())
            << " max_linear_deviation=" << qs::format_real(qs::max_linear_deviation(schedule)) << "\n";
  if (!o.gap_scan.empty()) {
    const fs::path scan_path(o.gap_scan);
    const auto scan = qs::gap_scan_from_json(parse_json(scan_path, run.read_input(scan_path)));
    report["s_min"] = scan.s_min;
    report["gap_min"] = scan.gap_min;
    if (scan.s_min > 0.0 && scan.s_min < 1.0) {
      const auto dwell = qs::linear_dwell_comparison(schedule, scan.s_min);
      report["dwell_fraction"] = dwell.dwell_fraction;
      report["linear_fraction"] = dwell.linear_fraction;
      std::cout << "s_min=" << qs::format_real(scan.s_min) << " dwell_fraction="
                << qs::format_real(dwell.dwell_fraction)
                << " linear_fraction=" << qs::format_real(dwell.linear_fraction) << "\n";
    } else {
      // The dwell comparison is only defined for thresholds inside (0, 1).
      report["dwell_fraction"] = nullptr;
      report["linear_fraction"] = nullptr;
      std::cout << "s_min=" << qs::format_real(scan.s_min) << " (at an endpoint, no dwell comparison)\n";
    }
  }
  if (g.csv()) run.write(name + ".schedule.csv", qs::schedule_csv(schedule));
  if (g.json_out()) run.write(name + ".schedule.json", dump(report));
  run.finish(g.seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-gap scans, QAOA parameter optimisation and annealing schedules for QUBO instances"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "Data formats to write")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "json", "all"}));

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Generate synthetic triplet QUBO instances");
  generate->add_option("--count", gen.count, "Number of generator runs")->capture_default_str();
  generate->add_option("--layers", gen.gen.layers, "Detector layers")->capture_default_str();
  generate->add_option("--tracks", gen.gen.tracks, "True tracks")->capture_default_str();
  generate->add_option("--noise", gen.gen.noise_hits, "Noise hits per layer")->capture_default_str();
  generate->add_option("--angular-window", gen.gen.angular_window)->capture_default_str();
  generate->add_option("--curvature-window", gen.gen.curvature_window)->capture_default_str();
  generate->add_option("--segment-width", gen.gen.segment_width)->capture_default_str();
  generate->add_option("--max-curvature", gen.gen.max_curvature)->capture_default_str();
  generate->add_option("--hit-jitter", gen.gen.hit_jitter)->capture_default_str();
  generate->add_option("--reward", gen.gen.reward)->capture_default_str();
  generate->add_option("--penalty", gen.gen.conflict_penalty)->capture_default_str();
  generate->add_option("--implausible-bias", gen.gen.implausible_bias)->capture_default_str();
  generate->add_option("--max-vars", gen.gen.max_vars, "Discard instances above this size")->capture_default_str();

  ScanOptions scan;
  auto* gap = app.add_subcommand("gap-scan", "Scan the two lowest levels of H(s) over s in [0, 1]");
  gap->add_option("instances", scan.inputs, "Instance files")->required()->check(CLI::ExistingFile);
  gap->add_option("--points", scan.points, "Grid points")->capture_default_str();
  gap->add_option("--tol", scan.tolerance, "Eigenvalue tolerance")->capture_default_str();
  gap->add_option("--dense-threshold", scan.dense_threshold, "Largest n for the dense solver")->capture_default_str();
  gap->add_option("--max-qubits", scan.max_qubits, "Simulation bound")->capture_default_str();
  gap->add_option("--max-iterations", scan.max_iterations,
                  "Matrix-vector products per eigenpair for the iterative solver (0: default)")
      ->capture_default_str();
  gap->add_option("--buckets", scan.buckets, "Qubit-count bucket edges for the aggregate table")
      ->delimiter(',')->allow_extra_args(false)
      ->capture_default_str();

  AggregateOptions agg;
  auto* aggregate = app.add_subcommand("aggregate", "Aggregate gap-scan JSON files by qubit count");
  aggregate->add_option("scans", agg.inputs, "Gap scan JSON files")->required()->check(CLI::ExistingFile);
  aggregate->add_option("--buckets", agg.buckets, "Bucket edges")->delimiter(',')->allow_extra_args(false)->capture_default_str();

  OptimiseOptions opt;
  auto* optimise = app.add_subcommand("optimise", "Optimise QAOA parameters layer by layer");
  optimise->add_option("instance", opt.input, "Instance file")->required()->check(CLI::ExistingFile);
  optimise->add_option("--strategy", opt.strategy)->capture_default_str()->check(CLI::IsMember({"fourier", "ri"}));
  optimise->add_option("--q-max", opt.q_max, "Frequency caps; several values run a warm-started sweep")
      ->delimiter(',')->allow_extra_args(false)
      ->capture_default_str();
  optimise->add_option("--p-max", opt.p_max, "Maximum depth")->capture_default_str();
  optimise->add_option("--max-evals", opt.max_evaluations, "Evaluations per level")->capture_default_str();
  optimise->add_option("--step", opt.initial_step, "Initial step")->capture_default_str();
  optimise->add_option("--tol", opt.final_tolerance, "Final step tolerance")->capture_default_str();
  optimise->add_option("--optimiser", opt.optimiser)
      ->capture_default_str()
      ->check(CLI::IsMember({"cobyla", "nelder-mead"}));
  optimise->add_option("--reference", opt.reference, "Fourier trace whose optima seed each level")
      ->check(CLI::ExistingFile);
  optimise->add_option("--max-qubits", opt.max_qubits, "Simulation bound")->capture_default_str();

  ScheduleOptions sched;
  auto* schedule = app.add_subcommand("schedule", "Derive an annealing schedule from a trace level");
  schedule->add_option("trace", sched.trace, "Trace JSON file")->required()->check(CLI::ExistingFile);
  schedule->add_option("--level", sched.level, "Depth p to use (default: deepest)");
  schedule->add_option("--gap-scan", sched.gap_scan, "Gap scan JSON of the same instance")
      ->check(CLI::ExistingFile);

  for (auto* sub : {generate, gap, aggregate, optimise, schedule}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*generate) cmd_generate(g, gen);
    if (*gap) cmd_gap_scan(g, scan);
    if (*aggregate) cmd_aggregate(g, agg);
    if (*optimise) cmd_optimise(g, opt);
    if (*schedule) cmd_schedule(g, sched);
  } catch (const qs::Error& e) {
    std::cerr << "error (" << qs::to_string(e.kind()) << "): " << e.what() << "\n";
    return qs::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
