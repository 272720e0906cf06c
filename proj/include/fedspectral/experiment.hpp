#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "fedspectral/fed_baseline.hpp"
#include "fedspectral/fed_plus.hpp"
#include "fedspectral/graph.hpp"
#include "fedspectral/label_io.hpp"
#include "fedspectral/metrics.hpp"
#include "fedspectral/partition.hpp"
#include "fedspectral/spectral.hpp"

namespace fedspectral {

enum class Algorithm { global, fedspectral, fedspectral_plus };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::global: return "global";
    case Algorithm::fedspectral: return "fedspectral";
    case Algorithm::fedspectral_plus: return "fedspectral_plus";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "global") return Algorithm::global;
  if (s == "fedspectral") return Algorithm::fedspectral;
  if (s == "fedspectral_plus" || s == "fedspectral+") return Algorithm::fedspectral_plus;
  throw ConfigError("unknown algo '" + s + "' (expected global, fedspectral or fedspectral_plus)");
}

inline EigenMethod parse_eigen_method(const std::string& s) {
  if (s == "automatic" || s == "auto") return EigenMethod::automatic;
  if (s == "reference") return EigenMethod::reference;
  if (s == "subspace") return EigenMethod::subspace;
  throw ConfigError("unknown eigen method '" + s + "' (expected automatic, reference or subspace)");
}

/// Base constant for per-dataset reference seeds; see reference_seed_for().
constexpr Seed kReferenceSeedBase = 0x5eedf00dULL;

/// Environment variable naming the default dataset directory.
constexpr const char* kDataDirEnv = "FEDSPECTRAL_DATA_DIR";

struct ExperimentConfig {
  std::string dataset_path;
  bool directed = false;
  Algorithm algo = Algorithm::fedspectral_plus;
  std::size_t num_clients = 5;
  std::size_t num_clusters = 10;
  std::size_t iters = 1;
  std::size_t global_rounds = 1;
  double overlap = 0.4;
  std::optional<std::size_t> replication;  ///< overrides round(overlap · C)
  Seed master_seed = 0;
  std::size_t num_trials = 1;
  std::optional<Seed> reference_seed;      ///< defaults to reference_seed_for(dataset)
  std::string output_path;
  std::string labels_dir;                  ///< where to write per-node label CSVs, if set
  bool damping = false;
  bool normalize_rows = false;
  EigenMethod eigen_method = EigenMethod::automatic;

  void validate() const {
    if (dataset_path.empty()) throw ConfigError("dataset_path is required");
    if (num_clients < 1) throw ConfigError("num_clients must be at least 1");
    if (num_clusters < 1) throw ConfigError("num_clusters must be at least 1");
    if (iters < 1) throw ConfigError("iters must be at least 1");
    if (global_rounds < 1) throw ConfigError("global_rounds must be at least 1");
    if (num_trials < 1) throw ConfigError("num_trials must be at least 1");
    (void)replication_for(overlap, num_clients);
    if (replication && (*replication < 1 || *replication > num_clients))
      throw ConfigError("replication must lie in [1, num_clients]");
  }

  /// Fields that were set away from their defaults but mean nothing for `algo`.
  std::vector<std::string> ignored_fields() const {
    const ExperimentConfig d;
    std::vector<std::string> out;
    if (algo != Algorithm::fedspectral_plus) {
      if (iters != d.iters) out.push_back("iters");
      if (global_rounds != d.global_rounds) out.push_back("global_rounds");
      if (damping) out.push_back("damping");
    }
    if (algo == Algorithm::global) {
      if (num_clients != d.num_clients) out.push_back("num_clients");
      if (overlap != d.overlap) out.push_back("overlap");
      if (replication) out.push_back("replication");
      if (num_trials != d.num_trials) out.push_back("num_trials");
    }
    return out;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t x = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
  return x;
}

inline double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw ConfigError(key + ": expected a number, got '" + value + "'");
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

}  // namespace detail

/// Sets one field by name. Keys are the ExperimentConfig member names.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = detail::trim(raw);
  if (key == "dataset_path" || key == "dataset") cfg.dataset_path = value;
  else if (key == "directed") cfg.directed = detail::parse_bool(key, value);
  else if (key == "algo") cfg.algo = parse_algorithm(value);
  else if (key == "num_clients") cfg.num_clients = detail::parse_unsigned(key, value);
  else if (key == "num_clusters") cfg.num_clusters = detail::parse_unsigned(key, value);
  else if (key == "iters") cfg.iters = detail::parse_unsigned(key, value);
  else if (key == "global_rounds") cfg.global_rounds = detail::parse_unsigned(key, value);
  else if (key == "overlap") cfg.overlap = detail::parse_real(key, value);
  else if (key == "replication") cfg.replication = detail::parse_unsigned(key, value);
  else if (key == "master_seed" || key == "seed") cfg.master_seed = detail::parse_unsigned(key, value);
  else if (key == "num_trials" || key == "trials") cfg.num_trials = detail::parse_unsigned(key, value);
  else if (key == "reference_seed") cfg.reference_seed = detail::parse_unsigned(key, value);
  else if (key == "output_path" || key == "output") cfg.output_path = value;
  else if (key == "labels_dir") cfg.labels_dir = value;
  else if (key == "damping") cfg.damping = detail::parse_bool(key, value);
  else if (key == "normalize_rows") cfg.normalize_rows = detail::parse_bool(key, value);
  else if (key == "eigen_method") cfg.eigen_method = parse_eigen_method(value);
  else throw ConfigError("unknown config key '" + key + "'");
}

/// "key = value" lines; '#' starts a comment.
inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig cfg = {}) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config: expected 'key = value'", line_no);
    try {
      apply_setting(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ParseError(std::string("config: ") + e.what(), line_no);
    }
  }
  return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path, ExperimentConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(cfg));
}

/// A relative dataset path that does not exist as given is looked up under $FEDSPECTRAL_DATA_DIR.
inline std::string resolve_dataset_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (path.empty() || fs::exists(path) || fs::path(path).is_absolute()) return path;
  if (const char* dir = std::getenv(kDataDirEnv); dir && *dir) {
    fs::path candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  return path;
}

/// Fixed reference seed for a dataset: derived from the file name without extension, so
/// every experiment on one dataset scores against the same global labeling.
inline Seed reference_seed_for(const std::string& dataset_path) {
  return derive_seed(kReferenceSeedBase, std::filesystem::path(dataset_path).stem().string());
}

inline Seed trial_seed(Seed master, std::size_t trial) { return derive_seed(master, trial); }

struct Dataset {
  std::string name;  ///< file stem
  std::string path;
  ParsedGraph parsed;
};

inline Dataset load_dataset(const std::string& path, bool directed) {
  const std::string resolved = resolve_dataset_path(path);
  return Dataset{std::filesystem::path(resolved).stem().string(), resolved, load_edge_list(resolved, directed)};
}

struct ResultRecord {
  std::string dataset;
  Algorithm algo = Algorithm::global;
  std::size_t num_nodes = 0;
  std::size_t num_edges = 0;
  std::size_t num_clients = 0;
  std::size_t num_clusters = 0;
  std::size_t iters = 0;
  std::size_t global_rounds = 0;
  double overlap = 0.0;
  std::size_t replication = 0;
  Seed master_seed = 0;
  Seed reference_seed = 0;
  std::size_t trial = 0;
  Seed trial_seed = 0;
  double similarity = 0.0;
  double wallclock_ms = 0.0;
  std::vector<std::size_t> degenerate_shards;
  std::vector<double> round_drift;
};

inline SpectralOptions spectral_options(const ExperimentConfig& cfg) {
  SpectralOptions o;
  o.method = cfg.eigen_method;
  o.normalize_rows = cfg.normalize_rows;
  return o;
}

inline Labeling reference_labeling(const Graph& g, const ExperimentConfig& cfg, Seed reference_seed) {
  return global_spectral_clustering(g, cfg.num_clusters, reference_seed, spectral_options(cfg));
}

struct TrialOutcome {
  ResultRecord record;
  Labeling labels;
};

/// One trial, fully determined by (graph, reference, cfg, trial_seed).
inline TrialOutcome run_trial(const Dataset& data, const Labeling& reference, const ExperimentConfig& cfg,
                              std::size_t trial, Seed seed_for_trial, Seed reference_seed) {
  const Graph& g = data.parsed.graph;
  const PartitionPlan plan =
      make_partition_plan(cfg.num_clients, cfg.overlap, derive_seed(seed_for_trial, "partition"), cfg.replication);
  TrialOutcome out;
  ResultRecord& r = out.record;
  r.dataset = data.name;
  r.algo = cfg.algo;
  r.num_nodes = g.num_nodes();
  r.num_edges = g.num_edges();
  r.num_clients = cfg.num_clients;
  r.num_clusters = cfg.num_clusters;
  r.iters = cfg.iters;
  r.global_rounds = cfg.global_rounds;
  r.overlap = cfg.overlap;
  r.replication = plan.replication;
  r.master_seed = cfg.master_seed;
  r.reference_seed = reference_seed;
  r.trial = trial;
  r.trial_seed = seed_for_trial;

  const auto start = std::chrono::steady_clock::now();
  const Seed algo_seed = derive_seed(seed_for_trial, "algorithm");
  switch (cfg.algo) {
    case Algorithm::global:
      out.labels = reference;
      break;
    case Algorithm::fedspectral: {
      const auto shards = distribute_edges(g, plan);
      BaselineResult res = fedspectral_server(shards, cfg.num_clusters, algo_seed, spectral_options(cfg));
      out.labels = std::move(res.labels);
      r.degenerate_shards = std::move(res.degenerate_clients);
      break;
    }
    case Algorithm::fedspectral_plus: {
      const auto shards = distribute_edges(g, plan);
      for (const ClientShard& s : shards)
        if (s.graph.num_edges() == 0) r.degenerate_shards.push_back(s.client_id);
      FedPlusConfig fc;
      fc.num_clusters = cfg.num_clusters;
      fc.iters = cfg.iters;
      fc.global_rounds = cfg.global_rounds;
      fc.seed = algo_seed;
      fc.damping = cfg.damping;
      fc.normalize_rows = cfg.normalize_rows;
      FedPlusResult res = run_fedspectral_plus(shards, fc);
      out.labels = std::move(res.labels);
      for (const RoundRecord& rr : res.rounds) r.round_drift.push_back(rr.drift);
      break;
    }
  }
  r.wallclock_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  r.similarity = cluster_similarity(reference, out.labels);
  return out;
}

struct ExperimentRun {
  Labeling reference;
  Seed reference_seed = 0;
  std::vector<ResultRecord> records;
  std::vector<Labeling> trial_labels;
};

/// Caches reference labelings by cluster count so sweeps do not recompute them.
class ReferenceCache {
 public:
  const Labeling& get(const Dataset& data, const ExperimentConfig& cfg, Seed seed) {
    const Key key{cfg.num_clusters, seed, cfg.normalize_rows, static_cast<int>(cfg.eigen_method)};
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, reference_labeling(data.parsed.graph, cfg, seed)).first;
    return it->second;
  }

 private:
  using Key = std::tuple<std::size_t, Seed, bool, int>;
  std::map<Key, Labeling> cache_;
};

inline ExperimentRun run_experiment(const ExperimentConfig& cfg, const Dataset& data, ReferenceCache& cache) {
  cfg.validate();
  if (cfg.num_clusters > data.parsed.graph.num_nodes()) throw ConfigError("num_clusters exceeds the number of nodes");
  ExperimentRun run;
  run.reference_seed = cfg.reference_seed.value_or(reference_seed_for(data.path));
  run.reference = cache.get(data, cfg, run.reference_seed);
  // the global reference scored against itself needs one record only
  const std::size_t trials = cfg.algo == Algorithm::global ? 1 : cfg.num_trials;
  for (std::size_t t = 0; t < trials; ++t) {
    TrialOutcome o = run_trial(data, run.reference, cfg, t, trial_seed(cfg.master_seed, t), run.reference_seed);
    run.records.push_back(std::move(o.record));
    run.trial_labels.push_back(std::move(o.labels));
  }
  return run;
}

inline ExperimentRun run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Dataset data = load_dataset(cfg.dataset_path, cfg.directed);
  ReferenceCache cache;
  return run_experiment(cfg, data, cache);
}

// ---- output ---------------------------------------------------------------

inline constexpr const char* kRecordCsvHeader =
    "dataset,algo,num_nodes,num_edges,num_clients,num_clusters,iters,global_rounds,overlap,replication,"
    "master_seed,reference_seed,trial,trial_seed,similarity,degenerate_shards,final_drift,wallclock_ms";

namespace detail {

inline std::string fmt_real(double x, int precision = 10) {
  std::ostringstream s;
  s << std::setprecision(precision) << x;
  return s.str();
}

}  // namespace detail

inline void write_record_csv(std::ostream& out, const ResultRecord& r) {
  out << r.dataset << ',' << to_string(r.algo) << ',' << r.num_nodes << ',' << r.num_edges << ',' << r.num_clients
      << ',' << r.num_clusters << ',' << r.iters << ',' << r.global_rounds << ',' << detail::fmt_real(r.overlap) << ','
      << r.replication << ',' << r.master_seed << ',' << r.reference_seed << ',' << r.trial << ',' << r.trial_seed
      << ',' << detail::fmt_real(r.similarity, 12) << ',';
  for (std::size_t i = 0; i < r.degenerate_shards.size(); ++i) out << (i ? ";" : "") << r.degenerate_shards[i];
  out << ',' << (r.round_drift.empty() ? std::string() : detail::fmt_real(r.round_drift.back(), 6)) << ','
      << detail::fmt_real(r.wallclock_ms, 6) << '\n';
}

inline void write_records_csv(std::ostream& out, const std::vector<ResultRecord>& records) {
  out << kRecordCsvHeader << '\n';
  for (const auto& r : records) write_record_csv(out, r);
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) throw ContractError("median of empty sample");
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

inline std::vector<double> similarities(const std::vector<ResultRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.similarity);
  return out;
}

/// Writes reference and per-trial labels (original node ids) plus the node-id table.
inline void write_label_files(const std::string& dir, const Dataset& data, const ExperimentRun& run,
                              const std::string& tag) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto& ids = data.parsed.original_ids;
  {
    std::ofstream f(fs::path(dir) / (data.name + "_reference_labels.csv"));
    write_labels_csv(f, run.reference, ids);
  }
  {
    std::ofstream f(fs::path(dir) / (data.name + "_node_map.csv"));
    write_node_map_csv(f, ids);
  }
  for (std::size_t t = 0; t < run.trial_labels.size(); ++t) {
    std::ofstream f(fs::path(dir) / (data.name + "_" + tag + "_trial" + std::to_string(t) + "_labels.csv"));
    write_labels_csv(f, run.trial_labels[t], ids);
  }
}

// ---- sweeps ---------------------------------------------------------------

inline const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> axes{"iters", "global_rounds", "num_clusters", "overlap", "num_clients", "algo"};
  return axes;
}

struct SweepSummary {
  std::string axis_value;
  std::size_t trials = 0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct SweepResult {
  std::string axis;
  std::vector<std::string> values;
  std::vector<ExperimentRun> runs;  ///< one per value
  std::vector<SweepSummary> summaries;
};

inline SweepResult sweep(const ExperimentConfig& base, const Dataset& data, const std::string& axis,
                         const std::vector<std::string>& values, ReferenceCache& cache) {
  const auto& axes = sweep_axes();
  if (std::find(axes.begin(), axes.end(), axis) == axes.end())
    throw ConfigError("unknown sweep axis '" + axis + "'");
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  SweepResult out;
  out.axis = axis;
  out.values = values;
  for (const std::string& v : values) {
    ExperimentConfig cfg = base;
    apply_setting(cfg, axis, v);
    ExperimentRun run = run_experiment(cfg, data, cache);
    const auto sims = similarities(run.records);
    out.summaries.push_back(SweepSummary{v, sims.size(), median(sims), *std::min_element(sims.begin(), sims.end()),
                                         *std::max_element(sims.begin(), sims.end())});
    out.runs.push_back(std::move(run));
  }
  return out;
}

inline SweepResult sweep(const ExperimentConfig& base, const std::string& axis, const std::vector<std::string>& values) {
  const Dataset data = load_dataset(base.dataset_path, base.directed);
  ReferenceCache cache;
  return sweep(base, data, axis, values, cache);
}

/// Long format: one row per (value, trial), prefixed by the axis name and value.
inline void write_sweep_csv(std::ostream& out, const SweepResult& s) {
  out << "axis,axis_value," << kRecordCsvHeader << '\n';
  for (std::size_t i = 0; i < s.runs.size(); ++i)
    for (const auto& r : s.runs[i].records) {
      out << s.axis << ',' << s.values[i] << ',';
      write_record_csv(out, r);
    }
}

inline void write_sweep_summary_csv(std::ostream& out, const SweepResult& s) {
  out << "axis,axis_value,trials,median_similarity,min_similarity,max_similarity\n";
  for (const auto& m : s.summaries)
    out << s.axis << ',' << m.axis_value << ',' << m.trials << ',' << detail::fmt_real(m.median, 12) << ','
        << detail::fmt_real(m.min, 12) << ',' << detail::fmt_real(m.max, 12) << '\n';
}

// ---- dataset verification --------------------------------------------------

struct VerifyReport {
  std::size_t expected_nodes = 0;
  std::size_t expected_edges = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;      ///< undirected edges after dedup
  std::size_t arcs = 0;       ///< data lines in the file
  std::size_t compared_edges = 0;  ///< arcs for directed input, undirected edges otherwise
  bool pass = false;
};

/// Parses `path` and compares node and edge counts. For a directed file the expected edge
/// count refers to arcs as listed; the undirected count is reported alongside.
inline VerifyReport verify_dataset(const std::string& path, bool directed, std::size_t expected_nodes,
                                   std::size_t expected_edges) {
  const ParsedGraph p = load_edge_list(resolve_dataset_path(path), directed);
  VerifyReport r;
  r.expected_nodes = expected_nodes;
  r.expected_edges = expected_edges;
  r.nodes = p.graph.num_nodes();
  r.edges = p.graph.num_edges();
  r.arcs = p.stats.data_lines;
  r.compared_edges = directed ? r.arcs : r.edges;
  r.pass = r.nodes == expected_nodes && r.compared_edges == expected_edges;
  return r;
}

inline void print_verify_report(std::ostream& out, const VerifyReport& r, bool directed) {
  out << (r.pass ? "PASS" : "FAIL") << " nodes=" << r.nodes << " (expected " << r.expected_nodes << ") "
      << (directed ? "arcs=" : "edges=") << r.compared_edges << " (expected " << r.expected_edges << ")";
  if (directed) out << " undirected_edges=" << r.edges;
  out << '\n';
}

}  // namespace fedspectral
