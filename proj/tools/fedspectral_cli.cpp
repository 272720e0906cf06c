// fedspectral: run federated spectral clustering experiments from the command line.
//
//   fedspectral run --config exp.cfg --num_clients 8 --json
//   fedspectral sweep --dataset facebook_combined.txt --axis overlap --values 0.2,0.4,0.6
//   fedspectral metric --global ref.csv --aggregated fed.csv
//   fedspectral verify --dataset email-Eu-core.txt --directed --nodes 1005 --edges 25571
//   fedspectral partition-dump --dataset g.txt --num_clients 5 --overlap 0.4 --out shards/

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fedspectral/fedspectral.hpp"

namespace fs = std::filesystem;
using namespace fedspectral;
using nlohmann::json;

namespace {

struct Override {
  std::string key;
  std::string names;  // CLI11 name list
  std::string help;
};

const std::vector<Override> kOverrides{
    {"dataset_path", "--dataset_path,--dataset", "edge list (relative paths also looked up under $FEDSPECTRAL_DATA_DIR)"},
    {"algo", "--algo", "global, fedspectral or fedspectral_plus"},
    {"num_clients", "--num_clients", "number of simulated clients"},
    {"num_clusters", "--num_clusters,-k", "number of clusters K"},
    {"iters", "--iters", "local power iterations per round"},
    {"global_rounds", "--global_rounds", "server rounds"},
    {"overlap", "--overlap", "edge overlap fraction in (0, 1]"},
    {"replication", "--replication", "clients per edge, overrides overlap"},
    {"master_seed", "--master_seed,--seed", "master seed"},
    {"num_trials", "--num_trials,--trials", "independent trials"},
    {"reference_seed", "--reference_seed", "seed of the global reference clustering"},
    {"output_path", "--output_path,-o", "write results here instead of stdout"},
    {"labels_dir", "--labels_dir", "write per-node label CSVs into this directory"},
    {"eigen_method", "--eigen_method", "automatic, reference or subspace"},
};

const std::vector<Override> kSwitches{
    {"directed", "--directed", "input lists arcs; symmetrize them"},
    {"damping", "--damping", "clients multiply by (I + M)/2"},
    {"normalize_rows", "--normalize_rows", "unit-length embedding rows before k-means"},
};

/// Experiment flags shared by `run` and `sweep`. Values from --config are applied first,
/// then any flag given on the command line.
struct ExperimentArgs {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, CLI::Option*> switches;
  bool json = false;

  void attach(CLI::App& app) {
    app.add_option("-c,--config", config_file, "key = value config file")->check(CLI::ExistingFile);
    for (const auto& o : kOverrides) options[o.key] = app.add_option(o.names, values[o.key], o.help);
    for (const auto& o : kSwitches) switches[o.key] = app.add_flag(o.names, o.help);
    app.add_flag("--json", json, "JSON lines instead of CSV");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    if (!config_file.empty()) cfg = load_config_file(config_file);
    for (const auto& [key, opt] : options)
      if (opt->count()) apply_setting(cfg, key, values.at(key));
    for (const auto& [key, opt] : switches)
      if (opt->count()) apply_setting(cfg, key, "true");
    return cfg;
  }
};

json to_json(const ResultRecord& r) {
  return json{{"dataset", r.dataset},
              {"algo", to_string(r.algo)},
              {"num_nodes", r.num_nodes},
              {"num_edges", r.num_edges},
              {"num_clients", r.num_clients},
              {"num_clusters", r.num_clusters},
              {"iters", r.iters},
              {"global_rounds", r.global_rounds},
              {"overlap", r.overlap},
              {"replication", r.replication},
              {"master_seed", r.master_seed},
              {"reference_seed", r.reference_seed},
              {"trial", r.trial},
              {"trial_seed", r.trial_seed},
              {"similarity", r.similarity},
              {"degenerate_shards", r.degenerate_shards},
              {"round_drift", r.round_drift},
              {"wallclock_ms", r.wallclock_ms}};
}

/// stdout unless a path was configured.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot write '" + path + "'");
    }
  }
  std::ostream& out() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void warn_ignored(const ExperimentConfig& cfg) {
  for (const auto& f : cfg.ignored_fields())
    std::cerr << "warning: " << f << " has no effect with algo=" << to_string(cfg.algo) << '\n';
}

int cmd_run(const ExperimentArgs& args) {
  const ExperimentConfig cfg = args.resolve();
  cfg.validate();
  warn_ignored(cfg);
  const Dataset data = load_dataset(cfg.dataset_path, cfg.directed);
  ReferenceCache cache;
  const ExperimentRun run = run_experiment(cfg, data, cache);
  Sink sink(cfg.output_path);
  if (args.json) {
    for (const auto& r : run.records) sink.out() << to_json(r).dump() << '\n';
  } else {
    write_records_csv(sink.out(), run.records);
  }
  if (!cfg.labels_dir.empty()) write_label_files(cfg.labels_dir, data, run, to_string(cfg.algo));
  const auto sims = similarities(run.records);
  std::cerr << data.name << ": N=" << data.parsed.graph.num_nodes() << " edges=" << data.parsed.graph.num_edges()
            << " median similarity " << median(sims) << " over " << sims.size() << " trial(s)\n";
  return 0;
}

int cmd_sweep(const ExperimentArgs& args, const std::string& axis, const std::vector<std::string>& values,
              const std::string& summary_path) {
  const ExperimentConfig cfg = args.resolve();
  cfg.validate();
  const Dataset data = load_dataset(cfg.dataset_path, cfg.directed);
  ReferenceCache cache;
  const SweepResult s = sweep(cfg, data, axis, values, cache);
  Sink sink(cfg.output_path);
  if (args.json) {
    for (std::size_t i = 0; i < s.runs.size(); ++i)
      for (const auto& r : s.runs[i].records) {
        json j = to_json(r);
        j["axis"] = s.axis;
        j["axis_value"] = s.values[i];
        sink.out() << j.dump() << '\n';
      }
  } else {
    write_sweep_csv(sink.out(), s);
  }
  if (!summary_path.empty()) {
    Sink summary(summary_path);
    write_sweep_summary_csv(summary.out(), s);
  }
  if (!cfg.labels_dir.empty())
    for (std::size_t i = 0; i < s.runs.size(); ++i)
      write_label_files(cfg.labels_dir, data, s.runs[i], axis + "-" + s.values[i]);
  for (const auto& m : s.summaries)
    std::cerr << axis << '=' << m.axis_value << ": median " << m.median << " [" << m.min << ", " << m.max << "]\n";
  return 0;
}

int cmd_metric(const std::string& global_path, const std::string& aggregated_path, bool as_json) {
  const auto [g, a] = align_labels(load_labels_csv(global_path), load_labels_csv(aggregated_path));
  const double sim = cluster_similarity(g, a);
  if (as_json)
    std::cout << json{{"global", global_path}, {"aggregated", aggregated_path}, {"num_nodes", g.size()},
                      {"similarity", sim}}.dump()
              << '\n';
  else
    std::cout << std::setprecision(12) << sim << '\n';
  return 0;
}

int cmd_verify(const std::string& path, bool directed, std::size_t nodes, std::size_t edges, bool as_json) {
  const VerifyReport r = verify_dataset(path, directed, nodes, edges);
  if (as_json)
    std::cout << json{{"dataset", path}, {"pass", r.pass},         {"nodes", r.nodes},
                      {"expected_nodes", r.expected_nodes},         {"arcs", r.arcs},
                      {"undirected_edges", r.edges},                {"expected_edges", r.expected_edges}}
                     .dump()
              << '\n';
  else
    print_verify_report(std::cout, r, directed);
  return r.pass ? 0 : 1;
}

int cmd_partition_dump(const ExperimentArgs& args, const std::string& out_dir, std::size_t trial) {
  const ExperimentConfig cfg = args.resolve();
  cfg.validate();
  const Dataset data = load_dataset(cfg.dataset_path, cfg.directed);
  const PartitionPlan plan = make_partition_plan(
      cfg.num_clients, cfg.overlap, derive_seed(trial_seed(cfg.master_seed, trial), "partition"), cfg.replication);
  const auto shards = distribute_edges(data.parsed.graph, plan);
  fs::create_directories(out_dir);
  for (const ClientShard& s : shards) {
    std::ofstream f(fs::path(out_dir) / (data.name + "_client" + std::to_string(s.client_id) + ".txt"));
    write_shard(f, s, plan);
    if (args.json)
      std::cout << json{{"client_id", s.client_id}, {"num_edges", s.graph.num_edges()}}.dump() << '\n';
    else
      std::cout << "client " << s.client_id << ": " << s.graph.num_edges() << " edges\n";
  }
  std::ofstream ids(fs::path(out_dir) / (data.name + "_node_map.csv"));
  write_node_map_csv(ids, data.parsed.original_ids);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated spectral clustering simulator"};
  app.require_subcommand(1);

  ExperimentArgs run_args;
  CLI::App* run = app.add_subcommand("run", "run trials of one configuration and score them");
  run_args.attach(*run);

  ExperimentArgs sweep_args;
  std::string axis, summary_path;
  std::vector<std::string> values;
  CLI::App* sw = app.add_subcommand("sweep", "vary one parameter over a list of values");
  sweep_args.attach(*sw);
  sw->add_option("--axis", axis, "iters, global_rounds, num_clusters, overlap, num_clients or algo")->required();
  sw->add_option("--values", values, "comma-separated values")->required()->delimiter(',');
  sw->add_option("--summary", summary_path, "also write median/min/max per value to this CSV");

  std::string global_path, aggregated_path;
  bool metric_json = false;
  CLI::App* metric = app.add_subcommand("metric", "score two label files (node_id,label)");
  metric->add_option("--global", global_path, "reference labels")->required()->check(CLI::ExistingFile);
  metric->add_option("--aggregated", aggregated_path, "labels to score")->required()->check(CLI::ExistingFile);
  metric->add_flag("--json", metric_json);

  std::string verify_path;
  bool verify_directed = false, verify_json = false;
  std::size_t expected_nodes = 0, expected_edges = 0;
  CLI::App* verify = app.add_subcommand("verify", "check node and edge counts of an edge list");
  verify->add_option("--dataset,--dataset_path", verify_path)->required();
  verify->add_flag("--directed", verify_directed, "count arcs as listed");
  verify->add_option("--nodes", expected_nodes)->required();
  verify->add_option("--edges", expected_edges, "edges (arcs when --directed)")->required();
  verify->add_flag("--json", verify_json);

  ExperimentArgs dump_args;
  std::string dump_dir = "shards";
  std::size_t dump_trial = 0;
  CLI::App* dump = app.add_subcommand("partition-dump", "write each client's shard as an edge list");
  dump_args.attach(*dump);
  dump->add_option("--out", dump_dir, "output directory");
  dump->add_option("--trial", dump_trial, "trial index whose partition to dump");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_args);
    if (*sw) return cmd_sweep(sweep_args, axis, values, summary_path);
    if (*metric) return cmd_metric(global_path, aggregated_path, metric_json);
    if (*verify) return cmd_verify(verify_path, verify_directed, expected_nodes, expected_edges, verify_json);
    if (*dump) return cmd_partition_dump(dump_args, dump_dir, dump_trial);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
