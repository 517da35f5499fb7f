// wsngsp: command-line front end for graph learning, sampling-set
// partitioning and duty-cycle experiments on sensor-network data.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "wsngsp/dataset.hpp"
#include "wsngsp/experiment.hpp"
#include "wsngsp/io.hpp"
#include "wsngsp/learn.hpp"
#include "wsngsp/lifetime.hpp"
#include "wsngsp/reconstruct.hpp"
#include "wsngsp/sampling.hpp"

namespace fs = std::filesystem;
using namespace wsngsp;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::string output_dir = ".";
};

struct ReconOptions {
  double eta = 1.0;
  std::string shift = "normalized";
  bool no_clamp = false;
  bool tune = false;
  double eta_min = 1e-3;
  double eta_max = 1e3;
  int eta_points = 13;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--eta", eta, "Smoothness weight")->capture_default_str();
    cmd->add_option("--shift", shift, "Graph shift: normalized or raw")
        ->check(CLI::IsMember({"normalized", "raw"}))
        ->capture_default_str();
    cmd->add_flag("--no-clamp", no_clamp, "Do not overwrite sampled vertices after solving");
    cmd->add_flag("--tune-eta", tune, "Pick eta from a log-spaced grid on validation snapshots");
    cmd->add_option("--eta-min", eta_min)->capture_default_str();
    cmd->add_option("--eta-max", eta_max)->capture_default_str();
    cmd->add_option("--eta-points", eta_points)->capture_default_str();
  }

  ReconstructionConfig config() const {
    ReconstructionConfig cfg;
    cfg.eta = eta;
    cfg.shift = shift_mode_from_string(shift);
    cfg.clamp_sampled = !no_clamp;
    return cfg;
  }
};

struct DataOptions {
  std::string graph;
  std::string snapshots;
  std::string mask;

  void add_to(CLI::App* cmd, bool need_graph) {
    if (need_graph) cmd->add_option("--graph", graph, "Graph JSON")->required();
    cmd->add_option("--snapshots", snapshots, "Snapshot CSV")->required();
    cmd->add_option("--mask", mask, "Receipt mask CSV matching --snapshots");
  }
};

void add_learn_options(CLI::App* cmd, LearnConfig& cfg) {
  cmd->add_option("--alpha", cfg.alpha, "Log-degree barrier weight")->capture_default_str();
  cmd->add_option("--beta", cfg.beta, "Frobenius weight")->capture_default_str();
  cmd->add_option("--tol", cfg.tol, "Relative iterate change for convergence")
      ->capture_default_str();
  cmd->add_option("--max-iters", cfg.max_iters)->capture_default_str();
  cmd->add_option("--prune-rel", cfg.prune_rel, "Prune weights below this share of the max")
      ->capture_default_str();
}

Graph load_graph(const std::string& path) {
  return io::graph_from_json(nlohmann::json::parse(io::read_file(path)));
}

SnapshotWindow load_snapshots(const DataOptions& d) {
  return io::read_snapshots(d.snapshots, d.mask.empty() ? fs::path{} : fs::path{d.mask});
}

ReconstructionConfig resolve_recon(const ReconOptions& opts, const Graph& g,
                                   const SignalMatrix& X, const std::vector<int>& order) {
  ReconstructionConfig cfg = opts.config();
  if (opts.tune) {
    Mask mask = Mask::Constant(g.size(), false);
    for (std::size_t p = 0; p < order.size(); p += 2) mask(order[p]) = true;
    cfg.eta = tune_eta(g, X, mask, EtaGrid::log_spaced(opts.eta_min, opts.eta_max, opts.eta_points),
                       cfg)
                  .eta;
    std::cerr << fmt::format("tuned eta = {}\n", io::format_double(cfg.eta));
  }
  return cfg;
}

std::vector<int> node_order(const Graph& g, const SignalMatrix& X, double energy_frac) {
  const SpectralBasis basis = spectral_decompose(g);
  const BandwidthEstimate bw = estimate_bandwidth(basis, X, energy_frac);
  return importance_order(coherence_scores(basis, bw.k));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-signal sampling sets and duty cycles for wireless sensor networks"};
  app.set_config("--config", "", "TOML file with defaults (one section per subcommand)");
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Random seed")->capture_default_str();
  app.add_option("--output-dir", global.output_dir, "Directory for output files")
      ->capture_default_str();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse an Intel Lab data.txt into a snapshot window");
  ingest->fallthrough();
  std::string data_path;
  std::int64_t first_epoch = 0;
  std::int64_t last_epoch = 0;
  int max_gap = 10;
  bool no_fill = false;
  IngestOptions ingest_opts;
  ingest->add_option("--data", data_path, "Path to data.txt")->required();
  ingest->add_option("--first-epoch", first_epoch)->required();
  ingest->add_option("--last-epoch", last_epoch)->required();
  ingest->add_option("--max-gap", max_gap, "Forward-fill limit in epochs")->capture_default_str();
  ingest->add_flag("--no-fill", no_fill, "Leave missing cells empty");
  ingest->add_option("--min-temperature", ingest_opts.min_temperature)->capture_default_str();
  ingest->add_option("--max-temperature", ingest_opts.max_temperature)->capture_default_str();
  ingest->add_option("--max-mote", ingest_opts.max_mote)->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate smooth synthetic snapshots");
  synth->fallthrough();
  SyntheticSource synth_opts;
  std::string synth_graph;
  synth->add_option("--graph", synth_graph, "Use this graph instead of a planted one");
  synth->add_option("--nodes", synth_opts.nodes)->capture_default_str();
  synth->add_option("--radius", synth_opts.radius)->capture_default_str();
  synth->add_option("--k", synth_opts.bandwidth, "Bandwidth")->capture_default_str();
  synth->add_option("--noise", synth_opts.noise_sigma)->capture_default_str();
  synth->add_option("--snapshots", synth_opts.snapshots)->capture_default_str();
  synth->add_option("--amplitude", synth_opts.amplitude)->capture_default_str();

  // learn
  auto* learn = app.add_subcommand("learn", "Learn a graph from snapshots");
  learn->fallthrough();
  DataOptions learn_data;
  LearnConfig learn_cfg;
  int batch_size = 0;
  double stability = 1e-3;
  learn_data.add_to(learn, false);
  add_learn_options(learn, learn_cfg);
  learn->add_option("--batch-size", batch_size, "Stream in batches of this many rows (0: one batch)")
      ->capture_default_str();
  learn->add_option("--stability", stability, "Laplacian stability threshold")
      ->capture_default_str();

  // partition
  auto* part = app.add_subcommand("partition", "Split the nodes into disjoint sampling sets");
  part->fallthrough();
  DataOptions part_data;
  ReconOptions part_recon;
  double epsilon = 0.3;
  double energy_frac = 0.95;
  part_data.add_to(part, true);
  part_recon.add_to(part);
  part->add_option("--epsilon", epsilon, "RMSE bound per set")->capture_default_str();
  part->add_option("--energy-frac", energy_frac, "Spectral energy share for the bandwidth")
      ->capture_default_str();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Partition for a list of RMSE bounds");
  sweep->fallthrough();
  DataOptions sweep_data;
  ReconOptions sweep_recon;
  std::vector<double> epsilons{0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0};
  double sweep_energy = 0.95;
  sweep_data.add_to(sweep, true);
  sweep_recon.add_to(sweep);
  sweep->add_option("--epsilons", epsilons, "Ascending RMSE bounds")->delimiter(',');
  sweep->add_option("--energy-frac", sweep_energy)->capture_default_str();

  // schedule
  auto* sched = app.add_subcommand("schedule", "Replay a plan round-robin and report duty cycle");
  sched->fallthrough();
  DataOptions sched_data;
  ReconOptions sched_recon;
  std::string plan_path;
  int round_epochs = 1;
  sched_data.add_to(sched, true);
  sched_recon.add_to(sched);
  sched->add_option("--plan", plan_path, "Sampling plan JSON")->required();
  sched->add_option("--round-epochs", round_epochs)->capture_default_str();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run the full pipeline and write an artifact bundle");
  exp->fallthrough();
  ExperimentConfig ecfg;
  std::string source = "synthetic";
  std::string exp_shift = "normalized";
  bool exp_no_clamp = false;
  bool exp_no_tune = false;
  bool exp_batch = false;
  exp->add_option("--name", ecfg.name)->capture_default_str();
  exp->add_option("--source", source)->check(CLI::IsMember({"synthetic", "intel"}))
      ->capture_default_str();
  exp->add_option("--data", ecfg.intel.path, "Intel data.txt (source = intel)");
  exp->add_option("--first-epoch", ecfg.intel.first_epoch);
  exp->add_option("--last-epoch", ecfg.intel.last_epoch);
  exp->add_option("--max-gap", ecfg.intel.max_gap, "Forward-fill limit; negative disables")
      ->capture_default_str();
  exp->add_option("--min-temperature", ecfg.intel.ingest.min_temperature)->capture_default_str();
  exp->add_option("--max-temperature", ecfg.intel.ingest.max_temperature)->capture_default_str();
  exp->add_option("--nodes", ecfg.synthetic.nodes)->capture_default_str();
  exp->add_option("--radius", ecfg.synthetic.radius)->capture_default_str();
  exp->add_option("--k", ecfg.synthetic.bandwidth)->capture_default_str();
  exp->add_option("--noise", ecfg.synthetic.noise_sigma)->capture_default_str();
  exp->add_option("--snapshots", ecfg.synthetic.snapshots)->capture_default_str();
  exp->add_option("--amplitude", ecfg.synthetic.amplitude)->capture_default_str();
  add_learn_options(exp, ecfg.learn);
  exp->add_flag("--batch-only", exp_batch, "Learn once from the first batch instead of streaming");
  exp->add_option("--batch-size", ecfg.batch_size)->capture_default_str();
  exp->add_option("--stability", ecfg.stability_threshold)->capture_default_str();
  exp->add_option("--eta", ecfg.reconstruction.eta)->capture_default_str();
  exp->add_option("--shift", exp_shift)->check(CLI::IsMember({"normalized", "raw"}))
      ->capture_default_str();
  exp->add_flag("--no-clamp", exp_no_clamp);
  exp->add_flag("--no-tune-eta", exp_no_tune, "Use --eta as given");
  exp->add_option("--eta-min", ecfg.eta_min)->capture_default_str();
  exp->add_option("--eta-max", ecfg.eta_max)->capture_default_str();
  exp->add_option("--eta-points", ecfg.eta_points)->capture_default_str();
  exp->add_option("--validation-fraction", ecfg.validation_fraction)->capture_default_str();
  exp->add_option("--energy-frac", ecfg.energy_frac)->capture_default_str();
  exp->add_option("--delta", ecfg.delta)->capture_default_str();
  exp->add_option("--epsilons", ecfg.epsilons)->delimiter(',');
  exp->add_option("--round-epochs", ecfg.round_epochs)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  const fs::path out_dir = global.output_dir;
  try {
    if (*ingest) {
      const ParsedLog log = parse_intel(fs::path(data_path), ingest_opts);
      const FillPolicy fill = no_fill ? FillPolicy::none() : FillPolicy::forward(max_gap);
      const SnapshotWindow window = assemble_snapshots(log.records, {first_epoch, last_epoch},
                                                       mote_universe(ingest_opts), fill);
      io::write_atomic(out_dir / "snapshots.csv", io::snapshots_csv(window));
      io::write_atomic(out_dir / "snapshots_mask.csv", io::snapshot_mask_csv(window));
      io::write_atomic(out_dir / "rejects.json", io::rejects_to_json(log.rejects).dump(2) + "\n");
      std::cout << fmt::format("accepted {} of {} rows; window {} epochs x {} motes",
                               log.rejects.accepted, log.rejects.total_rows,
                               window.X.snapshots(), window.X.nodes());
      if (!window.silent_motes.empty()) {
        std::cout << fmt::format("; {} silent motes dropped", window.silent_motes.size());
      }
      std::cout << "\n";
    } else if (*synth) {
      Graph g;
      if (synth_graph.empty()) {
        g = planted_geometric_graph(synth_opts.nodes, synth_opts.radius, global.seed);
        io::write_atomic(out_dir / "planted_graph.json", io::graph_to_json(g).dump(2) + "\n");
      } else {
        g = load_graph(synth_graph);
      }
      const SignalMatrix X = synth_smooth(g, synth_opts.bandwidth, synth_opts.noise_sigma,
                                          synth_opts.snapshots, global.seed + 1);
      SnapshotWindow w;
      w.X = SignalMatrix::fully_observed(synth_opts.amplitude * X.values());
      for (int i = 0; i < g.size(); ++i) w.motes.push_back(i + 1);
      for (int t = 0; t < X.snapshots(); ++t) w.epochs.push_back(t);
      io::write_atomic(out_dir / "snapshots.csv", io::snapshots_csv(w));
      io::write_atomic(out_dir / "snapshots_mask.csv", io::snapshot_mask_csv(w));
      std::cout << fmt::format("wrote {} snapshots on {} nodes\n", w.X.snapshots(), g.size());
    } else if (*learn) {
      const SnapshotWindow w = load_snapshots(learn_data);
      LaplacianStream stream(w.X.nodes(), learn_cfg, stability);
      const int step = batch_size > 0 ? batch_size : w.X.snapshots();
      for (int first = 0; first < w.X.snapshots(); first += step) {
        stream.update(w.X.slice(first, std::min(step, w.X.snapshots() - first)));
      }
      io::write_atomic(out_dir / "graph.json", io::graph_to_json(stream.graph()).dump(2) + "\n");
      io::write_atomic(out_dir / "convergence.csv", io::convergence_csv(stream.trace()));
      std::cout << fmt::format("learned {} edges on {} nodes; converged: {}\n",
                               stream.graph().edge_count(), stream.graph().size(),
                               stream.converged() ? "yes" : "no");
    } else if (*part) {
      const Graph g = load_graph(part_data.graph);
      const SnapshotWindow w = load_snapshots(part_data);
      const std::vector<int> order = node_order(g, w.X, energy_frac);
      const ReconstructionConfig cfg = resolve_recon(part_recon, g, w.X, order);
      const SamplingPlan plan = partition_with_order(g, w.X, order, epsilon, cfg);
      io::write_atomic(out_dir / "plan.json", io::plan_to_json(plan).dump(2) + "\n");
      const DutyCycleReport duty = duty_cycle(plan);
      std::cout << fmt::format("{} sets (max RMSE {}), duty cycle {}%{}\n", plan.n_sets(),
                               io::format_double(plan.max_rmse()), duty.rendered(),
                               plan.last_set_incomplete ? ", last set above epsilon" : "");
    } else if (*sweep) {
      const Graph g = load_graph(sweep_data.graph);
      const SnapshotWindow w = load_snapshots(sweep_data);
      const SpectralBasis basis = spectral_decompose(g);
      const std::vector<int> order = node_order(g, w.X, sweep_energy);
      const ReconstructionConfig cfg = resolve_recon(sweep_recon, g, w.X, order);
      PartitionOptions options;
      options.energy_frac = sweep_energy;
      const Sweep result = set_count_sweep(g, basis, w.X, epsilons, cfg, options);
      io::write_atomic(out_dir / "sweep.csv", io::sweep_csv(result.rows));
      std::vector<DutyCycleReport> duty;
      for (const auto& row : result.rows) duty.push_back(duty_cycle(row.n_sets));
      io::write_atomic(out_dir / "duty.csv", io::duty_csv(duty));
      for (const auto& plan : result.plans) {
        io::write_atomic(out_dir / "plans" / ("plan_eps_" + io::format_double(plan.epsilon) + ".json"),
                         io::plan_to_json(plan).dump(2) + "\n");
      }
      std::cout << io::sweep_csv(result.rows);
    } else if (*sched) {
      const Graph g = load_graph(sched_data.graph);
      const SnapshotWindow w = load_snapshots(sched_data);
      const SamplingPlan plan = io::plan_from_json(nlohmann::json::parse(io::read_file(plan_path)));
      const ReconstructionConfig cfg =
          resolve_recon(sched_recon, g, w.X, plan.node_order);
      const ScheduleTrace trace = simulate_schedule(g, plan, w.X, cfg, round_epochs);
      io::write_atomic(out_dir / "schedule.csv", io::schedule_csv(trace));
      const DutyCycleReport duty = duty_cycle(plan);
      std::cout << fmt::format(
          "{} sets: duty cycle {}% per sensor, lifetime x{}; round RMSE max {} mean {}\n",
          duty.n_sets, duty.rendered(), duty.lifetime_multiplier,
          io::format_double(trace.max_rmse), io::format_double(trace.mean_rmse));
    } else if (*exp) {
      ecfg.seed = global.seed;
      ecfg.source = source == "intel" ? ExperimentConfig::Source::intel
                                      : ExperimentConfig::Source::synthetic;
      ecfg.stream = !exp_batch;
      ecfg.tune_eta = !exp_no_tune;
      ecfg.reconstruction.shift = shift_mode_from_string(exp_shift);
      ecfg.reconstruction.clamp_sampled = !exp_no_clamp;
      const ExperimentResult result = run_experiment(ecfg, out_dir);
      std::cout << io::sweep_csv(result.sweep.rows);
      std::cout << fmt::format("bandwidth k = {}, eta = {}, self-check {}; {} artifacts in {}\n",
                               result.bandwidth, io::format_double(result.eta),
                               result.self_check_passed ? "passed" : "FAILED",
                               result.artifacts.size() + 1, out_dir.string());
      return result.self_check_passed ? EXIT_SUCCESS : EXIT_FAILURE;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
