#include "wsngsp/experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <set>

#include <fmt/format.h>
#include <sodium.h>

#include "wsngsp/io.hpp"
#include "wsngsp/lifetime.hpp"

#ifndef WSNGSP_VERSION
#define WSNGSP_VERSION "unknown"
#endif

namespace wsngsp {

namespace {

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  unsigned char digest[crypto_hash_sha256_BYTES];
  crypto_hash_sha256(digest, reinterpret_cast<const unsigned char*>(data.data()), data.size());
  std::string hex;
  for (unsigned char b : digest) hex += fmt::format("{:02x}", b);
  return hex;
}

void ExperimentConfig::validate() const {
  learn.validate();
  reconstruction.validate();
  if (batch_size < 1) throw std::invalid_argument("experiment: batch_size must be >= 1");
  if (epsilons.empty()) throw std::invalid_argument("experiment: epsilon list is empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw std::invalid_argument("experiment: epsilons must be > 0");
    if (i > 0 && !(epsilons[i] > epsilons[i - 1])) {
      throw std::invalid_argument("experiment: epsilons must be strictly ascending");
    }
  }
  if (round_epochs < 1) throw std::invalid_argument("experiment: round_epochs must be >= 1");
  if (source == Source::intel) {
    if (intel.path.empty()) throw std::invalid_argument("experiment: intel.path is required");
    if (intel.last_epoch < intel.first_epoch) {
      throw std::invalid_argument("experiment: intel epoch window is empty");
    }
  } else if (synthetic.nodes < 2 || synthetic.snapshots < 2) {
    throw std::invalid_argument("experiment: synthetic source needs >= 2 nodes and snapshots");
  }
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  if (cfg.source == ExperimentConfig::Source::intel) {
    j["source"] = {{"kind", "intel"},
                   {"path", cfg.intel.path},
                   {"first_epoch", cfg.intel.first_epoch},
                   {"last_epoch", cfg.intel.last_epoch},
                   {"max_gap", cfg.intel.max_gap},
                   {"min_mote", cfg.intel.ingest.min_mote},
                   {"max_mote", cfg.intel.ingest.max_mote},
                   {"min_temperature", cfg.intel.ingest.min_temperature},
                   {"max_temperature", cfg.intel.ingest.max_temperature}};
  } else {
    j["source"] = {{"kind", "synthetic"},
                   {"nodes", cfg.synthetic.nodes},
                   {"radius", cfg.synthetic.radius},
                   {"bandwidth", cfg.synthetic.bandwidth},
                   {"noise_sigma", cfg.synthetic.noise_sigma},
                   {"snapshots", cfg.synthetic.snapshots},
                   {"amplitude", cfg.synthetic.amplitude}};
  }
  j["learn"] = {{"alpha", cfg.learn.alpha},
                {"beta", cfg.learn.beta},
                {"max_iters", cfg.learn.max_iters},
                {"tol", cfg.learn.tol},
                {"prune_rel", cfg.learn.prune_rel},
                {"rescale_distances", cfg.learn.rescale_distances},
                {"stream", cfg.stream},
                {"batch_size", cfg.batch_size},
                {"stability_threshold", cfg.stability_threshold}};
  j["reconstruction"] = {{"eta", cfg.reconstruction.eta},
                         {"shift", to_string(cfg.reconstruction.shift)},
                         {"clamp_sampled", cfg.reconstruction.clamp_sampled},
                         {"tune_eta", cfg.tune_eta},
                         {"eta_min", cfg.eta_min},
                         {"eta_max", cfg.eta_max},
                         {"eta_points", cfg.eta_points},
                         {"validation_fraction", cfg.validation_fraction}};
  j["sampling"] = {{"energy_frac", cfg.energy_frac},
                   {"delta", cfg.delta},
                   {"epsilons", cfg.epsilons},
                   {"round_epochs", cfg.round_epochs}};
  return j;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::filesystem::path& output_dir) {
  run_stage("config", [&] { cfg.validate(); });

  ExperimentResult result;
  result.output_dir = output_dir;
  std::filesystem::create_directories(output_dir);
  auto emit = [&](const std::string& relative, const std::string& contents) {
    io::write_atomic(output_dir / relative, contents);
    result.artifacts.push_back(relative);
  };

  // Ingest.
  SnapshotWindow window = run_stage("ingest", [&] {
    if (cfg.source == ExperimentConfig::Source::intel) {
      const ParsedLog log = parse_intel(std::filesystem::path(cfg.intel.path), cfg.intel.ingest);
      emit("rejects.json", io::rejects_to_json(log.rejects).dump(2) + "\n");
      const FillPolicy fill =
          cfg.intel.max_gap >= 0 ? FillPolicy::forward(cfg.intel.max_gap) : FillPolicy::none();
      return assemble_snapshots(log.records, {cfg.intel.first_epoch, cfg.intel.last_epoch},
                                mote_universe(cfg.intel.ingest), fill);
    }
    const Graph planted =
        planted_geometric_graph(cfg.synthetic.nodes, cfg.synthetic.radius, cfg.seed);
    emit("planted_graph.json", io::graph_to_json(planted).dump(2) + "\n");
    const SignalMatrix smooth = synth_smooth(planted, cfg.synthetic.bandwidth,
                                             cfg.synthetic.noise_sigma, cfg.synthetic.snapshots,
                                             cfg.seed + 1);
    SnapshotWindow w;
    w.X = SignalMatrix::fully_observed(cfg.synthetic.amplitude * smooth.values());
    w.fill = FillPolicy::none();
    for (int i = 0; i < cfg.synthetic.nodes; ++i) w.motes.push_back(i + 1);
    for (int t = 0; t < cfg.synthetic.snapshots; ++t) w.epochs.push_back(t);
    return w;
  });
  if (window.X.nodes() < 2) throw StageError("ingest", "fewer than two active nodes in window");
  emit("snapshots.csv", io::snapshots_csv(window));
  emit("snapshots_mask.csv", io::snapshot_mask_csv(window));

  // Streaming graph learning.
  const int total_rows = window.X.snapshots();
  const int learn_rows = cfg.stream ? total_rows : std::min(cfg.batch_size, total_rows);
  const SignalMatrix data = window.X.slice(0, learn_rows);
  Graph graph = run_stage("learn", [&] {
    LaplacianStream stream(data.nodes(), cfg.learn, cfg.stability_threshold);
    for (int first = 0; first < learn_rows; first += cfg.batch_size) {
      stream.update(data.slice(first, std::min(cfg.batch_size, learn_rows - first)));
    }
    result.convergence = stream.trace();
    return stream.graph();
  });
  emit("convergence.csv", io::convergence_csv(result.convergence));
  emit("graph.json", io::graph_to_json(graph).dump(2) + "\n");

  // Bandwidth, ordering and eta.
  const SpectralBasis basis = run_stage("spectrum", [&] { return spectral_decompose(graph); });
  const BandwidthEstimate bw =
      run_stage("bandwidth", [&] { return estimate_bandwidth(basis, data, cfg.energy_frac); });
  result.bandwidth = bw.k;
  const Vector scores = coherence_scores(basis, bw.k);
  const std::vector<int> order = importance_order(scores);

  ReconstructionConfig recon = cfg.reconstruction;
  EtaTuning tuning;
  if (cfg.tune_eta) {
    tuning = run_stage("tune_eta", [&] {
      // Half the vertices observed: every other entry of the importance order.
      Mask mask = Mask::Constant(graph.size(), false);
      for (std::size_t p = 0; p < order.size(); p += 2) mask(order[p]) = true;
      EtaGrid grid = EtaGrid::log_spaced(cfg.eta_min, cfg.eta_max, cfg.eta_points);
      grid.validation_fraction = cfg.validation_fraction;
      return tune_eta(graph, data, mask, grid, recon);
    });
    recon.eta = tuning.eta;
  }
  result.eta = recon.eta;
  {
    nlohmann::json analysis;
    analysis["bandwidth"] = {{"k", bw.k}, {"energy_fraction", bw.energy_fraction}};
    analysis["coherence"] = std::vector<double>(scores.data(), scores.data() + scores.size());
    analysis["node_order"] = order;
    analysis["motes"] = window.motes;
    analysis["eta"] = recon.eta;
    if (cfg.tune_eta) {
      nlohmann::json rmse = nlohmann::json::array();
      for (double r : tuning.validation_rmse) rmse.push_back(r);
      analysis["eta_validation_rmse"] = std::move(rmse);
    }
    analysis["eigenvalues"] =
        std::vector<double>(basis.eigenvalues.data(), basis.eigenvalues.data() + basis.size());
    emit("analysis.json", analysis.dump(2) + "\n");
  }

  // Epsilon sweep.
  result.sweep = run_stage("sweep", [&] {
    PartitionOptions options;
    options.energy_frac = cfg.energy_frac;
    return set_count_sweep(graph, basis, data, cfg.epsilons, recon, options);
  });
  emit("sweep.csv", io::sweep_csv(result.sweep.rows));
  for (const SamplingPlan& plan : result.sweep.plans) {
    emit("plans/plan_eps_" + io::format_double(plan.epsilon) + ".json",
         io::plan_to_json(plan).dump(2) + "\n");
  }

  // Duty cycle and schedule replay.
  std::vector<DutyCycleReport> duty;
  std::set<int> counts;
  for (const SweepRow& row : result.sweep.rows) counts.insert(row.n_sets);
  for (int c : counts) duty.push_back(duty_cycle(c));
  emit("duty.csv", io::duty_csv(duty));

  std::vector<ScheduleTrace> replays = run_stage("schedule", [&] {
    std::vector<ScheduleTrace> out;
    for (const SamplingPlan& plan : result.sweep.plans) {
      out.push_back(simulate_schedule(graph, plan, data, recon, cfg.round_epochs));
    }
    return out;
  });
  {
    std::string csv = "epsilon,n_sets,max_round_rmse,mean_round_rmse,max_set_rmse\n";
    for (std::size_t p = 0; p < replays.size(); ++p) {
      const SamplingPlan& plan = result.sweep.plans[p];
      csv += fmt::format("{},{},{},{},{}\n", io::format_double(plan.epsilon), plan.n_sets(),
                         io::format_double(replays[p].max_rmse),
                         io::format_double(replays[p].mean_rmse),
                         io::format_double(plan.max_rmse()));
    }
    emit("schedule_summary.csv", csv);
  }

  // Self-check of the properties every run must satisfy.
  {
    nlohmann::json checks = nlohmann::json::object();
    bool partitions_valid = true;
    bool set_bounds = true;
    bool monotone = true;
    bool coverage = true;
    nlohmann::json embedding = nlohmann::json::array();
    for (std::size_t p = 0; p < result.sweep.plans.size(); ++p) {
      const SamplingPlan& plan = result.sweep.plans[p];
      partitions_valid = partitions_valid && is_valid_partition(plan, graph.size());
      for (int s = 0; s < plan.n_sets(); ++s) {
        const bool flagged = plan.last_set_incomplete && s + 1 == plan.n_sets();
        if (!flagged && !(plan.set_rmse[static_cast<std::size_t>(s)] <= plan.epsilon)) {
          set_bounds = false;
        }
      }
      if (p > 0 && plan.n_sets() < result.sweep.plans[p - 1].n_sets()) monotone = false;
      const Schedule schedule = Schedule::round_robin(plan.n_sets(), plan.n_sets());
      for (int v = 0; v < graph.size(); ++v) {
        if (schedule.activations(plan, v, 0, plan.n_sets()).size() != 1) coverage = false;
      }
      const EmbeddingCheck check =
          verify_embedding(SamplingMask::from_vertices(graph.size(), plan.sets.front()), data,
                           cfg.delta);
      embedding.push_back({{"epsilon", plan.epsilon},
                           {"first_set_satisfied", check.satisfied},
                           {"worst_ratio", check.worst_ratio}});
    }
    bool duty_exact = true;
    for (const DutyCycleReport& d : duty) {
      duty_exact = duty_exact && d.duty_numerator * d.n_sets == 100 * d.duty_denominator;
    }
    checks["partition_valid"] = partitions_valid;
    checks["set_rmse_within_epsilon"] = set_bounds;
    checks["sets_monotone_in_epsilon"] = monotone;
    checks["schedule_covers_every_vertex_once"] = coverage;
    checks["duty_times_sets_is_100"] = duty_exact;
    result.self_check_passed =
        partitions_valid && set_bounds && monotone && coverage && duty_exact;
    checks["passed"] = result.self_check_passed;
    checks["embedding"] = std::move(embedding);
    result.self_check = checks;
    emit("selfcheck.json", checks.dump(2) + "\n");
  }

  // Manifest.
  nlohmann::json manifest;
  const nlohmann::json config_json = to_json(cfg);
  manifest["name"] = cfg.name;
  manifest["config"] = config_json;
  manifest["config_sha256"] = sha256_hex(config_json.dump());
  manifest["seeds"] = {{"seed", cfg.seed}, {"signal_seed", cfg.seed + 1}};
  manifest["versions"] = {
      {"wsngsp", WSNGSP_VERSION},
      {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
                            EIGEN_MINOR_VERSION)},
      {"compiler", __VERSION__}};
  nlohmann::json artifacts = nlohmann::json::array();
  for (const std::string& rel : result.artifacts) {
    artifacts.push_back({{"path", rel}, {"sha256", sha256_hex(io::read_file(output_dir / rel))}});
  }
  manifest["artifacts"] = std::move(artifacts);
  manifest["summary"] = {{"nodes", graph.size()},
                         {"edges", graph.edge_count()},
                         {"bandwidth", bw.k},
                         {"eta", recon.eta},
                         {"laplacian_converged", result.convergence.converged},
                         {"self_check_passed", result.self_check_passed}};
  manifest["created_utc"] = utc_timestamp();
  result.manifest = manifest;
  io::write_atomic(output_dir / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

}  // namespace wsngsp
