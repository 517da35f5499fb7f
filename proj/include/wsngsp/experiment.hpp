#pragma once

// End-to-end experiment: ingest -> streaming graph learning -> bandwidth and
// node ordering -> epsilon sweep -> duty-cycle table -> schedule replay,
// with every artifact written under one output directory plus a manifest.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "wsngsp/dataset.hpp"
#include "wsngsp/learn.hpp"
#include "wsngsp/reconstruct.hpp"
#include "wsngsp/sampling.hpp"

namespace wsngsp {

struct SyntheticSource {
  int nodes = 54;
  double radius = 0.3;
  int bandwidth = 3;
  double noise_sigma = 0.02;
  int snapshots = 400;
  double amplitude = 4.0;  // applied to signal and noise
};

struct IntelSource {
  std::string path;
  std::int64_t first_epoch = 0;
  std::int64_t last_epoch = 0;
  int max_gap = 10;          // forward fill; negative disables filling
  IngestOptions ingest;
};

struct ExperimentConfig {
  enum class Source { synthetic, intel };

  std::string name = "experiment";
  Source source = Source::synthetic;
  SyntheticSource synthetic;
  IntelSource intel;
  std::uint64_t seed = 1;

  LearnConfig learn;
  bool stream = true;        // false: learn once from the first batch only
  int batch_size = 10;
  double stability_threshold = 1e-3;

  ReconstructionConfig reconstruction;
  bool tune_eta = true;
  double eta_min = 1e-3;
  double eta_max = 1e3;
  int eta_points = 13;
  double validation_fraction = 0.2;

  double energy_frac = 0.95;
  double delta = 0.5;        // embedding check reported for each plan
  std::vector<double> epsilons{0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0};
  int round_epochs = 1;

  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct ExperimentResult {
  std::filesystem::path output_dir;
  std::vector<std::string> artifacts;  // relative paths, in write order
  ConvergenceTrace convergence;
  int bandwidth = 0;
  double eta = 0.0;
  Sweep sweep;
  nlohmann::json self_check;
  bool self_check_passed = false;
  nlohmann::json manifest;
};

/// Runs every stage, writing artifacts as each stage completes. A failing
/// stage throws StageError; artifacts of earlier stages remain on disk.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::filesystem::path& output_dir);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& data);

}  // namespace wsngsp
