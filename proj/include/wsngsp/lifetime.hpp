#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsngsp/graph.hpp"
#include "wsngsp/reconstruct.hpp"
#include "wsngsp/sampling.hpp"

namespace wsngsp {

/// Per-sensor duty cycle when the sets of a plan are activated round-robin.
/// The percentage is the exact fraction 100 / n_sets.
struct DutyCycleReport {
  int n_sets = 0;
  std::int64_t duty_numerator = 100;  // duty_pct = numerator / denominator, reduced
  std::int64_t duty_denominator = 1;
  int lifetime_multiplier = 1;        // relative to every sensor always on

  double duty_percent() const {
    return static_cast<double>(duty_numerator) / static_cast<double>(duty_denominator);
  }
  /// Four significant digits, trailing zeros dropped ("4.762", "100").
  std::string rendered() const;
};

DutyCycleReport duty_cycle(int n_sets);
/// Throws std::invalid_argument for a plan without sets.
DutyCycleReport duty_cycle(const SamplingPlan& plan);

struct Schedule {
  std::vector<int> rounds;  // set index active in each round
  int n_sets = 0;
  int round_epochs = 1;

  /// Round r activates set r mod n_sets.
  static Schedule round_robin(int n_sets, int n_rounds, int round_epochs = 1);
  /// Rounds in which each vertex of `plan` is active, over a window of rounds.
  std::vector<int> activations(const SamplingPlan& plan, int vertex, int first_round,
                               int count) const;
};

struct ScheduleStep {
  int snapshot = 0;
  int round = 0;
  int set = 0;
  double rmse = 0.0;  // NaN when no active vertex had a value
};

struct ScheduleTrace {
  std::vector<ScheduleStep> steps;
  double max_rmse = 0.0;
  double mean_rmse = 0.0;
  std::vector<double> per_set_mean_rmse;  // averaged over the rounds each set was active
};

/// Replays the snapshots of X with only the scheduled set observed in each
/// round, reconstructing the rest.
ScheduleTrace simulate_schedule(const Graph& g, const SamplingPlan& plan, const SignalMatrix& X,
                                const ReconstructionConfig& cfg, int round_epochs = 1);

}  // namespace wsngsp
