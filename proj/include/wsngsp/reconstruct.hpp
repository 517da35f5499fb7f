#pragma once

// Signal reconstruction from a vertex subset by minimizing
//   0.5 ||x_M - y_M||^2 + eta * 0.5 ||x - S x||^2
// over the full signal x, with S the (optionally normalized) graph shift.
// The minimizer solves (P + eta (I - S)^T (I - S)) x = P y, where P is the
// diagonal projector onto observed vertices.

#include <stdexcept>
#include <vector>

#include "wsngsp/graph.hpp"
#include "wsngsp/signal_matrix.hpp"

namespace wsngsp {

struct ReconstructionConfig {
  double eta = 1.0;
  ShiftMode shift = ShiftMode::normalized;
  bool clamp_sampled = true;

  void validate() const;
};

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precomputes the smoothness operator for one graph and configuration;
/// each solve factors the normal equations for its mask.
class Reconstructor {
 public:
  Reconstructor(const Graph& g, ReconstructionConfig cfg);

  int size() const { return static_cast<int>(penalty_.rows()); }
  const ReconstructionConfig& config() const { return cfg_; }

  /// Reconstructs one signal; only entries with observed = true are used.
  Vector solve(const GraphSignal& partial) const;

  /// Reconstructs every row of `measurements` (T x N) using the same
  /// observation mask for all rows. Unobserved columns are ignored.
  Matrix solve_rows(const Mask& observed, const Matrix& measurements) const;

  /// Objective value and gradient, for optimality checks.
  double objective(const Vector& x, const GraphSignal& partial) const;
  Vector gradient(const Vector& x, const GraphSignal& partial) const;

 private:
  ReconstructionConfig cfg_;
  Matrix penalty_;  // eta * (I - S)^T (I - S)
};

/// One-shot form of Reconstructor::solve.
Vector reconstruct(const Graph& g, const GraphSignal& partial, const ReconstructionConfig& cfg);

/// sqrt(mean over eval_set of (estimate_i - truth_i)^2).
double rmse(const Vector& estimate, const Vector& truth, const std::vector<int>& eval_set);
/// Over every vertex where truth is finite.
double rmse(const Vector& estimate, const Vector& truth);

struct EtaGrid {
  std::vector<double> candidates;
  double validation_fraction = 0.2;  // trailing share of snapshots

  static EtaGrid log_spaced(double lo = 1e-3, double hi = 1e3, int points = 13);
  void validate() const;
};

struct EtaTuning {
  double eta = 0.0;
  std::vector<double> validation_rmse;  // per candidate, +inf where singular
};

/// Picks the candidate minimizing mean validation RMSE over the trailing
/// snapshots when only `mask` vertices are observed. Scores within a relative
/// 1e-9 (plus 1e-12 absolute) of the minimum tie, and ties go to the smallest
/// eta. Throws if the grid is empty or every candidate is singular.
EtaTuning tune_eta(const Graph& g, const SignalMatrix& snapshots, const Mask& mask,
                   const EtaGrid& grid, ReconstructionConfig base = {});

}  // namespace wsngsp
