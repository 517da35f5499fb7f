#pragma once

// Graph learning from smooth signals with the log-degree model
//
//   min_{W >= 0, W = W^T, diag W = 0}
//       sum_ij W_ij Z_ij - alpha * 1^T log(W 1) + (beta / 2) ||W||_F^2
//
// where Z holds pairwise squared distances between node series. The problem
// is solved over the upper-triangular weight vector with a forward-backward-
// forward primal-dual iteration; the log barrier keeps every degree positive.

#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wsngsp/graph.hpp"
#include "wsngsp/signal_matrix.hpp"

namespace wsngsp {

struct LearnConfig {
  double alpha = 1.0;        // log-barrier weight, > 0
  double beta = 1.0;         // Frobenius weight, >= 0
  int max_iters = 5000;
  double tol = 1e-6;         // relative iterate change
  double prune_rel = 1e-4;   // drop weights below prune_rel * max weight
  bool rescale_distances = true;  // scale finite Z to unit mean off-diagonal

  void validate() const;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(int iterations, double final_change);
  int iterations() const { return iterations_; }
  double final_change() const { return final_change_; }

 private:
  int iterations_;
  double final_change_;
};

/// Running sums of squared differences over commonly observed snapshots.
/// pairwise_distances() is this accumulator applied once to all rows.
class DistanceAccumulator {
 public:
  explicit DistanceAccumulator(int nodes);

  void add(const SignalMatrix& batch);

  int nodes() const { return static_cast<int>(sums_.rows()); }
  int snapshots() const { return snapshots_; }
  /// Per-node count of genuine observations so far.
  const Eigen::VectorXi& node_counts() const { return node_counts_; }

  /// Z_ij = T * mean over common snapshots of (X_ti - X_tj)^2; +inf where a
  /// pair was never observed together.
  Matrix distances() const;

 private:
  Matrix sums_;
  Eigen::MatrixXi counts_;
  Eigen::VectorXi node_counts_;
  int snapshots_ = 0;
};

/// Throws std::invalid_argument for fewer than two nodes.
Matrix pairwise_distances(const SignalMatrix& X);

struct LearnResult {
  Graph graph;               // pruned
  Matrix unpruned_weights;   // solver output before pruning
  int iterations = 0;
  double final_change = std::numeric_limits<double>::infinity();
  bool converged = false;
  double distance_scale = 1.0;    // Z was divided by this before solving
  std::vector<int> isolated;      // nodes whose Z row had no finite entry
  Vector dual;                    // final dual iterate (one entry per node)
};

/// Objective of the log-degree model at W for the given Z, alpha, beta.
/// Pairs with infinite Z must have W_ij = 0 and contribute nothing.
double learn_objective(const Matrix& W, const Matrix& Z, double alpha, double beta);

/// Solves the model and reports convergence without throwing on it.
/// `warm_start` is a previous weight matrix of matching size and `warm_dual`
/// the dual iterate that came with it; without a dual, one is derived from
/// the warm-start degrees. A warm start that already meets the tolerance on
/// the first iteration is returned unchanged.
LearnResult learn_weights(const Matrix& Z, const LearnConfig& cfg,
                          const Matrix* warm_start = nullptr, const Vector* warm_dual = nullptr);

/// As learn_weights, but throws NonConvergenceError if max_iters is reached.
Graph learn_graph(const Matrix& Z, const LearnConfig& cfg);

struct ConvergenceEntry {
  int snapshots_seen = 0;
  double rel_change = 0.0;  // ||L_t - L_{t-1}||_F / ||L_{t-1}||_F, +inf on the first update
};

struct ConvergenceTrace {
  std::vector<ConvergenceEntry> entries;
  bool converged = false;
  /// Index into entries of the update at which convergence was first declared.
  std::optional<int> converged_at;
};

/// Accumulates snapshot batches and re-learns the graph after each one,
/// tracking how much the Laplacian still moves.
class LaplacianStream {
 public:
  LaplacianStream(int nodes, LearnConfig cfg, double stability_threshold = 1e-3);

  /// Adds a batch, re-learns, appends to the trace and returns the new entry.
  /// Throws NonConvergenceError if the solver does not converge.
  ConvergenceEntry update(const SignalMatrix& batch);

  const Graph& graph() const { return graph_; }
  const ConvergenceTrace& trace() const { return trace_; }
  bool converged() const { return trace_.converged; }
  bool all_nodes_reported() const;
  int snapshots_seen() const { return accumulator_.snapshots(); }
  int nodes() const { return accumulator_.nodes(); }

 private:
  LearnConfig cfg_;
  double stability_threshold_;
  DistanceAccumulator accumulator_;
  std::optional<Matrix> warm_;
  Vector warm_dual_;
  Graph graph_;
  bool has_graph_ = false;
  int stable_streak_ = 0;
  ConvergenceTrace trace_;
};

}  // namespace wsngsp
