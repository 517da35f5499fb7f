#pragma once

// Vertex importance from the spectral basis and the greedy partition of the
// vertex set into disjoint sampling sets, each of which reconstructs the
// signal within an RMSE bound.

#include <stdexcept>
#include <vector>

#include "wsngsp/graph.hpp"
#include "wsngsp/reconstruct.hpp"
#include "wsngsp/signal_matrix.hpp"

namespace wsngsp {

struct BandwidthEstimate {
  int k = 1;
  double energy_fraction = 1.0;  // share of mean spectral energy in the first k components
};

/// Smallest k whose first k GFT coefficients carry at least `energy_frac`
/// of the mean spectral energy over the complete snapshots of X.
BandwidthEstimate estimate_bandwidth(const SpectralBasis& basis, const SignalMatrix& X,
                                     double energy_frac = 0.95);

/// Local cumulative coherence: squared row norms of the first k eigenvectors.
/// Sums to k.
Vector coherence_scores(const SpectralBasis& basis, int k);

/// Vertices by descending score. Scores are compared after rounding to
/// 1e-12 so that numerically equal scores fall back to ascending index.
std::vector<int> importance_order(const Vector& scores);

struct SamplingMask {
  Mask m;

  static SamplingMask from_vertices(int n, const std::vector<int>& vertices);
  int n_sampled() const { return static_cast<int>(m.count()); }
  int size() const { return static_cast<int>(m.size()); }
};

struct EmbeddingCheck {
  bool satisfied = false;
  double worst_ratio = 0.0;  // (N/n)||m x||^2 / ||x||^2 farthest from 1
  int checked = 0;
  int skipped = 0;           // all-zero or incomplete snapshots
};

/// Empirical check of (1 - delta)||x||^2 <= (N/n)||m x||^2 <= (1 + delta)||x||^2
/// for every complete, nonzero snapshot of X.
EmbeddingCheck verify_embedding(const SamplingMask& mask, const SignalMatrix& X, double delta);

struct SamplingPlan {
  double epsilon = 0.0;
  std::vector<int> node_order;
  std::vector<std::vector<int>> sets;
  std::vector<double> set_rmse;
  bool last_set_incomplete = false;

  int n_sets() const { return static_cast<int>(sets.size()); }
  /// Largest achieved RMSE over all sets; 0 for an empty plan.
  double max_rmse() const;
};

/// Raised when a reconstruction fails mid-partition; carries the sets
/// closed so far.
class PartitionError : public std::runtime_error {
 public:
  PartitionError(const std::string& what, SamplingPlan partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const SamplingPlan& partial_plan() const { return partial_; }

 private:
  SamplingPlan partial_;
};

/// Mean over the snapshots of X of the reconstruction RMSE when only
/// `sampled` vertices are observed. Snapshots in which no sampled vertex has
/// a finite value are skipped; +inf if every snapshot is skipped.
double mean_set_rmse(const Reconstructor& solver, const SignalMatrix& X,
                     const std::vector<int>& sampled);

/// Greedy partition along a fixed node order: grow the current set one
/// vertex at a time until its mean RMSE is at most epsilon, then start a new
/// set. The last set is flagged when the order runs out first. A set whose
/// normal equations are singular counts as not meeting the bound; any other
/// reconstruction failure raises PartitionError.
SamplingPlan partition_with_order(const Graph& g, const SignalMatrix& X,
                                  const std::vector<int>& order, double epsilon,
                                  const ReconstructionConfig& cfg);

struct PartitionOptions {
  double energy_frac = 0.95;
};

/// Orders vertices by coherence at the estimated bandwidth, then partitions.
SamplingPlan partition(const Graph& g, const SpectralBasis& basis, const SignalMatrix& X,
                       double epsilon, const ReconstructionConfig& cfg,
                       const PartitionOptions& options = {});

struct SweepRow {
  double epsilon = 0.0;
  int n_sets = 0;
  double max_rmse = 0.0;
  bool last_set_incomplete = false;
};

struct Sweep {
  std::vector<SweepRow> rows;
  std::vector<SamplingPlan> plans;
};

/// Runs partition for every epsilon (ascending) with one shared node order.
Sweep set_count_sweep(const Graph& g, const SpectralBasis& basis, const SignalMatrix& X,
                      const std::vector<double>& epsilons, const ReconstructionConfig& cfg,
                      const PartitionOptions& options = {});

/// Sets are pairwise disjoint and cover 0..n-1.
bool is_valid_partition(const SamplingPlan& plan, int n);

}  // namespace wsngsp
