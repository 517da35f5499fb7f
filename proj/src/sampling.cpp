#include "wsngsp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace wsngsp {

BandwidthEstimate estimate_bandwidth(const SpectralBasis& basis, const SignalMatrix& X,
                                     double energy_frac) {
  if (!(energy_frac > 0.0 && energy_frac <= 1.0)) {
    throw std::invalid_argument("estimate_bandwidth: energy fraction must be in (0, 1]");
  }
  if (X.nodes() != basis.size()) {
    throw std::invalid_argument("estimate_bandwidth: dimension mismatch");
  }
  const Matrix rows = X.complete_rows();
  if (rows.rows() == 0) {
    throw std::invalid_argument("estimate_bandwidth: no complete snapshots");
  }
  const Matrix spectra = rows * basis.eigenvectors;  // row t holds (U^T x_t)^T
  const Vector energy = spectra.array().square().colwise().mean().transpose();

  const int n = basis.size();
  Vector cumulative(n);
  double running = 0.0;
  for (int j = 0; j < n; ++j) {
    running += energy(j);
    cumulative(j) = running;
  }
  const double total = cumulative(n - 1);
  BandwidthEstimate out;
  if (total <= 0.0) return out;
  for (int j = 0; j < n; ++j) {
    if (cumulative(j) >= energy_frac * total) {
      out.k = j + 1;
      out.energy_fraction = cumulative(j) / total;
      return out;
    }
  }
  out.k = n;
  out.energy_fraction = 1.0;
  return out;
}

Vector coherence_scores(const SpectralBasis& basis, int k) {
  if (k < 1 || k > basis.size()) {
    throw std::out_of_range("coherence_scores: k = " + std::to_string(k) + " outside [1, " +
                            std::to_string(basis.size()) + "]");
  }
  return basis.eigenvectors.leftCols(k).rowwise().squaredNorm();
}

std::vector<int> importance_order(const Vector& scores) {
  std::vector<long long> keys(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    keys[static_cast<std::size_t>(i)] = std::llround(scores(i) * 1e12);
  }
  std::vector<int> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return keys[static_cast<std::size_t>(a)] > keys[static_cast<std::size_t>(b)];
  });
  return order;
}

SamplingMask SamplingMask::from_vertices(int n, const std::vector<int>& vertices) {
  SamplingMask mask{Mask::Constant(n, false)};
  for (int v : vertices) {
    if (v < 0 || v >= n) throw std::out_of_range("SamplingMask: vertex out of range");
    mask.m(v) = true;
  }
  return mask;
}

EmbeddingCheck verify_embedding(const SamplingMask& mask, const SignalMatrix& X, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("verify_embedding: delta must be in (0, 1)");
  }
  if (mask.size() != X.nodes()) throw std::invalid_argument("verify_embedding: size mismatch");
  if (mask.n_sampled() == 0) throw std::invalid_argument("verify_embedding: empty mask");

  const double scale = static_cast<double>(mask.size()) / static_cast<double>(mask.n_sampled());
  EmbeddingCheck out;
  out.satisfied = true;
  double worst_gap = -1.0;
  for (int t = 0; t < X.snapshots(); ++t) {
    const auto row = X.values().row(t);
    if (!row.allFinite()) {
      ++out.skipped;
      continue;
    }
    double full = 0.0;
    double kept = 0.0;
    for (Eigen::Index i = 0; i < row.size(); ++i) {
      const double e = row(i) * row(i);
      full += e;
      kept += mask.m(i) ? e : 0.0;
    }
    if (full == 0.0) {
      ++out.skipped;
      continue;
    }
    const double ratio = scale * (kept / full);
    ++out.checked;
    if (ratio < 1.0 - delta || ratio > 1.0 + delta) out.satisfied = false;
    const double gap = std::abs(ratio - 1.0);
    if (gap > worst_gap) {
      worst_gap = gap;
      out.worst_ratio = ratio;
    }
  }
  if (out.checked == 0) {
    out.satisfied = false;
    out.worst_ratio = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

double SamplingPlan::max_rmse() const {
  double worst = 0.0;
  for (double r : set_rmse) worst = std::max(worst, r);
  return worst;
}

double mean_set_rmse(const Reconstructor& solver, const SignalMatrix& X,
                     const std::vector<int>& sampled) {
  const int n = X.nodes();
  const Matrix& values = X.values();

  // Group snapshots by their effective observation pattern so each distinct
  // normal-equation matrix is factored once.
  std::map<std::vector<bool>, std::vector<int>> groups;
  for (int t = 0; t < X.snapshots(); ++t) {
    std::vector<bool> pattern(static_cast<std::size_t>(n), false);
    bool any = false;
    for (int v : sampled) {
      if (std::isfinite(values(t, v))) {
        pattern[static_cast<std::size_t>(v)] = true;
        any = true;
      }
    }
    if (any) groups[pattern].push_back(t);
  }

  std::vector<double> per_row(static_cast<std::size_t>(X.snapshots()),
                              std::numeric_limits<double>::quiet_NaN());
  for (const auto& [pattern, rows] : groups) {
    Mask observed(n);
    for (int i = 0; i < n; ++i) observed(i) = pattern[static_cast<std::size_t>(i)];
    Matrix measurements(static_cast<Eigen::Index>(rows.size()), n);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      measurements.row(static_cast<Eigen::Index>(r)) =
          observed.transpose().select(values.row(rows[r]).array(), 0.0).matrix();
    }
    const Matrix estimates = solver.solve_rows(observed, measurements);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      per_row[static_cast<std::size_t>(rows[r])] =
          rmse(estimates.row(static_cast<Eigen::Index>(r)).transpose(),
               values.row(rows[r]).transpose());
    }
  }

  double sum = 0.0;
  int used = 0;
  for (double r : per_row) {
    if (std::isnan(r)) continue;
    sum += r;
    ++used;
  }
  return used > 0 ? sum / used : std::numeric_limits<double>::infinity();
}

SamplingPlan partition_with_order(const Graph& g, const SignalMatrix& X,
                                  const std::vector<int>& order, double epsilon,
                                  const ReconstructionConfig& cfg) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("partition: epsilon must be > 0");
  const int n = g.size();
  if (X.nodes() != n) throw std::invalid_argument("partition: data and graph sizes differ");
  if (X.snapshots() < 1) throw std::invalid_argument("partition: no evaluation snapshots");
  {
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(static_cast<std::size_t>(n));
    std::iota(expected.begin(), expected.end(), 0);
    if (sorted != expected) throw std::invalid_argument("partition: order is not a permutation");
  }

  SamplingPlan plan;
  plan.epsilon = epsilon;
  plan.node_order = order;

  const Reconstructor solver(g, cfg);
  std::vector<int> current;
  double current_rmse = std::numeric_limits<double>::infinity();
  for (int v : order) {
    current.push_back(v);
    try {
      current_rmse = mean_set_rmse(solver, X, current);
    } catch (const SingularSystemError&) {
      // The set does not determine the signal yet (e.g. it misses a graph
      // component); it cannot meet the bound, so keep growing it.
      current_rmse = std::numeric_limits<double>::infinity();
    } catch (const std::exception& e) {
      throw PartitionError(std::string("partition: reconstruction failed: ") + e.what(), plan);
    }
    if (current_rmse <= epsilon) {
      plan.sets.push_back(std::move(current));
      plan.set_rmse.push_back(current_rmse);
      current.clear();
    }
  }
  if (!current.empty()) {
    plan.sets.push_back(std::move(current));
    plan.set_rmse.push_back(current_rmse);
    plan.last_set_incomplete = true;
  }
  return plan;
}

SamplingPlan partition(const Graph& g, const SpectralBasis& basis, const SignalMatrix& X,
                       double epsilon, const ReconstructionConfig& cfg,
                       const PartitionOptions& options) {
  const BandwidthEstimate bw = estimate_bandwidth(basis, X, options.energy_frac);
  const std::vector<int> order = importance_order(coherence_scores(basis, bw.k));
  return partition_with_order(g, X, order, epsilon, cfg);
}

Sweep set_count_sweep(const Graph& g, const SpectralBasis& basis, const SignalMatrix& X,
                      const std::vector<double>& epsilons, const ReconstructionConfig& cfg,
                      const PartitionOptions& options) {
  if (!std::is_sorted(epsilons.begin(), epsilons.end())) {
    throw std::invalid_argument("set_count_sweep: epsilon list must be ascending");
  }
  const BandwidthEstimate bw = estimate_bandwidth(basis, X, options.energy_frac);
  const std::vector<int> order = importance_order(coherence_scores(basis, bw.k));
  Sweep sweep;
  for (double eps : epsilons) {
    SamplingPlan plan = partition_with_order(g, X, order, eps, cfg);
    sweep.rows.push_back({eps, plan.n_sets(), plan.max_rmse(), plan.last_set_incomplete});
    sweep.plans.push_back(std::move(plan));
  }
  return sweep;
}

bool is_valid_partition(const SamplingPlan& plan, int n) {
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  for (const auto& set : plan.sets) {
    if (set.empty()) return false;
    for (int v : set) {
      if (v < 0 || v >= n) return false;
      if (seen[static_cast<std::size_t>(v)]++ > 0) return false;
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

}  // namespace wsngsp
