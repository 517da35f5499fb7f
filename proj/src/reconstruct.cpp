#include "wsngsp/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace wsngsp {

namespace {

constexpr double kMinReciprocalCondition = 1e-12;
constexpr double kTieRelative = 1e-9;
constexpr double kTieAbsolute = 1e-12;

Matrix solve_normal_equations(const Matrix& penalty, const Mask& observed, const Matrix& rhs) {
  Matrix system = penalty;
  for (Eigen::Index i = 0; i < observed.size(); ++i) {
    if (observed(i)) system(i, i) += 1.0;
  }
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success) {
    throw SingularSystemError("reconstruct: normal equations are not positive definite");
  }
  const double rcond = llt.rcond();
  if (!(rcond >= kMinReciprocalCondition)) {
    throw SingularSystemError("reconstruct: normal equations are singular (condition estimate " +
                              std::to_string(1.0 / rcond) + ")");
  }
  return llt.solve(rhs);
}

}  // namespace

void ReconstructionConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("ReconstructionConfig: eta must be finite and > 0");
  }
}

Reconstructor::Reconstructor(const Graph& g, ReconstructionConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const Matrix residual = Matrix::Identity(g.size(), g.size()) - shift_operator(g, cfg_.shift);
  penalty_ = cfg_.eta * (residual.transpose() * residual);
}

Vector Reconstructor::solve(const GraphSignal& partial) const {
  if (partial.size() != size() || partial.observed.size() != size()) {
    throw std::invalid_argument("reconstruct: signal size does not match the graph");
  }
  Matrix row = partial.values.transpose();
  for (Eigen::Index i = 0; i < row.cols(); ++i) {
    if (!partial.observed(i)) row(0, i) = 0.0;
  }
  return solve_rows(partial.observed, row).row(0).transpose();
}

Matrix Reconstructor::solve_rows(const Mask& observed, const Matrix& measurements) const {
  if (observed.size() != size() || measurements.cols() != size()) {
    throw std::invalid_argument("reconstruct: mask or measurements do not match the graph");
  }
  if (!observed.any()) throw std::invalid_argument("reconstruct: no observed vertices");

  Matrix rhs = Matrix::Zero(size(), measurements.rows());
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (!observed(i)) continue;
    if (!measurements.col(i).allFinite()) {
      throw std::invalid_argument("reconstruct: observed vertex " + std::to_string(i) +
                                  " has a non-finite measurement");
    }
    rhs.row(i) = measurements.col(i).transpose();
  }
  Matrix estimate = solve_normal_equations(penalty_, observed, rhs).transpose();
  if (cfg_.clamp_sampled) {
    for (Eigen::Index i = 0; i < size(); ++i) {
      if (observed(i)) estimate.col(i) = measurements.col(i);
    }
  }
  return estimate;
}

double Reconstructor::objective(const Vector& x, const GraphSignal& partial) const {
  double fit = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (partial.observed(i)) fit += (x(i) - partial.values(i)) * (x(i) - partial.values(i));
  }
  return 0.5 * fit + 0.5 * x.dot(penalty_ * x);
}

Vector Reconstructor::gradient(const Vector& x, const GraphSignal& partial) const {
  Vector grad = penalty_ * x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (partial.observed(i)) grad(i) += x(i) - partial.values(i);
  }
  return grad;
}

Vector reconstruct(const Graph& g, const GraphSignal& partial, const ReconstructionConfig& cfg) {
  return Reconstructor(g, cfg).solve(partial);
}

double rmse(const Vector& estimate, const Vector& truth, const std::vector<int>& eval_set) {
  if (eval_set.empty()) throw std::invalid_argument("rmse: empty evaluation set");
  if (estimate.size() != truth.size()) throw std::invalid_argument("rmse: size mismatch");
  double sum = 0.0;
  for (int i : eval_set) {
    if (i < 0 || i >= truth.size()) throw std::out_of_range("rmse: vertex index out of range");
    if (!std::isfinite(truth(i))) {
      throw std::invalid_argument("rmse: truth is not observed at vertex " + std::to_string(i));
    }
    const double d = estimate(i) - truth(i);
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(eval_set.size()));
}

double rmse(const Vector& estimate, const Vector& truth) {
  std::vector<int> eval_set;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    if (std::isfinite(truth(i))) eval_set.push_back(static_cast<int>(i));
  }
  return rmse(estimate, truth, eval_set);
}

EtaGrid EtaGrid::log_spaced(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1) {
    throw std::invalid_argument("EtaGrid: need 0 < lo <= hi and at least one point");
  }
  EtaGrid grid;
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int k = 0; k < points; ++k) {
    const double e = points == 1 ? a : a + (b - a) * k / (points - 1);
    grid.candidates.push_back(std::pow(10.0, e));
  }
  return grid;
}

void EtaGrid::validate() const {
  if (candidates.empty()) throw std::invalid_argument("EtaGrid: no candidates");
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (!(candidates[k] > 0.0)) throw std::invalid_argument("EtaGrid: candidates must be > 0");
    if (k > 0 && !(candidates[k] > candidates[k - 1])) {
      throw std::invalid_argument("EtaGrid: candidates must be strictly ascending");
    }
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("EtaGrid: validation fraction must be in (0, 1)");
  }
}

EtaTuning tune_eta(const Graph& g, const SignalMatrix& snapshots, const Mask& mask,
                   const EtaGrid& grid, ReconstructionConfig base) {
  grid.validate();
  if (snapshots.snapshots() < 2) {
    throw std::invalid_argument("tune_eta: need at least two snapshots");
  }
  if (snapshots.nodes() != g.size() || mask.size() != g.size()) {
    throw std::invalid_argument("tune_eta: dimension mismatch");
  }
  const int total = snapshots.snapshots();
  const int held_out = std::max(1, static_cast<int>(grid.validation_fraction * total));
  const Matrix& values = snapshots.values();

  EtaTuning out;
  out.validation_rmse.assign(grid.candidates.size(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < grid.candidates.size(); ++k) {
    base.eta = grid.candidates[k];
    try {
      const Reconstructor solver(g, base);
      double sum = 0.0;
      int used = 0;
      for (int t = total - held_out; t < total; ++t) {
        const Vector truth = values.row(t).transpose();
        GraphSignal partial{truth, mask && truth.array().isFinite()};
        if (!partial.observed.any()) continue;
        partial.values = partial.observed.select(truth.array(), 0.0).matrix();
        sum += rmse(solver.solve(partial), truth);
        ++used;
      }
      if (used > 0) out.validation_rmse[k] = sum / used;
    } catch (const SingularSystemError&) {
      // stays +inf
    }
  }

  // Scores within round-off of the minimum count as ties; the smallest eta wins.
  double lowest = std::numeric_limits<double>::infinity();
  for (double score : out.validation_rmse) lowest = std::min(lowest, score);
  if (!std::isfinite(lowest)) {
    throw SingularSystemError("tune_eta: every eta candidate produced a singular system");
  }
  const double cutoff = lowest + kTieRelative * lowest + kTieAbsolute;
  std::size_t best = 0;
  while (!(out.validation_rmse[best] <= cutoff)) ++best;
  out.eta = grid.candidates[best];
  return out;
}

}  // namespace wsngsp
