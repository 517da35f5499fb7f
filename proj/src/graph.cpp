#include "wsngsp/graph.hpp"

#include <cmath>

namespace wsngsp {

namespace {

constexpr double kNegativeWeightTolerance = 1e-12;
constexpr double kSignThreshold = 1e-12;

void require_signal_size(const SpectralBasis& basis, Eigen::Index n, const char* what) {
  if (basis.size() != n) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (basis " +
                                std::to_string(basis.size()) + ", signal " + std::to_string(n) +
                                ")");
  }
}

}  // namespace

int Graph::edge_count() const {
  int count = 0;
  for (Eigen::Index j = 0; j < weights_.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      if (weights_(i, j) > 0.0) ++count;
    }
  }
  return count;
}

Graph build_graph(const Matrix& weights) {
  if (weights.rows() != weights.cols()) {
    throw std::invalid_argument("build_graph: weight matrix must be square");
  }
  if (!weights.allFinite()) {
    throw std::invalid_argument("build_graph: weight matrix has NaN or Inf entries");
  }
  if (weights.size() > 0 && weights.minCoeff() < -kNegativeWeightTolerance) {
    throw std::invalid_argument("build_graph: negative edge weight");
  }

  Graph g;
  g.weights_ = 0.5 * (weights + weights.transpose());
  g.weights_ = g.weights_.cwiseMax(0.0);
  g.weights_.diagonal().setZero();
  g.degrees_ = g.weights_.rowwise().sum();
  g.laplacian_ = -g.weights_;
  g.laplacian_.diagonal() = g.degrees_;

  if (g.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(g.weights_, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
      throw EigenSolverError("build_graph: eigensolver failed on adjacency matrix");
    }
    g.spectral_radius_ = solver.eigenvalues().cwiseAbs().maxCoeff();
  }
  return g;
}

SpectralBasis spectral_decompose(const Graph& g) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(g.laplacian());
  if (solver.info() != Eigen::Success) {
    throw EigenSolverError("spectral_decompose: eigensolver did not converge (n = " +
                           std::to_string(g.size()) + ")");
  }
  SpectralBasis basis;
  basis.eigenvalues = solver.eigenvalues().cwiseMax(0.0);
  basis.eigenvectors = solver.eigenvectors();
  for (Eigen::Index k = 0; k < basis.eigenvectors.cols(); ++k) {
    auto column = basis.eigenvectors.col(k);
    for (Eigen::Index i = 0; i < column.size(); ++i) {
      if (std::abs(column(i)) > kSignThreshold) {
        if (column(i) < 0.0) column = -column;
        break;
      }
    }
  }
  return basis;
}

GraphSignal GraphSignal::full(Vector values) {
  GraphSignal s;
  s.observed = Mask::Constant(values.size(), true);
  s.values = std::move(values);
  return s;
}

Vector gft(const SpectralBasis& basis, const GraphSignal& x) {
  require_signal_size(basis, x.size(), "gft");
  if (!x.fully_observed()) {
    throw std::invalid_argument("gft: signal must be fully observed");
  }
  return basis.eigenvectors.transpose() * x.values;
}

GraphSignal igft(const SpectralBasis& basis, const Vector& spectrum) {
  require_signal_size(basis, spectrum.size(), "igft");
  return GraphSignal::full(basis.eigenvectors * spectrum);
}

std::string to_string(ShiftMode mode) {
  return mode == ShiftMode::raw ? "raw" : "normalized";
}

ShiftMode shift_mode_from_string(const std::string& name) {
  if (name == "raw") return ShiftMode::raw;
  if (name == "normalized") return ShiftMode::normalized;
  throw std::invalid_argument("unknown shift mode '" + name + "' (expected raw or normalized)");
}

Matrix shift_operator(const Graph& g, ShiftMode mode) {
  if (mode == ShiftMode::raw) return g.weights();
  if (g.spectral_radius() <= 0.0) {
    throw std::invalid_argument("normalized shift is undefined for a graph without edges");
  }
  return g.weights() / g.spectral_radius();
}

double total_variation(const Graph& g, const GraphSignal& x, TvForm form, ShiftMode shift) {
  if (x.size() != g.size()) {
    throw std::invalid_argument("total_variation: dimension mismatch");
  }
  if (!x.fully_observed()) {
    throw std::invalid_argument("total_variation: signal must be fully observed");
  }
  const Vector residual = x.values - shift_operator(g, shift) * x.values;
  if (form == TvForm::l1) return residual.lpNorm<1>();
  return 0.5 * residual.squaredNorm();
}

double smoothness(const Graph& g, const Matrix& snapshots) {
  if (snapshots.cols() != g.size()) {
    throw std::invalid_argument("smoothness: snapshot width does not match vertex count");
  }
  if (!snapshots.allFinite()) {
    throw std::invalid_argument("smoothness: snapshots must be fully observed");
  }
  // Rows are snapshots: sum_t x_t^T L x_t.
  return (snapshots * g.laplacian()).cwiseProduct(snapshots).sum();
}

}  // namespace wsngsp
