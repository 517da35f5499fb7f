#pragma once

// Undirected weighted graphs, Laplacian spectra and the graph Fourier transform.

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace wsngsp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when the dense eigensolver does not converge.
class EigenSolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable undirected graph: symmetric nonnegative adjacency with zero
/// diagonal, weighted degree matrix and combinatorial Laplacian L = D - W.
class Graph {
 public:
  Graph() = default;

  int size() const { return static_cast<int>(weights_.rows()); }
  const Matrix& weights() const { return weights_; }
  const Vector& degrees() const { return degrees_; }
  const Matrix& laplacian() const { return laplacian_; }

  /// Number of strictly positive weights above the diagonal.
  int edge_count() const;

  /// Largest eigenvalue magnitude of W. Zero for the empty graph.
  double spectral_radius() const { return spectral_radius_; }

 private:
  friend Graph build_graph(const Matrix& weights);

  Matrix weights_;
  Vector degrees_;
  Matrix laplacian_;
  double spectral_radius_ = 0.0;
};

/// Symmetrizes W as (W + W^T)/2, zeroes the diagonal and forms D and L.
/// Throws std::invalid_argument for non-square input, non-finite entries or
/// weights below -1e-12. Tiny negative weights within tolerance are clamped to 0.
Graph build_graph(const Matrix& weights);

struct SpectralBasis {
  Matrix eigenvectors;  // columns u_i, orthonormal
  Vector eigenvalues;   // ascending, clipped at 0

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

/// Dense symmetric eigendecomposition L = U diag(lambda) U^T. Eigenvalues
/// are ascending; each eigenvector is signed so that its first component
/// with magnitude above 1e-12 is positive.
SpectralBasis spectral_decompose(const Graph& g);

/// A signal on the graph vertices with an observation mask.
struct GraphSignal {
  Vector values;
  Mask observed;

  static GraphSignal full(Vector values);
  int size() const { return static_cast<int>(values.size()); }
  bool fully_observed() const { return observed.all(); }
};

/// Forward transform U^T x. Requires a fully observed signal.
Vector gft(const SpectralBasis& basis, const GraphSignal& x);

/// Inverse transform U s.
GraphSignal igft(const SpectralBasis& basis, const Vector& spectrum);

enum class TvForm { l1, quadratic };
enum class ShiftMode { raw, normalized };

std::string to_string(ShiftMode mode);
ShiftMode shift_mode_from_string(const std::string& name);

/// Graph shift operator: W itself, or W / rho(W).
/// Throws std::invalid_argument for the normalized shift of an empty graph.
Matrix shift_operator(const Graph& g, ShiftMode mode);

/// ||x - Sx||_1 (l1) or 0.5 ||x - Sx||_2^2 (quadratic) for shift S.
double total_variation(const Graph& g, const GraphSignal& x, TvForm form, ShiftMode shift);

/// tr(X^T L X) where the columns of X (a T x N matrix, rows are snapshots)
/// are the per-node series. Equals 0.5 * sum_ij W_ij ||x_i - x_j||^2.
double smoothness(const Graph& g, const Matrix& snapshots);

}  // namespace wsngsp
