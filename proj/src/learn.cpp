#include "wsngsp/learn.hpp"

#include <cmath>
#include <string>

namespace wsngsp {

namespace {

struct Pair {
  int i;
  int j;
};

}  // namespace

void LearnConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("LearnConfig: alpha must be > 0");
  if (!(beta >= 0.0)) throw std::invalid_argument("LearnConfig: beta must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("LearnConfig: tol must be > 0");
  if (max_iters < 1) throw std::invalid_argument("LearnConfig: max_iters must be >= 1");
  if (!(prune_rel >= 0.0 && prune_rel < 1.0)) {
    throw std::invalid_argument("LearnConfig: prune_rel must be in [0, 1)");
  }
}

NonConvergenceError::NonConvergenceError(int iterations, double final_change)
    : std::runtime_error("graph learning did not converge after " + std::to_string(iterations) +
                         " iterations (final relative change " + std::to_string(final_change) +
                         ")"),
      iterations_(iterations),
      final_change_(final_change) {}

DistanceAccumulator::DistanceAccumulator(int nodes)
    : sums_(Matrix::Zero(nodes, nodes)),
      counts_(Eigen::MatrixXi::Zero(nodes, nodes)),
      node_counts_(Eigen::VectorXi::Zero(nodes)) {
  if (nodes < 2) throw std::invalid_argument("pairwise distances need at least two nodes");
}

void DistanceAccumulator::add(const SignalMatrix& batch) {
  if (batch.nodes() != nodes()) {
    throw std::invalid_argument("DistanceAccumulator: batch has " + std::to_string(batch.nodes()) +
                                " columns, expected " + std::to_string(nodes()));
  }
  const Matrix& x = batch.values();
  const BoolMatrix& seen = batch.observed();
  const int n = nodes();
  for (int t = 0; t < batch.snapshots(); ++t) {
    for (int j = 0; j < n; ++j) {
      if (!seen(t, j)) continue;
      ++node_counts_(j);
      for (int i = 0; i < j; ++i) {
        if (!seen(t, i)) continue;
        const double d = x(t, i) - x(t, j);
        sums_(i, j) += d * d;
        ++counts_(i, j);
      }
    }
  }
  snapshots_ += batch.snapshots();
}

Matrix DistanceAccumulator::distances() const {
  const int n = nodes();
  Matrix z = Matrix::Zero(n, n);
  const double total = static_cast<double>(snapshots_);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const double value = counts_(i, j) > 0
                               ? total * (sums_(i, j) / static_cast<double>(counts_(i, j)))
                               : std::numeric_limits<double>::infinity();
      z(i, j) = value;
      z(j, i) = value;
    }
  }
  return z;
}

Matrix pairwise_distances(const SignalMatrix& X) {
  DistanceAccumulator acc(X.nodes());
  acc.add(X);
  return acc.distances();
}

double learn_objective(const Matrix& W, const Matrix& Z, double alpha, double beta) {
  const Eigen::Index n = W.rows();
  double linear = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != j && std::isfinite(Z(i, j))) linear += W(i, j) * Z(i, j);
    }
  }
  double barrier = 0.0;
  const Vector degrees = W.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    bool connectable = false;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && std::isfinite(Z(i, j))) connectable = true;
    }
    if (connectable) barrier += std::log(degrees(i));
  }
  return linear - alpha * barrier + 0.5 * beta * W.squaredNorm();
}

LearnResult learn_weights(const Matrix& Z, const LearnConfig& cfg, const Matrix* warm_start,
                          const Vector* warm_dual) {
  cfg.validate();
  const int n = static_cast<int>(Z.rows());
  if (Z.cols() != n) throw std::invalid_argument("learn_weights: Z must be square");
  if (n < 2) throw std::invalid_argument("learn_weights: need at least two nodes");
  if (warm_start && (warm_start->rows() != n || warm_start->cols() != n)) {
    throw std::invalid_argument("learn_weights: warm start has the wrong shape");
  }
  if (warm_dual && warm_dual->size() != n) {
    throw std::invalid_argument("learn_weights: warm dual has the wrong size");
  }

  std::vector<Pair> pairs;
  std::vector<double> zs;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const double zij = 0.5 * (Z(i, j) + Z(j, i));
      if (std::isnan(zij) || zij < 0.0) {
        throw std::invalid_argument("learn_weights: distances must be nonnegative");
      }
      if (std::isinf(zij)) continue;
      pairs.push_back({i, j});
      zs.push_back(zij);
    }
  }

  LearnResult result;
  std::vector<int> active_degree(static_cast<std::size_t>(n), 0);
  for (const Pair& p : pairs) {
    ++active_degree[static_cast<std::size_t>(p.i)];
    ++active_degree[static_cast<std::size_t>(p.j)];
  }
  for (int i = 0; i < n; ++i) {
    if (active_degree[static_cast<std::size_t>(i)] == 0) result.isolated.push_back(i);
  }

  const Eigen::Index m = static_cast<Eigen::Index>(pairs.size());
  Vector z = Eigen::Map<const Vector>(zs.data(), m);
  if (cfg.rescale_distances && m > 0) {
    const double mean = z.mean();
    if (mean > 0.0) {
      result.distance_scale = mean;
      z /= mean;
    }
  }

  auto degree_of = [&](const Vector& w) {
    Vector d = Vector::Zero(n);
    for (Eigen::Index p = 0; p < m; ++p) {
      d(pairs[p].i) += w(p);
      d(pairs[p].j) += w(p);
    }
    return d;
  };
  auto adjoint_of = [&](const Vector& v) {
    Vector out(m);
    for (Eigen::Index p = 0; p < m; ++p) out(p) = v(pairs[p].i) + v(pairs[p].j);
    return out;
  };

  Vector w = Vector::Zero(m);
  if (warm_start) {
    for (Eigen::Index p = 0; p < m; ++p) {
      w(p) = std::max(0.0, (*warm_start)(pairs[p].i, pairs[p].j));
    }
  }
  // Dual starts at the barrier gradient -alpha / d, which is its fixed point.
  Vector v = Vector::Zero(n);
  if (warm_start && warm_dual) {
    v = *warm_dual;
  } else if (warm_start) {
    const Vector d = degree_of(w);
    for (int i = 0; i < n; ++i) {
      if (d(i) > 0.0) v(i) = -cfg.alpha / d(i);
    }
  }

  // The degree operator has norm sqrt(2(n - 1)); the smooth term has
  // Lipschitz gradient 2 * beta. Step is half the stability limit.
  const double alpha = cfg.alpha;
  const double beta = cfg.beta;
  const double mu = 2.0 * beta + std::sqrt(2.0 * (n - 1));
  const double step = 0.5 / mu;

  for (int iter = 1; iter <= cfg.max_iters && m > 0; ++iter) {
    const Vector y_primal = w - step * (2.0 * beta * w + adjoint_of(v));
    const Vector y_dual = v + step * degree_of(w);
    const Vector p_primal = (y_primal - 2.0 * step * z).cwiseMax(0.0);
    const Vector p_dual =
        0.5 * (y_dual.array() - (y_dual.array().square() + 4.0 * alpha * step).sqrt()).matrix();
    const Vector q_primal = p_primal - step * (2.0 * beta * p_primal + adjoint_of(p_dual));
    const Vector q_dual = p_dual + step * degree_of(p_primal);

    const Vector w_next = w - y_primal + q_primal;
    v = v - y_dual + q_dual;

    const double base = w.norm();
    result.final_change = base > 0.0 ? (w_next - w).norm() / base
                                     : std::numeric_limits<double>::infinity();
    result.iterations = iter;
    if (result.final_change < cfg.tol) {
      result.converged = true;
      // A warm start that already meets the tolerance is kept as is.
      if (!(warm_start && iter == 1)) w = w_next;
      break;
    }
    w = w_next;
  }
  if (m == 0) {
    result.converged = true;
    result.final_change = 0.0;
  }
  result.dual = v;

  Matrix weights = Matrix::Zero(n, n);
  for (Eigen::Index p = 0; p < m; ++p) {
    const double value = std::max(0.0, w(p));
    weights(pairs[p].i, pairs[p].j) = value;
    weights(pairs[p].j, pairs[p].i) = value;
  }
  result.unpruned_weights = weights;

  const double cutoff = cfg.prune_rel * (weights.size() > 0 ? weights.maxCoeff() : 0.0);
  Matrix pruned = (weights.array() < cutoff).select(0.0, weights);
  result.graph = build_graph(pruned);
  return result;
}

Graph learn_graph(const Matrix& Z, const LearnConfig& cfg) {
  LearnResult result = learn_weights(Z, cfg);
  if (!result.converged) throw NonConvergenceError(result.iterations, result.final_change);
  return std::move(result.graph);
}

LaplacianStream::LaplacianStream(int nodes, LearnConfig cfg, double stability_threshold)
    : cfg_(cfg), stability_threshold_(stability_threshold), accumulator_(nodes) {
  cfg_.validate();
  if (!(stability_threshold_ > 0.0)) {
    throw std::invalid_argument("LaplacianStream: stability threshold must be > 0");
  }
}

bool LaplacianStream::all_nodes_reported() const {
  return (accumulator_.node_counts().array() > 0).all();
}

ConvergenceEntry LaplacianStream::update(const SignalMatrix& batch) {
  accumulator_.add(batch);
  LearnResult result =
      learn_weights(accumulator_.distances(), cfg_, warm_ ? &*warm_ : nullptr,
                    warm_ ? &warm_dual_ : nullptr);
  if (!result.converged) throw NonConvergenceError(result.iterations, result.final_change);

  ConvergenceEntry entry;
  entry.snapshots_seen = accumulator_.snapshots();
  if (!has_graph_) {
    entry.rel_change = std::numeric_limits<double>::infinity();
  } else {
    const double previous = graph_.laplacian().norm();
    const double diff = (result.graph.laplacian() - graph_.laplacian()).norm();
    if (previous > 0.0) {
      entry.rel_change = diff / previous;
    } else {
      entry.rel_change = diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
  }

  warm_ = result.unpruned_weights;
  warm_dual_ = result.dual;
  graph_ = std::move(result.graph);
  has_graph_ = true;

  stable_streak_ = entry.rel_change < stability_threshold_ ? stable_streak_ + 1 : 0;
  const bool now_converged = stable_streak_ >= 2 && all_nodes_reported();
  if (now_converged && !trace_.converged) {
    trace_.converged_at = static_cast<int>(trace_.entries.size());
  } else if (!now_converged) {
    trace_.converged_at.reset();
  }
  trace_.converged = now_converged;
  trace_.entries.push_back(entry);
  return entry;
}

}  // namespace wsngsp
