#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "wsngsp/dataset.hpp"
#include "wsngsp/learn.hpp"

using namespace wsngsp;

namespace {

LearnConfig tight() {
  LearnConfig cfg;
  cfg.tol = 1e-11;
  cfg.max_iters = 200000;
  cfg.prune_rel = 0.0;
  return cfg;
}

Matrix constant_distances(int n, double value) {
  Matrix z = Matrix::Constant(n, n, value);
  z.diagonal().setZero();
  return z;
}

}  // namespace

TEST_CASE("pairwise distances: small examples") {
  Matrix x(4, 3);
  x << 1, 1, 2,
       5, 5, 0,
       -2, -2, 1,
       0, 0, 0;
  const Matrix z = pairwise_distances(SignalMatrix::fully_observed(x));
  CHECK(z(0, 1) == 0.0);
  CHECK(z(1, 0) == 0.0);
  CHECK(z(0, 0) == 0.0);
  // (1-2)^2 + (5-0)^2 + (-2-1)^2 + 0 = 35
  CHECK(z(0, 2) == doctest::Approx(35.0));

  Matrix one(1, 2);
  one << 0, 3;
  CHECK(pairwise_distances(SignalMatrix::fully_observed(one))(0, 1) == 9.0);
  CHECK_THROWS_AS(pairwise_distances(SignalMatrix::fully_observed(Matrix::Zero(3, 1))),
                  std::invalid_argument);
}

TEST_CASE("pairwise distances with losses match a brute-force loop") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution keep(0.6);
  for (int trial = 0; trial < 20; ++trial) {
    const int t = 12;
    const int n = 6;
    Matrix x(t, n);
    BoolMatrix seen(t, n);
    for (int i = 0; i < t; ++i) {
      for (int j = 0; j < n; ++j) {
        seen(i, j) = keep(rng);
        x(i, j) = seen(i, j) ? normal(rng) : std::nan("");
      }
    }
    const Matrix z = pairwise_distances(SignalMatrix(x, seen));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double expected = oracle::masked_distance(x, seen, i, j);
        if (std::isinf(expected)) {
          CHECK(std::isinf(z(i, j)));
        } else {
          CHECK(z(i, j) == doctest::Approx(expected).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("incremental accumulation equals one pass") {
  const Graph g = planted_geometric_graph(8, 0.5, 2);
  const SignalMatrix x = synth_smooth(g, 2, 0.1, 30, 4);
  DistanceAccumulator acc(8);
  acc.add(x.slice(0, 10));
  acc.add(x.slice(10, 20));
  CHECK((acc.distances() - pairwise_distances(x)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(acc.snapshots() == 30);
  CHECK(acc.node_counts()(3) == 30);
}

TEST_CASE("equal distances give equal weights with the closed-form value") {
  const double alpha = 1.0;
  const double beta = 0.5;
  for (int n : {3, 5, 9}) {
    LearnConfig cfg = tight();
    cfg.alpha = alpha;
    cfg.beta = beta;
    const LearnResult r = learn_weights(constant_distances(n, 7.0), cfg);
    REQUIRE(r.converged);
    // Rescaled distances are all 1; uniform stationary point of
    // beta w^2 + z w - alpha / (n - 1) = 0.
    const double z = 1.0;
    const double expected = (-z + std::sqrt(z * z + 4.0 * alpha * beta / (n - 1))) / (2.0 * beta);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) CHECK(r.unpruned_weights(i, j) == doctest::Approx(expected).epsilon(1e-7));
      }
    }
    CHECK(r.distance_scale == doctest::Approx(7.0));
  }
}

TEST_CASE("zero distances give the uniform barrier-only solution") {
  LearnConfig cfg = tight();
  cfg.alpha = 2.0;
  cfg.beta = 1.0;
  const int n = 6;
  const LearnResult r = learn_weights(Matrix::Zero(n, n), cfg);
  const double expected = std::sqrt(cfg.alpha / (cfg.beta * (n - 1)));
  CHECK(r.unpruned_weights(0, 5) == doctest::Approx(expected).epsilon(1e-7));
  CHECK(r.unpruned_weights(2, 3) == doctest::Approx(expected).epsilon(1e-7));
}

TEST_CASE("two nodes match a golden-section minimizer") {
  for (double z : {0.3, 1.0, 4.0}) {
    for (double beta : {0.1, 1.0, 3.0}) {
      LearnConfig cfg = tight();
      cfg.rescale_distances = false;
      cfg.alpha = 1.5;
      cfg.beta = beta;
      Matrix zm(2, 2);
      zm << 0, z, z, 0;
      const LearnResult r = learn_weights(zm, cfg);
      const double w = oracle::golden_section(
          [&](double v) { return 2.0 * z * v - 2.0 * cfg.alpha * std::log(v) + beta * v * v; },
          1e-9, 100.0);
      CHECK(r.unpruned_weights(0, 1) == doctest::Approx(w).epsilon(1e-6));
    }
  }
}

TEST_CASE("rescaled learning is invariant to the distance scale") {
  const Graph g = planted_geometric_graph(10, 0.45, 9);
  const Matrix z = pairwise_distances(synth_smooth(g, 3, 0.05, 40, 1));
  const LearnConfig cfg = tight();
  const LearnResult a = learn_weights(z, cfg);
  const LearnResult b = learn_weights(z * 250.0, cfg);
  CHECK((a.unpruned_weights - b.unpruned_weights).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("solution is a local minimum of the objective") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 1e-3);
  const Graph g = planted_geometric_graph(9, 0.5, 3);
  const Matrix z = pairwise_distances(synth_smooth(g, 3, 0.05, 30, 2));
  LearnConfig cfg = tight();
  cfg.rescale_distances = false;
  const LearnResult r = learn_weights(z, cfg);
  REQUIRE(r.converged);
  const Matrix& w = r.unpruned_weights;
  CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(w.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(w.minCoeff() >= 0.0);
  const double best = learn_objective(w, z, cfg.alpha, cfg.beta);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix p = w;
    for (int j = 0; j < 9; ++j) {
      for (int i = 0; i < j; ++i) {
        p(i, j) = p(j, i) = std::max(0.0, w(i, j) + normal(rng));
      }
    }
    CHECK(learn_objective(p, z, cfg.alpha, cfg.beta) >= best - 1e-9);
  }
}

TEST_CASE("iteration cap raises NonConvergenceError") {
  const Graph g = planted_geometric_graph(8, 0.5, 3);
  const Matrix z = pairwise_distances(synth_smooth(g, 2, 0.05, 20, 2));
  LearnConfig cfg;
  cfg.max_iters = 1;
  CHECK_THROWS_AS(learn_graph(z, cfg), NonConvergenceError);
  CHECK_FALSE(learn_weights(z, cfg).converged);
}

TEST_CASE("a node without any finite distance is isolated") {
  Matrix z = constant_distances(4, 1.0);
  const double inf = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 4; ++j) {
    if (j != 2) z(2, j) = z(j, 2) = inf;
  }
  const LearnResult r = learn_weights(z, tight());
  REQUIRE(r.isolated.size() == 1);
  CHECK(r.isolated[0] == 2);
  CHECK(r.unpruned_weights.row(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.unpruned_weights(0, 1) > 0.0);
}

TEST_CASE("config validation") {
  LearnConfig cfg;
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.beta = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.prune_rel = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("stream: the same batch twice leaves the Laplacian unchanged") {
  const Graph g = planted_geometric_graph(10, 0.45, 1);
  const SignalMatrix batch = synth_smooth(g, 3, 0.05, 20, 7);
  LaplacianStream stream(10, LearnConfig{});
  const ConvergenceEntry first = stream.update(batch);
  CHECK(std::isinf(first.rel_change));
  CHECK(first.snapshots_seen == 20);
  const ConvergenceEntry second = stream.update(batch);
  CHECK(second.rel_change == 0.0);
  CHECK_FALSE(stream.converged());
  stream.update(batch);
  CHECK(stream.converged());
  REQUIRE(stream.trace().converged_at.has_value());
  CHECK(*stream.trace().converged_at == 2);
}

TEST_CASE("stream: not converged until every node has reported") {
  const Graph g = planted_geometric_graph(6, 0.6, 4);
  SignalMatrix full = synth_smooth(g, 2, 0.05, 10, 8);
  Matrix values = full.values();
  BoolMatrix seen = full.observed();
  values.col(5).setConstant(std::nan(""));
  seen.col(5).setConstant(false);
  const SignalMatrix silent(values, seen);

  LaplacianStream stream(6, LearnConfig{});
  for (int i = 0; i < 5; ++i) {
    stream.update(silent);
    CHECK_FALSE(stream.converged());
  }
  CHECK_FALSE(stream.all_nodes_reported());
  stream.update(full);
  CHECK(stream.all_nodes_reported());
  for (int i = 0; i < 40 && !stream.converged(); ++i) stream.update(full);
  CHECK(stream.converged());
  CHECK(*stream.trace().converged_at >= 5);
}

TEST_CASE("stream: a periodic stream settles and stays settled") {
  const Graph g = planted_geometric_graph(12, 0.45, 6);
  const SignalMatrix data = synth_smooth(g, 3, 0.05, 50, 9);
  LaplacianStream stream(12, LearnConfig{}, 1e-3);
  for (int round = 0; round < 30; ++round) {
    for (int b = 0; b < 5; ++b) stream.update(data.slice(b * 10, 10));
  }
  const auto& entries = stream.trace().entries;
  REQUIRE(stream.converged());
  const int at = *stream.trace().converged_at;
  for (std::size_t i = static_cast<std::size_t>(at); i < entries.size(); ++i) {
    CHECK(entries[i].rel_change < 1e-3);
  }
}
