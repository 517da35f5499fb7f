#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "wsngsp/dataset.hpp"
#include "wsngsp/sampling.hpp"

using namespace wsngsp;

namespace {

Graph cycle(int n) {
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) w(i, (i + 1) % n) = w((i + 1) % n, i) = 1.0;
  return build_graph(w);
}

Graph path3() {
  Matrix w(3, 3);
  w << 0, 1, 0,
       1, 0, 1,
       0, 1, 0;
  return build_graph(w);
}

/// Reconstruction by QR on the stacked least-squares system, clamped.
Vector lsq_reconstruct(const Matrix& shift, const std::vector<int>& sampled, const Vector& y,
                       double eta) {
  const Eigen::Index n = shift.rows();
  Matrix a = Matrix::Zero(n + static_cast<Eigen::Index>(sampled.size()), n);
  Vector b = Vector::Zero(a.rows());
  for (std::size_t r = 0; r < sampled.size(); ++r) {
    a(static_cast<Eigen::Index>(r), sampled[r]) = 1.0;
    b(static_cast<Eigen::Index>(r)) = y(sampled[r]);
  }
  a.bottomRows(n) = std::sqrt(eta) * (Matrix::Identity(n, n) - shift);
  Vector x = a.colPivHouseholderQr().solve(b);
  for (int v : sampled) x(v) = y(v);
  return x;
}

}  // namespace

TEST_CASE("bandwidth estimates") {
  const Graph g = planted_geometric_graph(15, 0.45, 2);
  const SpectralBasis basis = spectral_decompose(g);

  Matrix constant(4, 15);
  for (int t = 0; t < 4; ++t) constant.row(t) = (t + 1.0) * basis.eigenvectors.col(0).transpose();
  for (double frac : {0.5, 0.95, 1.0}) {
    CHECK(estimate_bandwidth(basis, SignalMatrix::fully_observed(constant), frac).k == 1);
  }

  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  Matrix noise(20, 15);
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise(i) = normal(rng);
  CHECK(estimate_bandwidth(basis, SignalMatrix::fully_observed(noise), 1.0).k == 15);

  // Three components with unit-variance coefficients plus 1% noise.
  const BandwidthEstimate bw = estimate_bandwidth(basis, synth_smooth(g, 3, 0.01, 200, 4), 0.95);
  CHECK(bw.k == 3);
  CHECK(bw.energy_fraction >= 0.95);

  CHECK_THROWS_AS(estimate_bandwidth(basis, SignalMatrix::fully_observed(noise), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      estimate_bandwidth(basis, SignalMatrix::from_finite(Matrix::Constant(2, 15, std::nan(""))),
                         0.9),
      std::invalid_argument);
}

TEST_CASE("coherence examples") {
  const SpectralBasis path = spectral_decompose(path3());
  const Vector s = coherence_scores(path, 2);
  CHECK(s(0) == doctest::Approx(5.0 / 6.0).epsilon(1e-9));
  CHECK(s(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(s(2) == doctest::Approx(5.0 / 6.0).epsilon(1e-9));

  Matrix kw = Matrix::Ones(5, 5);
  kw.diagonal().setZero();
  const SpectralBasis complete = spectral_decompose(build_graph(kw));
  for (int k : {1, 5}) {
    const Vector c = coherence_scores(complete, k);
    for (int i = 0; i < 5; ++i) CHECK(c(i) == doctest::Approx(k / 5.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(coherence_scores(complete, 0), std::out_of_range);
  CHECK_THROWS_AS(coherence_scores(complete, 6), std::out_of_range);
}

TEST_CASE("coherence on a cycle is uniform when k closes an eigenspace") {
  // Cycle spectrum: 0, then pairs. k = 1, 3, 5 end on a gap, so the scores
  // do not depend on the basis chosen inside a degenerate eigenspace.
  const SpectralBasis basis = spectral_decompose(cycle(8));
  for (int k : {1, 3, 5, 8}) {
    const Vector c = coherence_scores(basis, k);
    for (int i = 0; i < 8; ++i) CHECK(c(i) == doctest::Approx(k / 8.0).epsilon(1e-9));
  }
}

TEST_CASE("coherence sums to k") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + trial % 12;
    const SpectralBasis basis = spectral_decompose(build_graph(oracle::random_weights(n, 0.3, rng)));
    for (int k = 1; k <= n; ++k) {
      const Vector c = coherence_scores(basis, k);
      CHECK(std::abs(c.sum() - k) < 1e-9);
      CHECK(c.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("importance order: descending, ties by index") {
  Vector s(5);
  s << 0.2, 0.5, 0.2, 0.9, 0.5 + 1e-15;
  CHECK(importance_order(s) == std::vector<int>{3, 1, 4, 0, 2});
}

TEST_CASE("embedding check") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  Matrix x(10, 6);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
  const SignalMatrix data = SignalMatrix::fully_observed(x);

  const SamplingMask full = SamplingMask::from_vertices(6, {0, 1, 2, 3, 4, 5});
  const EmbeddingCheck all = verify_embedding(full, data, 0.01);
  CHECK(all.satisfied);
  CHECK(all.worst_ratio == 1.0);
  CHECK(all.checked == 10);

  Matrix spike = Matrix::Zero(1, 6);
  spike(0, 4) = 2.0;
  const EmbeddingCheck single =
      verify_embedding(SamplingMask::from_vertices(6, {1}), SignalMatrix::fully_observed(spike), 0.5);
  CHECK_FALSE(single.satisfied);
  CHECK(single.worst_ratio == 0.0);

  Matrix zeros = Matrix::Zero(3, 6);
  const EmbeddingCheck skipped =
      verify_embedding(full, SignalMatrix::fully_observed(zeros), 0.5);
  CHECK(skipped.skipped == 3);
  CHECK_FALSE(skipped.satisfied);

  CHECK_THROWS_AS(verify_embedding(full, data, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(verify_embedding(SamplingMask::from_vertices(6, {}), data, 0.5),
                  std::invalid_argument);
}

TEST_CASE("embedding verdicts agree with a direct recomputation") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution pick(0.5);
  const Graph g = planted_geometric_graph(12, 0.5, 1);
  const SignalMatrix data = synth_smooth(g, 3, 0.05, 15, 2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> chosen;
    for (int i = 0; i < 12; ++i) {
      if (pick(rng)) chosen.push_back(i);
    }
    if (chosen.empty()) chosen.push_back(trial % 12);
    const SamplingMask mask = SamplingMask::from_vertices(12, chosen);
    const double delta = 0.3;
    bool expected = true;
    for (int t = 0; t < data.snapshots(); ++t) {
      double kept = 0.0;
      for (int v : chosen) kept += data.values()(t, v) * data.values()(t, v);
      const double ratio = 12.0 * kept / (static_cast<double>(chosen.size()) *
                                          data.values().row(t).squaredNorm());
      if (ratio < 1.0 - delta || ratio > 1.0 + delta) expected = false;
    }
    CHECK(verify_embedding(mask, data, delta).satisfied == expected);
  }
}

TEST_CASE("partition edge cases") {
  const Graph g = planted_geometric_graph(10, 0.5, 4);
  const SpectralBasis basis = spectral_decompose(g);
  const SignalMatrix data = synth_smooth(g, 3, 0.05, 20, 5);
  const ReconstructionConfig cfg;

  const SamplingPlan singletons = partition(g, basis, data, 1e6, cfg);
  CHECK(singletons.n_sets() == 10);
  for (const auto& set : singletons.sets) CHECK(set.size() == 1);
  CHECK_FALSE(singletons.last_set_incomplete);

  // With clamping, observing every vertex reproduces the data exactly, so a
  // tiny epsilon still ends with one set covering V.
  const SamplingPlan one = partition(g, basis, data, 1e-300, cfg);
  CHECK(one.n_sets() == 1);
  CHECK(one.sets[0].size() == 10);
  CHECK(one.set_rmse[0] == 0.0);

  CHECK_THROWS_AS(partition(g, basis, data, 0.0, cfg), std::invalid_argument);
  CHECK_THROWS_AS(partition(g, basis, data, -0.1, cfg), std::invalid_argument);
  CHECK_THROWS_AS(partition_with_order(g, data, {0, 1, 2}, 0.1, cfg), std::invalid_argument);
}

TEST_CASE("partition invariants on random fixtures") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Graph g = planted_geometric_graph(16, 0.4, seed);
    const SpectralBasis basis = spectral_decompose(g);
    const SignalMatrix data = synth_smooth(g, 3, 0.1, 25, seed + 100);
    for (double eps : {0.2, 0.5, 1.0}) {
      const SamplingPlan plan = partition(g, basis, data, eps, {});
      CHECK(is_valid_partition(plan, 16));
      for (int s = 0; s < plan.n_sets(); ++s) {
        const bool last = s + 1 == plan.n_sets();
        if (!(last && plan.last_set_incomplete)) CHECK(plan.set_rmse[s] <= eps);
      }
      CHECK(plan.last_set_incomplete == (plan.set_rmse.back() > eps));

      // Sets are contiguous runs of the node order.
      std::vector<int> flat;
      for (const auto& set : plan.sets) flat.insert(flat.end(), set.begin(), set.end());
      CHECK(flat == plan.node_order);

      const SamplingPlan again = partition(g, basis, data, eps, {});
      CHECK(again.sets == plan.sets);
      CHECK(again.set_rmse == plan.set_rmse);
    }
  }
}

TEST_CASE("a larger epsilon never closes a run later from the same start") {
  const Graph g = planted_geometric_graph(12, 0.45, 7);
  const SpectralBasis basis = spectral_decompose(g);
  const SignalMatrix data = synth_smooth(g, 3, 0.1, 20, 3);
  const std::vector<int> order = importance_order(coherence_scores(basis, 3));
  const Reconstructor solver(g, {});
  const std::vector<double> eps{0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
  for (std::size_t start = 0; start < order.size(); ++start) {
    std::vector<double> prefix_rmse;
    std::vector<int> set;
    for (std::size_t j = start; j < order.size(); ++j) {
      set.push_back(order[j]);
      prefix_rmse.push_back(mean_set_rmse(solver, data, set));
    }
    std::size_t previous_end = prefix_rmse.size();
    for (double e : eps) {
      std::size_t end = 0;
      while (end < prefix_rmse.size() && prefix_rmse[end] > e) ++end;
      CHECK(end <= previous_end);
      previous_end = end;
    }
  }
}

TEST_CASE("small instances: boundaries match a brute-force prefix search") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 6;
    const Graph g = build_graph(oracle::random_weights(n, 0.5, rng));
    Matrix row(1, n);
    for (int i = 0; i < n; ++i) row(0, i) = normal(rng);
    const SignalMatrix data = SignalMatrix::fully_observed(row);
    const SpectralBasis basis = spectral_decompose(g);
    const std::vector<int> order = importance_order(coherence_scores(basis, std::max(1, n / 2)));
    const Matrix shift = shift_operator(g, ShiftMode::normalized);
    const double eps = 0.3;

    std::vector<std::vector<int>> expected;
    std::size_t start = 0;
    while (start < order.size()) {
      std::size_t end = start;
      for (; end < order.size(); ++end) {
        const std::vector<int> set(order.begin() + static_cast<long>(start),
                                   order.begin() + static_cast<long>(end) + 1);
        const Vector x = lsq_reconstruct(shift, set, row.row(0).transpose(), 1.0);
        if (oracle::rmse(x, row.row(0).transpose()) <= eps) break;
      }
      end = std::min(end, order.size() - 1);
      expected.emplace_back(order.begin() + static_cast<long>(start),
                            order.begin() + static_cast<long>(end) + 1);
      start = end + 1;
    }
    const SamplingPlan plan = partition_with_order(g, data, order, eps, {});
    CHECK(plan.sets == expected);
  }
}

TEST_CASE("sweep: monotone set counts and per-row guarantee on fixtures") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Graph g = planted_geometric_graph(20, 0.4, seed);
    const SpectralBasis basis = spectral_decompose(g);
    const SignalMatrix data = synth_smooth(g, 3, 0.05, 30, seed);
    const std::vector<double> eps{0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0};
    const Sweep sweep = set_count_sweep(g, basis, data, eps, {});
    REQUIRE(sweep.rows.size() == eps.size());
    for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
      if (i > 0) CHECK(sweep.rows[i].n_sets >= sweep.rows[i - 1].n_sets);
      if (!sweep.rows[i].last_set_incomplete) CHECK(sweep.rows[i].max_rmse <= eps[i]);
    }
  }
  const Graph g = planted_geometric_graph(8, 0.5, 1);
  CHECK_THROWS_AS(set_count_sweep(g, spectral_decompose(g), synth_smooth(g, 2, 0.0, 5, 1),
                                  {0.5, 0.1}, {}),
                  std::invalid_argument);
}
