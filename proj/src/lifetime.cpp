#include "wsngsp/lifetime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace wsngsp {

std::string DutyCycleReport::rendered() const { return fmt::format("{:.4g}", duty_percent()); }

DutyCycleReport duty_cycle(int n_sets) {
  if (n_sets < 1) throw std::invalid_argument("duty_cycle: plan has no sets");
  DutyCycleReport report;
  report.n_sets = n_sets;
  const std::int64_t g = std::gcd<std::int64_t, std::int64_t>(100, n_sets);
  report.duty_numerator = 100 / g;
  report.duty_denominator = n_sets / g;
  report.lifetime_multiplier = n_sets;
  return report;
}

DutyCycleReport duty_cycle(const SamplingPlan& plan) { return duty_cycle(plan.n_sets()); }

Schedule Schedule::round_robin(int n_sets, int n_rounds, int round_epochs) {
  if (n_sets < 1) throw std::invalid_argument("Schedule: need at least one set");
  if (n_rounds < 0 || round_epochs < 1) {
    throw std::invalid_argument("Schedule: invalid round count or duration");
  }
  Schedule s;
  s.n_sets = n_sets;
  s.round_epochs = round_epochs;
  s.rounds.resize(static_cast<std::size_t>(n_rounds));
  for (int r = 0; r < n_rounds; ++r) s.rounds[static_cast<std::size_t>(r)] = r % n_sets;
  return s;
}

std::vector<int> Schedule::activations(const SamplingPlan& plan, int vertex, int first_round,
                                       int count) const {
  std::vector<int> out;
  for (int r = first_round; r < first_round + count && r < static_cast<int>(rounds.size()); ++r) {
    const auto& set = plan.sets.at(static_cast<std::size_t>(rounds[static_cast<std::size_t>(r)]));
    if (std::find(set.begin(), set.end(), vertex) != set.end()) out.push_back(r);
  }
  return out;
}

ScheduleTrace simulate_schedule(const Graph& g, const SamplingPlan& plan, const SignalMatrix& X,
                                const ReconstructionConfig& cfg, int round_epochs) {
  if (plan.sets.empty()) throw std::invalid_argument("simulate_schedule: plan has no sets");
  if (X.nodes() != g.size()) throw std::invalid_argument("simulate_schedule: data/graph mismatch");
  if (!is_valid_partition(plan, g.size())) {
    throw std::invalid_argument("simulate_schedule: plan is not a partition of the graph vertices");
  }
  const int rounds = (X.snapshots() + round_epochs - 1) / std::max(1, round_epochs);
  const Schedule schedule = Schedule::round_robin(plan.n_sets(), rounds, round_epochs);
  const Reconstructor solver(g, cfg);

  ScheduleTrace trace;
  std::vector<double> set_sum(plan.sets.size(), 0.0);
  std::vector<int> set_count(plan.sets.size(), 0);
  double sum = 0.0;
  int used = 0;
  for (int t = 0; t < X.snapshots(); ++t) {
    ScheduleStep step;
    step.snapshot = t;
    step.round = t / round_epochs;
    step.set = schedule.rounds[static_cast<std::size_t>(step.round)];
    const Vector truth = X.values().row(t).transpose();
    GraphSignal partial{Vector::Zero(g.size()), Mask::Constant(g.size(), false)};
    for (int v : plan.sets[static_cast<std::size_t>(step.set)]) {
      if (std::isfinite(truth(v))) {
        partial.observed(v) = true;
        partial.values(v) = truth(v);
      }
    }
    step.rmse = std::numeric_limits<double>::quiet_NaN();
    if (partial.observed.any()) {
      step.rmse = rmse(solver.solve(partial), truth);
      trace.max_rmse = std::max(trace.max_rmse, step.rmse);
      sum += step.rmse;
      ++used;
      set_sum[static_cast<std::size_t>(step.set)] += step.rmse;
      ++set_count[static_cast<std::size_t>(step.set)];
    }
    trace.steps.push_back(step);
  }
  trace.mean_rmse = used > 0 ? sum / used : 0.0;
  for (std::size_t s = 0; s < plan.sets.size(); ++s) {
    trace.per_set_mean_rmse.push_back(set_count[s] > 0
                                          ? set_sum[s] / set_count[s]
                                          : std::numeric_limits<double>::quiet_NaN());
  }
  return trace;
}

}  // namespace wsngsp
