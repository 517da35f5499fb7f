#include <cstdio>

#include "doctest.h"
#include "wsngsp/dataset.hpp"
#include "wsngsp/lifetime.hpp"

using namespace wsngsp;

namespace {

/// Formats `value` with as many decimals as `printed` shows.
std::string at_precision_of(double value, const std::string& printed) {
  const auto dot = printed.find('.');
  const int decimals = dot == std::string::npos ? 0 : static_cast<int>(printed.size() - dot - 1);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

SamplingPlan plan_of(std::vector<std::vector<int>> sets) {
  SamplingPlan plan;
  plan.epsilon = 1.0;
  for (const auto& s : sets) plan.node_order.insert(plan.node_order.end(), s.begin(), s.end());
  plan.sets = std::move(sets);
  plan.set_rmse.assign(plan.sets.size(), 0.0);
  return plan;
}

}  // namespace

TEST_CASE("duty-cycle table") {
  const std::vector<std::pair<int, std::string>> table{
      {1, "100"}, {2, "50"}, {21, "4.76"}, {44, "2.27"}, {49, "2.041"}, {51, "1.96"}};
  for (const auto& [sets, printed] : table) {
    const DutyCycleReport r = duty_cycle(sets);
    CHECK(at_precision_of(r.duty_percent(), printed) == printed);
    CHECK(r.lifetime_multiplier == sets);
  }
  CHECK(duty_cycle(1).rendered() == "100");
  CHECK(duty_cycle(2).rendered() == "50");
  CHECK(duty_cycle(21).rendered() == "4.762");
  CHECK(duty_cycle(44).rendered() == "2.273");
  CHECK(duty_cycle(49).rendered() == "2.041");
  CHECK(duty_cycle(51).rendered() == "1.961");
}

TEST_CASE("duty cycle is an exact reduced fraction") {
  const DutyCycleReport r = duty_cycle(44);
  CHECK(r.duty_numerator == 25);
  CHECK(r.duty_denominator == 11);
  for (int n = 1; n <= 200; ++n) {
    const DutyCycleReport d = duty_cycle(n);
    CHECK(d.duty_numerator * n == 100 * d.duty_denominator);
    CHECK(d.duty_percent() * n == doctest::Approx(100.0));
  }
  CHECK_THROWS_AS(duty_cycle(0), std::invalid_argument);
  CHECK_THROWS_AS(duty_cycle(SamplingPlan{}), std::invalid_argument);
}

TEST_CASE("round-robin schedule covers every vertex once per cycle") {
  const SamplingPlan plan = plan_of({{0, 3}, {1}, {2, 4, 5}});
  const Schedule s = Schedule::round_robin(3, 10);
  CHECK(s.rounds == std::vector<int>{0, 1, 2, 0, 1, 2, 0, 1, 2, 0});
  for (int v = 0; v < 6; ++v) {
    for (int first = 0; first + 3 <= 10; ++first) {
      CHECK(s.activations(plan, v, first, 3).size() == 1);
    }
  }
  CHECK(s.activations(plan, 4, 0, 10) == std::vector<int>{2, 5, 8});
  CHECK_THROWS_AS(Schedule::round_robin(0, 5), std::invalid_argument);
}

TEST_CASE("simulated schedule") {
  const Graph g = planted_geometric_graph(8, 0.5, 2);
  const SignalMatrix x = synth_smooth(g, 2, 0.05, 12, 3);

  const ScheduleTrace all = simulate_schedule(g, plan_of({{0, 1, 2, 3, 4, 5, 6, 7}}), x, {});
  CHECK(all.steps.size() == 12);
  CHECK(all.max_rmse == 0.0);
  CHECK(all.mean_rmse == 0.0);

  const SamplingPlan split = plan_of({{0, 2, 4, 6}, {1, 3, 5, 7}});
  const ScheduleTrace trace = simulate_schedule(g, split, x, {}, 2);
  for (const ScheduleStep& step : trace.steps) {
    CHECK(step.round == step.snapshot / 2);
    CHECK(step.set == step.round % 2);
    CHECK(step.rmse <= trace.max_rmse);
  }
  REQUIRE(trace.per_set_mean_rmse.size() == 2);

  CHECK_THROWS_AS(simulate_schedule(g, plan_of({{0, 1}}), x, {}), std::invalid_argument);
}
