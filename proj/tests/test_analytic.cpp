#include <cmath>

#include "coexsim/analytic.hpp"
#include "coexsim/link_model.hpp"
#include "coexsim/scenario_io.hpp"
#include "doctest.h"

using namespace coexsim;

namespace {

// Inputs matching the bundled two-STA scenario, downlink model.
AnalyticInputs fig1_inputs() {
  AnalyticInputs in;
  in.n_total = 2;
  in.n_victim = 1;
  in.t_data_off_us = 365.0;   // mean of 451 (victim @78) and 279 (@130)
  in.t_data_on_us = 667.0;    // non-victim @52
  in.t_data_cfp_us = 451.0;   // victim @78
  return in;
}

}  // namespace

TEST_CASE("building-block exchange times") {
  MacTimings t;
  // DIFS + 7.5 slots + RTS + 3 SIFS + CTS + data + ACK.
  CHECK(contended_exchange_us(t, 16, 278.8) ==
        doctest::Approx(605.53076923076923).epsilon(1e-9));
  CHECK(contended_exchange_us(t, 16, 365.0) ==
        doctest::Approx(691.73076923076923).epsilon(1e-9));
  // 2 SIFS + data + ACK; no contention overhead.
  CHECK(polled_exchange_us(t, 278.8) ==
        doctest::Approx(367.41538461538462).epsilon(1e-9));
  CHECK(polled_exchange_us(t, 451.0) ==
        doctest::Approx(539.61538461538462).epsilon(1e-9));
  // Polled beats contended at every airtime.
  for (double d : {100.0, 365.0, 667.0, 5201.0}) {
    CHECK(polled_exchange_us(t, d) < contended_exchange_us(t, 16, d));
  }
  // 7 attempts: backoff slots (15+31+...+1023)/2 * 9us + 7*(DIFS+RTS+timeout).
  CHECK(retry_drop_us(t, 16, 6, 7) == doctest::Approx(10148.5).epsilon(1e-12));
  // One attempt, no doubling.
  CHECK(retry_drop_us(t, 16, 6, 1) == doctest::Approx(7.5 * 9 + 148).epsilon(1e-12));
  // Window capping: with zero stages every retry uses the initial window.
  CHECK(retry_drop_us(t, 16, 0, 3) == doctest::Approx(3 * (7.5 * 9 + 148)).epsilon(1e-12));
}

TEST_CASE("validation rejects out-of-range inputs") {
  AnalyticInputs in = fig1_inputs();
  CHECK(validate(in).empty());

  in.n_victim = 3;  // more victims than STAs
  CHECK(!validate(in).empty());
  in = fig1_inputs();
  in.eta = 1.2;
  CHECK(!validate(in).empty());
  in = fig1_inputs();
  in.cfp_fraction = -0.1;
  CHECK(!validate(in).empty());
  in = fig1_inputs();
  in.t_data_off_us = -1;
  CHECK(!validate(in).empty());
  in = fig1_inputs();
  in.t_data_on_us = in.t_data_off_us - 1;  // interference can't speed links up
  CHECK(!validate(in).empty());
  in = fig1_inputs();
  in.cw_min = 1;
  CHECK(!validate(in).empty());
  in = fig1_inputs();
  in.retry_limit = 0;
  CHECK(!validate(in).empty());
}

TEST_CASE("standard scheme splits the OFF window and wastes ON on victims") {
  AnalyticInputs in = fig1_inputs();
  in.eta = 0.5;
  const ThroughputReport r = standard_throughputs(in);
  CHECK(r.victim_mbps == doctest::Approx(11.7791).epsilon(1e-4));
  CHECK(r.nonvictim_mbps == doctest::Approx(13.2417).epsilon(1e-4));
  CHECK(r.total_mbps == doctest::Approx(25.0208).epsilon(1e-4));
  CHECK(r.total_mbps == doctest::Approx(r.victim_mbps + r.nonvictim_mbps));

  // Victims die completely at full duty cycle -- exact zero, no tolerance.
  in.eta = 1.0;
  CHECK(standard_throughputs(in).victim_mbps == 0.0);

  // No LTE at all: everyone shares the channel equally.
  in.eta = 0.0;
  const ThroughputReport idle = standard_throughputs(in);
  CHECK(idle.victim_mbps == doctest::Approx(idle.nonvictim_mbps));
  CHECK(idle.victim_mbps == doctest::Approx(32592.0 / (2 * 691.73077)).epsilon(1e-6));
}

TEST_CASE("victim rate under the standard scheme is affine in eta") {
  const AnalyticInputs base = fig1_inputs();
  auto v = [&](double eta) {
    AnalyticInputs in = base;
    in.eta = eta;
    return standard_throughputs(in).victim_mbps;
  };
  const double mid = v(0.5);
  CHECK(std::fabs(mid - 0.5 * (v(0.0) + v(1.0))) <= 1e-12 * std::max(1.0, std::fabs(mid)));
}

TEST_CASE("polled scheme at the fair fraction equalizes the classes") {
  AnalyticInputs in = fig1_inputs();
  in.eta = 0.5;
  const auto x = solve_fair_x(in);
  REQUIRE(x.has_value());
  CHECK(*x == doctest::Approx(0.2715098502148082).epsilon(1e-12));

  in.cfp_fraction = *x;
  const ThroughputReport r = proposed_throughputs(in);
  CHECK(r.victim_mbps == doctest::Approx(r.nonvictim_mbps).epsilon(1e-9));
  CHECK(r.victim_mbps == doctest::Approx(21.7817).epsilon(1e-4));
  CHECK(r.total_mbps == doctest::Approx(2 * 21.7817).epsilon(1e-4));

  // And it beats the standard scheme for everyone.
  const ThroughputReport s = standard_throughputs(in);
  CHECK(r.victim_mbps >= s.victim_mbps);
  CHECK(r.total_mbps >= s.total_mbps);
}

TEST_CASE("polled scheme rejects a CFP that overlaps LTE-ON") {
  AnalyticInputs in = fig1_inputs();
  in.eta = 0.6;
  in.cfp_fraction = 0.5;  // 0.5 > 1 - 0.6
  CHECK_THROWS_AS(proposed_throughputs(in), std::invalid_argument);
  in.cfp_fraction = 0.4;  // exactly 1 - eta is allowed
  CHECK_NOTHROW(proposed_throughputs(in));
}

TEST_CASE("fair fraction becomes infeasible beyond the eta threshold") {
  AnalyticInputs in = fig1_inputs();
  const double thr = eta_threshold(in);
  CHECK(thr == doctest::Approx(0.64808).epsilon(3e-4));

  in.eta = thr - 1e-3;
  CHECK(solve_fair_x(in).has_value());
  in.eta = thr + 1e-3;
  CHECK(!solve_fair_x(in).has_value());

  // Degenerate class splits are rejected by the solver.
  in = fig1_inputs();
  in.n_victim = 0;
  CHECK_THROWS_AS(solve_fair_x(in), std::invalid_argument);
  in.n_victim = in.n_total;
  CHECK_THROWS_AS(solve_fair_x(in), std::invalid_argument);
}

TEST_CASE("fair fraction is zero without LTE pressure") {
  AnalyticInputs in = fig1_inputs();
  in.eta = 0.0;
  const auto x = solve_fair_x(in);
  REQUIRE(x.has_value());
  CHECK(*x == doctest::Approx(0.0));
}

TEST_CASE("gain report covers the grid and clamps infeasible fractions") {
  const AnalyticInputs in = fig1_inputs();
  const std::vector<double> grid = {0, 0.2, 0.4, 0.6, 0.8, 1.0};
  const auto rows = gain_report(in, grid);
  REQUIRE(rows.size() == grid.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].eta == doctest::Approx(grid[i]));
    CHECK(rows[i].gain_pct >= -1e-9);
    CHECK(rows[i].x_used >= 0);
    CHECK(rows[i].x_used <= 1 - rows[i].eta + 1e-12);
    CHECK(rows[i].proposed_total_mbps >= rows[i].standard_total_mbps - 1e-12);
  }
  CHECK(rows[0].fair);
  CHECK(!rows.back().fair);  // eta=1 cannot be fair with this geometry
}

TEST_CASE("derived inputs mirror the bundled scenario's link table") {
  const Scenario sc = load_scenario("fig1");
  const LinkTable lt = build_link_table(sc);
  const AnalyticInputs in = derive_analytic_inputs(sc, lt);
  CHECK(in.n_total == 2);
  CHECK(in.n_victim == 1);
  CHECK(in.cw_min == 16);
  CHECK(in.backoff_stages == 6);
  CHECK(in.retry_limit == 7);
  CHECK(in.payload_bits == doctest::Approx(32592));
  CHECK(in.t_data_off_us == doctest::Approx(365.0));
  CHECK(in.t_data_on_us == doctest::Approx(667.0));
  CHECK(in.t_data_cfp() == doctest::Approx(451.0));
  CHECK(in.eta == doctest::Approx(sc.eta));
}
