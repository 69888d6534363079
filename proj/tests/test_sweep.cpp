#include <algorithm>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "coexsim/scenario_io.hpp"
#include "coexsim/sweep.hpp"
#include "doctest.h"

using namespace coexsim;

namespace {

SweepSpec tiny_spec(std::vector<double> etas, std::vector<Scheme> schemes,
                    DirectionMode dir) {
  SweepSpec spec;
  spec.base = load_scenario("fig1");
  spec.base.sim_duration_s = 1.5;
  spec.etas = std::move(etas);
  spec.schemes = std::move(schemes);
  spec.traffics = {dir};
  spec.seeds = {1, 2};
  return spec;
}

const ResultRow& find_row(const std::vector<ResultRow>& rows, double eta,
                          const std::string& scheme, const std::string& metric,
                          const std::string& entity) {
  for (const ResultRow& r : rows) {
    if (r.eta == eta && r.scheme == scheme && r.metric == metric &&
        r.entity == entity) {
      return r;
    }
  }
  throw std::runtime_error("row not found: " + metric + "/" + entity);
}

}  // namespace

TEST_CASE("sweep spec validation") {
  SweepSpec spec = tiny_spec({0.5}, {Scheme::kStandard}, DirectionMode::kDlOnly);
  CHECK(validate(spec).empty());

  spec.etas = {};
  CHECK(!validate(spec).empty());
  spec = tiny_spec({1.5}, {Scheme::kStandard}, DirectionMode::kDlOnly);
  CHECK(!validate(spec).empty());
  spec = tiny_spec({0.5}, {}, DirectionMode::kDlOnly);
  CHECK(!validate(spec).empty());
  spec = tiny_spec({0.5}, {Scheme::kStandard}, DirectionMode::kDlOnly);
  spec.base.eta = 3.0;  // broken base scenario
  CHECK(!validate(spec).empty());
  spec = tiny_spec({0.5}, {Scheme::kStandard}, DirectionMode::kDlOnly);
  spec.cfp.sizing = CfpSizing::kFixed;
  spec.cfp.fixed_fraction = 1.5;
  CHECK(!validate(spec).empty());
}

TEST_CASE("sweep rows are aggregated, complete, and sorted") {
  const SweepSpec spec =
      tiny_spec({0.0, 0.5}, {Scheme::kStandard, Scheme::kProposed},
                DirectionMode::kUlAndDl);
  const auto rows = run_sweep(spec);
  REQUIRE(!rows.empty());

  // Canonical order: traffic, scheme, eta, metric, entity.
  auto key = [](const ResultRow& r) {
    return std::tuple(r.traffic, r.scheme, r.eta, r.metric, r.entity);
  };
  for (size_t i = 1; i < rows.size(); ++i) {
    CHECK(key(rows[i - 1]) < key(rows[i]));
  }

  // Per-STA, class, and network throughput rows all exist.
  const ResultRow& net =
      find_row(rows, 0.5, "standard", "throughput_mbps", "network");
  const ResultRow& v = find_row(rows, 0.5, "standard", "throughput_mbps", "victim");
  const ResultRow& nv =
      find_row(rows, 0.5, "standard", "throughput_mbps", "non_victim");
  CHECK(net.mean > 0);
  CHECK(net.std_dev >= 0);
  // Two STAs, one per class: the network total is the sum of the classes.
  CHECK(net.mean == doctest::Approx(v.mean + nv.mean).epsilon(1e-9));

  // The CFP fraction row appears only for the polled scheme.
  CHECK_NOTHROW(find_row(rows, 0.5, "proposed", "cfp_fraction_mean", "AP"));
  CHECK_THROWS(find_row(rows, 0.5, "standard", "cfp_fraction_mean", "AP"));

  // No LTE pressure: the two STAs land within a few percent of each other.
  const ResultRow& v0 = find_row(rows, 0.0, "standard", "throughput_mbps", "victim");
  const ResultRow& nv0 =
      find_row(rows, 0.0, "standard", "throughput_mbps", "non_victim");
  CHECK(v0.mean == doctest::Approx(nv0.mean).epsilon(0.05));
}

TEST_CASE("full duty cycle zeroes the victim row under the standard scheme") {
  const SweepSpec spec =
      tiny_spec({1.0}, {Scheme::kStandard}, DirectionMode::kDlOnly);
  const auto rows = run_sweep(spec);
  const ResultRow& v = find_row(rows, 1.0, "standard", "throughput_mbps", "victim");
  CHECK(v.mean == 0.0);
  CHECK(v.std_dev == 0.0);
}

TEST_CASE("serial and parallel sweeps produce identical rows") {
  SweepSpec spec = tiny_spec({0.0, 0.6}, {Scheme::kStandard, Scheme::kProposed},
                             DirectionMode::kUlAndDl);
  spec.base.sim_duration_s = 1.0;
  spec.workers = 4;
  const std::string parallel = emit_csv(run_sweep(spec));
  const std::string serial = emit_csv(run_sweep_serial(spec));
  CHECK(parallel == serial);
}

TEST_CASE("CSV emit/parse round-trips byte-identically") {
  const SweepSpec spec = tiny_spec({0.3}, {Scheme::kProposed}, DirectionMode::kUlAndDl);
  const auto rows = run_sweep(spec);
  const std::string text = emit_csv(rows);
  CHECK(text.rfind("eta,scheme,traffic,metric,entity,mean,std\n", 0) == 0);
  CHECK(text.back() == '\n');

  const auto parsed = parse_csv(text);
  REQUIRE(parsed.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(parsed[i].eta == rows[i].eta);  // bitwise: shortest round-trip
    CHECK(parsed[i].mean == rows[i].mean);
    CHECK(parsed[i].std_dev == rows[i].std_dev);
    CHECK(parsed[i].scheme == rows[i].scheme);
    CHECK(parsed[i].traffic == rows[i].traffic);
    CHECK(parsed[i].metric == rows[i].metric);
    CHECK(parsed[i].entity == rows[i].entity);
  }
  CHECK(emit_csv(parsed) == text);

  CHECK(emit_csv({}) == "eta,scheme,traffic,metric,entity,mean,std\n");
  CHECK(parse_csv(emit_csv({})).empty());
  CHECK_THROWS_AS(parse_csv("bogus\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_csv("eta,scheme,traffic,metric,entity,mean,std\n1,2\n"),
                  std::invalid_argument);
}

TEST_CASE("analytic CFP sizing pins the simulated fraction to the solver") {
  SweepSpec spec = tiny_spec({0.5}, {Scheme::kProposed}, DirectionMode::kDlOnly);
  spec.cfp.sizing = CfpSizing::kAnalytic;
  const auto rows = run_sweep(spec);
  const ResultRow& frac = find_row(rows, 0.5, "proposed", "cfp_fraction_mean", "AP");
  CHECK(frac.mean == doctest::Approx(0.27151).epsilon(1e-3));
  CHECK(frac.std_dev == doctest::Approx(0.0));
}

TEST_CASE("cross-validation against the closed form stays inside 10 percent") {
  const Scenario base = load_scenario("fig1");
  Scenario quick = base;
  quick.sim_duration_s = 4.0;
  const auto rows = compare_analytic_sim(quick, {0.0, 0.5}, {1, 2, 3},
                                         {Scheme::kStandard, Scheme::kProposed});
  REQUIRE(rows.size() == 4);
  for (const CompareRow& r : rows) {
    CAPTURE(r.eta);
    CAPTURE(r.scheme);
    CHECK(r.err_victim_pct <= 10.0);
    CHECK(r.err_nonvictim_pct <= 10.0);
    CHECK(!r.flagged);
    CHECK(r.sim_total_mbps > 0);
    CHECK(r.ana_total_mbps > 0);
  }
  const std::string table = format_compare(rows);
  CHECK(table.find("eta") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') >= 5);
}

TEST_CASE("figure presets are named, described, and runnable") {
  const auto& cat = preset_catalog();
  REQUIRE(cat.size() == 6);
  for (const Preset& p : cat) {
    CHECK(is_preset(p.name));
    CHECK(!p.description.empty());
    CHECK(p.command.find(p.name) != std::string::npos);
  }
  CHECK(!is_preset("fig999"));
  CHECK_THROWS_AS(preset_sweep("fig999", load_scenario("fig1")),
                  std::invalid_argument);

  const SweepSpec fig6 = preset_sweep("fig6", load_scenario("fig1"));
  CHECK(fig6.traffics == std::vector<DirectionMode>{DirectionMode::kDlOnly});
  CHECK(fig6.cfp.sizing == CfpSizing::kAnalytic);
  CHECK(fig6.schemes.size() == 2);
  CHECK(validate(fig6).empty());

  const SweepSpec fig7 = preset_sweep("fig7", load_scenario("fig1"));
  CHECK(fig7.traffics == std::vector<DirectionMode>{DirectionMode::kUlAndDl});
  CHECK(fig7.schemes == std::vector<Scheme>{Scheme::kProposed});
  CHECK(validate(fig7).empty());
}
