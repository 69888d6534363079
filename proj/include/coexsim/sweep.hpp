// Experiment harness: fans simulation runs out over (eta, scheme, traffic,
// seed), aggregates per-seed metrics into mean/std rows, emits/parses CSV,
// cross-validates against the closed-form model, and names the figure
// presets.  Parallel and serial sweeps produce identical rows.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coexsim/scenario.hpp"

namespace coexsim {

enum class CfpSizing {
  kAdaptive,  // feedback controller (default)
  kAnalytic,  // pin the CFP to the fair fraction from the closed-form solver
  kFixed,     // pin to an explicit fraction
};

struct CfpPolicy {
  CfpSizing sizing = CfpSizing::kAdaptive;
  double fixed_fraction = 0;  // used when sizing == kFixed
};

struct SweepSpec {
  Scenario base;  // eta/scheme/traffic overridden per grid point
  std::vector<double> etas = {0, 0.1, 0.2, 0.3, 0.4, 0.5,
                              0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<Scheme> schemes = {Scheme::kStandard, Scheme::kProposed};
  std::vector<DirectionMode> traffics = {DirectionMode::kUlAndDl};
  std::vector<std::uint64_t> seeds;  // empty -> base.seeds
  CfpPolicy cfp;
  int warmup_periods = 5;
  int workers = 0;  // parallel fan-out width; 0 = runtime default
};

// "field: rule" strings; empty when the sweep is runnable.
std::vector<std::string> validate(const SweepSpec& spec);

struct ResultRow {
  double eta = 0;
  std::string scheme;
  std::string traffic;
  std::string metric;
  std::string entity;  // node id, "victim", "non_victim", "network", "stas"
  double mean = 0;
  double std_dev = 0;  // sample standard deviation over seeds
};

// One simulation per (eta, scheme, traffic, seed); rows aggregated over
// seeds and canonically sorted.  Throws on the first failing run (a partial
// sweep emits nothing).
std::vector<ResultRow> run_sweep(const SweepSpec& spec);
// Single-threaded reference producing identical rows.
std::vector<ResultRow> run_sweep_serial(const SweepSpec& spec);

// Header "eta,scheme,traffic,metric,entity,mean,std", one line per row,
// shortest round-trip number formatting, '\n' terminated.
std::string emit_csv(const std::vector<ResultRow>& rows);
// Inverse of emit_csv; throws std::invalid_argument on malformed input.
std::vector<ResultRow> parse_csv(const std::string& text);

struct CompareRow {
  double eta = 0;
  std::string scheme;
  double sim_victim_mbps = 0;
  double ana_victim_mbps = 0;
  double err_victim_pct = 0;
  double sim_nonvictim_mbps = 0;
  double ana_nonvictim_mbps = 0;
  double err_nonvictim_pct = 0;
  double sim_total_mbps = 0;
  double ana_total_mbps = 0;
  double err_total_pct = 0;
  double x_used = 0;   // CFP fraction pinned for the polled scheme
  bool fair = false;   // fair fraction feasible at this eta
  bool flagged = false;  // some class error above the 10% bar
};

// Downlink-only cross-validation: simulates each (scheme, eta) over the
// seeds with the polled scheme's CFP pinned to the fair solver's fraction
// (clamped to 1-eta when infeasible) and compares per-user class rates with
// the closed form.  Errors are |sim-ana|/ana*100; a class at exactly zero on
// both sides counts as zero error.
std::vector<CompareRow> compare_analytic_sim(
    const Scenario& base, const std::vector<double>& etas,
    const std::vector<std::uint64_t>& seeds, const std::vector<Scheme>& schemes);

// CSV table for the compare report (one line per CompareRow).
std::string format_compare(const std::vector<CompareRow>& rows);

struct Preset {
  std::string name;
  std::string description;
  std::string command;  // documented one-liner reproducing the figure data
};

const std::vector<Preset>& preset_catalog();
bool is_preset(const std::string& name);
// Sweep behind a figure preset (fig6's sim side included); throws
// std::invalid_argument for unknown names.
SweepSpec preset_sweep(const std::string& name, Scenario base);

}  // namespace coexsim
