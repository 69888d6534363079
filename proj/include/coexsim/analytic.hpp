// Closed-form throughput model for saturated downlink traffic shared between
// duty-cycled LTE-U and Wi-Fi, for both the standard access scheme (plain DCF)
// and the polled scheme (CFP for victims + deferral during LTE-ON).  All
// rates are Mbps == bits/µs; all times µs.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coexsim/scenario.hpp"

namespace coexsim {
struct LinkTable;

struct AnalyticInputs {
  int n_total = 2;    // Wi-Fi STAs
  int n_victim = 1;   // STAs unusable during LTE-ON
  int cw_min = 16;
  int backoff_stages = 6;  // window doublings until cw_max
  int retry_limit = 7;
  MacTimings timings;
  double payload_bits = 32592;  // delivered per successful exchange
  double t_data_off_us = 0;     // data airtime, LTE off (mean over STAs)
  double t_data_on_us = 0;      // data airtime, LTE on (mean over non-victims)
  // Data airtime for polled victims (they are polled while LTE is off, so
  // this defaults to the victims' off rate); absent -> t_data_off_us.
  std::optional<double> t_data_cfp_us;
  double eta = 0.5;          // LTE-ON fraction of each period
  double cfp_fraction = 0;   // fraction of the period spent polling (x)

  double t_data_cfp() const { return t_data_cfp_us.value_or(t_data_off_us); }
};

// Structural checks mirroring the type's documented invariants; each entry is
// "field: rule".
std::vector<std::string> validate(const AnalyticInputs& in);

// Mean time of one successful contended exchange: DIFS + mean initial
// backoff + RTS/CTS handshake + data + ACK.
double contended_exchange_us(const MacTimings& t, int cw_min, double t_data_us);

// Total time wasted dropping one frame after the retry limit: per-attempt
// mean backoff with the window doubling each retry (capped after
// `backoff_stages` doublings) plus DIFS + RTS + CTS-timeout per attempt.
double retry_drop_us(const MacTimings& t, int cw_min, int backoff_stages,
                     int retry_limit);

// One polled exchange during the contention-free period: data + ACK with
// SIFS spacing (no contention overhead).  Always shorter than
// contended_exchange_us at the same data airtime.
double polled_exchange_us(const MacTimings& t, double t_data_us);

struct PhaseBreakdown {
  double cfp_victim_mbps = 0;   // per victim, from polling
  double cp_per_user_mbps = 0;  // per STA, from the contended LTE-OFF span
  double on_nonvictim_mbps = 0; // per non-victim, from the LTE-ON span
};

struct ThroughputReport {
  double victim_mbps = 0;     // per victim user
  double nonvictim_mbps = 0;  // per non-victim user
  double total_mbps = 0;      // n_victim*victim + (n_total-n_victim)*nonvictim
  PhaseBreakdown breakdown;
};

// Standard scheme: DCF everywhere; during LTE-ON the AP still picks victims
// (uniformly), burning a full retry-drop sequence each time.
ThroughputReport standard_throughputs(const AnalyticInputs& in);

// Polled scheme: fraction x of the period is CFP (victims only), the rest of
// the OFF window is plain DCF, and during ON the AP serves only non-victims.
// Throws std::invalid_argument when x > 1 - eta.
ThroughputReport proposed_throughputs(const AnalyticInputs& in);

// Smallest CFP fraction equalizing per-user victim and non-victim rates;
// both sides are affine in x so this is a direct linear solve.  Empty when
// even x = 1 - eta leaves victims behind (eta above the feasibility
// threshold).  Throws std::invalid_argument without victims or without
// non-victims.  The cfp_fraction field of `in` is ignored.
std::optional<double> solve_fair_x(const AnalyticInputs& in);

// Largest eta for which solve_fair_x succeeds, by bisection to 1e-4.
double eta_threshold(const AnalyticInputs& in);

struct GainRow {
  double eta = 0;
  double standard_total_mbps = 0;
  double proposed_total_mbps = 0;
  double gain_pct = 0;
  double x_used = 0;
  bool fair = false;  // solve_fair_x feasible at this eta
};

// Evaluates both schemes over an eta grid with x = solve_fair_x clamped to
// [0, 1-eta] (0 with no victims, 1-eta with no non-victims).
std::vector<GainRow> gain_report(const AnalyticInputs& in,
                                 const std::vector<double>& eta_grid);

// Fills AnalyticInputs from a scenario and its link table using the
// integer-µs data airtimes the simulator uses.  Downlink model: t_data_off
// averages every STA's off rate, t_data_on the non-victims' on rates, and
// the polled airtime the victims' off rates.
AnalyticInputs derive_analytic_inputs(const Scenario& sc, const LinkTable& links);

}  // namespace coexsim
