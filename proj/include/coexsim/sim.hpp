// Discrete-event simulation of the shared channel on an integer-microsecond
// clock: the LTE-U square wave, DCF contention (backoff, RTS/CTS/DATA/ACK,
// collisions, window doubling, retry drop), beacons, and CFP polling.
// Identical (scenario, seed) inputs give bit-identical results.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coexsim/metrics.hpp"
#include "coexsim/scenario.hpp"

namespace coexsim {

enum class EventKind {
  kLteOffStart,
  kLteOnStart,
  kBeaconDue,
  kCfpEnd,
  kCfpPollDue,
  kTxEnd,
  kTimeout,
  kBackoffExpire,
};

const char* to_string(EventKind k);

struct ControllerLogRow {
  int period = 0;
  double gamma_v_prev = 0;   // previous period's measured victim Mbps
  double gamma_nv_prev = 0;
  double gamma_v_new = 0;    // smoothed values after the update
  double gamma_nv_new = 0;
  double t_cfp_us = 0;       // length this period's plan used
};

struct RunOptions {
  // Polled scheme only: size the CFP with the feedback controller.  When
  // fixed_cfp_fraction is set the CFP is pinned to that fraction of the
  // period instead (used for cross-validation against the closed form).
  bool adaptive_cfp = true;
  std::optional<double> fixed_cfp_fraction;
  int warmup_periods = 5;     // excluded from reported metrics
  bool record_trace = false;  // keep per-event records (hash is always kept)
};

struct RunResult {
  TraceMetrics metrics;  // post-warmup window
  std::uint64_t trace_hash = 0;
  std::vector<std::string> trace;  // "time<TAB>kind<TAB>node<TAB>detail"
  std::vector<ControllerLogRow> controller_log;
  // Post-warmup mean of (CFP length / period); 0 for the standard scheme.
  double mean_cfp_fraction = 0;
};

RunResult run_simulation(const Scenario& sc, std::uint64_t seed,
                         const RunOptions& opt = {});

}  // namespace coexsim
