// Aggregated counters from one simulation run and the derived measures:
// throughput, access shares, DL opportunity/success percentages, fairness.
#pragma once

#include <cstdint>
#include <vector>

#include "coexsim/scenario.hpp"

namespace coexsim {

struct NodeCounters {
  std::int64_t bits_dl = 0;  // payload bits delivered to this node (STAs)
  std::int64_t bits_ul = 0;  // payload bits this node delivered to the AP
  std::int64_t successful_exchanges = 0;  // data bursts this node served
  std::int64_t attempted_exchanges = 0;   // transmission attempts it initiated
  bool senses_lte = false;    // froze during LTE-ON via energy detection
  bool victim = false;
};

struct TraceMetrics {
  std::vector<NodeCounters> nodes;  // indexed like Scenario::nodes
  // Contention accounting (CFP polls and beacons are not contended and are
  // excluded here).  A collision counts one opportunity per transmitter.
  std::int64_t dl_access_opportunities = 0;     // AP backoff wins
  std::int64_t total_access_opportunities = 0;  // all backoff wins
  // Frame-level AP downlink outcomes: every DL data burst eventually either
  // delivers or is dropped at the retry limit.
  std::int64_t dl_frames_attempted = 0;
  std::int64_t dl_frames_delivered = 0;
  usec_t window_start_us = 0;
  usec_t window_end_us = 0;
  usec_t channel_busy_us = 0;  // total airtime; never exceeds the window

  usec_t window_us() const { return window_end_us - window_start_us; }
};

// Payload-only delivered rate over the measurement window, Mbps.
double throughput_dl_mbps(const TraceMetrics& tm, int node);
double throughput_ul_mbps(const TraceMetrics& tm, int node);
double throughput_mbps(const TraceMetrics& tm, int node);  // dl + ul

// Share of all successful data bursts served by this node, percent.  Sums
// to 100 over nodes whenever anything succeeded; all-zero runs report 0.
double successful_access_pct(const TraceMetrics& tm, int node);

// AP contention wins as a share of all contention wins, percent.
double dl_opportunity_pct(const TraceMetrics& tm);

// Delivered share of the AP's terminal DL frame outcomes, percent.
double successful_dl_pct(const TraceMetrics& tm);

// (sum v)^2 / (n * sum v^2); 1 for equal shares (including all-zero).
// Throws std::invalid_argument on an empty list.
double jain_index(const std::vector<double>& values);

// Merges two adjacent measurement windows; counters add, the window spans
// both.  Rate metrics of the result equal the duration-weighted combination.
TraceMetrics combine(const TraceMetrics& a, const TraceMetrics& b);

}  // namespace coexsim
