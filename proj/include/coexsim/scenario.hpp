// Scenario description: nodes, MAC timings, contention, traffic, radio, MCS.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace coexsim {

using usec_t = std::int64_t;  // integer-microsecond simulation clock

struct MacTimings {
  usec_t t_slot_us = 9;
  usec_t t_difs_us = 34;
  usec_t t_sifs_us = 16;
  usec_t t_cts_timeout_us = 50;
  int phy_header_bits = 128;
  int mac_header_bits = 272;
  int ack_bits = 240;
  int rts_bits = 288;
  int cts_bits = 240;
  usec_t beacon_interval_us = 100000;
  double base_rate_mbps = 6.5;  // control/header rate (lowest MCS)
};

struct ContentionParams {
  int cw_min = 16;
  int cw_max = 1024;
  int retry_limit = 7;
  // Transmit lifetime: a frame whose retry sequence has been pending longer
  // than this is discarded at the next contention entry.  The default sits
  // above the worst-case uninterfered 7-attempt sequence (~19.3 ms), so it
  // only fires for frames starved by sustained interference.
  usec_t frame_lifetime_us = 20000;

  // Backoff stage count; always recomputed from cw_min/cw_max, never stored.
  // Requires cw_max == cw_min * 2^m (validated at load).
  int max_backoff_stage() const;
};

enum class DirectionMode { kDlOnly, kUlAndDl };

struct TrafficModel {
  int mpdu_bits = 8148;
  int aggregation = 4;
  DirectionMode direction = DirectionMode::kDlOnly;

  // Payload bits delivered per successful exchange (full-buffer bursts).
  std::int64_t burst_payload_bits() const {
    return static_cast<std::int64_t>(mpdu_bits) * aggregation;
  }
};

struct RadioParams {
  double tx_power_dbm = 20.0;
  double freq_ghz = 5.3;
  double noise_dbm = -101.0;
  double bandwidth_mhz = 20.0;
  double ed_threshold_dbm = -62.0;
};

enum class NodeKind { kWifiAp, kWifiSta, kLteEnb, kLteUe };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::kWifiSta;
  double x_m = 0.0;
  double y_m = 0.0;
  double antenna_height_m = 1.0;
};

struct McsEntry {
  double rate_mbps;
  double required_snr_db;
};

struct McsTable {
  std::vector<McsEntry> entries;  // strictly ascending in rate and SNR

  static McsTable default_table();
  // Highest entry whose threshold is <= sinr_db, or nullopt below the ladder.
  std::optional<McsEntry> select(double sinr_db) const;
  const McsEntry& base() const { return entries.front(); }
};

enum class Scheme { kStandard, kProposed };

struct Scenario {
  std::string name = "scenario";
  std::vector<Node> nodes;
  MacTimings timings;
  ContentionParams contention;
  TrafficModel traffic;
  RadioParams radio;
  McsTable mcs;
  double eta = 0.5;               // LTE duty-cycle ON fraction
  Scheme scheme = Scheme::kStandard;
  double alpha = 0.5;             // CFP controller smoothing factor
  double sim_duration_s = 10.0;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  int ap_index() const;                  // exactly one (validated)
  std::optional<int> enb_index() const;  // at most one
  std::vector<int> sta_indices() const;
  usec_t sim_duration_us() const {
    return static_cast<usec_t>(sim_duration_s * 1e6 + 0.5);
  }
};

// Structural and range checks; each violation is "field.path: rule".
std::vector<std::string> validate(const Scenario& sc);

const char* to_string(NodeKind k);
const char* to_string(Scheme s);
const char* to_string(DirectionMode d);

}  // namespace coexsim
