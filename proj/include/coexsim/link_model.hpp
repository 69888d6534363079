// Deterministic link model: path loss, SINR, MCS selection, victim
// classification, and frame airtimes.  Links are time-invariant within each
// LTE state, so everything here is precomputed once per scenario.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coexsim/scenario.hpp"

namespace coexsim {

// Urban micro model: 36.7*log10(d_m) + 22.7 + 26*log10(f_GHz).  Distances
// below 1 m are clamped (the fit is not meant for the near field).
double path_loss_db(double distance_m, double freq_ghz);

// Euclidean distance including antenna-height difference.
double node_distance_m(const Node& a, const Node& b);

double rx_power_dbm(double tx_power_dbm, double distance_m, double freq_ghz);

// 10*log10(signal / (noise + sum of interferers)), all in linear mW.
double sinr_db(double signal_dbm, const std::vector<double>& interferers_dbm,
               double noise_dbm);

// Energy-detection carrier sense; threshold comparison is inclusive.
bool senses_busy(double lte_rx_power_dbm, double ed_threshold_dbm);

struct LinkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-STA link state for both LTE states.  "on" values carry the eNB as an
// interferer; with no eNB present they equal the "off" values.
struct StaLink {
  int node_index = -1;
  double dist_ap_m = 0;
  double rx_from_ap_dbm = 0;   // symmetric: also the AP's rx power from the STA
  double rx_from_enb_dbm = 0;  // -inf when no eNB
  double snr_off_db = 0;
  double dl_sinr_on_db = 0;
  double ul_sinr_on_db = 0;
  std::optional<McsEntry> mcs_off;    // guaranteed present (checked at build)
  std::optional<McsEntry> dl_mcs_on;
  std::optional<McsEntry> ul_mcs_on;
  bool senses_lte = false;
  bool victim = false;
};

struct LinkTable {
  std::vector<StaLink> stas;  // ordered as Scenario::sta_indices()
  double ap_rx_from_enb_dbm = 0;
  bool ap_senses_lte = false;

  const StaLink& by_node(int node_index) const;
  std::vector<int> victim_nodes() const;
  int victim_count() const;
  int nonvictim_count() const;
};

// Precomputes every link; throws LinkError if any STA lacks an MCS even with
// LTE off (out of coverage).  A STA is a victim iff its DL SINR during
// LTE-ON selects no MCS or it senses the eNB at or above the ED threshold.
LinkTable build_link_table(const Scenario& sc);

// Control/management frame airtimes, rounded to the integer-µs clock.  Every
// frame carries a PHY header at the base rate; control frame bodies also ride
// at the base rate.
struct FrameTimes {
  usec_t rts_us = 0;
  usec_t cts_us = 0;
  usec_t ack_us = 0;
  usec_t beacon_us = 0;  // 50-byte management frame at base rate
  usec_t cfend_us = 0;   // sized like a CTS
};

FrameTimes frame_times(const MacTimings& t);

// Data burst airtime at the given MCS rate: PHY header at base rate plus
// aggregation * (mpdu + MAC header) bits at `rate_mbps`.
double data_frame_exact_us(const MacTimings& t, const TrafficModel& tr,
                           double rate_mbps);
usec_t data_frame_us(const MacTimings& t, const TrafficModel& tr,
                     double rate_mbps);

}  // namespace coexsim
