#include "coexsim/scenario.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace coexsim {

int ContentionParams::max_backoff_stage() const {
  if (cw_min < 2 || cw_max < cw_min) return -1;
  int m = 0;
  int w = cw_min;
  while (w < cw_max) {
    w *= 2;
    ++m;
  }
  return w == cw_max ? m : -1;
}

McsTable McsTable::default_table() {
  McsTable t;
  t.entries = {{6.5, 2},  {13, 5},   {26, 7},   {39, 9},  {52, 13},
               {78, 17},  {104, 20}, {117, 22}, {130, 23}};
  return t;
}

std::optional<McsEntry> McsTable::select(double sinr_db) const {
  std::optional<McsEntry> best;
  for (const auto& e : entries) {
    if (sinr_db >= e.required_snr_db) best = e;
  }
  return best;
}

int Scenario::ap_index() const {
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].kind == NodeKind::kWifiAp) return static_cast<int>(i);
  }
  throw std::logic_error("scenario has no WIFI_AP node");
}

std::optional<int> Scenario::enb_index() const {
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].kind == NodeKind::kLteEnb) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<int> Scenario::sta_indices() const {
  std::vector<int> out;
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].kind == NodeKind::kWifiSta) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<std::string> validate(const Scenario& sc) {
  std::vector<std::string> v;
  const auto bad = [&](const std::string& field, const std::string& rule) {
    v.push_back(field + ": " + rule);
  };

  if (sc.timings.t_slot_us <= 0) bad("timings.t_slot_us", "must be > 0");
  if (sc.timings.t_sifs_us <= 0) bad("timings.t_sifs_us", "must be > 0");
  if (sc.timings.t_difs_us <= sc.timings.t_sifs_us)
    bad("timings.t_difs_us", "must be > t_sifs_us");
  if (sc.timings.t_cts_timeout_us <= 0)
    bad("timings.t_cts_timeout_us", "must be > 0");
  if (sc.timings.beacon_interval_us < 1000)
    bad("timings.beacon_interval_us", "must be >= 1000");
  if (sc.timings.phy_header_bits < 0) bad("timings.phy_header_bits", "must be >= 0");
  if (sc.timings.mac_header_bits < 0) bad("timings.mac_header_bits", "must be >= 0");
  if (sc.timings.ack_bits <= 0) bad("timings.ack_bits", "must be > 0");
  if (sc.timings.rts_bits <= 0) bad("timings.rts_bits", "must be > 0");
  if (sc.timings.cts_bits <= 0) bad("timings.cts_bits", "must be > 0");
  if (sc.timings.base_rate_mbps <= 0) bad("timings.base_rate_mbps", "must be > 0");

  if (sc.contention.cw_min < 2) bad("contention.cw_min", "must be >= 2");
  if (sc.contention.max_backoff_stage() < 0)
    bad("contention.cw_max", "must equal cw_min * 2^m for integer m >= 0");
  if (sc.contention.retry_limit < 1) bad("contention.retry_limit", "must be >= 1");
  if (sc.contention.frame_lifetime_us <= 0)
    bad("contention.frame_lifetime_us", "must be > 0");

  if (sc.traffic.mpdu_bits <= 0) bad("traffic.mpdu_bits", "must be > 0");
  if (sc.traffic.aggregation < 1) bad("traffic.aggregation", "must be >= 1");

  if (sc.radio.freq_ghz <= 0) bad("radio.freq_ghz", "must be > 0");
  if (sc.radio.bandwidth_mhz <= 0) bad("radio.bandwidth_mhz", "must be > 0");

  if (sc.mcs.entries.empty()) {
    bad("mcs_table", "must have at least one entry");
  } else {
    for (size_t i = 0; i < sc.mcs.entries.size(); ++i) {
      if (sc.mcs.entries[i].rate_mbps <= 0)
        bad("mcs_table[" + std::to_string(i) + "].rate_mbps", "must be > 0");
      if (i > 0) {
        if (sc.mcs.entries[i].rate_mbps <= sc.mcs.entries[i - 1].rate_mbps)
          bad("mcs_table[" + std::to_string(i) + "].rate_mbps",
              "must be strictly ascending");
        if (sc.mcs.entries[i].required_snr_db <=
            sc.mcs.entries[i - 1].required_snr_db)
          bad("mcs_table[" + std::to_string(i) + "].required_snr_db",
              "must be strictly ascending");
      }
    }
  }

  if (!(sc.eta >= 0.0 && sc.eta <= 1.0)) bad("eta", "must be in [0, 1]");
  if (!(sc.alpha > 0.0 && sc.alpha < 1.0)) bad("alpha", "must be in (0, 1)");
  if (!(sc.sim_duration_s > 0.0)) bad("sim_duration_s", "must be > 0");

  int n_ap = 0, n_enb = 0, n_sta = 0;
  std::set<std::string> ids;
  for (size_t i = 0; i < sc.nodes.size(); ++i) {
    const Node& n = sc.nodes[i];
    const std::string path = "nodes[" + std::to_string(i) + "]";
    if (n.id.empty()) bad(path + ".id", "must not be empty");
    if (!ids.insert(n.id).second) bad(path + ".id", "duplicate node id '" + n.id + "'");
    if (n.kind == NodeKind::kWifiAp) ++n_ap;
    if (n.kind == NodeKind::kLteEnb) ++n_enb;
    if (n.kind == NodeKind::kWifiSta) ++n_sta;
  }
  if (n_ap != 1) bad("nodes", "exactly one WIFI_AP required, found " + std::to_string(n_ap));
  if (n_enb > 1) bad("nodes", "at most one LTE_ENB allowed, found " + std::to_string(n_enb));
  if (n_sta < 1) bad("nodes", "at least one WIFI_STA required");

  return v;
}

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::kWifiAp: return "wifi_ap";
    case NodeKind::kWifiSta: return "wifi_sta";
    case NodeKind::kLteEnb: return "lte_enb";
    case NodeKind::kLteUe: return "lte_ue";
  }
  return "?";
}

const char* to_string(Scheme s) {
  return s == Scheme::kStandard ? "standard" : "proposed";
}

const char* to_string(DirectionMode d) {
  return d == DirectionMode::kDlOnly ? "dl_only" : "ul_and_dl";
}

}  // namespace coexsim
