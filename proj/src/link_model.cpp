#include "coexsim/link_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coexsim {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kBeaconBodyBits = 400;  // 50-byte management frame

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
}  // namespace

double path_loss_db(double distance_m, double freq_ghz) {
  if (distance_m <= 0 || freq_ghz <= 0)
    throw LinkError("path_loss_db requires positive distance and frequency");
  const double d = std::max(distance_m, 1.0);
  return 36.7 * std::log10(d) + 22.7 + 26.0 * std::log10(freq_ghz);
}

double node_distance_m(const Node& a, const Node& b) {
  const double dx = a.x_m - b.x_m;
  const double dy = a.y_m - b.y_m;
  const double dz = a.antenna_height_m - b.antenna_height_m;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double rx_power_dbm(double tx_power_dbm, double distance_m, double freq_ghz) {
  return tx_power_dbm - path_loss_db(distance_m, freq_ghz);
}

double sinr_db(double signal_dbm, const std::vector<double>& interferers_dbm,
               double noise_dbm) {
  double denom_mw = dbm_to_mw(noise_dbm);
  for (double i : interferers_dbm)
    if (i != kNegInf) denom_mw += dbm_to_mw(i);
  return mw_to_dbm(dbm_to_mw(signal_dbm) / denom_mw);
}

bool senses_busy(double lte_rx_power_dbm, double ed_threshold_dbm) {
  return lte_rx_power_dbm >= ed_threshold_dbm;
}

const StaLink& LinkTable::by_node(int node_index) const {
  for (const auto& s : stas)
    if (s.node_index == node_index) return s;
  throw LinkError("no link entry for node index " + std::to_string(node_index));
}

std::vector<int> LinkTable::victim_nodes() const {
  std::vector<int> v;
  for (const auto& s : stas)
    if (s.victim) v.push_back(s.node_index);
  return v;
}

int LinkTable::victim_count() const {
  return static_cast<int>(victim_nodes().size());
}

int LinkTable::nonvictim_count() const {
  return static_cast<int>(stas.size()) - victim_count();
}

LinkTable build_link_table(const Scenario& sc) {
  LinkTable table;
  const Node& ap = sc.nodes[sc.ap_index()];
  const auto enb_idx = sc.enb_index();
  const RadioParams& r = sc.radio;

  table.ap_rx_from_enb_dbm = kNegInf;
  if (enb_idx) {
    const Node& enb = sc.nodes[*enb_idx];
    table.ap_rx_from_enb_dbm =
        rx_power_dbm(r.tx_power_dbm, node_distance_m(ap, enb), r.freq_ghz);
  }
  table.ap_senses_lte = enb_idx && senses_busy(table.ap_rx_from_enb_dbm, r.ed_threshold_dbm);

  for (int idx : sc.sta_indices()) {
    const Node& sta = sc.nodes[idx];
    StaLink link;
    link.node_index = idx;
    link.dist_ap_m = node_distance_m(ap, sta);
    link.rx_from_ap_dbm = rx_power_dbm(r.tx_power_dbm, link.dist_ap_m, r.freq_ghz);
    link.rx_from_enb_dbm = kNegInf;
    if (enb_idx) {
      const Node& enb = sc.nodes[*enb_idx];
      link.rx_from_enb_dbm =
          rx_power_dbm(r.tx_power_dbm, node_distance_m(sta, enb), r.freq_ghz);
    }

    link.snr_off_db = sinr_db(link.rx_from_ap_dbm, {}, r.noise_dbm);
    // DL: eNB interferes at the STA.  UL: the STA's signal arrives at the AP
    // at the same power (symmetric powers/loss), with the eNB interfering at
    // the AP instead.
    link.dl_sinr_on_db =
        sinr_db(link.rx_from_ap_dbm, {link.rx_from_enb_dbm}, r.noise_dbm);
    link.ul_sinr_on_db =
        sinr_db(link.rx_from_ap_dbm, {table.ap_rx_from_enb_dbm}, r.noise_dbm);

    link.mcs_off = sc.mcs.select(link.snr_off_db);
    if (!link.mcs_off)
      throw LinkError("STA '" + sta.id + "' has no usable MCS even with LTE off (out of coverage)");
    link.dl_mcs_on = sc.mcs.select(link.dl_sinr_on_db);
    link.ul_mcs_on = sc.mcs.select(link.ul_sinr_on_db);
    link.senses_lte =
        enb_idx && senses_busy(link.rx_from_enb_dbm, r.ed_threshold_dbm);
    link.victim = !link.dl_mcs_on.has_value() || link.senses_lte;
    table.stas.push_back(link);
  }
  return table;
}

FrameTimes frame_times(const MacTimings& t) {
  const double rate = t.base_rate_mbps;  // bits per µs
  auto ctrl = [&](int body_bits) {
    return static_cast<usec_t>(
        std::llround((t.phy_header_bits + body_bits) / rate));
  };
  FrameTimes ft;
  ft.rts_us = ctrl(t.rts_bits);
  ft.cts_us = ctrl(t.cts_bits);
  ft.ack_us = ctrl(t.ack_bits);
  ft.beacon_us = ctrl(kBeaconBodyBits);
  ft.cfend_us = ctrl(t.cts_bits);
  return ft;
}

double data_frame_exact_us(const MacTimings& t, const TrafficModel& tr,
                           double rate_mbps) {
  const double header_us = t.phy_header_bits / t.base_rate_mbps;
  const double body_bits =
      static_cast<double>(tr.aggregation) * (tr.mpdu_bits + t.mac_header_bits);
  return header_us + body_bits / rate_mbps;
}

usec_t data_frame_us(const MacTimings& t, const TrafficModel& tr,
                     double rate_mbps) {
  return static_cast<usec_t>(std::llround(data_frame_exact_us(t, tr, rate_mbps)));
}

}  // namespace coexsim
