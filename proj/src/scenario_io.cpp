#include "coexsim/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace coexsim {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ScenarioError("scenario field '" + path + "': " + what);
}

template <typename T>
T get_field(const json& obj, const std::string& parent, const char* key, T def) {
  if (!obj.contains(key)) return def;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(parent.empty() ? key : parent + "." + key, e.what());
  }
}

NodeKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "wifi_ap") return NodeKind::kWifiAp;
  if (s == "wifi_sta") return NodeKind::kWifiSta;
  if (s == "lte_enb") return NodeKind::kLteEnb;
  if (s == "lte_ue") return NodeKind::kLteUe;
  fail(path, "unknown node kind '" + s + "'");
}

Scheme parse_scheme(const std::string& s) {
  if (s == "standard") return Scheme::kStandard;
  if (s == "proposed") return Scheme::kProposed;
  fail("scheme", "unknown scheme '" + s + "' (standard|proposed)");
}

DirectionMode parse_direction(const std::string& s) {
  if (s == "dl_only") return DirectionMode::kDlOnly;
  if (s == "ul_and_dl") return DirectionMode::kUlAndDl;
  fail("traffic.direction", "unknown direction '" + s + "' (dl_only|ul_and_dl)");
}

}  // namespace

Scenario load_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario parse error: ") + e.what());
  }
  if (!j.is_object()) throw ScenarioError("scenario root must be an object");

  const int ver = get_field<int>(j, "", "schema_version", -1);
  if (ver != kSchemaVersion)
    fail("schema_version", "expected " + std::to_string(kSchemaVersion) +
                               ", got " + std::to_string(ver));

  Scenario sc;
  sc.name = get_field<std::string>(j, "", "name", "scenario");

  if (j.contains("timings")) {
    const json& t = j.at("timings");
    MacTimings& mt = sc.timings;
    mt.t_slot_us = get_field<usec_t>(t, "timings", "t_slot_us", mt.t_slot_us);
    mt.t_difs_us = get_field<usec_t>(t, "timings", "t_difs_us", mt.t_difs_us);
    mt.t_sifs_us = get_field<usec_t>(t, "timings", "t_sifs_us", mt.t_sifs_us);
    mt.t_cts_timeout_us =
        get_field<usec_t>(t, "timings", "t_cts_timeout_us", mt.t_cts_timeout_us);
    mt.phy_header_bits =
        get_field<int>(t, "timings", "phy_header_bits", mt.phy_header_bits);
    mt.mac_header_bits =
        get_field<int>(t, "timings", "mac_header_bits", mt.mac_header_bits);
    mt.ack_bits = get_field<int>(t, "timings", "ack_bits", mt.ack_bits);
    mt.rts_bits = get_field<int>(t, "timings", "rts_bits", mt.rts_bits);
    mt.cts_bits = get_field<int>(t, "timings", "cts_bits", mt.cts_bits);
    mt.beacon_interval_us =
        get_field<usec_t>(t, "timings", "beacon_interval_us", mt.beacon_interval_us);
    mt.base_rate_mbps =
        get_field<double>(t, "timings", "base_rate_mbps", mt.base_rate_mbps);
  }

  if (j.contains("contention")) {
    const json& c = j.at("contention");
    sc.contention.cw_min = get_field<int>(c, "contention", "cw_min", sc.contention.cw_min);
    sc.contention.cw_max = get_field<int>(c, "contention", "cw_max", sc.contention.cw_max);
    sc.contention.retry_limit =
        get_field<int>(c, "contention", "retry_limit", sc.contention.retry_limit);
    sc.contention.frame_lifetime_us = get_field<usec_t>(
        c, "contention", "frame_lifetime_us", sc.contention.frame_lifetime_us);
    // Note: a backoff-stage count is never read from the file; it is always
    // recomputed from cw_min/cw_max.
  }

  if (j.contains("traffic")) {
    const json& t = j.at("traffic");
    sc.traffic.mpdu_bits = get_field<int>(t, "traffic", "mpdu_bits", sc.traffic.mpdu_bits);
    sc.traffic.aggregation =
        get_field<int>(t, "traffic", "aggregation", sc.traffic.aggregation);
    sc.traffic.direction = parse_direction(
        get_field<std::string>(t, "traffic", "direction", to_string(sc.traffic.direction)));
  }

  if (j.contains("radio")) {
    const json& r = j.at("radio");
    RadioParams& rp = sc.radio;
    rp.tx_power_dbm = get_field<double>(r, "radio", "tx_power_dbm", rp.tx_power_dbm);
    rp.freq_ghz = get_field<double>(r, "radio", "freq_ghz", rp.freq_ghz);
    rp.noise_dbm = get_field<double>(r, "radio", "noise_dbm", rp.noise_dbm);
    rp.bandwidth_mhz = get_field<double>(r, "radio", "bandwidth_mhz", rp.bandwidth_mhz);
    rp.ed_threshold_dbm =
        get_field<double>(r, "radio", "ed_threshold_dbm", rp.ed_threshold_dbm);
  }

  if (j.contains("mcs_table")) {
    const json& m = j.at("mcs_table");
    if (!m.is_array()) fail("mcs_table", "must be an array of [rate_mbps, required_snr_db]");
    sc.mcs.entries.clear();
    for (size_t i = 0; i < m.size(); ++i) {
      const json& e = m[i];
      if (!e.is_array() || e.size() != 2)
        fail("mcs_table[" + std::to_string(i) + "]", "must be [rate_mbps, required_snr_db]");
      sc.mcs.entries.push_back({e[0].get<double>(), e[1].get<double>()});
    }
  } else {
    sc.mcs = McsTable::default_table();
  }

  if (!j.contains("nodes")) fail("nodes", "required field missing");
  const json& nodes = j.at("nodes");
  if (!nodes.is_array()) fail("nodes", "must be an array");
  for (size_t i = 0; i < nodes.size(); ++i) {
    const json& n = nodes[i];
    const std::string path = "nodes[" + std::to_string(i) + "]";
    Node node;
    node.id = get_field<std::string>(n, path, "id", "");
    node.kind = parse_kind(get_field<std::string>(n, path, "kind", ""), path + ".kind");
    node.x_m = get_field<double>(n, path, "x_m", 0.0);
    node.y_m = get_field<double>(n, path, "y_m", 0.0);
    node.antenna_height_m = get_field<double>(n, path, "antenna_height_m", 1.0);
    sc.nodes.push_back(node);
  }

  sc.eta = get_field<double>(j, "", "eta", sc.eta);
  sc.scheme = parse_scheme(get_field<std::string>(j, "", "scheme", to_string(sc.scheme)));
  sc.alpha = get_field<double>(j, "", "alpha", sc.alpha);
  sc.sim_duration_s = get_field<double>(j, "", "sim_duration_s", sc.sim_duration_s);
  sc.seeds = get_field<std::vector<std::uint64_t>>(j, "", "seeds", sc.seeds);

  const auto violations = validate(sc);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "scenario validation failed:";
    for (const auto& s : violations) os << "\n  " << s;
    throw ScenarioError(os.str());
  }
  return sc;
}

std::string serialize_scenario(const Scenario& sc) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = sc.name;
  j["timings"] = {{"t_slot_us", sc.timings.t_slot_us},
                  {"t_difs_us", sc.timings.t_difs_us},
                  {"t_sifs_us", sc.timings.t_sifs_us},
                  {"t_cts_timeout_us", sc.timings.t_cts_timeout_us},
                  {"phy_header_bits", sc.timings.phy_header_bits},
                  {"mac_header_bits", sc.timings.mac_header_bits},
                  {"ack_bits", sc.timings.ack_bits},
                  {"rts_bits", sc.timings.rts_bits},
                  {"cts_bits", sc.timings.cts_bits},
                  {"beacon_interval_us", sc.timings.beacon_interval_us},
                  {"base_rate_mbps", sc.timings.base_rate_mbps}};
  j["contention"] = {{"cw_min", sc.contention.cw_min},
                     {"cw_max", sc.contention.cw_max},
                     {"retry_limit", sc.contention.retry_limit},
                     {"frame_lifetime_us", sc.contention.frame_lifetime_us}};
  j["traffic"] = {{"mpdu_bits", sc.traffic.mpdu_bits},
                  {"aggregation", sc.traffic.aggregation},
                  {"direction", to_string(sc.traffic.direction)}};
  j["radio"] = {{"tx_power_dbm", sc.radio.tx_power_dbm},
                {"freq_ghz", sc.radio.freq_ghz},
                {"noise_dbm", sc.radio.noise_dbm},
                {"bandwidth_mhz", sc.radio.bandwidth_mhz},
                {"ed_threshold_dbm", sc.radio.ed_threshold_dbm}};
  json mcs = json::array();
  for (const auto& e : sc.mcs.entries) mcs.push_back({e.rate_mbps, e.required_snr_db});
  j["mcs_table"] = mcs;
  json nodes = json::array();
  for (const auto& n : sc.nodes) {
    nodes.push_back({{"id", n.id},
                     {"kind", to_string(n.kind)},
                     {"x_m", n.x_m},
                     {"y_m", n.y_m},
                     {"antenna_height_m", n.antenna_height_m}});
  }
  j["nodes"] = nodes;
  j["eta"] = sc.eta;
  j["scheme"] = to_string(sc.scheme);
  j["alpha"] = sc.alpha;
  j["sim_duration_s"] = sc.sim_duration_s;
  j["seeds"] = sc.seeds;
  return j.dump(2) + "\n";
}

const std::string& builtin_fig1_json() {
  // Geometry: AP and eNB 20 m apart at 10 m height.  STA1 sits beyond the
  // eNB and is interference-limited (victim: MCS 78 with LTE off, none while
  // on).  STA2 sits on the AP's far side: MCS 130 off, 52 down / 13 up while
  // the eNB transmits.  Nobody's eNB receive power reaches the -62 dBm
  // energy-detection threshold.
  static const std::string text = R"({
  "schema_version": 1,
  "name": "fig1",
  "timings": {
    "t_slot_us": 9,
    "t_difs_us": 34,
    "t_sifs_us": 16,
    "t_cts_timeout_us": 50,
    "phy_header_bits": 128,
    "mac_header_bits": 272,
    "ack_bits": 240,
    "rts_bits": 288,
    "cts_bits": 240,
    "beacon_interval_us": 100000,
    "base_rate_mbps": 6.5
  },
  "contention": { "cw_min": 16, "cw_max": 1024, "retry_limit": 7 },
  "traffic": { "mpdu_bits": 8148, "aggregation": 4, "direction": "dl_only" },
  "radio": {
    "tx_power_dbm": 20.0,
    "freq_ghz": 5.3,
    "noise_dbm": -101.0,
    "bandwidth_mhz": 20.0,
    "ed_threshold_dbm": -62.0
  },
  "mcs_table": [
    [6.5, 2], [13, 5], [26, 7], [39, 9], [52, 13],
    [78, 17], [104, 20], [117, 22], [130, 23]
  ],
  "nodes": [
    { "id": "AP",   "kind": "wifi_ap",  "x_m": 0.0,   "y_m": 0.0, "antenna_height_m": 10.0 },
    { "id": "STA1", "kind": "wifi_sta", "x_m": 43.0,  "y_m": 0.0, "antenna_height_m": 1.0 },
    { "id": "STA2", "kind": "wifi_sta", "x_m": -9.93, "y_m": 0.0, "antenna_height_m": 1.0 },
    { "id": "eNB",  "kind": "lte_enb",  "x_m": 20.0,  "y_m": 0.0, "antenna_height_m": 10.0 },
    { "id": "UE1",  "kind": "lte_ue",   "x_m": 24.0,  "y_m": 3.0, "antenna_height_m": 1.0 },
    { "id": "UE2",  "kind": "lte_ue",   "x_m": 17.0,  "y_m": -4.0, "antenna_height_m": 1.0 }
  ],
  "eta": 0.5,
  "scheme": "standard",
  "alpha": 0.5,
  "sim_duration_s": 10.0,
  "seeds": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]
}
)";
  return text;
}

bool is_builtin_scenario(const std::string& name) { return name == "fig1"; }

Scenario load_scenario(const std::string& ref) {
  if (is_builtin_scenario(ref)) return load_scenario_text(builtin_fig1_json());
  std::ifstream in(ref);
  if (!in) throw ScenarioError("cannot open scenario file '" + ref + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return load_scenario_text(os.str());
}

}  // namespace coexsim
