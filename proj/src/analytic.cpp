#include "coexsim/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coexsim/link_model.hpp"

namespace coexsim {

namespace {

// Control frame airtime, unrounded (body + PHY header at base rate).
double ctrl_us(const MacTimings& t, int body_bits) {
  return (t.phy_header_bits + body_bits) / t.base_rate_mbps;
}

struct AffineRates {
  // Per-user rates as affine functions of the CFP fraction x:
  //   victim(x)     = v0 + v1*x
  //   nonvictim(x)  = n0 + n1*x
  double v0 = 0, v1 = 0, n0 = 0, n1 = 0;
  double t_cfp = 0;  // polled exchange time (for breakdowns)
  double t_off = 0;  // contended exchange time, LTE off
};

// Shared derivation for the polled scheme; keeps proposed_throughputs and
// solve_fair_x on one set of coefficients.
AffineRates proposed_affine(const AnalyticInputs& in) {
  AffineRates r;
  const int n_t = in.n_total;
  const int n_v = in.n_victim;
  const int n_nv = n_t - n_v;
  r.t_off = contended_exchange_us(in.timings, in.cw_min, in.t_data_off_us);
  r.t_cfp = polled_exchange_us(in.timings, in.t_data_cfp());
  const double t_on = contended_exchange_us(in.timings, in.cw_min, in.t_data_on_us);

  // Contended OFF span (1-eta-x): every STA shares it equally.
  const double cp_rate = in.payload_bits / (n_t * r.t_off);
  const double cp_at_zero = (1.0 - in.eta) * cp_rate;

  if (n_v > 0) {
    r.v0 = cp_at_zero;
    r.v1 = in.payload_bits / (n_v * r.t_cfp) - cp_rate;
  }
  if (n_nv > 0) {
    r.n0 = cp_at_zero + in.eta * in.payload_bits / (n_nv * t_on);
    r.n1 = -cp_rate;
  }
  return r;
}

ThroughputReport assemble(const AnalyticInputs& in, double gamma_v,
                          double gamma_nv, const PhaseBreakdown& bd) {
  ThroughputReport rep;
  rep.victim_mbps = in.n_victim > 0 ? gamma_v : 0.0;
  rep.nonvictim_mbps = in.n_total - in.n_victim > 0 ? gamma_nv : 0.0;
  rep.total_mbps = in.n_victim * rep.victim_mbps +
                   (in.n_total - in.n_victim) * rep.nonvictim_mbps;
  rep.breakdown = bd;
  return rep;
}

}  // namespace

std::vector<std::string> validate(const AnalyticInputs& in) {
  std::vector<std::string> v;
  auto bad = [&](const std::string& s) { v.push_back(s); };
  if (in.n_total < 1) bad("n_total: must be >= 1");
  if (in.n_victim < 0 || in.n_victim > in.n_total)
    bad("n_victim: must be in [0, n_total]");
  if (in.cw_min < 2) bad("cw_min: must be >= 2");
  if (in.backoff_stages < 0) bad("backoff_stages: must be >= 0");
  if (in.retry_limit < 1) bad("retry_limit: must be >= 1");
  if (in.payload_bits <= 0) bad("payload_bits: must be > 0");
  if (in.t_data_off_us < 0) bad("t_data_off_us: must be >= 0");
  if (in.t_data_off_us > in.t_data_on_us)
    bad("t_data_on_us: must be >= t_data_off_us (interference never speeds a link up)");
  if (in.eta < 0 || in.eta > 1) bad("eta: must be in [0,1]");
  if (in.cfp_fraction < 0 || in.cfp_fraction > 1 - in.eta)
    bad("cfp_fraction: must be in [0, 1-eta]");
  if (in.timings.t_difs_us <= in.timings.t_sifs_us)
    bad("timings.t_difs_us: must exceed t_sifs_us");
  return v;
}

double contended_exchange_us(const MacTimings& t, int cw_min, double t_data_us) {
  if (cw_min < 2) throw std::invalid_argument("cw_min must be >= 2");
  const double backoff = (cw_min - 1) / 2.0 * t.t_slot_us;
  return t.t_difs_us + backoff + ctrl_us(t, t.rts_bits) + 3.0 * t.t_sifs_us +
         ctrl_us(t, t.cts_bits) + t_data_us + ctrl_us(t, t.ack_bits);
}

double retry_drop_us(const MacTimings& t, int cw_min, int backoff_stages,
                     int retry_limit) {
  // Exact per-attempt sum; for retry_limit >= backoff_stages it matches the
  // closed form T_slot/2*(2^m*W*(R-m+1) - R - W) + R*(DIFS+RTS+CTS timeout).
  double slots = 0;
  for (int attempt = 1; attempt <= retry_limit; ++attempt) {
    const double w_k =
        std::min(std::ldexp(static_cast<double>(cw_min), attempt - 1),
                 std::ldexp(static_cast<double>(cw_min), backoff_stages));
    slots += (w_k - 1) / 2.0;
  }
  const double per_attempt =
      t.t_difs_us + ctrl_us(t, t.rts_bits) + t.t_cts_timeout_us;
  return slots * t.t_slot_us + retry_limit * per_attempt;
}

double polled_exchange_us(const MacTimings& t, double t_data_us) {
  return 2.0 * t.t_sifs_us + t_data_us + ctrl_us(t, t.ack_bits);
}

ThroughputReport standard_throughputs(const AnalyticInputs& in) {
  const int n_t = in.n_total;
  const int n_v = in.n_victim;
  const double p = static_cast<double>(n_v) / n_t;
  const double t_off = contended_exchange_us(in.timings, in.cw_min, in.t_data_off_us);
  const double t_on = contended_exchange_us(in.timings, in.cw_min, in.t_data_on_us);
  const double t_drop =
      retry_drop_us(in.timings, in.cw_min, in.backoff_stages, in.retry_limit);

  // Same evaluation order as the polled scheme's shared terms so that
  // degenerate cases (eta=0, x=0, no victims) compare bit-identically.
  const double cp_rate = in.payload_bits / (n_t * t_off);
  const double off_per_user = (1.0 - in.eta) * cp_rate;
  // During ON the AP keeps drawing destinations uniformly: victim picks burn
  // a full drop sequence, non-victim picks succeed at the ON rate.
  const double cycle = p * t_drop + (1.0 - p) * t_on;
  const double on_per_nonvictim =
      n_v < n_t ? in.eta * in.payload_bits / (n_t * cycle) : 0.0;

  PhaseBreakdown bd;
  bd.cp_per_user_mbps = off_per_user;
  bd.on_nonvictim_mbps = on_per_nonvictim;
  return assemble(in, off_per_user, off_per_user + on_per_nonvictim, bd);
}

ThroughputReport proposed_throughputs(const AnalyticInputs& in) {
  if (in.cfp_fraction < 0 || in.cfp_fraction > 1.0 - in.eta)
    throw std::invalid_argument("cfp_fraction must lie in [0, 1-eta]");
  const AffineRates r = proposed_affine(in);
  const double x = in.cfp_fraction;

  PhaseBreakdown bd;
  const double cp_rate = in.payload_bits / (in.n_total * r.t_off);
  bd.cp_per_user_mbps = (1.0 - in.eta - x) * cp_rate;
  if (in.n_victim > 0)
    bd.cfp_victim_mbps = x * in.payload_bits / (in.n_victim * r.t_cfp);
  bd.on_nonvictim_mbps = r.n0 + r.n1 * x - bd.cp_per_user_mbps;
  return assemble(in, r.v0 + r.v1 * x, r.n0 + r.n1 * x, bd);
}

std::optional<double> solve_fair_x(const AnalyticInputs& in) {
  if (in.n_victim < 1)
    throw std::invalid_argument("fairness solve needs at least one victim");
  if (in.n_victim >= in.n_total)
    throw std::invalid_argument("fairness solve needs at least one non-victim");
  const AffineRates r = proposed_affine(in);
  // v0 + v1*x = n0 + n1*x.  v1 - n1 = payload/(n_v*t_cfp) > 0 always.
  const double x = (r.n0 - r.v0) / (r.v1 - r.n1);
  if (x > 1.0 - in.eta) return std::nullopt;
  return std::max(x, 0.0);
}

double eta_threshold(const AnalyticInputs& in) {
  AnalyticInputs probe = in;
  probe.cfp_fraction = 0;
  auto feasible = [&](double eta) {
    probe.eta = eta;
    return solve_fair_x(probe).has_value();
  };
  if (!feasible(0.0)) return 0.0;
  if (feasible(1.0)) return 1.0;
  double lo = 0.0, hi = 1.0;  // lo feasible, hi infeasible
  while (hi - lo > 1e-4) {
    const double mid = (lo + hi) / 2;
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

std::vector<GainRow> gain_report(const AnalyticInputs& in,
                                 const std::vector<double>& eta_grid) {
  std::vector<GainRow> rows;
  for (double eta : eta_grid) {
    AnalyticInputs point = in;
    point.eta = eta;
    point.cfp_fraction = 0;

    GainRow row;
    row.eta = eta;
    if (point.n_victim == 0) {
      row.x_used = 0;
      row.fair = true;  // nothing to equalize
    } else if (point.n_victim == point.n_total) {
      row.x_used = 1.0 - eta;  // every STA polls; no contention class left
      row.fair = false;
    } else {
      const auto x = solve_fair_x(point);
      row.fair = x.has_value();
      row.x_used = x ? *x : 1.0 - eta;
    }
    point.cfp_fraction = row.x_used;
    row.standard_total_mbps = standard_throughputs(point).total_mbps;
    row.proposed_total_mbps = proposed_throughputs(point).total_mbps;
    row.gain_pct = row.standard_total_mbps > 0
                       ? 100.0 * (row.proposed_total_mbps - row.standard_total_mbps) /
                             row.standard_total_mbps
                       : 0.0;
    rows.push_back(row);
  }
  return rows;
}

AnalyticInputs derive_analytic_inputs(const Scenario& sc, const LinkTable& links) {
  AnalyticInputs in;
  in.n_total = static_cast<int>(links.stas.size());
  in.n_victim = links.victim_count();
  in.cw_min = sc.contention.cw_min;
  in.backoff_stages = sc.contention.max_backoff_stage();
  in.retry_limit = sc.contention.retry_limit;
  in.timings = sc.timings;
  in.payload_bits = static_cast<double>(sc.traffic.burst_payload_bits());
  in.eta = sc.eta;

  double off_sum = 0, on_sum = 0, cfp_sum = 0;
  int on_n = 0, cfp_n = 0;
  for (const auto& s : links.stas) {
    const double t_off = static_cast<double>(
        data_frame_us(sc.timings, sc.traffic, s.mcs_off->rate_mbps));
    off_sum += t_off;
    if (s.victim) {
      cfp_sum += t_off;
      ++cfp_n;
    } else if (s.dl_mcs_on) {
      on_sum += static_cast<double>(
          data_frame_us(sc.timings, sc.traffic, s.dl_mcs_on->rate_mbps));
      ++on_n;
    }
  }
  in.t_data_off_us = in.n_total > 0 ? off_sum / in.n_total : 0.0;
  in.t_data_on_us = on_n > 0 ? on_sum / on_n : in.t_data_off_us;
  if (cfp_n > 0) in.t_data_cfp_us = cfp_sum / cfp_n;
  return in;
}

}  // namespace coexsim
