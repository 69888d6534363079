#include "coexsim/superframe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coexsim {

usec_t DutyCycleSchedule::on_us() const {
  return static_cast<usec_t>(std::llround(eta * static_cast<double>(period_us)));
}

usec_t DutyCycleSchedule::off_us() const { return period_us - on_us(); }

bool DutyCycleSchedule::lte_on_at(usec_t t) const {
  if (on_us() == 0) return false;
  const usec_t phase = ((t % period_us) + period_us) % period_us;
  return phase >= off_us();
}

usec_t DutyCycleSchedule::next_boundary_after(usec_t t) const {
  const usec_t period_start = (t / period_us) * period_us;
  const usec_t off = off_us();
  if (off > 0 && on_us() > 0 && t < period_start + off) return period_start + off;
  return period_start + period_us;
}

DutyCycleSchedule sync_controller(usec_t beacon_interval_us, double eta) {
  if (eta < 0 || eta > 1) throw std::invalid_argument("eta must be in [0,1]");
  if (beacon_interval_us <= 0)
    throw std::invalid_argument("beacon interval must be positive");
  DutyCycleSchedule s;
  s.period_us = beacon_interval_us;
  s.eta = eta;
  return s;
}

CfpController::CfpController(double initial_t_cfp_us, double alpha,
                             double max_cfp_us)
    : t_cfp_us_(std::clamp(initial_t_cfp_us, 0.0, std::max(max_cfp_us, 0.0))),
      alpha_(alpha),
      max_cfp_us_(std::max(max_cfp_us, 0.0)) {}

void CfpController::update(double gamma_v_prev, double gamma_nv_prev) {
  if (!has_history_) {
    // First period: no smoothed history yet, seed it with the measurement.
    gamma_v_old_ = gamma_v_prev;
    gamma_nv_old_ = gamma_nv_prev;
    has_history_ = true;
  }
  const double gamma_v_new = (1.0 - alpha_) * gamma_v_prev + alpha_ * gamma_v_old_;
  const double gamma_nv_new =
      (1.0 - alpha_) * gamma_nv_prev + alpha_ * gamma_nv_old_;
  gamma_v_old_ = gamma_v_new;
  gamma_nv_old_ = gamma_nv_new;

  if (gamma_v_new == 0 && gamma_nv_new == 0) return;  // no information
  if (gamma_v_new == 0) {
    t_cfp_us_ = max_cfp_us_;  // victims starved: give them everything
    return;
  }
  if (gamma_nv_new == 0) {
    t_cfp_us_ = 0;  // nothing to equalize against
    return;
  }
  t_cfp_us_ = std::clamp(t_cfp_us_ * (gamma_nv_new / gamma_v_new), 0.0, max_cfp_us_);
}

SuperframePlan plan_superframe(const DutyCycleSchedule& sched,
                               double t_cfp_us, usec_t beacon_duration_us,
                               const std::vector<int>& victims) {
  SuperframePlan plan;
  plan.beacon_at_us = 0;
  plan.beacon_duration_us = beacon_duration_us;
  plan.on_start_us = sched.off_us();
  plan.poll_order = victims;
  std::sort(plan.poll_order.begin(), plan.poll_order.end());

  const usec_t max_cfp = std::max<usec_t>(0, sched.off_us() - beacon_duration_us);
  usec_t cfp = victims.empty()
                   ? 0
                   : static_cast<usec_t>(std::llround(std::max(t_cfp_us, 0.0)));
  plan.cfp_duration_us = std::min(cfp, max_cfp);
  plan.cp_start_us =
      std::min<usec_t>(beacon_duration_us + plan.cfp_duration_us, sched.off_us());
  return plan;
}

bool ap_serves(int dest_node, bool lte_on, const std::vector<int>& victims,
               Scheme scheme) {
  if (scheme != Scheme::kProposed || !lte_on) return true;
  return std::find(victims.begin(), victims.end(), dest_node) == victims.end();
}

}  // namespace coexsim
