// Superframe structure for the polled scheme: duty-cycle/beacon alignment,
// per-period plan (beacon -> CFP polls -> CP -> LTE-ON), and the adaptive
// controller that sizes the CFP from observed per-class throughput.
#pragma once

#include <vector>

#include "coexsim/scenario.hpp"

namespace coexsim {

// The LTE-U square wave, phase-locked to the beacon interval with the OFF
// span leading each period.
struct DutyCycleSchedule {
  usec_t period_us = 100000;
  double eta = 0.5;

  usec_t on_us() const;   // round(eta * period)
  usec_t off_us() const;  // period - on
  // LTE transmitting at absolute time t?  ON covers [off, period) of each
  // period, half-open.
  bool lte_on_at(usec_t t) const;
  // Next ON->OFF or OFF->ON boundary strictly after t (period edges count).
  usec_t next_boundary_after(usec_t t) const;
};

// Couples the eNB duty cycle to the AP beacon interval (period = beacon
// interval, OFF first) and hands eta to the Wi-Fi side.
DutyCycleSchedule sync_controller(usec_t beacon_interval_us, double eta);

// One period's layout as offsets from the period start.  beacon + CFP + CP
// fill the OFF span exactly; the ON span follows.
struct SuperframePlan {
  usec_t beacon_at_us = 0;
  usec_t beacon_duration_us = 0;
  usec_t cfp_duration_us = 0;          // polling span right after the beacon
  std::vector<int> poll_order;         // victim node indices, round-robin
  usec_t cp_start_us = 0;              // beacon + CFP
  usec_t on_start_us = 0;              // = OFF duration
};

// Smooths per-class throughput measurements and rescales the CFP length by
// their ratio each period.  Bounds: [0, max_cfp_us].
class CfpController {
 public:
  CfpController(double initial_t_cfp_us, double alpha, double max_cfp_us);

  // Feed one period's measured per-class throughput (any consistent unit).
  // The new length is t_cfp * (smoothed nonvictim / smoothed victim); a
  // starved victim class (0) pushes to the upper bound, an empty nonvictim
  // measurement to 0, and both-zero leaves the length unchanged.
  void update(double gamma_v_prev, double gamma_nv_prev);

  double t_cfp_us() const { return t_cfp_us_; }
  double max_cfp_us() const { return max_cfp_us_; }
  double gamma_v_smoothed() const { return gamma_v_old_; }
  double gamma_nv_smoothed() const { return gamma_nv_old_; }

 private:
  double t_cfp_us_;
  double alpha_;
  double max_cfp_us_;
  double gamma_v_old_ = 0;
  double gamma_nv_old_ = 0;
  bool has_history_ = false;
};

// Lays out one period: beacon first, then the controller's CFP (forced to 0
// with no victims, clamped so it fits in OFF after the beacon), CP filling
// the rest of OFF.
SuperframePlan plan_superframe(const DutyCycleSchedule& sched,
                               double t_cfp_us, usec_t beacon_duration_us,
                               const std::vector<int>& victims);

// AP transmit filter for the polled scheme: during LTE-ON, frames to victims
// are deferred (the AP serves the next non-victim frame instead).
bool ap_serves(int dest_node, bool lte_on, const std::vector<int>& victims,
               Scheme scheme);

}  // namespace coexsim
