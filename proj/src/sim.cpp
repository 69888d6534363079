#include "coexsim/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "coexsim/link_model.hpp"
#include "coexsim/rng.hpp"
#include "coexsim/superframe.hpp"

namespace coexsim {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::kLteOffStart: return "lte_off_start";
    case EventKind::kLteOnStart: return "lte_on_start";
    case EventKind::kBeaconDue: return "beacon_due";
    case EventKind::kCfpEnd: return "cfp_end";
    case EventKind::kCfpPollDue: return "cfp_poll_due";
    case EventKind::kTxEnd: return "tx_end";
    case EventKind::kTimeout: return "timeout";
    case EventKind::kBackoffExpire: return "backoff_expire";
  }
  return "unknown";
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;
constexpr std::int64_t kEventGuard = 50'000'000;  // runaway-queue safety net

struct Event {
  usec_t time = 0;
  EventKind kind = EventKind::kTxEnd;
  int node = -1;          // subject node (-1: channel-wide)
  std::uint64_t aux = 0;  // span generation for backoff expiries
  std::uint64_t seq = 0;  // insertion order, final tie-break
};

// Total order: time, then kind (the enum order doubles as the same-instant
// priority: duty-cycle edges before beacons before CFP before transmissions
// before timeouts before backoff expiry), then node, then insertion order.
struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
    if (a.node != b.node) return a.node > b.node;
    return a.seq > b.seq;
  }
};

// Airtime and receive threshold for one (direction, LTE state) combination.
struct DirProfile {
  usec_t data_us = 0;
  double required_db = 0;
  bool valid = false;
};

struct StaProfile {
  bool victim = false;
  bool senses = false;
  double snr_off = 0;
  double dl_sinr_on = 0;
  double ul_sinr_on = 0;
  DirProfile dl_off, dl_on, ul_off, ul_on;
  usec_t poll_round_core_us = 0;  // nominal polled round, without gaps
};

struct NodeState {
  bool contender = false;
  SplitMix64 rng;
  int cw = 16;
  int attempts = 0;   // failed tries on the current frame
  int backoff = -1;   // remaining slots; -1 = draw at next span entry
  bool in_timeout = false;
  bool deferred = false;  // polled scheme: victim STA during LTE-ON
  usec_t frame_birth = 0;  // when the current head-of-line frame was taken up
  // AP only: current destination and the victim frame parked during LTE-ON.
  int dest = -1;
  int stashed_dest = -1;
  int stash_attempts = 0;
};

enum class Activity { kIdle, kBeacon, kCfEnd, kPoll, kExchange, kCollision };

class Engine {
 public:
  Engine(const Scenario& sc, std::uint64_t seed, const RunOptions& opt)
      : sc_(sc), opt_(opt) {
    links_ = build_link_table(sc);
    ft_ = frame_times(sc.timings);
    sched_ = sync_controller(sc.timings.beacon_interval_us, sc.eta);
    has_enb_ = sc.enb_index().has_value();
    end_time_ = sc.sim_duration_us();
    ap_ = sc.ap_index();
    stas_ = sc.sta_indices();
    victims_ = links_.victim_nodes();
    ul_mode_ = sc.traffic.direction == DirectionMode::kUlAndDl;
    payload_ = sc.traffic.burst_payload_bits();
    slot_ = sc.timings.t_slot_us;
    difs_ = sc.timings.t_difs_us;
    sifs_ = sc.timings.t_sifs_us;
    cts_timeout_ = sc.timings.t_cts_timeout_us;
    cw_min_ = sc.contention.cw_min;
    cw_max_ = sc.contention.cw_max;
    retry_limit_ = sc.contention.retry_limit;
    lifetime_ = sc.contention.frame_lifetime_us;

    if (opt.warmup_periods < 0) {
      throw std::invalid_argument("warmup_periods must be >= 0");
    }
    warm_start_ = static_cast<usec_t>(opt.warmup_periods) * sched_.period_us;
    if (warm_start_ >= end_time_) {
      throw std::invalid_argument(
          "sim duration must exceed the warmup window");
    }
    if (opt.fixed_cfp_fraction &&
        (*opt.fixed_cfp_fraction < 0 || *opt.fixed_cfp_fraction > 1)) {
      throw std::invalid_argument("fixed_cfp_fraction must be in [0, 1]");
    }

    build_profiles();

    ns_.resize(sc.nodes.size());
    for (std::size_t i = 0; i < sc.nodes.size(); ++i) {
      ns_[i].rng = SplitMix64::for_node(seed, i);
      ns_[i].cw = cw_min_;
    }
    ns_[ap_].contender = true;
    for (int s : stas_) ns_[s].contender = ul_mode_;
    ap_pick_dest();

    const double off = static_cast<double>(sched_.off_us());
    const double max_cfp =
        std::max(0.0, off - static_cast<double>(ft_.beacon_us));
    ctrl_ = CfpController(std::min(0.10 * off, max_cfp), sc_.alpha, max_cfp);

    acc_.nodes.resize(sc.nodes.size());
    for (int s : stas_) {
      const StaLink& l = links_.by_node(s);
      acc_.nodes[s].senses_lte = l.senses_lte;
      acc_.nodes[s].victim = l.victim;
    }
  }

  RunResult run() {
    schedule_periodic();
    if (sc_.scheme == Scheme::kStandard) begin_span(0);
    while (!q_.empty()) {
      Event ev = q_.top();
      q_.pop();
      if (ev.time >= end_time_) break;
      if (++dispatched_ > kEventGuard) {
        throw std::runtime_error("event-queue runaway (internal guard)");
      }
      maybe_snapshot(ev.time);
      dispatch(ev);
    }
    maybe_snapshot(end_time_);
    return finalize();
  }

 private:
  // ---- setup -------------------------------------------------------------

  void build_profiles() {
    prof_.resize(sc_.nodes.size());
    const double base_req = sc_.mcs.base().required_snr_db;
    base_required_db_ = base_req;
    for (const StaLink& l : links_.stas) {
      StaProfile p;
      p.victim = l.victim;
      p.senses = l.senses_lte;
      p.snr_off = l.snr_off_db;
      p.dl_sinr_on = l.dl_sinr_on_db;
      p.ul_sinr_on = l.ul_sinr_on_db;
      auto fill = [&](const std::optional<McsEntry>& m, DirProfile& d) {
        if (!m) return;
        d.valid = true;
        d.data_us = data_frame_us(sc_.timings, sc_.traffic, m->rate_mbps);
        d.required_db = m->required_snr_db;
      };
      fill(l.mcs_off, p.dl_off);
      fill(l.mcs_off, p.ul_off);  // symmetric link budget with LTE off
      fill(l.dl_mcs_on, p.dl_on);
      fill(l.ul_mcs_on, p.ul_on);
      p.poll_round_core_us = p.dl_off.data_us + sifs_ + ft_.ack_us;
      if (ul_mode_) {
        p.poll_round_core_us += sifs_ + p.ul_off.data_us + sifs_ + ft_.ack_us;
      }
      prof_[l.node_index] = p;
    }
  }

  void schedule_periodic() {
    const usec_t period = sched_.period_us;
    const usec_t off = sched_.off_us();
    const usec_t on = sched_.on_us();
    const std::int64_t periods = end_time_ / period + 2;
    int enb = has_enb_ ? *sc_.enb_index() : -1;
    for (std::int64_t k = 0; k < periods; ++k) {
      if (has_enb_ && off > 0) {
        push(Event{k * period, EventKind::kLteOffStart, enb});
      }
      if (has_enb_ && on > 0) {
        push(Event{k * period + off, EventKind::kLteOnStart, enb});
      }
      if (sc_.scheme == Scheme::kProposed) {
        push(Event{k * period, EventKind::kBeaconDue, ap_});
      }
    }
  }

  // ---- small helpers -----------------------------------------------------

  void push(Event ev) {
    ev.seq = ++seq_;
    q_.push(ev);
  }

  bool lte_at(usec_t t) const { return has_enb_ && sched_.lte_on_at(t); }

  const StaProfile& prof(int node) const { return prof_[node]; }

  bool is_victim(int node) const { return prof_[node].victim; }

  double sinr_now(int sta, bool downlink, bool lte_on) const {
    const StaProfile& p = prof_[sta];
    return lte_on ? (downlink ? p.dl_sinr_on : p.ul_sinr_on) : p.snr_off;
  }

  // Control frames ride the base rate; decodable iff the receiving side's
  // SINR clears the base threshold in the state holding at the frame's end.
  bool ctrl_decodes(int sta, bool downlink, bool lte_on) const {
    return sinr_now(sta, downlink, lte_on) >= base_required_db_;
  }

  // Data rate chosen by the sender for the state at the data start.  A state
  // offering no rate means the exchange is already committed mid-flip, so the
  // stale LTE-OFF choice is transmitted (reception then fails on SINR).
  const DirProfile& pick_data(int sta, bool downlink, bool lte_on) const {
    const StaProfile& p = prof_[sta];
    const DirProfile& want = lte_on ? (downlink ? p.dl_on : p.ul_on)
                                    : (downlink ? p.dl_off : p.ul_off);
    if (want.valid) return want;
    return downlink ? p.dl_off : p.ul_off;
  }

  void busy_add(usec_t start, usec_t dur) {
    acc_.channel_busy_us += std::min(dur, std::max<usec_t>(0, end_time_ - start));
  }

  void maybe_snapshot(usec_t now) {
    if (!warm_taken_ && now >= warm_start_) {
      snapshot_ = acc_;
      warm_taken_ = true;
    }
  }

  void record(usec_t t, EventKind kind, int node, const char* detail) {
    char buf[128];
    int n = std::snprintf(buf, sizeof buf, "%lld\t%s\t%d\t%s\n",
                          static_cast<long long>(t), to_string(kind), node,
                          detail);
    if (n < 0) return;
    if (n >= static_cast<int>(sizeof buf)) n = sizeof buf - 1;
    for (int i = 0; i < n; ++i) {
      hash_ ^= static_cast<unsigned char>(buf[i]);
      hash_ *= kFnvPrime;
    }
    if (opt_.record_trace) trace_.emplace_back(buf, buf + n);
  }

  // ---- AP frame queue ----------------------------------------------------

  // Whether the node's current frame has an attempt whose outcome is still
  // open (mid-transmission or waiting out a timeout window).
  bool frame_committed(int n) const {
    if (ns_[n].in_timeout) return true;
    if (activity_ == Activity::kExchange && ex_src_ == n) return true;
    if (activity_ == Activity::kCollision) {
      for (int c : colliders_) {
        if (c == n) return true;
      }
    }
    return false;
  }

  bool ap_frame_in_flight() const { return frame_committed(ap_); }

  void ap_pick_dest() {
    NodeState& ap = ns_[ap_];
    const bool lte = lte_at(now_);
    std::vector<int> cands;
    for (int s : stas_) {
      if (ap_serves(s, lte, victims_, sc_.scheme)) cands.push_back(s);
    }
    if (cands.empty()) {
      ap.dest = -1;
    } else if (cands.size() == 1) {
      ap.dest = cands[0];
    } else {
      ap.dest = cands[ap.rng.uniform(cands.size())];
    }
    ap.frame_birth = now_;
  }

  // Park a pending victim frame (with its retry count) while LTE is on.
  void ap_stash_swap() {
    NodeState& ap = ns_[ap_];
    if (sc_.scheme != Scheme::kProposed || !lte_at(now_)) return;
    if (ap.dest < 0 || !is_victim(ap.dest)) return;
    if (ap_frame_in_flight()) return;  // resolved by escalate/fetch later
    ap.stashed_dest = ap.dest;
    ap.stash_attempts = ap.attempts;
    ap.attempts = 0;
    ap.cw = cw_min_;
    ap.backoff = -1;
    ap_pick_dest();
  }

  // LTE turned off: resume the parked frame unless a fresh one is mid-retry.
  // The parked frame restarts with a fresh window and lifetime; deferral is a
  // scheduling decision, so the wait doesn't count against the frame.
  void ap_stash_restore() {
    NodeState& ap = ns_[ap_];
    if (ap.stashed_dest < 0 || ap_frame_in_flight()) return;
    if (ap.dest >= 0 && ap.attempts > 0) return;  // finish that one first
    ap.dest = ap.stashed_dest;
    ap.attempts = ap.stash_attempts;
    ap.cw = cw_min_;
    ap.stashed_dest = -1;
    ap.backoff = -1;
    ap.frame_birth = now_;
  }

  // After a terminal outcome (delivered or dropped): next head-of-line frame.
  void ap_fetch_next() {
    NodeState& ap = ns_[ap_];
    ap.attempts = 0;
    ap.cw = cw_min_;
    ap.backoff = -1;
    if (ap.stashed_dest >= 0 &&
        ap_serves(ap.stashed_dest, lte_at(now_), victims_, sc_.scheme)) {
      ap.dest = ap.stashed_dest;
      ap.attempts = ap.stash_attempts;
      ap.stashed_dest = -1;
      ap.frame_birth = now_;
      return;
    }
    ap_pick_dest();
  }

  // Transmit-lifetime check at contention (re)entry: a frame that has been
  // stuck in retry longer than the lifetime is abandoned.  By construction
  // the lifetime exceeds any uninterfered retry sequence, so this only fires
  // for frames starved by sustained interference.  Returns true if anything
  // was dropped (the caller must rebuild the span).
  bool expire_stale_frames(usec_t t) {
    bool dropped = false;
    for (std::size_t i = 0; i < ns_.size(); ++i) {
      const int n = static_cast<int>(i);
      NodeState& s = ns_[i];
      if (!s.contender || s.deferred || frame_committed(n)) continue;
      if (s.attempts == 0 || t - s.frame_birth < lifetime_) continue;
      if (n == ap_) {
        if (s.dest < 0) continue;
        acc_.dl_frames_attempted++;
        record(t, EventKind::kTimeout, n, "drop_lifetime");
        ap_fetch_next();
      } else {
        record(t, EventKind::kTimeout, n, "drop_lifetime");
        s.attempts = 0;
        s.cw = cw_min_;
        s.backoff = -1;
        s.frame_birth = t;
      }
      dropped = true;
    }
    return dropped;
  }

  // Duty-cycle edge: the interference regime that shaped every backoff and
  // retry history just vanished, so contention state renews.  Stations whose
  // attempt is not mid-air redraw a fresh backoff at CW_min, and frames
  // already in retransmission are abandoned.  Deferred stations are skipped:
  // their parked frames are scheduling deferrals, not retry casualties.
  void renew_contention_state(usec_t t) {
    for (std::size_t i = 0; i < ns_.size(); ++i) {
      const int n = static_cast<int>(i);
      NodeState& s = ns_[i];
      if (!s.contender || s.deferred || frame_committed(n)) continue;
      if (s.attempts > 0 && !(n == ap_ && s.dest < 0)) {
        if (n == ap_) {
          acc_.dl_frames_attempted++;
          record(t, EventKind::kTimeout, n, "drop_edge");
          ap_fetch_next();
        } else {
          record(t, EventKind::kTimeout, n, "drop_edge");
          s.attempts = 0;
          s.frame_birth = t;
        }
      }
      s.cw = cw_min_;
      s.backoff = -1;
    }
  }

  // ---- contention spans --------------------------------------------------

  std::vector<int> allowed_nodes(usec_t t) const {
    const bool lte = lte_at(t);
    std::vector<int> out;
    for (std::size_t n = 0; n < ns_.size(); ++n) {
      const NodeState& s = ns_[n];
      if (!s.contender || s.in_timeout) continue;
      if (static_cast<int>(n) == ap_) {
        if (s.dest < 0) continue;
        if (!ap_serves(s.dest, lte, victims_, sc_.scheme)) continue;
        if (links_.ap_senses_lte && lte) continue;
      } else {
        if (s.deferred) continue;
        if (prof_[n].senses && lte) continue;
      }
      out.push_back(static_cast<int>(n));
    }
    return out;
  }

  void begin_span(usec_t t) {
    if (activity_ != Activity::kIdle || in_cfp_) return;
    if (beacon_pending_) {
      beacon_pending_ = false;
      start_beacon(t);
      return;
    }
    expire_stale_frames(t);
    span_nodes_ = allowed_nodes(t);
    ++span_gen_;
    if (span_nodes_.empty()) {
      span_active_ = false;
      return;
    }
    int min_rem = 0;
    bool first = true;
    for (int n : span_nodes_) {
      NodeState& s = ns_[n];
      if (s.backoff < 0) s.backoff = backoff_draw(s.rng, s.cw);
      if (first || s.backoff < min_rem) min_rem = s.backoff;
      first = false;
    }
    span_active_ = true;
    span_start_ = t;
    push(Event{t + difs_ + static_cast<usec_t>(min_rem) * slot_,
               EventKind::kBackoffExpire, -1, span_gen_});
  }

  // Freeze the countdown: everyone keeps what remains after the slots that
  // elapsed beyond the DIFS anchor.
  void interrupt_span(usec_t t) {
    if (!span_active_) return;
    const usec_t el = t - span_start_ - difs_;
    if (el > 0) {
      const int steps = static_cast<int>(el / slot_);
      for (int n : span_nodes_) {
        if (ns_[n].backoff >= 0) {
          ns_[n].backoff = std::max(0, ns_[n].backoff - steps);
        }
      }
    }
    span_active_ = false;
    ++span_gen_;
  }

  // Re-evaluate who may count down after a state change; keeps the span
  // intact when the contender set is unchanged.
  void reconcile_span(usec_t t) {
    if (activity_ != Activity::kIdle || in_cfp_) return;
    const bool dropped = expire_stale_frames(t);
    if (!beacon_pending_ && !dropped) {
      std::vector<int> now_allowed = allowed_nodes(t);
      if (span_active_ && now_allowed == span_nodes_) return;
    }
    interrupt_span(t);
    begin_span(t);
  }

  void on_backoff_expire(const Event& ev) {
    if (!span_active_ || ev.aux != span_gen_) return;
    int min_rem = ns_[span_nodes_.front()].backoff;
    for (int n : span_nodes_) min_rem = std::min(min_rem, ns_[n].backoff);
    std::vector<int> winners;
    for (int n : span_nodes_) {
      NodeState& s = ns_[n];
      s.backoff -= min_rem;
      if (s.backoff == 0) winners.push_back(n);
    }
    span_active_ = false;
    ++span_gen_;
    for (int w : winners) {
      ns_[w].backoff = -1;
      acc_.nodes[w].attempted_exchanges++;
      acc_.total_access_opportunities++;
      if (w == ap_) acc_.dl_access_opportunities++;
    }
    if (winners.size() == 1) {
      const int w = winners.front();
      char d[48];
      std::snprintf(d, sizeof d, "win=%d", w);
      record(ev.time, ev.kind, w, d);
      start_exchange(w, ev.time);
    } else {
      char d[48];
      std::snprintf(d, sizeof d, "collision k=%zu", winners.size());
      record(ev.time, ev.kind, -1, d);
      start_collision(winners, ev.time);
    }
  }

  // ---- contended exchanges -----------------------------------------------

  void start_exchange(int w, usec_t t) {
    activity_ = Activity::kExchange;
    ex_src_ = w;
    ex_dst_ = (w == ap_) ? ns_[ap_].dest : ap_;
    ex_dl_ = (w == ap_);
    ex_phase_ = 0;
    push(Event{t + ft_.rts_us, EventKind::kTxEnd, w});
    busy_add(t, ft_.rts_us);
  }

  void start_collision(std::vector<int> winners, usec_t t) {
    activity_ = Activity::kCollision;
    colliders_ = std::move(winners);
    push(Event{t + ft_.rts_us, EventKind::kTxEnd, -1});
    busy_add(t, ft_.rts_us);
  }

  int exchange_sta() const { return ex_dl_ ? ex_dst_ : ex_src_; }

  // Decode check for a control frame inside the exchange: `sender` fixes the
  // frame direction, the STA endpoint's profile fixes the SINR.
  bool exchange_ctrl_ok(int sender, usec_t frame_end) const {
    const bool downlink = (sender == ap_);
    return ctrl_decodes(exchange_sta(), downlink, lte_at(frame_end));
  }

  void fail_with_timeout(int src, usec_t t) {
    ns_[src].in_timeout = true;
    push(Event{t + cts_timeout_, EventKind::kTimeout, src});
  }

  // One attempt failed: escalate the window or drop at the retry limit.
  void escalate(int n, usec_t t) {
    NodeState& s = ns_[n];
    s.attempts++;
    if (s.attempts >= retry_limit_) {
      if (n == ap_) {
        acc_.dl_frames_attempted++;  // dropped downlink frame, terminal
        record(t, EventKind::kTimeout, n, "drop");
        ap_fetch_next();
      } else {
        record(t, EventKind::kTimeout, n, "drop");
        s.attempts = 0;
        s.cw = cw_min_;
        s.backoff = -1;
        s.frame_birth = t;
      }
    } else {
      s.cw = std::min(s.cw * 2, cw_max_);
      s.backoff = -1;
      char d[32];
      std::snprintf(d, sizeof d, "retry cw=%d", s.cw);
      record(t, EventKind::kTimeout, n, d);
      if (n == ap_) ap_stash_swap();
    }
  }

  void credit_success(usec_t t) {
    if (ex_dl_) {
      acc_.nodes[ex_dst_].bits_dl += payload_;
      acc_.nodes[ex_src_].successful_exchanges++;
      acc_.dl_frames_attempted++;
      acc_.dl_frames_delivered++;
      period_bits(is_victim(ex_dst_)) += payload_;
    } else {
      acc_.nodes[ex_src_].bits_ul += payload_;
      acc_.nodes[ex_src_].successful_exchanges++;
      period_bits(is_victim(ex_src_)) += payload_;
    }
    NodeState& s = ns_[ex_src_];
    if (ex_src_ == ap_) {
      ap_fetch_next();
    } else {
      s.attempts = 0;
      s.cw = cw_min_;
      s.backoff = -1;
      s.frame_birth = t;
    }
  }

  void on_exchange_tx_end(const Event& ev) {
    const usec_t t = ev.time;
    switch (ex_phase_) {
      case 0: {  // RTS ended
        if (exchange_ctrl_ok(ex_src_, t)) {
          record(t, ev.kind, ex_src_, "rts_ok");
          ex_phase_ = 1;
          push(Event{t + sifs_ + ft_.cts_us, EventKind::kTxEnd, ex_dst_});
          busy_add(t + sifs_, ft_.cts_us);
        } else {
          record(t, ev.kind, ex_src_, "rts_lost");
          activity_ = Activity::kIdle;
          fail_with_timeout(ex_src_, t);
          begin_span(t);
        }
        break;
      }
      case 1: {  // CTS ended
        if (exchange_ctrl_ok(ex_dst_, t)) {
          record(t, ev.kind, ex_dst_, "cts_ok");
          const bool lte_ds = lte_at(t + sifs_);
          const DirProfile& ch = pick_data(exchange_sta(), ex_dl_, lte_ds);
          ex_required_db_ = ch.required_db;
          ex_phase_ = 2;
          push(Event{t + sifs_ + ch.data_us, EventKind::kTxEnd, ex_src_});
          busy_add(t + sifs_, ch.data_us);
        } else {
          // CTS was sent but the initiator's side cannot decode it.
          record(t, ev.kind, ex_dst_, "cts_lost");
          activity_ = Activity::kIdle;
          escalate(ex_src_, t);
          begin_span(t);
        }
        break;
      }
      case 2: {  // DATA ended; receiver needs the chosen rate's SINR now
        const bool ok =
            sinr_now(exchange_sta(), ex_dl_, lte_at(t)) >= ex_required_db_;
        if (ok) {
          record(t, ev.kind, ex_src_, "data_ok");
          ex_phase_ = 3;
          push(Event{t + sifs_ + ft_.ack_us, EventKind::kTxEnd, ex_dst_});
          busy_add(t + sifs_, ft_.ack_us);
        } else {
          record(t, ev.kind, ex_src_, "data_lost");
          activity_ = Activity::kIdle;
          fail_with_timeout(ex_src_, t);
          begin_span(t);
        }
        break;
      }
      case 3: {  // ACK ended
        activity_ = Activity::kIdle;
        if (exchange_ctrl_ok(ex_dst_, t)) {
          record(t, ev.kind, ex_dst_, "ack_ok");
          credit_success(t);
        } else {
          record(t, ev.kind, ex_dst_, "ack_lost");
          escalate(ex_src_, t);
        }
        begin_span(t);
        break;
      }
    }
  }

  void on_collision_tx_end(const Event& ev) {
    record(ev.time, ev.kind, -1, "collision_timeout");
    activity_ = Activity::kIdle;
    for (int c : colliders_) fail_with_timeout(c, ev.time);
    colliders_.clear();
    begin_span(ev.time);
  }

  void on_timeout(const Event& ev) {
    NodeState& s = ns_[ev.node];
    if (!s.in_timeout) return;
    s.in_timeout = false;
    escalate(ev.node, ev.time);
    reconcile_span(ev.time);
  }

  // ---- beacon and CFP ----------------------------------------------------

  std::int64_t& period_bits(bool victim) {
    return victim ? period_bits_v_ : period_bits_nv_;
  }

  void on_beacon_due(const Event& ev) {
    const usec_t t = ev.time;
    period_index_++;
    period_start_ = t;
    const double period = static_cast<double>(sched_.period_us);
    if (opt_.adaptive_cfp && !opt_.fixed_cfp_fraction && period_index_ >= 1) {
      const double gv = static_cast<double>(period_bits_v_) / period;
      const double gnv = static_cast<double>(period_bits_nv_) / period;
      ctrl_.update(gv, gnv);
      controller_log_.push_back({period_index_, gv, gnv,
                                 ctrl_.gamma_v_smoothed(),
                                 ctrl_.gamma_nv_smoothed(), ctrl_.t_cfp_us()});
    }
    period_bits_v_ = period_bits_nv_ = 0;
    const double t_cfp = opt_.fixed_cfp_fraction
                             ? *opt_.fixed_cfp_fraction * period
                             : ctrl_.t_cfp_us();
    plan_ = plan_superframe(sched_, t_cfp, ft_.beacon_us, victims_);
    if (period_index_ >= opt_.warmup_periods) {
      cfp_fraction_sum_ += static_cast<double>(plan_.cfp_duration_us) / period;
      cfp_periods_++;
    }
    char d[48];
    std::snprintf(d, sizeof d, "plan cfp=%lld",
                  static_cast<long long>(plan_.cfp_duration_us));
    record(t, ev.kind, ap_, d);
    if (activity_ != Activity::kIdle) {
      beacon_pending_ = true;  // transmitted as soon as the medium frees
    } else {
      interrupt_span(t);
      start_beacon(t);
    }
  }

  void start_beacon(usec_t t) {
    activity_ = Activity::kBeacon;
    push(Event{t + ft_.beacon_us, EventKind::kTxEnd, ap_});
    busy_add(t, ft_.beacon_us);
  }

  void on_beacon_tx_end(const Event& ev) {
    record(ev.time, ev.kind, ap_, "beacon");
    activity_ = Activity::kIdle;
    if (plan_.cfp_duration_us > 0 && !victims_.empty()) {
      in_cfp_ = true;
      cfp_end_abs_ = period_start_ + plan_.cp_start_us;
      next_poll(ev.time);
    } else {
      begin_span(ev.time);
    }
  }

  // Schedule the next polled round if it (plus the CF-End) still fits before
  // the planned CP start; otherwise close the CFP with a CF-End.
  void next_poll(usec_t prev_end) {
    const usec_t s = prev_end + sifs_;
    const int v = plan_.poll_order[poll_cursor_ % plan_.poll_order.size()];
    const usec_t need = prof_[v].poll_round_core_us + sifs_ + ft_.cfend_us;
    if (s + need <= cfp_end_abs_) {
      poll_cursor_++;
      push(Event{s, EventKind::kCfpPollDue, v});
    } else {
      activity_ = Activity::kCfEnd;
      push(Event{s + ft_.cfend_us, EventKind::kCfpEnd, ap_});
      busy_add(s, ft_.cfend_us);
    }
  }

  void on_cfp_poll_due(const Event& ev) {
    const usec_t t = ev.time;
    const int v = ev.node;
    char d[48];
    std::snprintf(d, sizeof d, "poll victim=%d", v);
    record(t, ev.kind, v, d);
    activity_ = Activity::kPoll;
    poll_victim_ = v;
    poll_leg_ = 0;
    acc_.nodes[v].attempted_exchanges++;
    const DirProfile& ch = pick_data(v, true, lte_at(t));
    poll_required_db_ = ch.required_db;
    push(Event{t + ch.data_us, EventKind::kTxEnd, ap_});
    busy_add(t, ch.data_us);
  }

  void on_poll_tx_end(const Event& ev) {
    const usec_t t = ev.time;
    const int v = poll_victim_;
    switch (poll_leg_) {
      case 0: {  // DL data ended
        if (sinr_now(v, true, lte_at(t)) >= poll_required_db_) {
          record(t, ev.kind, ap_, "poll_data_ok");
          poll_leg_ = 1;
          push(Event{t + sifs_ + ft_.ack_us, EventKind::kTxEnd, v});
          busy_add(t + sifs_, ft_.ack_us);
        } else {
          record(t, ev.kind, ap_, "poll_data_lost");
          acc_.dl_frames_attempted++;  // polled frames are not retried
          activity_ = Activity::kIdle;
          next_poll(t);
        }
        break;
      }
      case 1: {  // DL ACK ended
        acc_.dl_frames_attempted++;
        if (ctrl_decodes(v, false, lte_at(t))) {
          record(t, ev.kind, v, "poll_ack_ok");
          acc_.dl_frames_delivered++;
          acc_.nodes[v].bits_dl += payload_;
          acc_.nodes[v].successful_exchanges++;
          period_bits(true) += payload_;
          if (ul_mode_) {
            poll_leg_ = 2;
            const DirProfile& ch = pick_data(v, false, lte_at(t + sifs_));
            poll_required_db_ = ch.required_db;
            push(Event{t + sifs_ + ch.data_us, EventKind::kTxEnd, v});
            busy_add(t + sifs_, ch.data_us);
            return;
          }
        } else {
          record(t, ev.kind, v, "poll_ack_lost");
        }
        activity_ = Activity::kIdle;
        next_poll(t);
        break;
      }
      case 2: {  // UL data ended
        if (sinr_now(v, false, lte_at(t)) >= poll_required_db_) {
          record(t, ev.kind, v, "poll_ul_ok");
          poll_leg_ = 3;
          push(Event{t + sifs_ + ft_.ack_us, EventKind::kTxEnd, ap_});
          busy_add(t + sifs_, ft_.ack_us);
        } else {
          record(t, ev.kind, v, "poll_ul_lost");
          activity_ = Activity::kIdle;
          next_poll(t);
        }
        break;
      }
      case 3: {  // UL ACK ended
        if (ctrl_decodes(v, true, lte_at(t))) {
          record(t, ev.kind, ap_, "poll_ul_ack_ok");
          acc_.nodes[v].bits_ul += payload_;
          acc_.nodes[v].successful_exchanges++;
          period_bits(true) += payload_;
        } else {
          record(t, ev.kind, ap_, "poll_ul_ack_lost");
        }
        activity_ = Activity::kIdle;
        next_poll(t);
        break;
      }
    }
  }

  void on_cfp_end(const Event& ev) {
    record(ev.time, ev.kind, ap_, "cfend");
    activity_ = Activity::kIdle;
    in_cfp_ = false;
    begin_span(ev.time);
  }

  // ---- duty-cycle edges --------------------------------------------------

  void on_lte_edge(const Event& ev, bool on) {
    const usec_t t = ev.time;
    record(t, ev.kind, ev.node, on ? "on" : "off");
    const bool medium_open = activity_ == Activity::kIdle && !in_cfp_;
    if (medium_open) interrupt_span(t);
    if (sc_.scheme == Scheme::kProposed && on) {
      for (int v : victims_) ns_[v].deferred = true;
      ap_stash_swap();
    }
    renew_contention_state(t);
    if (sc_.scheme == Scheme::kProposed && !on) {
      // Deferral lifts: the victims' own pending frames resume on the same
      // fresh-window terms as the AP's parked frame.
      for (int v : victims_) {
        NodeState& s = ns_[v];
        s.deferred = false;
        s.cw = cw_min_;
        s.backoff = -1;
        s.frame_birth = t;
      }
      ap_stash_restore();
    }
    if (medium_open) begin_span(t);
  }

  // ---- dispatch ----------------------------------------------------------

  void dispatch(const Event& ev) {
    now_ = ev.time;
    switch (ev.kind) {
      case EventKind::kLteOffStart: on_lte_edge(ev, false); break;
      case EventKind::kLteOnStart: on_lte_edge(ev, true); break;
      case EventKind::kBeaconDue: on_beacon_due(ev); break;
      case EventKind::kCfpEnd: on_cfp_end(ev); break;
      case EventKind::kCfpPollDue: on_cfp_poll_due(ev); break;
      case EventKind::kTimeout: on_timeout(ev); break;
      case EventKind::kBackoffExpire: on_backoff_expire(ev); break;
      case EventKind::kTxEnd:
        switch (activity_) {
          case Activity::kBeacon: on_beacon_tx_end(ev); break;
          case Activity::kPoll: on_poll_tx_end(ev); break;
          case Activity::kExchange: on_exchange_tx_end(ev); break;
          case Activity::kCollision: on_collision_tx_end(ev); break;
          default:
            throw std::runtime_error("tx_end with no active transmission");
        }
        break;
    }
  }

  RunResult finalize() {
    acc_.window_start_us = 0;
    acc_.window_end_us = end_time_;
    TraceMetrics steady;
    steady.nodes.resize(acc_.nodes.size());
    for (std::size_t i = 0; i < acc_.nodes.size(); ++i) {
      const NodeCounters& a = acc_.nodes[i];
      const NodeCounters& w = snapshot_.nodes[i];
      NodeCounters& out = steady.nodes[i];
      out.bits_dl = a.bits_dl - w.bits_dl;
      out.bits_ul = a.bits_ul - w.bits_ul;
      out.successful_exchanges = a.successful_exchanges - w.successful_exchanges;
      out.attempted_exchanges = a.attempted_exchanges - w.attempted_exchanges;
      out.senses_lte = a.senses_lte;
      out.victim = a.victim;
    }
    steady.dl_access_opportunities =
        acc_.dl_access_opportunities - snapshot_.dl_access_opportunities;
    steady.total_access_opportunities =
        acc_.total_access_opportunities - snapshot_.total_access_opportunities;
    steady.dl_frames_attempted =
        acc_.dl_frames_attempted - snapshot_.dl_frames_attempted;
    steady.dl_frames_delivered =
        acc_.dl_frames_delivered - snapshot_.dl_frames_delivered;
    steady.channel_busy_us = acc_.channel_busy_us - snapshot_.channel_busy_us;
    steady.window_start_us = warm_start_;
    steady.window_end_us = end_time_;

    RunResult out;
    out.metrics = steady;
    out.trace_hash = hash_;
    out.trace = std::move(trace_);
    out.controller_log = std::move(controller_log_);
    out.mean_cfp_fraction =
        cfp_periods_ > 0 ? cfp_fraction_sum_ / cfp_periods_ : 0.0;
    return out;
  }

  // ---- members -----------------------------------------------------------

  const Scenario& sc_;
  RunOptions opt_;
  LinkTable links_;
  FrameTimes ft_;
  DutyCycleSchedule sched_;
  bool has_enb_ = false;
  usec_t end_time_ = 0;
  usec_t warm_start_ = 0;
  int ap_ = 0;
  std::vector<int> stas_;
  std::vector<int> victims_;
  bool ul_mode_ = false;
  std::int64_t payload_ = 0;
  usec_t slot_ = 9, difs_ = 34, sifs_ = 16, cts_timeout_ = 50;
  usec_t lifetime_ = 20000;
  int cw_min_ = 16, cw_max_ = 1024, retry_limit_ = 7;
  double base_required_db_ = 0;

  std::vector<StaProfile> prof_;
  std::vector<NodeState> ns_;
  CfpController ctrl_{0, 0.5, 0};

  std::priority_queue<Event, std::vector<Event>, EventAfter> q_;
  std::uint64_t seq_ = 0;
  std::int64_t dispatched_ = 0;
  usec_t now_ = 0;

  Activity activity_ = Activity::kIdle;
  // Contended exchange state.
  int ex_src_ = -1, ex_dst_ = -1;
  bool ex_dl_ = true;
  int ex_phase_ = 0;
  double ex_required_db_ = 0;
  std::vector<int> colliders_;
  // Polled round state.
  int poll_victim_ = -1;
  int poll_leg_ = 0;
  double poll_required_db_ = 0;

  bool span_active_ = false;
  usec_t span_start_ = 0;
  std::uint64_t span_gen_ = 0;
  std::vector<int> span_nodes_;

  int period_index_ = -1;
  usec_t period_start_ = 0;
  SuperframePlan plan_;
  bool beacon_pending_ = false;
  bool in_cfp_ = false;
  usec_t cfp_end_abs_ = 0;
  std::size_t poll_cursor_ = 0;
  std::int64_t period_bits_v_ = 0, period_bits_nv_ = 0;
  double cfp_fraction_sum_ = 0;
  int cfp_periods_ = 0;

  TraceMetrics acc_;
  TraceMetrics snapshot_;
  bool warm_taken_ = false;
  std::uint64_t hash_ = kFnvOffset;
  std::vector<std::string> trace_;
  std::vector<ControllerLogRow> controller_log_;
};

}  // namespace

RunResult run_simulation(const Scenario& sc, std::uint64_t seed,
                         const RunOptions& opt) {
  std::vector<std::string> errs = validate(sc);
  if (!errs.empty()) {
    std::string msg = "invalid scenario:";
    for (const std::string& e : errs) msg += " " + e + ";";
    throw std::invalid_argument(msg);
  }
  Engine engine(sc, seed, opt);
  return engine.run();
}

}  // namespace coexsim
