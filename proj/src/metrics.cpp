#include "coexsim/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace coexsim {

namespace {
double rate_mbps(std::int64_t bits, usec_t window_us) {
  return window_us > 0 ? static_cast<double>(bits) / static_cast<double>(window_us)
                       : 0.0;
}
}  // namespace

double throughput_dl_mbps(const TraceMetrics& tm, int node) {
  return rate_mbps(tm.nodes.at(node).bits_dl, tm.window_us());
}

double throughput_ul_mbps(const TraceMetrics& tm, int node) {
  return rate_mbps(tm.nodes.at(node).bits_ul, tm.window_us());
}

double throughput_mbps(const TraceMetrics& tm, int node) {
  const NodeCounters& n = tm.nodes.at(node);
  return rate_mbps(n.bits_dl + n.bits_ul, tm.window_us());
}

double successful_access_pct(const TraceMetrics& tm, int node) {
  std::int64_t total = 0;
  for (const auto& n : tm.nodes) total += n.successful_exchanges;
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(tm.nodes.at(node).successful_exchanges) /
         static_cast<double>(total);
}

double dl_opportunity_pct(const TraceMetrics& tm) {
  if (tm.total_access_opportunities == 0) return 0.0;
  return 100.0 * static_cast<double>(tm.dl_access_opportunities) /
         static_cast<double>(tm.total_access_opportunities);
}

double successful_dl_pct(const TraceMetrics& tm) {
  if (tm.dl_frames_attempted == 0) return 0.0;
  return 100.0 * static_cast<double>(tm.dl_frames_delivered) /
         static_cast<double>(tm.dl_frames_attempted);
}

double jain_index(const std::vector<double>& values) {
  if (values.empty())
    throw std::invalid_argument("jain_index needs at least one value");
  double sum = 0, sum_sq = 0;
  for (double v : values) {
    sum += v;
    sum_sq += v * v;
  }
  if (sum_sq == 0) return 1.0;  // everyone equal (at zero)
  return sum * sum / (static_cast<double>(values.size()) * sum_sq);
}

TraceMetrics combine(const TraceMetrics& a, const TraceMetrics& b) {
  if (a.nodes.size() != b.nodes.size())
    throw std::invalid_argument("combine: mismatched node counts");
  TraceMetrics out = a;
  for (size_t i = 0; i < out.nodes.size(); ++i) {
    out.nodes[i].bits_dl += b.nodes[i].bits_dl;
    out.nodes[i].bits_ul += b.nodes[i].bits_ul;
    out.nodes[i].successful_exchanges += b.nodes[i].successful_exchanges;
    out.nodes[i].attempted_exchanges += b.nodes[i].attempted_exchanges;
    out.nodes[i].senses_lte = a.nodes[i].senses_lte || b.nodes[i].senses_lte;
    out.nodes[i].victim = a.nodes[i].victim || b.nodes[i].victim;
  }
  out.dl_access_opportunities += b.dl_access_opportunities;
  out.total_access_opportunities += b.total_access_opportunities;
  out.dl_frames_attempted += b.dl_frames_attempted;
  out.dl_frames_delivered += b.dl_frames_delivered;
  out.window_start_us = std::min(a.window_start_us, b.window_start_us);
  out.window_end_us = std::max(a.window_end_us, b.window_end_us);
  out.channel_busy_us += b.channel_busy_us;
  return out;
}

}  // namespace coexsim
