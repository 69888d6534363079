#include "coexsim/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "coexsim/analytic.hpp"
#include "coexsim/link_model.hpp"
#include "coexsim/metrics.hpp"
#include "coexsim/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace coexsim {

namespace {

// Shortest decimal form that parses back to the same double.
std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const char* what) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument(std::string("bad number for ") + what + ": " + s);
  }
  return v;
}

struct Sample {
  std::string metric;
  std::string entity;
  double value = 0;
};

// Every metric extracted from one finished run, in a fixed order shared by
// all seeds of a grid point.
std::vector<Sample> collect_metrics(const Scenario& sc, const RunResult& rr) {
  std::vector<Sample> out;
  auto add = [&](const char* m, std::string e, double v) {
    out.push_back(Sample{m, std::move(e), v});
  };
  const TraceMetrics& tm = rr.metrics;
  const std::vector<int> stas = sc.sta_indices();
  const int ap = sc.ap_index();
  const double w = static_cast<double>(tm.window_us());
  auto rate = [&](std::int64_t bits) {
    return w > 0 ? static_cast<double>(bits) / w : 0.0;
  };

  for (int s : stas) add("throughput_mbps", sc.nodes[s].id, throughput_mbps(tm, s));
  for (int s : stas)
    add("throughput_dl_mbps", sc.nodes[s].id, throughput_dl_mbps(tm, s));
  for (int s : stas)
    add("throughput_ul_mbps", sc.nodes[s].id, throughput_ul_mbps(tm, s));

  std::int64_t dl_bits = 0, ul_bits = 0, v_bits = 0, nv_bits = 0;
  int v_count = 0, nv_count = 0;
  for (int s : stas) {
    const NodeCounters& n = tm.nodes[s];
    dl_bits += n.bits_dl;
    ul_bits += n.bits_ul;
    if (n.victim) {
      v_bits += n.bits_dl + n.bits_ul;
      v_count++;
    } else {
      nv_bits += n.bits_dl + n.bits_ul;
      nv_count++;
    }
  }
  add("throughput_dl_mbps", sc.nodes[ap].id, rate(dl_bits));
  add("throughput_mbps", "victim", v_count > 0 ? rate(v_bits) / v_count : 0.0);
  add("throughput_mbps", "non_victim",
      nv_count > 0 ? rate(nv_bits) / nv_count : 0.0);
  add("throughput_mbps", "network", rate(dl_bits + ul_bits));
  add("throughput_dl_mbps", "network", rate(dl_bits));
  add("throughput_ul_mbps", "network", rate(ul_bits));

  add("successful_access_pct", sc.nodes[ap].id, successful_access_pct(tm, ap));
  for (int s : stas)
    add("successful_access_pct", sc.nodes[s].id, successful_access_pct(tm, s));
  add("dl_opportunity_pct", sc.nodes[ap].id, dl_opportunity_pct(tm));
  add("successful_dl_pct", sc.nodes[ap].id, successful_dl_pct(tm));

  std::vector<double> per_sta;
  per_sta.reserve(stas.size());
  for (int s : stas) per_sta.push_back(throughput_mbps(tm, s));
  add("jain_index", "stas", per_sta.empty() ? 1.0 : jain_index(per_sta));

  if (sc.scheme == Scheme::kProposed) {
    add("cfp_fraction_mean", sc.nodes[ap].id, rr.mean_cfp_fraction);
  }
  return out;
}

struct PointDef {
  DirectionMode traffic = DirectionMode::kUlAndDl;
  Scheme scheme = Scheme::kStandard;
  double eta = 0;
  RunOptions run;
};

Scenario point_scenario(const Scenario& base, const PointDef& pd) {
  Scenario sc = base;
  sc.eta = pd.eta;
  sc.scheme = pd.scheme;
  sc.traffic.direction = pd.traffic;
  return sc;
}

// Resolves the CFP sizing for one grid point into concrete run options.
RunOptions point_run_options(const SweepSpec& spec, const Scenario& sc) {
  RunOptions opt;
  opt.warmup_periods = spec.warmup_periods;
  if (sc.scheme != Scheme::kProposed) return opt;
  switch (spec.cfp.sizing) {
    case CfpSizing::kAdaptive:
      opt.adaptive_cfp = true;
      break;
    case CfpSizing::kFixed:
      opt.adaptive_cfp = false;
      opt.fixed_cfp_fraction = spec.cfp.fixed_fraction;
      break;
    case CfpSizing::kAnalytic: {
      const LinkTable links = build_link_table(sc);
      AnalyticInputs in = derive_analytic_inputs(sc, links);
      double x = 0;
      if (in.n_victim >= 1 && in.n_victim < in.n_total) {
        in.cfp_fraction = 0;
        const auto fair = solve_fair_x(in);
        x = fair ? *fair : 1.0 - sc.eta;
      } else if (in.n_victim == in.n_total && in.n_victim > 0) {
        x = 1.0 - sc.eta;
      }
      opt.adaptive_cfp = false;
      opt.fixed_cfp_fraction = x;
      break;
    }
  }
  return opt;
}

std::vector<ResultRow> run_sweep_impl(const SweepSpec& spec, bool parallel) {
  const std::vector<std::string> errs = validate(spec);
  if (!errs.empty()) {
    std::string msg = "invalid sweep spec:";
    for (const std::string& e : errs) msg += " " + e + ";";
    throw std::invalid_argument(msg);
  }
  const std::vector<std::uint64_t>& seeds =
      spec.seeds.empty() ? spec.base.seeds : spec.seeds;

  std::vector<PointDef> points;
  for (DirectionMode tr : spec.traffics) {
    for (Scheme sch : spec.schemes) {
      for (double eta : spec.etas) {
        PointDef pd;
        pd.traffic = tr;
        pd.scheme = sch;
        pd.eta = eta;
        pd.run = point_run_options(spec, point_scenario(spec.base, pd));
        points.push_back(pd);
      }
    }
  }

  const std::size_t n_seeds = seeds.size();
  const std::size_t n_tasks = points.size() * n_seeds;
  std::vector<std::vector<Sample>> samples(n_tasks);
  std::vector<std::string> failures(n_tasks);

  auto run_task = [&](std::size_t i) {
    const PointDef& pd = points[i / n_seeds];
    const std::uint64_t seed = seeds[i % n_seeds];
    try {
      const Scenario sc = point_scenario(spec.base, pd);
      const RunResult rr = run_simulation(sc, seed, pd.run);
      samples[i] = collect_metrics(sc, rr);
    } catch (const std::exception& ex) {
      failures[i] = "eta=" + fmt(pd.eta) + " scheme=" + to_string(pd.scheme) +
                    " seed=" + std::to_string(seed) + ": " + ex.what();
    }
  };

  if (parallel) {
#ifdef _OPENMP
    const int workers =
        spec.workers > 0 ? spec.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n_tasks); ++i) {
      run_task(static_cast<std::size_t>(i));
    }
#else
    for (std::size_t i = 0; i < n_tasks; ++i) run_task(i);
#endif
  } else {
    for (std::size_t i = 0; i < n_tasks; ++i) run_task(i);
  }

  for (const std::string& f : failures) {
    if (!f.empty()) throw std::runtime_error("sweep aborted: " + f);
  }

  // Aggregate each point over its seeds (order-independent: the per-seed
  // sample layout is fixed by collect_metrics).
  std::vector<ResultRow> rows;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const PointDef& pd = points[p];
    const std::vector<Sample>& first = samples[p * n_seeds];
    for (std::size_t k = 0; k < first.size(); ++k) {
      double sum = 0;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        sum += samples[p * n_seeds + s][k].value;
      }
      const double mean = sum / static_cast<double>(n_seeds);
      double var = 0;
      if (n_seeds > 1) {
        for (std::size_t s = 0; s < n_seeds; ++s) {
          const double d = samples[p * n_seeds + s][k].value - mean;
          var += d * d;
        }
        var /= static_cast<double>(n_seeds - 1);
      }
      ResultRow row;
      row.eta = pd.eta;
      row.scheme = to_string(pd.scheme);
      row.traffic = to_string(pd.traffic);
      row.metric = first[k].metric;
      row.entity = first[k].entity;
      row.mean = mean;
      row.std_dev = std::sqrt(var);
      rows.push_back(std::move(row));
    }
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     return std::tie(a.traffic, a.scheme, a.eta, a.metric,
                                     a.entity) <
                            std::tie(b.traffic, b.scheme, b.eta, b.metric,
                                     b.entity);
                   });
  return rows;
}

double rel_err_pct(double sim, double ana) {
  if (std::abs(ana) < 1e-12) return std::abs(sim) < 1e-12 ? 0.0 : 1e9;
  return 100.0 * std::abs(sim - ana) / ana;
}

}  // namespace

std::vector<std::string> validate(const SweepSpec& spec) {
  std::vector<std::string> v;
  for (const std::string& e : validate(spec.base)) v.push_back("base." + e);
  if (spec.etas.empty()) v.push_back("etas: must be non-empty");
  for (double e : spec.etas) {
    if (!(e >= 0 && e <= 1)) {
      v.push_back("etas: values must be in [0,1]");
      break;
    }
  }
  if (spec.schemes.empty()) v.push_back("schemes: must be non-empty");
  if (spec.traffics.empty()) v.push_back("traffics: must be non-empty");
  if (spec.seeds.empty() && spec.base.seeds.empty())
    v.push_back("seeds: must be non-empty");
  if (spec.warmup_periods < 0) v.push_back("warmup_periods: must be >= 0");
  if (spec.cfp.sizing == CfpSizing::kFixed &&
      (spec.cfp.fixed_fraction < 0 || spec.cfp.fixed_fraction > 1))
    v.push_back("cfp.fixed_fraction: must be in [0,1]");
  if (spec.workers < 0) v.push_back("workers: must be >= 0");
  return v;
}

std::vector<ResultRow> run_sweep(const SweepSpec& spec) {
  return run_sweep_impl(spec, true);
}

std::vector<ResultRow> run_sweep_serial(const SweepSpec& spec) {
  return run_sweep_impl(spec, false);
}

std::string emit_csv(const std::vector<ResultRow>& rows) {
  std::string out = "eta,scheme,traffic,metric,entity,mean,std\n";
  for (const ResultRow& r : rows) {
    out += fmt(r.eta);
    out += ',';
    out += r.scheme;
    out += ',';
    out += r.traffic;
    out += ',';
    out += r.metric;
    out += ',';
    out += r.entity;
    out += ',';
    out += fmt(r.mean);
    out += ',';
    out += fmt(r.std_dev);
    out += '\n';
  }
  return out;
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "eta,scheme,traffic,metric,entity,mean,std") {
    throw std::invalid_argument("csv: missing or wrong header");
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      const std::size_t c = line.find(',', pos);
      if (c == std::string::npos) {
        cols.push_back(line.substr(pos));
        break;
      }
      cols.push_back(line.substr(pos, c - pos));
      pos = c + 1;
    }
    if (cols.size() != 7) {
      throw std::invalid_argument("csv: expected 7 columns, got line: " + line);
    }
    ResultRow r;
    r.eta = parse_double(cols[0], "eta");
    r.scheme = cols[1];
    r.traffic = cols[2];
    r.metric = cols[3];
    r.entity = cols[4];
    r.mean = parse_double(cols[5], "mean");
    r.std_dev = parse_double(cols[6], "std");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<CompareRow> compare_analytic_sim(
    const Scenario& base, const std::vector<double>& etas,
    const std::vector<std::uint64_t>& seeds,
    const std::vector<Scheme>& schemes) {
  if (etas.empty() || seeds.empty() || schemes.empty()) {
    throw std::invalid_argument("compare needs etas, seeds, and schemes");
  }
  std::vector<CompareRow> rows;
  for (Scheme scheme : schemes) {
    for (double eta : etas) {
      Scenario sc = base;
      sc.traffic.direction = DirectionMode::kDlOnly;
      sc.eta = eta;
      sc.scheme = scheme;
      const LinkTable links = build_link_table(sc);
      AnalyticInputs in = derive_analytic_inputs(sc, links);
      in.cfp_fraction = 0;

      CompareRow row;
      row.eta = eta;
      row.scheme = to_string(scheme);
      RunOptions opt;
      ThroughputReport rep;
      if (scheme == Scheme::kProposed) {
        if (in.n_victim >= 1 && in.n_victim < in.n_total) {
          const auto fair = solve_fair_x(in);
          row.fair = fair.has_value();
          row.x_used = fair ? *fair : 1.0 - eta;
        } else {
          row.fair = false;
          row.x_used = in.n_victim > 0 ? 1.0 - eta : 0.0;
        }
        in.cfp_fraction = row.x_used;
        rep = proposed_throughputs(in);
        opt.adaptive_cfp = false;
        opt.fixed_cfp_fraction = row.x_used;
      } else {
        rep = standard_throughputs(in);
      }

      double sv = 0, snv = 0, st = 0;
      for (std::uint64_t seed : seeds) {
        const RunResult rr = run_simulation(sc, seed, opt);
        const TraceMetrics& tm = rr.metrics;
        std::int64_t v_bits = 0, nv_bits = 0;
        int v_count = 0, nv_count = 0;
        for (int s : sc.sta_indices()) {
          const NodeCounters& n = tm.nodes[s];
          if (n.victim) {
            v_bits += n.bits_dl + n.bits_ul;
            v_count++;
          } else {
            nv_bits += n.bits_dl + n.bits_ul;
            nv_count++;
          }
        }
        const double w = static_cast<double>(tm.window_us());
        const double v_rate = v_count > 0 && w > 0
                                  ? static_cast<double>(v_bits) / w / v_count
                                  : 0.0;
        const double nv_rate = nv_count > 0 && w > 0
                                   ? static_cast<double>(nv_bits) / w / nv_count
                                   : 0.0;
        sv += v_rate;
        snv += nv_rate;
        st += w > 0 ? static_cast<double>(v_bits + nv_bits) / w : 0.0;
      }
      const double n = static_cast<double>(seeds.size());
      row.sim_victim_mbps = sv / n;
      row.sim_nonvictim_mbps = snv / n;
      row.sim_total_mbps = st / n;
      row.ana_victim_mbps = rep.victim_mbps;
      row.ana_nonvictim_mbps = rep.nonvictim_mbps;
      row.ana_total_mbps = rep.total_mbps;
      row.err_victim_pct = rel_err_pct(row.sim_victim_mbps, row.ana_victim_mbps);
      row.err_nonvictim_pct =
          rel_err_pct(row.sim_nonvictim_mbps, row.ana_nonvictim_mbps);
      row.err_total_pct = rel_err_pct(row.sim_total_mbps, row.ana_total_mbps);
      row.flagged = row.err_victim_pct > 10.0 || row.err_nonvictim_pct > 10.0;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string format_compare(const std::vector<CompareRow>& rows) {
  std::string out =
      "eta,scheme,sim_victim,ana_victim,err_victim_pct,sim_nonvictim,"
      "ana_nonvictim,err_nonvictim_pct,sim_total,ana_total,err_total_pct,"
      "x_used,fair,flagged\n";
  for (const CompareRow& r : rows) {
    out += fmt(r.eta) + "," + r.scheme + "," + fmt(r.sim_victim_mbps) + "," +
           fmt(r.ana_victim_mbps) + "," + fmt(r.err_victim_pct) + "," +
           fmt(r.sim_nonvictim_mbps) + "," + fmt(r.ana_nonvictim_mbps) + "," +
           fmt(r.err_nonvictim_pct) + "," + fmt(r.sim_total_mbps) + "," +
           fmt(r.ana_total_mbps) + "," + fmt(r.err_total_pct) + "," +
           fmt(r.x_used) + "," + (r.fair ? "true" : "false") + "," +
           (r.flagged ? "true" : "false") + "\n";
  }
  return out;
}

const std::vector<Preset>& preset_catalog() {
  static const std::vector<Preset> presets = {
      {"fig2",
       "Per-user throughput and successful-access share vs eta "
       "(standard scheme, two-way traffic)",
       "coexsim run --scenario fig1 --scheme standard --traffic ul_and_dl "
       "--out fig2.csv"},
      {"fig3",
       "AP DL opportunity, successful-DL share, and DL throughput vs eta "
       "(standard scheme)",
       "coexsim run --scenario fig1 --scheme standard --traffic ul_and_dl "
       "--out fig3.csv"},
      {"fig6",
       "Downlink-only victim/non-victim throughput, simulation vs closed "
       "form (both schemes, CFP pinned to the fair fraction)",
       "coexsim compare --scenario fig1 --out fig6.csv"},
      {"fig7",
       "Per-user throughput and successful-access share vs eta "
       "(polled scheme, adaptive CFP)",
       "coexsim run --scenario fig1 --scheme proposed --traffic ul_and_dl "
       "--out fig7.csv"},
      {"fig8",
       "AP DL opportunity and successful-DL share vs eta, both schemes",
       "coexsim run --scenario fig1 --scheme both --traffic ul_and_dl "
       "--out fig8.csv"},
      {"fig9",
       "Network UL/DL/total throughput vs eta, both schemes",
       "coexsim run --scenario fig1 --scheme both --traffic ul_and_dl "
       "--out fig9.csv"},
  };
  return presets;
}

bool is_preset(const std::string& name) {
  for (const Preset& p : preset_catalog()) {
    if (p.name == name) return true;
  }
  return false;
}

SweepSpec preset_sweep(const std::string& name, Scenario base) {
  SweepSpec spec;
  spec.base = std::move(base);
  if (name == "fig2" || name == "fig3") {
    spec.schemes = {Scheme::kStandard};
    spec.traffics = {DirectionMode::kUlAndDl};
  } else if (name == "fig6") {
    spec.schemes = {Scheme::kStandard, Scheme::kProposed};
    spec.traffics = {DirectionMode::kDlOnly};
    spec.cfp.sizing = CfpSizing::kAnalytic;
  } else if (name == "fig7") {
    spec.schemes = {Scheme::kProposed};
    spec.traffics = {DirectionMode::kUlAndDl};
  } else if (name == "fig8" || name == "fig9") {
    spec.schemes = {Scheme::kStandard, Scheme::kProposed};
    spec.traffics = {DirectionMode::kUlAndDl};
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return spec;
}

}  // namespace coexsim
