// Command-line harness: sweeps, closed-form tables, sim-vs-model
// cross-validation, and figure presets.  Exit codes: 0 success, 1 input
// validation failure, 2 runtime failure.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coexsim/analytic.hpp"
#include "coexsim/link_model.hpp"
#include "coexsim/scenario_io.hpp"
#include "coexsim/sweep.hpp"

namespace {

using namespace coexsim;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::vector<Scheme> parse_schemes(const std::string& s) {
  if (s == "standard") return {Scheme::kStandard};
  if (s == "proposed") return {Scheme::kProposed};
  if (s == "both") return {Scheme::kStandard, Scheme::kProposed};
  throw CLI::ValidationError("--scheme", "expected standard|proposed|both");
}

std::vector<DirectionMode> parse_traffics(const std::string& s) {
  if (s == "dl_only") return {DirectionMode::kDlOnly};
  if (s == "ul_and_dl") return {DirectionMode::kUlAndDl};
  if (s == "both") return {DirectionMode::kDlOnly, DirectionMode::kUlAndDl};
  throw CLI::ValidationError("--traffic", "expected dl_only|ul_and_dl|both");
}

CfpPolicy parse_cfp(const std::string& s) {
  CfpPolicy p;
  if (s == "adaptive") {
    p.sizing = CfpSizing::kAdaptive;
  } else if (s == "analytic") {
    p.sizing = CfpSizing::kAnalytic;
  } else {
    p.sizing = CfpSizing::kFixed;
    try {
      std::size_t used = 0;
      p.fixed_fraction = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--cfp",
                                 "expected adaptive|analytic|<fraction>");
    }
    if (p.fixed_fraction < 0 || p.fixed_fraction > 1) {
      throw CLI::ValidationError("--cfp", "fraction must be in [0,1]");
    }
  }
  return p;
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + out_path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + out_path);
}

struct CommonArgs {
  std::string scenario = "fig1";
  std::vector<double> etas = {0, 0.1, 0.2, 0.3, 0.4, 0.5,
                              0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<std::uint64_t> seeds;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--scenario", a.scenario,
                  "Scenario file path or builtin name (default fig1)");
  cmd->add_option("--etas", a.etas,
                  "LTE-U ON fractions to evaluate (default 0..1 step 0.1)")
      ->delimiter(',');
  cmd->add_option("--seeds", a.seeds,
                  "Run seeds (default: the scenario's seed list)")
      ->delimiter(',');
  cmd->add_option("--out", a.out, "Output file ('-' or empty: stdout)");
}

int cmd_run(const CommonArgs& a, const std::string& scheme,
            const std::string& traffic, const std::string& cfp, int workers,
            int warmup, const std::string& preset) {
  Scenario base = load_scenario(a.scenario);
  SweepSpec spec;
  if (!preset.empty()) {
    spec = preset_sweep(preset, base);
  } else {
    spec.base = base;
    spec.schemes = parse_schemes(scheme);
    spec.traffics = parse_traffics(traffic);
    spec.cfp = parse_cfp(cfp);
  }
  spec.etas = a.etas;
  spec.seeds = a.seeds;
  spec.workers = workers;
  spec.warmup_periods = warmup;
  const std::vector<std::string> errs = validate(spec);
  if (!errs.empty()) {
    for (const std::string& e : errs) std::cerr << "error: " << e << "\n";
    return kExitValidation;
  }
  write_output(a.out, emit_csv(run_sweep(spec)));
  return kExitOk;
}

int cmd_analytic(const CommonArgs& a) {
  const Scenario base = load_scenario(a.scenario);
  const LinkTable links = build_link_table(base);
  AnalyticInputs in = derive_analytic_inputs(base, links);

  std::ostringstream out;
  out << "eta,metric,entity,value\n";
  auto emit = [&](double eta, const char* metric, const char* entity,
                  double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    out << eta << ',' << metric << ',' << entity << ',' << buf << '\n';
  };
  const std::vector<GainRow> gains = gain_report(in, a.etas);
  for (double eta : a.etas) {
    AnalyticInputs point = in;
    point.eta = eta;
    point.cfp_fraction = 0;
    const ThroughputReport std_rep = standard_throughputs(point);
    emit(eta, "standard_throughput_mbps", "victim", std_rep.victim_mbps);
    emit(eta, "standard_throughput_mbps", "non_victim", std_rep.nonvictim_mbps);
    emit(eta, "standard_throughput_mbps", "network", std_rep.total_mbps);
  }
  for (const GainRow& g : gains) {
    AnalyticInputs point = in;
    point.eta = g.eta;
    point.cfp_fraction = g.x_used;
    const ThroughputReport rep = proposed_throughputs(point);
    emit(g.eta, "proposed_throughput_mbps", "victim", rep.victim_mbps);
    emit(g.eta, "proposed_throughput_mbps", "non_victim", rep.nonvictim_mbps);
    emit(g.eta, "proposed_throughput_mbps", "network", rep.total_mbps);
    emit(g.eta, "cfp_fraction", "network", g.x_used);
    emit(g.eta, "fair", "network", g.fair ? 1.0 : 0.0);
    emit(g.eta, "gain_pct", "network", g.gain_pct);
  }
  if (in.n_victim >= 1 && in.n_victim < in.n_total) {
    emit(0, "eta_threshold", "network", eta_threshold(in));
  }
  write_output(a.out, out.str());
  return kExitOk;
}

int cmd_compare(const CommonArgs& a, const std::string& scheme) {
  const Scenario base = load_scenario(a.scenario);
  const std::vector<std::uint64_t>& seeds =
      a.seeds.empty() ? base.seeds : a.seeds;
  const std::vector<CompareRow> rows =
      compare_analytic_sim(base, a.etas, seeds, parse_schemes(scheme));
  write_output(a.out, format_compare(rows));
  int flagged = 0;
  for (const CompareRow& r : rows) flagged += r.flagged ? 1 : 0;
  if (flagged > 0) {
    std::cerr << "warning: " << flagged
              << " point(s) exceed the 10% cross-validation bar\n";
  }
  return kExitOk;
}

int cmd_presets() {
  for (const Preset& p : preset_catalog()) {
    std::cout << p.name << "\t" << p.description << "\n    " << p.command
              << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "coexsim: Wi-Fi / duty-cycled LTE-U coexistence simulator and "
      "closed-form model"};
  app.require_subcommand(1);

  CommonArgs run_args, ana_args, cmp_args;
  std::string scheme = "both", traffic = "ul_and_dl", cfp = "adaptive";
  std::string cmp_scheme = "both";
  std::string preset;
  int workers = 0, warmup = 5;

  CLI::App* run = app.add_subcommand("run", "Sweep the simulator, emit CSV");
  add_common(run, run_args);
  run->add_option("--scheme", scheme, "standard|proposed|both");
  run->add_option("--traffic", traffic, "dl_only|ul_and_dl|both");
  run->add_option("--cfp", cfp,
                  "CFP sizing for the polled scheme: "
                  "adaptive|analytic|<fraction>");
  run->add_option("--workers", workers, "Parallel run fan-out (0 = auto)");
  run->add_option("--warmup", warmup, "Warmup periods excluded from metrics");
  run->add_option("--preset", preset,
                  "Figure preset overriding scheme/traffic/cfp");

  CLI::App* ana =
      app.add_subcommand("analytic", "Closed-form throughput tables");
  add_common(ana, ana_args);

  CLI::App* cmp = app.add_subcommand(
      "compare", "Cross-validate simulation against the closed form");
  add_common(cmp, cmp_args);
  cmp->add_option("--scheme", cmp_scheme, "standard|proposed|both");

  app.add_subcommand("presets", "List figure presets and their commands");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (run->parsed()) {
      if (!preset.empty() && !is_preset(preset)) {
        std::cerr << "error: unknown preset '" << preset << "'\n";
        return kExitValidation;
      }
      return cmd_run(run_args, scheme, traffic, cfp, workers, warmup, preset);
    }
    if (ana->parsed()) return cmd_analytic(ana_args);
    if (cmp->parsed()) return cmd_compare(cmp_args, cmp_scheme);
    return cmd_presets();
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
