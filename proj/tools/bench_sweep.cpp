// Benchmarks the parallel sweep fan-out against the serial reference and
// checks that both produce identical rows.
#include <chrono>
#include <cstdio>
#include <string>

#include "coexsim/scenario_io.hpp"
#include "coexsim/sweep.hpp"

int main(int argc, char** argv) {
  using namespace coexsim;
  using clock = std::chrono::steady_clock;

  const std::string scenario = argc > 1 ? argv[1] : "fig1";
  SweepSpec spec;
  spec.base = load_scenario(scenario);
  spec.etas = {0.0, 0.3, 0.5, 0.7, 1.0};
  spec.seeds = {1, 2, 3, 4};
  spec.base.sim_duration_s = 2.0;
  spec.schemes = {Scheme::kStandard, Scheme::kProposed};
  spec.traffics = {DirectionMode::kUlAndDl};

  const auto t0 = clock::now();
  const auto serial = run_sweep_serial(spec);
  const auto t1 = clock::now();
  const auto parallel = run_sweep(spec);
  const auto t2 = clock::now();

  const double serial_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  const double parallel_ms =
      std::chrono::duration<double, std::milli>(t2 - t1).count();

  const bool identical = emit_csv(serial) == emit_csv(parallel);
  std::printf("runs: %zu rows\n", serial.size());
  std::printf("serial:   %.1f ms\n", serial_ms);
  std::printf("parallel: %.1f ms\n", parallel_ms);
  std::printf("speedup:  %.2fx\n",
              parallel_ms > 0 ? serial_ms / parallel_ms : 0.0);
  std::printf("identical output: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
