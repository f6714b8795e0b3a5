#pragma once

#include <cstdint>
#include <vector>

#include "faris/active_reflect.hpp"
#include "faris/port_select.hpp"

namespace faris {

struct OuterConfig {
  double eps_out = 1e-3;  // bps/Hz
  int max_outer_iters = 40;
  int saa_samples = 64;
  InnerConfig inner;
  CemConfig cem;
  std::uint64_t seed = 1;

  void validate() const;
};

struct OuterIteration {
  int iteration = 0;
  double rate_after_inner = 0.0;
  double rate_after_cem = 0.0;  // CEM proposal, before the acceptance test
  int inner_iterations = 0;
  int cem_iterations = 0;
  bool selection_accepted = false;
};

struct OuterResult {
  ReflectVector v_star;
  PortSelection selection_star;
  double rate_star = 0.0;
  std::vector<double> outer_trace;  // entry t is the rate of (v_trace[t], selection_trace[t])
  std::vector<ReflectVector> v_trace;
  std::vector<PortSelection> selection_trace;
  std::vector<OuterIteration> details;
  std::vector<std::vector<double>> inner_traces;
  int iteration_count = 0;
  bool converged = false;
};

PortSelection random_selection(int num_elements, int m_o, std::uint64_t seed);

/// Draws the SAA channel set from cfg.seed and runs the alternation.
OuterResult run(const SurfaceGeometry& geom, const SystemParams& params, int m_o,
                const OuterConfig& cfg);

/// Alternates inner_ao and run_cem on a frozen problem. A CEM proposal is kept
/// only if it does not lower the rate.
OuterResult run(const Problem& problem, int m_o, const OuterConfig& cfg);

/// Inner loop only, on a fixed port set (no port selection).
OuterResult run_fixed_selection(const Problem& problem, const PortSelection& selection,
                                const OuterConfig& cfg);

}  // namespace faris
