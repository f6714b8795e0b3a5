#pragma once

#include <cstdint>
#include <vector>

#include "faris/reformulation.hpp"

namespace faris {

/// Exhaustive search over port subsets, b-bit phases and a uniform gain grid.
struct BfsConfig {
  int phase_bits = 2;
  int gain_levels = 8;
  double max_search_size = 1e7;

  void validate() const;
};

struct BfsResult {
  PortSelection selection;
  ReflectVector v;
  double rate = 0.0;
  double configurations = 0.0;
  std::uint64_t feasible = 0;
};

/// C(M, M_o)·(2^b·L)^{M_o}, as a double so huge spaces do not overflow.
double bfs_search_size(int num_elements, int m_o, const BfsConfig& cfg);

/// Uniform amplitude grid {k·g_max/(L−1)}, k = 0..L−1.
std::vector<double> gain_grid(double g_max, int levels);

/// Power-infeasible grid points are skipped, never rescaled. Ties keep the
/// lexicographically first (subset, per-port level) configuration.
BfsResult bfs(const Problem& problem, int m_o, const BfsConfig& cfg);

/// Same search with the port set fixed.
BfsResult bfs_fixed_selection(const Problem& problem, const PortSelection& selection,
                              const BfsConfig& cfg);

}  // namespace faris
