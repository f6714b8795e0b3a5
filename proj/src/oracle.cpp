#include "faris/oracle.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace faris {

void BfsConfig::validate() const {
  if (phase_bits < 1 || phase_bits > 16) throw ValidationError("bfs config: phase_bits must be in [1, 16]");
  if (gain_levels < 2) throw ValidationError("bfs config: gain_levels must be >= 2");
  if (!(max_search_size > 0.0)) throw ValidationError("bfs config: max_search_size must be > 0");
}

double bfs_search_size(int num_elements, int m_o, const BfsConfig& cfg) {
  double subsets = 1.0;
  for (int k = 1; k <= m_o; ++k) subsets = subsets * (num_elements - m_o + k) / k;
  const double per_port = std::ldexp(1.0, cfg.phase_bits) * cfg.gain_levels;
  return std::round(subsets) * std::pow(per_port, m_o);
}

std::vector<double> gain_grid(double g_max, int levels) {
  std::vector<double> grid(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k) grid[static_cast<std::size_t>(k)] = g_max * k / (levels - 1);
  grid.back() = g_max;
  return grid;
}

namespace {

// Per-port alphabet: level q = phase_index·L + gain_index.
std::vector<Complex> alphabet(const Problem& problem, const BfsConfig& cfg) {
  const int phases = 1 << cfg.phase_bits;
  const std::vector<double> gains = gain_grid(problem.params.g_max, cfg.gain_levels);
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(phases * cfg.gain_levels));
  for (int ph = 0; ph < phases; ++ph) {
    for (double g : gains) out.push_back(std::polar(g, 2.0 * kPi * ph / phases));
  }
  return out;
}

void search_subset(const Problem& problem, const PortSelection& sel,
                   const std::vector<Complex>& symbols, BfsResult& best) {
  const int n = sel.size();
  const auto q = static_cast<int>(symbols.size());
  std::vector<int> digits(static_cast<std::size_t>(n), 0);
  ReflectVector v(n);
  while (true) {
    for (int i = 0; i < n; ++i) v(i) = symbols[static_cast<std::size_t>(digits[static_cast<std::size_t>(i)])];
    if (!std::isfinite(problem.params.p_max_w) ||
        selection_power(problem, sel, v) <= problem.params.p_max_w) {
      ++best.feasible;
      const double rate = selection_rate(problem, sel, v);
      if (rate > best.rate || best.selection.indices.empty()) {
        best.rate = rate;
        best.selection = sel;
        best.v = v;
      }
    }
    int pos = n - 1;
    while (pos >= 0 && ++digits[static_cast<std::size_t>(pos)] == q) {
      digits[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
}

void check_cap(double count, const BfsConfig& cfg) {
  if (count > cfg.max_search_size) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(0) << "bfs: search space of " << count
       << " configurations exceeds the cap of " << cfg.max_search_size;
    throw ValidationError(os.str());
  }
}

}  // namespace

BfsResult bfs(const Problem& problem, int m_o, const BfsConfig& cfg) {
  cfg.validate();
  const int m = problem.num_elements();
  if (m_o < 1 || m_o > m) throw ValidationError("bfs: need 1 <= M_o <= M");
  BfsResult best;
  best.configurations = bfs_search_size(m, m_o, cfg);
  check_cap(best.configurations, cfg);
  best.rate = -std::numeric_limits<double>::infinity();

  const std::vector<Complex> symbols = alphabet(problem, cfg);
  std::vector<int> comb(static_cast<std::size_t>(m_o));
  for (int i = 0; i < m_o; ++i) comb[static_cast<std::size_t>(i)] = i;
  while (true) {
    search_subset(problem, PortSelection{comb}, symbols, best);
    int pos = m_o - 1;
    while (pos >= 0 && comb[static_cast<std::size_t>(pos)] == m - m_o + pos) --pos;
    if (pos < 0) break;
    ++comb[static_cast<std::size_t>(pos)];
    for (int k = pos + 1; k < m_o; ++k) comb[static_cast<std::size_t>(k)] = comb[static_cast<std::size_t>(k - 1)] + 1;
  }
  return best;
}

BfsResult bfs_fixed_selection(const Problem& problem, const PortSelection& selection,
                              const BfsConfig& cfg) {
  cfg.validate();
  BfsResult best;
  best.configurations = std::pow(std::ldexp(1.0, cfg.phase_bits) * cfg.gain_levels, selection.size());
  check_cap(best.configurations, cfg);
  best.rate = -std::numeric_limits<double>::infinity();
  search_subset(problem, selection, alphabet(problem, cfg), best);
  return best;
}

}  // namespace faris
