#include "faris/port_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace faris {

int CemConfig::elite_count(int n) const {
  // Guard against ρ·N landing a hair above an integer (0.3·10 = 3.0000000000000004).
  return std::max(1, static_cast<int>(std::ceil(rho * n - 1e-9)));
}

void CemConfig::validate(int num_elements) const {
  if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("cem config: rho must lie in (0, 1)");
  if (!(omega > 0.0 && omega <= 1.0)) throw ValidationError("cem config: omega must lie in (0, 1]");
  if (!(eps_c > 0.0) || max_cem_iters < 1 || !(nu_bisect_tol > 0.0) || n_mc < 0) {
    throw ValidationError("cem config: tolerances and iteration counts must be positive");
  }
  const int n = resolved_n_mc(num_elements);
  if (n < static_cast<int>(std::ceil(1.0 / rho - 1e-9))) {
    throw ValidationError("cem config: n_mc=" + std::to_string(n) +
                          " leaves the elite set empty for rho=" + std::to_string(rho));
  }
}

Activation sample_activation(const RVec& p, int m_o, Rng& rng) {
  const int m = static_cast<int>(p.size());
  Activation zeta(static_cast<std::size_t>(m), 0);
  std::vector<int> active;
  std::vector<int> inactive;
  for (int i = 0; i < m; ++i) {
    if (rng.uniform() < p(i)) {
      zeta[static_cast<std::size_t>(i)] = 1;
      active.push_back(i);
    } else {
      inactive.push_back(i);
    }
  }
  // Shuffle before the stable sort so equal p_i are repaired in random order;
  // index-order ties would bias low indices whenever p is flat.
  auto shuffle = [&](std::vector<int>& xs) {
    for (std::size_t k = xs.size(); k > 1; --k) {
      const auto j = std::min(k - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(k)));
      std::swap(xs[k - 1], xs[j]);
    }
  };
  const int count = static_cast<int>(active.size());
  if (count > m_o) {
    shuffle(active);
    std::stable_sort(active.begin(), active.end(), [&](int a, int b) { return p(a) < p(b); });
    for (int k = 0; k < count - m_o; ++k) zeta[static_cast<std::size_t>(active[static_cast<std::size_t>(k)])] = 0;
  } else if (count < m_o) {
    shuffle(inactive);
    std::stable_sort(inactive.begin(), inactive.end(), [&](int a, int b) { return p(a) > p(b); });
    for (int k = 0; k < m_o - count; ++k) zeta[static_cast<std::size_t>(inactive[static_cast<std::size_t>(k)])] = 1;
  }
  return zeta;
}

Activation sample_activation(const RVec& p, int m_o, std::uint64_t seed) {
  Rng rng(seed);
  return sample_activation(p, m_o, rng);
}

double evaluate_sample(const Activation& zeta, const ReflectVector& v, const Problem& problem) {
  if (static_cast<int>(zeta.size()) != problem.num_elements()) {
    throw ValidationError("evaluate_sample: activation length != M");
  }
  const PortSelection sel = selection_from_activation(zeta);
  if (sel.size() != v.size()) {
    throw ValidationError("evaluate_sample: " + std::to_string(sel.size()) +
                          " active ports but |v|=" + std::to_string(v.size()));
  }
  return selection_rate(problem, sel, v);
}

EliteStats elite_select(const std::vector<double>& rates, double rho) {
  const int n = static_cast<int>(rates.size());
  CemConfig probe;
  probe.rho = rho;
  const int n_e = probe.elite_count(n);
  if (n < 1 || n_e > n) throw ValidationError("elite_select: not enough samples for rho");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return rates[static_cast<std::size_t>(a)] > rates[static_cast<std::size_t>(b)];
  });
  EliteStats out;
  out.indices.assign(order.begin(), order.begin() + n_e);
  out.threshold_rate = rates[static_cast<std::size_t>(out.indices.back())];
  return out;
}

RVec elite_mean(const std::vector<Activation>& samples, const std::vector<int>& elite_indices) {
  if (elite_indices.empty()) throw ValidationError("elite_mean: empty elite set");
  const std::size_t m = samples[static_cast<std::size_t>(elite_indices.front())].size();
  RVec mu = RVec::Zero(static_cast<Eigen::Index>(m));
  for (int idx : elite_indices) {
    const Activation& z = samples[static_cast<std::size_t>(idx)];
    for (std::size_t i = 0; i < m; ++i) mu(static_cast<Eigen::Index>(i)) += z[i];
  }
  return mu / static_cast<double>(elite_indices.size());
}

RVec clamp_mu(const RVec& mu) {
  return mu.cwiseMax(kProbabilityFloor).cwiseMin(1.0 - kProbabilityFloor);
}

double p_of_nu(double mu, double nu) {
  if (nu == 0.0) return mu;
  const double b = nu + 1.0;
  const double disc = b * b - 4.0 * nu * mu;
  if (disc < 0.0) throw NumericalError("p_of_nu: negative discriminant (mu outside [0,1]?)");
  // Pick the branch without cancellation: rationalized for ν+1 ≥ 0 (covers ν
  // near 0), the textbook root otherwise.
  if (b >= 0.0) return 2.0 * mu / (b + std::sqrt(disc));
  return (b - std::sqrt(disc)) / (2.0 * nu);
}

RVec p_of_nu(const RVec& mu, double nu) {
  RVec p(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) p(i) = p_of_nu(mu(i), nu);
  return p;
}

double solve_nu(const RVec& mu, int m_o, double tol) {
  const int m = static_cast<int>(mu.size());
  if (m_o <= 0 || m_o >= m) {
    throw ValidationError("solve_nu: need 0 < M_o < M (M_o=" + std::to_string(m_o) +
                          ", M=" + std::to_string(m) + ")");
  }
  const double target = m_o;
  auto g = [&](double nu) { return p_of_nu(mu, nu).sum(); };

  double lo = -1.0;
  double hi = 1.0;
  int doublings = 0;
  while (g(lo) < target) {
    lo *= 2.0;
    if (++doublings > 200) throw NumericalError("solve_nu: bracket expansion failed (lower side)");
  }
  while (g(hi) > target) {
    hi *= 2.0;
    if (++doublings > 200) throw NumericalError("solve_nu: bracket expansion failed (upper side)");
  }
  const double g0 = g(0.0);
  if (std::abs(g0 - target) <= tol) return 0.0;
  if (g0 > target) lo = 0.0; else hi = 0.0;

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 2000; ++it) {
    mid = 0.5 * (lo + hi);
    const double val = g(mid);
    if (std::abs(val - target) <= tol) return mid;
    if (val > target) lo = mid; else hi = mid;
    if (hi - lo <= 1e-16 * std::max(1.0, std::abs(mid))) break;
  }
  return mid;
}

double log_likelihood(const RVec& p, const RVec& mu) {
  double phi = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (mu(i) > 0.0) phi += mu(i) * std::log(p(i));
    if (mu(i) < 1.0) phi += (1.0 - mu(i)) * std::log1p(-p(i));
  }
  return phi;
}

double entropy_bits(const RVec& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double q = p(i);
    if (q > 0.0 && q < 1.0) h -= q * std::log2(q) + (1.0 - q) * std::log2(1.0 - q);
  }
  return h;
}

CeStep ce_step(const RVec& p_old, const RVec& mu, double omega, int m_o, double tol) {
  CeStep step;
  step.mu_clamped = clamp_mu(mu);
  step.nu = solve_nu(step.mu_clamped, m_o, tol);
  step.p_ce = p_of_nu(step.mu_clamped, step.nu);
  step.p_new = (1.0 - omega) * p_old + omega * step.p_ce;
  return step;
}

RVec ce_update(const RVec& p_old, const RVec& mu, double omega, int m_o, double tol) {
  return ce_step(p_old, mu, omega, m_o, tol).p_new;
}

PortSelection top_selection(const RVec& p, int m_o) {
  std::vector<int> order(static_cast<std::size_t>(p.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p(a) > p(b); });
  order.resize(static_cast<std::size_t>(m_o));
  return build_selection(std::move(order), static_cast<int>(p.size()));
}

CemResult run_cem(const ReflectVector& v, int m_o, const CemConfig& cfg, const Problem& problem,
                  std::uint64_t seed) {
  const int m = problem.num_elements();
  if (m_o < 1 || m_o > m) throw ValidationError("run_cem: need 1 <= M_o <= M");
  if (v.size() != m_o) throw ValidationError("run_cem: |v| != M_o");
  cfg.validate(m);

  CemResult out;
  if (m_o == m) {
    std::vector<int> all(static_cast<std::size_t>(m));
    std::iota(all.begin(), all.end(), 0);
    out.selection = build_selection(all, m);
    out.rate = selection_rate(problem, out.selection, v);
    out.top_selection = out.best_sampled = out.selection;
    out.top_rate = out.best_sampled_rate = out.rate;
    out.p = RVec::Ones(m);
    out.converged = true;
    return out;
  }

  const int n_mc = cfg.resolved_n_mc(m);
  Rng rng(derive_seed(seed, Stream::kCem));
  RVec p = RVec::Constant(m, static_cast<double>(m_o) / m);
  out.best_sampled_rate = -std::numeric_limits<double>::infinity();
  std::map<Activation, double> cache;

  std::vector<Activation> samples(static_cast<std::size_t>(n_mc));
  std::vector<double> rates(static_cast<std::size_t>(n_mc));
  for (int t = 0; t < cfg.max_cem_iters; ++t) {
    double iter_best = -std::numeric_limits<double>::infinity();
    for (int n = 0; n < n_mc; ++n) {
      const auto k = static_cast<std::size_t>(n);
      samples[k] = sample_activation(p, m_o, rng);
      auto it = cache.find(samples[k]);
      if (it == cache.end()) it = cache.emplace(samples[k], evaluate_sample(samples[k], v, problem)).first;
      rates[k] = it->second;
      iter_best = std::max(iter_best, rates[k]);
      if (rates[k] > out.best_sampled_rate) {
        out.best_sampled_rate = rates[k];
        out.best_sampled = selection_from_activation(samples[k]);
      }
    }

    EliteStats elite = elite_select(rates, cfg.rho);
    elite.mu = elite_mean(samples, elite.indices);
    const CeStep step = ce_step(p, elite.mu, cfg.omega, m_o, cfg.nu_bisect_tol);

    CemIteration rec;
    rec.iteration = t;
    rec.phi_before = log_likelihood(p, step.mu_clamped);
    rec.phi_after = log_likelihood(step.p_new, step.mu_clamped);
    rec.best_rate = iter_best;
    rec.nu = step.nu;
    rec.p_sum = step.p_new.sum();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double q = step.p_ce(i);
      rec.kkt_residual = std::max(
          rec.kkt_residual, std::abs(step.nu * q * q - (step.nu + 1.0) * q + step.mu_clamped(i)));
    }
    rec.delta_p = (step.p_new - p).norm();
    p = step.p_new;
    rec.entropy = entropy_bits(p);
    out.trace.push_back(rec);
    out.iterations = t + 1;
    if (rec.delta_p < cfg.eps_c) {
      out.converged = true;
      break;
    }
  }

  out.p = p;
  out.top_selection = top_selection(p, m_o);
  out.top_rate = selection_rate(problem, out.top_selection, v);
  if (out.top_rate >= out.best_sampled_rate) {
    out.selection = out.top_selection;
    out.rate = out.top_rate;
  } else {
    out.selection = out.best_sampled;
    out.rate = out.best_sampled_rate;
  }
  return out;
}

}  // namespace faris
