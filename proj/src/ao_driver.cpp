#include "faris/ao_driver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace faris {

void OuterConfig::validate() const {
  if (!(eps_out > 0.0)) throw ValidationError("outer config: eps_out must be > 0");
  if (max_outer_iters < 1) throw ValidationError("outer config: max_outer_iters must be >= 1");
  if (saa_samples < 1) throw ValidationError("outer config: saa_samples must be >= 1");
  inner.validate();
}

PortSelection random_selection(int num_elements, int m_o, std::uint64_t seed) {
  if (m_o < 1 || m_o > num_elements) {
    throw ValidationError("random_selection: need 1 <= M_o <= M (M_o=" + std::to_string(m_o) +
                          ", M=" + std::to_string(num_elements) + ")");
  }
  std::vector<int> ports(static_cast<std::size_t>(num_elements));
  std::iota(ports.begin(), ports.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates with our own uniform draws (std::shuffle is not portable).
  for (int i = 0; i < m_o; ++i) {
    const int j = i + static_cast<int>(rng.uniform() * (num_elements - i));
    std::swap(ports[static_cast<std::size_t>(i)], ports[static_cast<std::size_t>(std::min(j, num_elements - 1))]);
  }
  ports.resize(static_cast<std::size_t>(m_o));
  return build_selection(std::move(ports), num_elements);
}

OuterResult run(const SurfaceGeometry& geom, const SystemParams& params, int m_o,
                const OuterConfig& cfg) {
  cfg.validate();
  const Problem problem =
      Problem::create(geom, params, cfg.saa_samples, derive_seed(cfg.seed, Stream::kChannels));
  return run(problem, m_o, cfg);
}

namespace {

void record(OuterResult& out, double rate, const ReflectVector& v, const PortSelection& sel) {
  out.outer_trace.push_back(rate);
  out.v_trace.push_back(v);
  out.selection_trace.push_back(sel);
}

ReflectVector initial_vector(const PrecomputedQuantities& pre, const OuterConfig& cfg) {
  ReflectVector v = init_v(pre, derive_seed(cfg.seed, Stream::kInitV));
  return cfg.inner.unit_modulus ? make_feasible(v, pre, cfg.inner) : v;
}

}  // namespace

OuterResult run(const Problem& problem, int m_o, const OuterConfig& cfg) {
  cfg.validate();
  const int m = problem.num_elements();
  if (m_o < 1 || m_o > m) {
    throw ValidationError("ao_driver: M_o=" + std::to_string(m_o) + " must lie in [1, M=" +
                          std::to_string(m) + "]");
  }
  cfg.cem.validate(m);

  OuterResult out;
  PortSelection sel = random_selection(m, m_o, derive_seed(cfg.seed, Stream::kInitSelection));
  PrecomputedQuantities pre = precompute(problem, sel);
  ReflectVector v = initial_vector(pre, cfg);
  double rate = saa_rate(v, pre);
  record(out, rate, v, sel);

  for (int t = 1; t <= cfg.max_outer_iters; ++t) {
    OuterIteration it;
    it.iteration = t;
    const auto tt = static_cast<std::uint64_t>(t);

    const InnerResult inner = inner_ao(pre, cfg.inner, derive_seed(cfg.seed, Stream::kInner, tt), v);
    out.inner_traces.push_back(inner.rate_trace);
    it.inner_iterations = inner.iterations;
    const double prev = rate;
    v = inner.v;
    rate = inner.rate_trace.back();
    it.rate_after_inner = rate;

    const CemResult cem = run_cem(v, m_o, cfg.cem, problem, derive_seed(cfg.seed, Stream::kCem, tt));
    it.cem_iterations = cem.iterations;
    it.rate_after_cem = cem.rate;
    if (!(cem.selection == sel)) {
      PrecomputedQuantities cand_pre = precompute(problem, cem.selection);
      const double cand_rate = saa_rate(v, cand_pre);
      if (cand_rate >= rate) {
        sel = cem.selection;
        pre = std::move(cand_pre);
        rate = cand_rate;
        it.selection_accepted = true;
      }
    }

    record(out, rate, v, sel);
    out.details.push_back(it);
    out.iteration_count = t;
    if (std::abs(rate - prev) < cfg.eps_out) {
      out.converged = true;
      break;
    }
  }

  out.v_star = v;
  out.selection_star = sel;
  out.rate_star = rate;
  return out;
}

OuterResult run_fixed_selection(const Problem& problem, const PortSelection& selection,
                                const OuterConfig& cfg) {
  cfg.validate();
  OuterResult out;
  const PrecomputedQuantities pre = precompute(problem, selection);
  const ReflectVector v0 = initial_vector(pre, cfg);
  record(out, saa_rate(v0, pre), v0, selection);
  const InnerResult inner = inner_ao(pre, cfg.inner, derive_seed(cfg.seed, Stream::kInner, 1), v0);
  out.inner_traces.push_back(inner.rate_trace);
  record(out, inner.rate_trace.back(), inner.v, selection);
  OuterIteration it;
  it.iteration = 1;
  it.rate_after_inner = it.rate_after_cem = inner.rate_trace.back();
  it.inner_iterations = inner.iterations;
  out.details.push_back(it);
  out.iteration_count = 1;
  out.converged = inner.converged;
  out.v_star = inner.v;
  out.selection_star = selection;
  out.rate_star = inner.rate_trace.back();
  return out;
}

}  // namespace faris
