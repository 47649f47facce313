#pragma once

// Positivity conditions for the cone P of nonnegative curves, with boundary
// pieces dP_xi = {h in P : h(xi) = 0}:
//   sigma_boundary    sigma^j(h)(xi) = 0                 for h in dP_xi
//   jump_in_cone      h + gamma(h, x) in P               for h in P
//   gamma_boundary    gamma(h, x)(xi) = 0                for h in dP_xi
//   drift_inward      alpha(h)(xi) - int gamma(h,x)(xi) F(dx) >= 0 on dP_xi
//   finite_compensator  int |gamma| F < inf (automatic for finite activity)
//   stratonovich      sum_j D sigma^j(h) sigma^j(h) (xi) = 0 on dP_xi
// Sampled checks can only refute; the local closed form is checked on a
// scalar (xi, y) grid.

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hjmm/curve_space.hpp"
#include "hjmm/model_spec.hpp"
#include "hjmm/simulator.hpp"

namespace hjmm {

enum class Verdict { Holds, Fails, Inconclusive, Implied, NotApplicable };
enum class Evidence { Sampled, ScalarGrid, Structural, Implied, None };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
    case Verdict::Implied: return "implied";
    case Verdict::NotApplicable: return "not_applicable";
  }
  return "?";
}

inline const char* to_string(Evidence e) {
  switch (e) {
    case Evidence::Sampled: return "sampled";
    case Evidence::ScalarGrid: return "proven_on_scalar_grid";
    case Evidence::Structural: return "structural";
    case Evidence::Implied: return "implied";
    case Evidence::None: return "none";
  }
  return "?";
}

/// Concrete violation: curve samples (empty for scalar-grid witnesses), the
/// node and maturity, factor or mark component, mark size, scalar level y,
/// and the offending value.
struct Witness {
  std::vector<double> curve;
  std::size_t node = 0;
  double xi = 0.0;
  std::size_t component = 0;
  double mark = 0.0;
  double y = 0.0;
  double value = 0.0;
  /// Finite-difference step, for Stratonovich witnesses.
  double step = 0.0;
};

struct ConditionResult {
  std::string id;
  Verdict verdict = Verdict::Holds;
  Evidence evidence = Evidence::Sampled;
  double tol = 0.0;
  std::optional<Witness> witness;
  std::string note;

  bool ok() const { return verdict != Verdict::Fails && verdict != Verdict::Inconclusive; }
};

struct PositivityReport {
  std::vector<ConditionResult> conditions;

  bool all_hold() const {
    for (const auto& c : conditions) {
      if (!c.ok()) return false;
    }
    return true;
  }

  const ConditionResult& at(const std::string& id) const {
    for (const auto& c : conditions) {
      if (c.id == id) return c;
    }
    throw DomainError("no condition " + id);
  }
};

struct BoundaryCurveSample {
  ForwardCurve curve;
  std::size_t zero_node = 0;
};

// ---------------------------------------------------------------------------
// Test-point generation.

namespace detail {

/// Smooth positive curve: c0 + sum of random decaying exponentials and bumps.
template <class Rng>
std::vector<double> random_positive_profile(const GridSpec& g, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double c0 = 0.002 + 0.05 * u(rng);
  const double a1 = 0.1 * u(rng), b1 = 0.05 + 2.0 * u(rng);
  const double a2 = 0.1 * u(rng), mu = g.xi_max() * u(rng), w = 0.5 + 0.2 * g.xi_max() * u(rng);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = g.node(i);
    v[i] = c0 + a1 * std::exp(-b1 * x) + a2 * std::exp(-0.5 * (x - mu) * (x - mu) / (w * w));
  }
  return v;
}

inline std::vector<double> pin_to_zero(std::vector<double> v, const GridSpec& g, std::size_t node, double width) {
  const double xs = g.node(node);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = std::abs(g.node(i) - xs);
    v[i] *= d / (d + width);
  }
  v[node] = 0.0;
  return v;
}

}  // namespace detail

/// Nonnegative curves pinned to zero at one node. The first three are the
/// corner cases: all-zero, zero only at node 1, zero at xi_max.
inline std::vector<BoundaryCurveSample> sample_boundary_curves(const GridSpec& g, std::size_t count,
                                                               std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed));
  std::vector<BoundaryCurveSample> out;
  out.reserve(count);
  const std::size_t n = g.size();
  const double dx = g.spacing();
  auto push = [&](std::vector<double> v, std::size_t node) {
    if (out.size() < count) out.push_back({ForwardCurve(g, std::move(v)), node});
  };
  push(std::vector<double>(n, 0.0), 0);
  push(detail::pin_to_zero(detail::random_positive_profile(g, rng), g, std::min<std::size_t>(1, n - 1), dx), 1);
  push(detail::pin_to_zero(detail::random_positive_profile(g, rng), g, n - 1, dx), n - 1);
  std::uniform_int_distribution<std::size_t> node_dist(0, n - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (out.size() < count) {
    const std::size_t node = node_dist(rng);
    const double width = dx * (1.0 + 50.0 * u(rng));
    push(detail::pin_to_zero(detail::random_positive_profile(g, rng), g, node, width), node);
  }
  return out;
}

/// Curves in P: boundary samples plus strictly positive profiles.
inline std::vector<ForwardCurve> sample_cone_curves(const GridSpec& g, std::size_t count, std::uint64_t seed) {
  std::vector<ForwardCurve> out;
  for (auto& s : sample_boundary_curves(g, count / 2 + 1, seed)) out.push_back(std::move(s.curve));
  std::mt19937_64 rng(splitmix64(seed + 1));
  while (out.size() < count) out.emplace_back(g, detail::random_positive_profile(g, rng));
  if (out.size() > count) out.erase(out.begin() + static_cast<std::ptrdiff_t>(count), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Sampled checks.

namespace detail {

inline void record(ConditionResult& res, double violation, const Witness& w) {
  if (!res.witness || violation > std::abs(res.witness->value) + 0.0) {
    res.verdict = Verdict::Fails;
    res.witness = w;
  }
}

}  // namespace detail

inline ConditionResult check_sigma_boundary(const ModelSpec& m, const std::vector<BoundaryCurveSample>& samples,
                                            double tol) {
  ConditionResult res{"sigma_boundary", Verdict::Holds, Evidence::Sampled, tol, std::nullopt, {}};
  if (m.factors() == 0) res.note = "no volatility factors";
  for (const auto& s : samples) {
    for (std::size_t j = 0; j < m.factors(); ++j) {
      const double v = volatility_values(m, s.curve, j)[s.zero_node];
      if (std::abs(v) > tol) {
        detail::record(res, std::abs(v), {s.curve.vector(), s.zero_node, s.curve.grid().node(s.zero_node), j, 0.0, 0.0, v});
      }
    }
  }
  return res;
}

inline ConditionResult check_jump_stays_in_cone(const ModelSpec& m, const std::vector<ForwardCurve>& cone_samples,
                                                double tol) {
  ConditionResult res{"jump_in_cone", Verdict::Holds, Evidence::Sampled, tol, std::nullopt, {}};
  if (!m.has_jumps()) {
    res.evidence = Evidence::Structural;
    res.note = "no jumps";
    return res;
  }
  for (const auto& h : cone_samples) {
    for (std::size_t k = 0; k < m.jump_components(); ++k) {
      for (double x : m.measure(k).support_points()) {
        const auto g = jump_values(m, h, Mark{k, x});
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double v = h[i] + g[i];
          if (v < -tol) detail::record(res, -v, {h.vector(), i, h.grid().node(i), k, x, h[i], v});
        }
      }
    }
  }
  return res;
}

inline ConditionResult check_gamma_boundary(const ModelSpec& m, const std::vector<BoundaryCurveSample>& samples,
                                            double tol) {
  ConditionResult res{"gamma_boundary", Verdict::Holds, Evidence::Sampled, tol, std::nullopt, {}};
  if (!m.has_jumps()) {
    res.evidence = Evidence::Structural;
    res.note = "no jumps";
    return res;
  }
  for (const auto& s : samples) {
    for (std::size_t k = 0; k < m.jump_components(); ++k) {
      for (double x : m.measure(k).support_points()) {
        const double v = jump_values(m, s.curve, Mark{k, x})[s.zero_node];
        if (std::abs(v) > tol) {
          detail::record(res, std::abs(v), {s.curve.vector(), s.zero_node, s.curve.grid().node(s.zero_node), k, x, 0.0, v});
        }
      }
    }
  }
  return res;
}

/// alpha(h)(xi*) - int gamma(h,x)(xi*) F(dx) >= -tol. In HJM mode the drift is
/// pinned by sigma and gamma, and the condition follows from the boundary
/// conditions on sigma and gamma, so the verdict is "implied".
inline ConditionResult check_drift_inward(const ModelSpec& m, const std::vector<BoundaryCurveSample>& samples,
                                          double tol) {
  ConditionResult res{"drift_inward", Verdict::Holds, Evidence::Sampled, tol, std::nullopt, {}};
  if (m.drift_mode == DriftMode::Hjm) {
    res.verdict = Verdict::Implied;
    res.evidence = Evidence::Implied;
    res.note = "HJM drift: reduces to sigma_boundary and gamma_boundary";
    return res;
  }
  for (const auto& s : samples) {
    const double a = model_drift(m, s.curve)[s.zero_node];
    const double c = compensator(m, s.curve)[s.zero_node];
    const double v = a - c;
    if (v < -tol) detail::record(res, -v, {s.curve.vector(), s.zero_node, s.curve.grid().node(s.zero_node), 0, 0.0, 0.0, v});
  }
  return res;
}

/// int |gamma| F < inf: automatic for the finite-activity measures supported.
inline ConditionResult check_finite_compensator(const ModelSpec& m) {
  ConditionResult res{"finite_compensator", Verdict::Holds, Evidence::Structural, 0.0, std::nullopt, {}};
  res.note = m.has_jumps() ? "finite-activity mark measures" : "no jumps";
  return res;
}

// ---------------------------------------------------------------------------
// Closed form for pointwise fields.

struct ScalarGridOptions {
  double y_max = 1.0;
  std::size_t n_y = 201;
  double tol = 1e-12;
};

namespace detail {

inline std::vector<double> scalar_levels(const ScalarGridOptions& o) {
  std::vector<double> ys;
  for (std::size_t i = 0; i < o.n_y; ++i) ys.push_back(o.y_max * static_cast<double>(i) / static_cast<double>(o.n_y - 1));
  for (double y = o.y_max * 1e-12; y < o.y_max * 1e-2; y *= 10.0) ys.push_back(y);
  std::sort(ys.begin(), ys.end());
  return ys;
}

}  // namespace detail

/// Scalar conditions: sigma~(xi,0) = 0; y + gamma~(xi,y,x) >= 0 and
/// gamma~(xi,0,x) = 0 (or delta~(xi,0) = 0 and y + delta~(xi,y) x >= 0);
/// for custom drifts alpha~(xi,0) >= 0. Benchmark fields are not pointwise.
inline ConditionResult check_local_closed_form(const ModelSpec& m, const ScalarGridOptions& opt = {}) {
  ConditionResult res{"local_closed_form", Verdict::Holds, Evidence::ScalarGrid, opt.tol, std::nullopt, {}};
  const GridSpec& g = m.grid;
  for (const auto& f : m.vol) {
    if (std::holds_alternative<BenchmarkField>(f)) {
      res.verdict = Verdict::NotApplicable;
      res.evidence = Evidence::None;
      res.note = "benchmark volatility is not a pointwise field";
      return res;
    }
  }
  if (const auto* l = std::get_if<LevyJumps>(&m.jumps)) {
    for (const auto& c : l->factors) {
      if (std::holds_alternative<BenchmarkField>(c.delta)) {
        res.verdict = Verdict::NotApplicable;
        res.evidence = Evidence::None;
        res.note = "benchmark jump loading is not a pointwise field";
        return res;
      }
    }
  }
  auto fail = [&](double magnitude, std::size_t i, std::size_t comp, double x, double y, double v, const char* what) {
    if (!res.witness || magnitude > std::abs(res.witness->value)) {
      res.verdict = Verdict::Fails;
      res.witness = Witness{{}, i, g.node(i), comp, x, y, v};
      res.note = what;
    }
  };
  const auto ys = detail::scalar_levels(opt);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < m.factors(); ++j) {
      const double v = *local_value(m.vol[j], g, i, 0.0);
      if (std::abs(v) > opt.tol) fail(std::abs(v), i, j, 0.0, 0.0, v, "sigma(xi, 0) != 0");
    }
    if (const auto* l = std::get_if<LevyJumps>(&m.jumps)) {
      for (std::size_t k = 0; k < l->factors.size(); ++k) {
        const auto& c = l->factors[k];
        const double d0 = *local_value(c.delta, g, i, 0.0);
        if (std::abs(d0) > opt.tol) fail(std::abs(d0), i, k, 0.0, 0.0, d0, "delta(xi, 0) != 0");
        for (double x : c.measure.support_points()) {
          for (double y : ys) {
            const double v = y + *local_value(c.delta, g, i, y) * x;
            if (v < -opt.tol) fail(-v, i, k, x, y, v, "y + delta(xi, y) x < 0");
          }
        }
      }
    } else if (const auto* mk = std::get_if<MarkedJumps>(&m.jumps)) {
      for (std::size_t k = 0; k < mk->components.size(); ++k) {
        const auto& c = mk->components[k];
        for (double x : c.measure.support_points()) {
          const double g0 = c.gamma(g.node(i), 0.0, x);
          if (std::abs(g0) > opt.tol) fail(std::abs(g0), i, k, x, 0.0, g0, "gamma(xi, 0, x) != 0");
          for (double y : ys) {
            const double v = y + c.gamma(g.node(i), y, x);
            if (v < -opt.tol) fail(-v, i, k, x, y, v, "y + gamma(xi, y, x) < 0");
          }
        }
      }
    }
    if (m.drift_mode == DriftMode::Custom) {
      const double a0 = m.custom_drift(g.node(i), 0.0);
      if (a0 < -opt.tol) fail(-a0, i, 0, 0.0, 0.0, a0, "alpha(xi, 0) < 0");
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Stratonovich correction.

inline double default_fd_step(const ForwardCurve& h, double beta) { return 1e-4 * (1.0 + hbeta_norm(h, beta)); }

/// sum_j [sigma^j(h + eps s_j) - sigma^j(h - eps s_j)] / (2 eps), s_j = sigma^j(h).
inline std::vector<double> stratonovich_correction(const ModelSpec& m, const ForwardCurve& h, double eps) {
  std::vector<double> out(h.size(), 0.0);
  for (std::size_t j = 0; j < m.factors(); ++j) {
    const auto s = volatility_values(m, h, j);
    std::vector<double> up(h.vector()), dn(h.vector());
    for (std::size_t i = 0; i < s.size(); ++i) {
      up[i] += eps * s[i];
      dn[i] -= eps * s[i];
    }
    const auto su = volatility_values(m, ForwardCurve(h.grid(), std::move(up)), j);
    const auto sd = volatility_values(m, ForwardCurve(h.grid(), std::move(dn)), j);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += (su[i] - sd[i]) / (2.0 * eps);
  }
  return out;
}

/// fd_step <= 0 selects default_fd_step per sample.
inline ConditionResult check_stratonovich_correction(const ModelSpec& m, const std::vector<BoundaryCurveSample>& samples,
                                                     double fd_step, double tol) {
  ConditionResult res{"stratonovich", Verdict::Holds, Evidence::Sampled, tol, std::nullopt, {}};
  for (const auto& s : samples) {
    const double eps = fd_step > 0.0 ? fd_step : default_fd_step(s.curve, m.space.beta);
    const double v = stratonovich_correction(m, s.curve, eps)[s.zero_node];
    if (std::abs(v) > tol) {
      detail::record(res, std::abs(v),
                     {s.curve.vector(), s.zero_node, s.curve.grid().node(s.zero_node), 0, 0.0, 0.0, v, eps});
    }
  }
  return res;
}

// ---------------------------------------------------------------------------

struct PositivityOptions {
  std::size_t n_samples = 64;
  std::uint64_t seed = 0;
  double tol = 1e-12;
  double fd_step = 0.0;
  double strat_tol = 1e-6;
  ScalarGridOptions scalar{};
};

inline PositivityReport check_positivity(const ModelSpec& m, const PositivityOptions& o = {}) {
  const auto boundary = sample_boundary_curves(m.grid, o.n_samples, o.seed);
  const auto cone = sample_cone_curves(m.grid, o.n_samples, o.seed + 1);
  PositivityReport rep;
  rep.conditions.push_back(check_sigma_boundary(m, boundary, o.tol));
  rep.conditions.push_back(check_jump_stays_in_cone(m, cone, o.tol));
  rep.conditions.push_back(check_gamma_boundary(m, boundary, o.tol));
  rep.conditions.push_back(check_drift_inward(m, boundary, o.tol));
  rep.conditions.push_back(check_finite_compensator(m));
  rep.conditions.push_back(check_local_closed_form(m, o.scalar));
  rep.conditions.push_back(check_stratonovich_correction(m, boundary, o.fd_step, o.strat_tol));
  return rep;
}

/// Recomputes the offending quantity of a sampled or scalar witness.
inline double reevaluate_witness(const ModelSpec& m, const ConditionResult& c) {
  if (!c.witness) throw DomainError("reevaluate_witness: no witness");
  const Witness& w = *c.witness;
  const GridSpec& g = m.grid;
  if (c.id == "local_closed_form") {
    const std::string& what = c.note;
    if (what == "sigma(xi, 0) != 0") return *local_value(m.vol[w.component], g, w.node, 0.0);
    if (what == "alpha(xi, 0) < 0") return m.custom_drift(g.node(w.node), 0.0);
    if (const auto* l = std::get_if<LevyJumps>(&m.jumps)) {
      const auto& d = l->factors[w.component].delta;
      if (what == "delta(xi, 0) != 0") return *local_value(d, g, w.node, 0.0);
      return w.y + *local_value(d, g, w.node, w.y) * w.mark;
    }
    const auto& gm = std::get<MarkedJumps>(m.jumps).components[w.component].gamma;
    if (what == "gamma(xi, 0, x) != 0") return gm(g.node(w.node), 0.0, w.mark);
    return w.y + gm(g.node(w.node), w.y, w.mark);
  }
  const ForwardCurve h(g, w.curve);
  if (c.id == "sigma_boundary") return volatility_values(m, h, w.component)[w.node];
  if (c.id == "jump_in_cone") return h[w.node] + jump_values(m, h, Mark{w.component, w.mark})[w.node];
  if (c.id == "gamma_boundary") return jump_values(m, h, Mark{w.component, w.mark})[w.node];
  if (c.id == "drift_inward") return model_drift(m, h)[w.node] - compensator(m, h)[w.node];
  if (c.id == "stratonovich") return stratonovich_correction(m, h, w.step)[w.node];
  throw DomainError("reevaluate_witness: unknown condition " + c.id);
}

// ---------------------------------------------------------------------------
// Empirical monitor.

/// 10 * machine epsilon * curve scale.
inline double numerical_floor(double scale) { return 10.0 * std::numeric_limits<double>::epsilon() * scale; }

struct NegativityReport {
  double floor = 0.0;
  std::size_t negative = 0;
  std::size_t total = 0;
  std::vector<double> path_min;

  double fraction() const { return total == 0 ? 0.0 : static_cast<double>(negative) / static_cast<double>(total); }

  void add_path(const PathResult& p) {
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& r : p.snapshots) {
      for (double v : r.values()) {
        ++total;
        if (v < -floor) ++negative;
        mn = std::min(mn, v);
      }
    }
    path_min.push_back(mn);
  }
};

/// Fraction of (path, time, node) snapshot triples below -floor.
inline NegativityReport monitor_ensemble(const EnsembleResult& result, double floor) {
  NegativityReport rep;
  rep.floor = floor;
  for (const auto& p : result.paths) rep.add_path(p);
  return rep;
}

}  // namespace hjmm
