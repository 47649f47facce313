#pragma once

// Density-valued bond market: P(t,T) = int_{T-t}^inf rho_t(u) du with
//   d rho = (rho' + rho(0) rho) dt + sum_j sigma^j(rho) dbeta^j
//           + int gamma(rho, x) (mu - F dt)(dx).
// Fields come in centered form (a - abar(rho)) rho, abar = int a rho / int rho,
// which integrates to zero for every rho, or as raw pointwise fields.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "hjmm/arbitrage.hpp"
#include "hjmm/curve_space.hpp"
#include "hjmm/errors.hpp"
#include "hjmm/model_spec.hpp"
#include "hjmm/parallel.hpp"
#include "hjmm/positivity.hpp"
#include "hjmm/simulator.hpp"

namespace hjmm {

/// Validated probability density on the curve grid.
class DensityCurve {
 public:
  static DensityCurve make(ForwardCurve rho, double mass_tol = 1e-3) {
    for (double v : rho.values()) {
      if (v < 0.0) throw InvalidCurveError("density: negative sample");
    }
    const double mass = trapezoid(rho.values(), rho.grid().spacing());
    if (std::abs(mass - 1.0) > mass_tol) {
      throw InvalidCurveError("density: mass " + std::to_string(mass) + " differs from 1");
    }
    return DensityCurve(std::move(rho));
  }

  /// lambda e^{-lambda u}
  static DensityCurve exponential(const GridSpec& g, double lambda, double mass_tol = 1e-3) {
    return make(ForwardCurve::from_function(g, [lambda](double u) { return lambda * std::exp(-lambda * u); }), mass_tol);
  }

  const ForwardCurve& curve() const noexcept { return rho_; }
  double mass() const { return trapezoid(rho_.values(), rho_.grid().spacing()); }

 private:
  explicit DensityCurve(ForwardCurve rho) : rho_(std::move(rho)) {}
  ForwardCurve rho_;
};

struct BHField {
  enum class Form { Centered, Raw };
  Form form = Form::Centered;
  /// Centered: (a(u, rho(u)) - abar) rho(u). Raw: a(u, rho(u)).
  ScalarField a;
};

/// gamma(rho, x) = x * field(rho)
struct BHJumpComponent {
  BHField field;
  LevyMeasure measure;
};

struct BHFieldSpec {
  std::vector<BHField> vol;
  std::vector<BHJumpComponent> jumps;

  double total_intensity() const {
    double s = 0.0;
    for (const auto& j : jumps) s += j.measure.intensity();
    return s;
  }
};

/// int eta rho / int rho by trapezoid.
inline double weighted_average(std::span<const double> eta, std::span<const double> rho, double dx) {
  std::vector<double> prod(rho.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = eta[i] * rho[i];
  const double mass = trapezoid(rho, dx);
  if (mass == 0.0) return 0.0;
  return trapezoid(prod, dx) / mass;
}

inline std::vector<double> evaluate_bh_field(const BHField& f, const ForwardCurve& rho) {
  const GridSpec& g = rho.grid();
  std::vector<double> a(rho.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = f.a(g.node(i), rho[i]);
  if (f.form == BHField::Form::Raw) return a;
  const double abar = weighted_average(a, rho.values(), g.spacing());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = (a[i] - abar) * rho[i];
  return a;
}

/// rho' + rho(0) rho, forward differences with a one-sided difference at the right end.
inline ForwardCurve bh_drift(const ForwardCurve& rho) {
  const std::size_t n = rho.size();
  const double dx = rho.grid().spacing();
  std::vector<double> out(n);
  for (std::size_t i = 0; i + 1 < n; ++i) out[i] = (rho[i + 1] - rho[i]) / dx;
  out[n - 1] = (rho[n - 1] - rho[n - 2]) / dx;
  for (std::size_t i = 0; i < n; ++i) out[i] += rho[0] * rho[i];
  return ForwardCurve(rho.grid(), std::move(out));
}

inline ForwardCurve bh_drift(const DensityCurve& rho) { return bh_drift(rho.curve()); }

/// int gamma(rho, x) F(dx) = sum_k (int x F_k(dx)) field_k(rho)
inline std::vector<double> bh_compensator(const BHFieldSpec& f, const ForwardCurve& rho) {
  std::vector<double> out(rho.size(), 0.0);
  for (const auto& c : f.jumps) {
    const double mean = c.measure.first_moment();
    if (mean == 0.0) continue;
    const auto v = evaluate_bh_field(c.field, rho);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += mean * v[i];
  }
  return out;
}

/// Step short rate D / (dt (1 - D)), D = int_0^dt rho.
inline double bh_step_rate(const ForwardCurve& rho, double dt) {
  const std::size_t k = static_cast<std::size_t>(rho.grid().steps(dt));
  const double dropped = trapezoid(std::span<const double>(rho.values().data(), k + 1), rho.grid().spacing());
  if (!(dropped < 1.0)) throw ExplosionError("bh_step: unit mass leaves the grid within one step");
  return dropped / (dt * (1.0 - dropped));
}

/// rho <- q + dt r q + sum_j sigma^j(q) dW_j - compensator(q) dt + jumps, q = S_dt rho.
/// The rho(0) rho term uses the rate r = D / (dt (1 - D)), D = int_0^dt rho the
/// mass carried out by the shift; r = rho(0) + O(dt), and a unit-mass density
/// keeps unit mass. Fields act on the shifted density, so centered fields add
/// exactly zero mass and vanish wherever q does. Mass is checked, never
/// renormalised: a defect M - 1 is carried forward as (M - 1) / (1 - D).
inline ForwardCurve bh_step(const ForwardCurve& rho, double t, double dt, const BHFieldSpec& f,
                            std::span<const double> dW, std::span<const JumpArrival> jumps, double mass_tol = 1e-3) {
  const GridSpec& g = rho.grid();
  const std::ptrdiff_t k = g.steps(dt);
  if (k < 1) throw DomainError("bh_step: dt must be a positive grid multiple");
  if (dW.size() != f.vol.size()) throw DomainError("bh_step: need one Brownian increment per field");
  const std::size_t n = rho.size();
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = rho[std::min(i + static_cast<std::size_t>(k), n - 1)];
  const ForwardCurve shifted(g, q);
  std::vector<double> next(q);
  const double growth = dt * bh_step_rate(rho, dt);
  for (std::size_t i = 0; i < n; ++i) next[i] += growth * q[i];
  for (std::size_t j = 0; j < dW.size(); ++j) {
    const auto s = evaluate_bh_field(f.vol[j], shifted);
    for (std::size_t i = 0; i < n; ++i) next[i] += s[i] * dW[j];
  }
  if (!f.jumps.empty()) {
    const auto comp = bh_compensator(f, shifted);
    for (std::size_t i = 0; i < n; ++i) next[i] -= comp[i] * dt;
    std::vector<double> pre(q);
    for (const auto& jump : jumps) {
      const auto v = evaluate_bh_field(f.jumps.at(jump.mark.component).field, ForwardCurve(g, pre));
      for (std::size_t i = 0; i < n; ++i) {
        pre[i] += jump.mark.size * v[i];
        next[i] += jump.mark.size * v[i];
      }
    }
  }
  if (detail::blown_up(next)) throw ExplosionError("bh_step: density exploded at t = " + std::to_string(t + dt));
  ForwardCurve out(g, std::move(next));
  const double mass = trapezoid(out.values(), g.spacing());
  if (std::abs(mass - 1.0) > 10.0 * mass_tol) {
    throw ConservationError("bh_step: mass " + std::to_string(mass) + " at t = " + std::to_string(t + dt), t + dt, mass);
  }
  return out;
}

/// int_{T - t}^{xi_max} rho
inline double bh_bond_price(const ForwardCurve& rho, double t_elapsed, double maturity) {
  const double x = maturity - t_elapsed;
  const double xi_max = rho.grid().xi_max();
  if (!(x >= 0.0 && x <= xi_max * (1.0 + 1e-12))) {
    throw DomainError("bh_bond_price: T - t = " + std::to_string(x) + " outside [0, xi_max]");
  }
  const double dx = rho.grid().spacing();
  return trapezoid(rho.values(), dx) - integral_to(rho.values(), dx, std::min(x, xi_max));
}

inline double bh_bond_price(const DensityCurve& rho, double t_elapsed, double maturity) {
  return bh_bond_price(rho.curve(), t_elapsed, maturity);
}

// ---------------------------------------------------------------------------
// Field constraints.

/// Boundary densities: nonnegative samples pinned to zero at one node and
/// normalised to unit mass (the all-zero corner case is dropped).
inline std::vector<BoundaryCurveSample> sample_boundary_densities(const GridSpec& g, std::size_t count,
                                                                  std::uint64_t seed) {
  std::vector<BoundaryCurveSample> out;
  for (auto& s : sample_boundary_curves(g, count + 1, seed)) {
    const double mass = trapezoid(s.curve.values(), g.spacing());
    if (!(mass > 0.0)) continue;
    std::vector<double> v = s.curve.vector();
    for (double& x : v) x /= mass;
    out.push_back({ForwardCurve(g, std::move(v)), s.zero_node});
  }
  if (out.size() > count) out.erase(out.begin() + static_cast<std::ptrdiff_t>(count), out.end());
  return out;
}

/// zero-integral fields, sigma = 0 and gamma = 0 where rho vanishes, rho + gamma
/// in P, and -int gamma F >= 0 where rho vanishes.
inline std::vector<ConditionResult> validate_bh_fields(const BHFieldSpec& f,
                                                       const std::vector<BoundaryCurveSample>& densities, double tol) {
  ConditionResult zero_sigma{"bh_sigma_zero_integral", Verdict::Holds, Evidence::Sampled, tol, std::nullopt, {}};
  ConditionResult sigma_bd{"bh_sigma_boundary", Verdict::Holds, Evidence::Sampled, tol, std::nullopt, {}};
  ConditionResult zero_gamma{"bh_gamma_zero_integral", Verdict::Holds, Evidence::Sampled, tol, std::nullopt, {}};
  ConditionResult cone{"bh_jump_in_cone", Verdict::Holds, Evidence::Sampled, tol, std::nullopt, {}};
  ConditionResult inward{"bh_drift_inward", Verdict::Holds, Evidence::Sampled, tol, std::nullopt, {}};
  if (f.jumps.empty()) {
    for (auto* c : {&zero_gamma, &cone, &inward}) {
      c->evidence = Evidence::Structural;
      c->note = "no jumps";
    }
  }
  for (const auto& s : densities) {
    const GridSpec& g = s.curve.grid();
    const double dx = g.spacing();
    const double xs = g.node(s.zero_node);
    for (std::size_t j = 0; j < f.vol.size(); ++j) {
      const auto v = evaluate_bh_field(f.vol[j], s.curve);
      const double integral = trapezoid(v, dx);
      if (std::abs(integral) > tol) detail::record(zero_sigma, std::abs(integral), {s.curve.vector(), 0, 0.0, j, 0.0, 0.0, integral});
      if (std::abs(v[s.zero_node]) > tol) {
        detail::record(sigma_bd, std::abs(v[s.zero_node]), {s.curve.vector(), s.zero_node, xs, j, 0.0, 0.0, v[s.zero_node]});
      }
    }
    if (f.jumps.empty()) continue;
    const auto comp = bh_compensator(f, s.curve);
    if (-comp[s.zero_node] < -tol) {
      detail::record(inward, comp[s.zero_node], {s.curve.vector(), s.zero_node, xs, 0, 0.0, 0.0, -comp[s.zero_node]});
    }
    for (std::size_t k = 0; k < f.jumps.size(); ++k) {
      const auto v = evaluate_bh_field(f.jumps[k].field, s.curve);
      for (double x : f.jumps[k].measure.support_points()) {
        const double integral = x * trapezoid(v, dx);
        if (std::abs(integral) > tol) detail::record(zero_gamma, std::abs(integral), {s.curve.vector(), 0, 0.0, k, x, 0.0, integral});
        for (std::size_t i = 0; i < v.size(); ++i) {
          const double after = s.curve[i] + x * v[i];
          if (after < -tol) detail::record(cone, -after, {s.curve.vector(), i, g.node(i), k, x, s.curve[i], after});
        }
      }
    }
  }
  return {zero_sigma, sigma_bd, zero_gamma, cone, inward};
}

// ---------------------------------------------------------------------------
// Ensembles.

struct BHConfig {
  double dt = 0.0;
  double horizon = 0.0;
  std::size_t n_paths = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double mass_tol = 1e-3;

  SimConfig sim() const { return SimConfig{dt, horizon, n_paths, seed, Scheme::MildSplitting, threads}; }
};

struct BHPathResult {
  std::vector<ForwardCurve> snapshots;
  /// mass and rho_t(0) at every step time
  std::vector<double> mass;
  std::vector<double> short_rate;
  std::vector<JumpEvent> jumps;
  double min_value = std::numeric_limits<double>::infinity();
};

template <class Rng>
std::vector<JumpArrival> sample_bh_jumps(const BHFieldSpec& f, double t0, double t1, Rng& rng) {
  const double total = f.total_intensity();
  if (!(total > 0.0)) return {};
  std::poisson_distribution<long> count_dist(total * (t1 - t0));
  const long count = count_dist(rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<JumpArrival> out;
  for (long c = 0; c < count; ++c) {
    const double time = t0 + (1.0 - unif(rng)) * (t1 - t0);
    double pick = unif(rng) * total;
    std::size_t k = 0;
    for (; k + 1 < f.jumps.size(); ++k) {
      pick -= f.jumps[k].measure.intensity();
      if (pick < 0.0) break;
    }
    out.push_back({time, Mark{k, f.jumps[k].measure.sample_size(rng)}});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  return out;
}

inline BHPathResult simulate_bh_path(const BHFieldSpec& f, const DensityCurve& rho0, const BHConfig& cfg,
                                     const std::vector<double>& output_times, std::size_t path) {
  const GridSpec& g = rho0.curve().grid();
  const std::size_t steps = cfg.sim().steps();
  auto rng = path_rng(cfg.seed, path);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sqrt_dt = std::sqrt(cfg.dt);
  BHPathResult out;
  ForwardCurve rho = rho0.curve();
  std::size_t next_snap = 0;
  auto observe = [&](std::size_t step) {
    out.mass.push_back(trapezoid(rho.values(), g.spacing()));
    out.short_rate.push_back(rho[0]);
    for (double v : rho.values()) out.min_value = std::min(out.min_value, v);
    while (next_snap < output_times.size() &&
           static_cast<std::size_t>(std::llround(output_times[next_snap] / cfg.dt)) == step) {
      out.snapshots.push_back(rho);
      ++next_snap;
    }
  };
  observe(0);
  std::vector<double> dW(f.vol.size());
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * cfg.dt;
    for (double& w : dW) w = sqrt_dt * normal(rng);
    const auto jumps = sample_bh_jumps(f, t, t + cfg.dt, rng);
    for (const auto& j : jumps) out.jumps.push_back({j.time, j.mark.component, j.mark.size, {}});
    rho = bh_step(rho, t, cfg.dt, f, dW, jumps, cfg.mass_tol);
    observe(s + 1);
  }
  return out;
}

inline std::vector<BHPathResult> simulate_bh(const BHFieldSpec& f, const DensityCurve& rho0, const BHConfig& cfg,
                                             const std::vector<double>& output_times) {
  const GridSpec& g = rho0.curve().grid();
  cfg.sim().validate(g);
  validate_output_times(output_times, cfg.sim());
  return parallel_map(cfg.n_paths, cfg.threads,
                      [&](std::size_t p) { return simulate_bh_path(f, rho0, cfg, output_times, p); });
}

/// exp(-int_0^t rho_s(0) ds) P(t,T) at the observation times of one path.
inline std::vector<double> bh_discounted_series(const BHPathResult& p, const std::vector<double>& output_times,
                                                double dt, double maturity) {
  const auto disc = discount_factors(p.short_rate, dt);
  std::vector<double> out;
  for (std::size_t o = 0; o < output_times.size(); ++o) {
    const double t = output_times[o];
    if (t > maturity * (1.0 + 1e-12)) continue;
    const ForwardCurve& rho = p.snapshots.at(o);
    if (maturity - t > rho.grid().xi_max() * (1.0 + 1e-12)) continue;
    const auto k = static_cast<std::size_t>(std::llround(t / dt));
    out.push_back(disc.at(k) * bh_bond_price(rho, t, maturity));
  }
  return out;
}

inline MartingaleReport bh_martingale_test(const std::vector<BHPathResult>& paths, const std::vector<double>& output_times,
                                           double dt, double maturity, double quad_tol = 1e-9) {
  std::vector<std::vector<double>> values;
  values.reserve(paths.size());
  for (const auto& p : paths) values.push_back(bh_discounted_series(p, output_times, dt, maturity));
  const double xi_max = paths.empty() || paths.front().snapshots.empty() ? 0.0 : paths.front().snapshots.front().grid().xi_max();
  return martingale_test(values, observation_times(output_times, maturity, xi_max), maturity, quad_tol);
}

}  // namespace hjmm
