#pragma once

// Zero-coupon bond prices P(t,T) = exp(-int_0^{T-t} r_t) and a Monte Carlo
// check that exp(-int_0^t r_s(0) ds) P(t,T) has constant mean.

#include <cmath>
#include <string>
#include <vector>

#include "hjmm/curve_space.hpp"
#include "hjmm/errors.hpp"
#include "hjmm/simulator.hpp"

namespace hjmm {

inline double bond_price(const ForwardCurve& r, double ttm) {
  const double xi_max = r.grid().xi_max();
  if (!(ttm >= 0.0 && ttm <= xi_max * (1.0 + 1e-12))) {
    throw DomainError("bond_price: time to maturity " + std::to_string(ttm) + " outside [0, xi_max]");
  }
  return std::exp(-integral_to(r.values(), r.grid().spacing(), std::min(ttm, xi_max)));
}

/// Discounted prices of one path at each observation time.
struct DiscountedSeries {
  double maturity = 0.0;
  std::vector<double> times;
  /// values[path][time]
  std::vector<std::vector<double>> values;
};

/// exp(-trapezoid of short_rate[0..k]) for each step k.
inline std::vector<double> discount_factors(const std::vector<double>& short_rate, double dt) {
  std::vector<double> d(short_rate.size(), 1.0);
  double acc = 0.0;
  for (std::size_t k = 1; k < short_rate.size(); ++k) {
    acc += 0.5 * dt * (short_rate[k - 1] + short_rate[k]);
    d[k] = std::exp(-acc);
  }
  return d;
}

/// Observation times: the output times t <= T whose T - t fits on the curve grid.
inline std::vector<double> observation_times(const std::vector<double>& output_times, double maturity, double xi_max) {
  std::vector<double> out;
  for (double t : output_times) {
    if (t <= maturity * (1.0 + 1e-12) && maturity - t <= xi_max * (1.0 + 1e-12)) out.push_back(t);
  }
  return out;
}

/// D_t P(t,T) for one path; output_times must be multiples of dt.
inline std::vector<double> discounted_bond_series(const PathResult& path, const std::vector<double>& output_times,
                                                  double dt, double maturity) {
  if (path.exploded) throw ExplosionError("discounted_bond_series: path exploded");
  const auto disc = discount_factors(path.short_rate, dt);
  std::vector<double> out;
  for (std::size_t o = 0; o < output_times.size(); ++o) {
    const double t = output_times[o];
    if (t > maturity * (1.0 + 1e-12)) continue;
    const double ttm = maturity - t;
    const ForwardCurve& r = path.snapshots.at(o);
    if (ttm > r.grid().xi_max() * (1.0 + 1e-12)) continue;
    const auto k = static_cast<std::size_t>(std::llround(t / dt));
    out.push_back(disc.at(k) * bond_price(r, ttm));
  }
  return out;
}

inline DiscountedSeries discounted_bond_paths(const EnsembleResult& result, double maturity) {
  if (result.step_times.size() < 2) throw DomainError("discounted_bond_paths: need at least one step");
  const double dt = result.step_times[1] - result.step_times[0];
  DiscountedSeries s;
  s.maturity = maturity;
  const double xi_max = result.paths.empty() || result.paths.front().snapshots.empty()
                            ? 0.0
                            : result.paths.front().snapshots.front().grid().xi_max();
  s.times = observation_times(result.output_times, maturity, xi_max);
  for (const auto& p : result.paths) s.values.push_back(discounted_bond_series(p, result.output_times, dt, maturity));
  return s;
}

struct MartingaleReport {
  double maturity = 0.0;
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> se;
  /// max_t |mean_t - mean_0| / se_t (0 where both vanish)
  double max_z = 0.0;
  double quad_tol = 0.0;
  bool pass = true;
};

inline constexpr std::size_t min_martingale_paths = 100;

/// PASS iff |M_t - M_0| <= 3 SE_t + quad_tol at every time. quad_tol absorbs
/// quadrature round-off when the series is deterministic (SE = 0).
inline MartingaleReport martingale_test(const std::vector<std::vector<double>>& values, const std::vector<double>& times,
                                        double maturity, double quad_tol = 1e-9) {
  const std::size_t n = values.size();
  if (n < min_martingale_paths) {
    throw InsufficientSampleError("martingale_test: " + std::to_string(n) + " paths, need at least " +
                                  std::to_string(min_martingale_paths));
  }
  MartingaleReport rep;
  rep.maturity = maturity;
  rep.times = times;
  rep.quad_tol = quad_tol;
  for (std::size_t k = 0; k < times.size(); ++k) {
    double sum = 0.0;
    for (const auto& v : values) sum += v.at(k);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& v : values) ss += (v[k] - mean) * (v[k] - mean);
    rep.mean.push_back(mean);
    rep.se.push_back(std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)));
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double dev = std::abs(rep.mean[k] - rep.mean[0]);
    if (dev > 3.0 * rep.se[k] + quad_tol) rep.pass = false;
    const double z = rep.se[k] > 0.0 ? dev / rep.se[k] : (dev > quad_tol ? std::numeric_limits<double>::infinity() : 0.0);
    rep.max_z = std::max(rep.max_z, z);
  }
  return rep;
}

inline MartingaleReport martingale_test(const DiscountedSeries& s, double quad_tol = 1e-9) {
  return martingale_test(s.values, s.times, s.maturity, quad_tol);
}

}  // namespace hjmm
