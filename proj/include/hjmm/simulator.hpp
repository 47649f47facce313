#pragma once

// Path simulation of the HJMM mild solution.
//
// Moving frame: f lives on the window [-t_max, xi_max + t_max] (the model
// grid's frame_grid), starts at ell h0 and is updated by
//   f += U_{-t} ell [alpha(r) dt + sum_j sigma^j(r) dW_j - int gamma(r) F dt]
//   f += U_{-tau} ell gamma(r_{tau-}, x)        for each jump (tau, x)
// with r = pi U_t f. Because dt is a grid multiple every shift is an index
// translation; the window is wide enough that pi U_t f never clamps.
//
// Mild splitting: r <- S_dt [r + increment + sum of jumps in (t, t+dt]].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "hjmm/curve_space.hpp"
#include "hjmm/errors.hpp"
#include "hjmm/model_spec.hpp"
#include "hjmm/parallel.hpp"

namespace hjmm {

enum class Scheme { MovingFrame, MildSplitting };

inline constexpr double explosion_threshold = 1e10;

struct SimConfig {
  double dt = 0.0;
  double horizon = 0.0;
  std::size_t n_paths = 1;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::MovingFrame;
  unsigned threads = 1;

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }

  void validate(const GridSpec& grid) const {
    if (!(dt > 0.0)) throw ConfigError("sim: dt must be > 0", "dt");
    if (!(horizon > 0.0)) throw ConfigError("sim: horizon must be > 0", "horizon");
    if (horizon > grid.t_max() * (1.0 + 1e-12)) throw ConfigError("sim: horizon exceeds grid t_max", "horizon");
    if (n_paths == 0) throw ConfigError("sim: n_paths must be >= 1", "n_paths");
    try {
      if (grid.steps(dt) < 1) throw ConfigError("sim: dt must be a positive grid multiple", "dt");
    } catch (const GridAlignmentError& e) {
      throw ConfigError(std::string("sim: ") + e.what(), "dt");
    }
    const double ratio = horizon / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
      throw ConfigError("sim: dt must divide horizon", "horizon");
    }
  }
};

struct JumpArrival {
  double time = 0.0;
  Mark mark{};
};

struct JumpEvent {
  double time = 0.0;
  std::size_t factor = 0;
  double size = 0.0;
  /// gamma(r_{t-}, x) on the model grid.
  std::vector<double> applied;
};

struct PathResult {
  std::vector<ForwardCurve> snapshots;
  std::vector<JumpEvent> jumps;
  /// r_t(0) at every step time k dt, k = 0..steps (until explosion).
  std::vector<double> short_rate;
  double min_value = std::numeric_limits<double>::infinity();
  bool exploded = false;
  double explosion_time = std::numeric_limits<double>::quiet_NaN();
};

struct EnsembleResult {
  std::vector<double> output_times;
  std::vector<double> step_times;
  std::vector<PathResult> paths;

  double min_value() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : paths) m = std::min(m, p.min_value);
    return m;
  }

  std::size_t exploded_paths() const {
    return static_cast<std::size_t>(std::count_if(paths.begin(), paths.end(), [](const auto& p) { return p.exploded; }));
  }
};

// ---------------------------------------------------------------------------
// Randomness.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream for one path, a pure function of (seed, path).
inline std::mt19937_64 path_rng(std::uint64_t seed, std::size_t path) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(static_cast<std::uint64_t>(path) + 1)));
}

/// Compound-Poisson arrivals in (t0, t1], sorted by time.
template <class Rng>
std::vector<JumpArrival> sample_jumps(const ModelSpec& m, double t0, double t1, Rng& rng) {
  const double total = m.total_intensity();
  if (!(total > 0.0) || !(t1 > t0)) return {};
  std::poisson_distribution<long> count_dist(total * (t1 - t0));
  const long count = count_dist(rng);
  std::vector<JumpArrival> out;
  out.reserve(static_cast<std::size_t>(count));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (long c = 0; c < count; ++c) {
    // (t0, t1]: 1 - u lies in (0, 1]
    const double time = t0 + (1.0 - unif(rng)) * (t1 - t0);
    double pick = unif(rng) * total;
    std::size_t k = 0;
    for (; k + 1 < m.jump_components(); ++k) {
      pick -= m.measure(k).intensity();
      if (pick < 0.0) break;
    }
    out.push_back({time, Mark{k, m.measure(k).sample_size(rng)}});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  return out;
}

// ---------------------------------------------------------------------------
// Coefficients.

/// Coefficient curves for state-independent models, evaluated once.
struct CoefficientCache {
  std::vector<double> drift;
  std::vector<std::vector<double>> sigma;
  std::vector<double> compensator;
  /// Levy-factor loadings delta_k (unit-size jump curve per component).
  std::vector<std::vector<double>> delta;

  static std::optional<CoefficientCache> build(const ModelSpec& m, const ForwardCurve& any) {
    if (!m.state_independent()) return std::nullopt;
    CoefficientCache c;
    c.drift = model_drift(m, any).vector();
    for (std::size_t j = 0; j < m.factors(); ++j) c.sigma.push_back(volatility_values(m, any, j));
    c.compensator = hjmm::compensator(m, any).vector();
    for (std::size_t k = 0; k < m.jump_components(); ++k) c.delta.push_back(jump_values(m, any, Mark{k, 1.0}));
    return c;
  }
};

namespace detail {

/// alpha(r) dt + sum_j sigma^j(r) dW_j - compensator(r) dt
inline std::vector<double> increment(const ModelSpec& m, const ForwardCurve& r, double dt, std::span<const double> dW,
                                     const CoefficientCache* cache) {
  if (dW.size() != m.factors()) throw DomainError("step: need one Brownian increment per factor");
  std::vector<double> inc(r.size());
  if (cache != nullptr) {
    for (std::size_t i = 0; i < inc.size(); ++i) inc[i] = (cache->drift[i] - cache->compensator[i]) * dt;
    for (std::size_t j = 0; j < dW.size(); ++j) {
      const auto& s = cache->sigma[j];
      for (std::size_t i = 0; i < inc.size(); ++i) inc[i] += s[i] * dW[j];
    }
    return inc;
  }
  const auto a = model_drift(m, r);
  const auto comp = compensator(m, r);
  for (std::size_t i = 0; i < inc.size(); ++i) inc[i] = (a[i] - comp[i]) * dt;
  for (std::size_t j = 0; j < dW.size(); ++j) {
    const auto s = volatility_values(m, r, j);
    for (std::size_t i = 0; i < inc.size(); ++i) inc[i] += s[i] * dW[j];
  }
  return inc;
}

inline std::vector<double> jump_delta(const ModelSpec& m, const ForwardCurve& pre, const Mark& x,
                                      const CoefficientCache* cache) {
  if (cache != nullptr) {
    std::vector<double> g(cache->delta.at(x.component));
    for (double& v : g) v *= x.size;
    return g;
  }
  return jump_values(m, pre, x);
}

inline bool blown_up(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x) || std::abs(x) > explosion_threshold) return true;
  }
  return false;
}

/// pi U_t f for f on the frame window; t = k dx.
inline std::vector<double> frame_restrict(std::span<const double> f, const GridSpec& g, std::size_t k) {
  const std::size_t start = g.left_nodes() + k;
  return std::vector<double>(f.begin() + static_cast<std::ptrdiff_t>(start),
                             f.begin() + static_cast<std::ptrdiff_t>(start + g.size()));
}

/// In-place moving-frame step on raw frame samples. Returns false on explosion.
inline bool advance_moving_frame(std::vector<double>& f, const GridSpec& g, double t, double dt, const ModelSpec& m,
                                 std::span<const double> dW, std::span<const JumpArrival> jumps,
                                 std::vector<JumpEvent>* log, const CoefficientCache* cache) {
  const std::ptrdiff_t k = g.steps(t);
  if (k < 0 || static_cast<std::size_t>(k) > g.left_nodes()) throw DomainError("moving frame: t outside [0, t_max]");
  const std::size_t n = g.size();
  const auto left = static_cast<std::ptrdiff_t>(g.left_nodes());
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  const double dx = g.spacing();

  const ForwardCurve r(g, frame_restrict(f, g, static_cast<std::size_t>(k)));
  const auto inc = increment(m, r, dt, dW, cache);

  // Jumps use r_{tau-}: the frame before this step's increment, after earlier jumps.
  std::vector<std::vector<double>> applied;
  applied.reserve(jumps.size());
  for (const auto& jump : jumps) {
    const double pos0 = static_cast<double>(left) + jump.time / dx;
    std::vector<double> pre(n);
    for (std::size_t i = 0; i < n; ++i) pre[i] = interpolate_index(f, pos0 + static_cast<double>(i));
    auto gamma = jump_delta(m, ForwardCurve(g, std::move(pre)), jump.mark, cache);
    // f(eta) += gamma(eta - tau), constant outside [0, xi_max]
    for (std::size_t e = 0; e < f.size(); ++e) {
      f[e] += interpolate_index(gamma, static_cast<double>(e) - pos0);
    }
    if (log != nullptr) log->push_back({jump.time, jump.mark.component, jump.mark.size, std::move(gamma)});
  }

  for (std::size_t e = 0; e < f.size(); ++e) {
    const std::ptrdiff_t i = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(e) - left - k, 0, last);
    f[e] += inc[static_cast<std::size_t>(i)];
  }
  return !blown_up(f);
}

/// In-place mild splitting step. Returns false on explosion.
inline bool advance_mild(std::vector<double>& r, const GridSpec& g, double dt, const ModelSpec& m,
                         std::span<const double> dW, std::span<const JumpArrival> jumps, std::vector<JumpEvent>* log,
                         const CoefficientCache* cache) {
  const std::ptrdiff_t k = g.steps(dt);
  if (k < 1) throw DomainError("mild step: dt must be a positive grid multiple");
  const std::size_t n = g.size();
  const auto inc = increment(m, ForwardCurve(g, r), dt, dW, cache);
  std::vector<double> pre(r);
  for (const auto& jump : jumps) {
    auto gamma = jump_delta(m, ForwardCurve(g, pre), jump.mark, cache);
    for (std::size_t i = 0; i < n; ++i) pre[i] += gamma[i];
    if (log != nullptr) log->push_back({jump.time, jump.mark.component, jump.mark.size, std::move(gamma)});
  }
  std::vector<double> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = std::min(i + static_cast<std::size_t>(k), n - 1);
    next[i] = pre[src] + inc[src];
  }
  r = std::move(next);
  return !blown_up(r);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public single-step API.

/// ell h0 on the moving-frame window of h0's grid.
inline ExtendedCurve initial_frame(const ForwardCurve& h0) { return embed(h0, h0.grid().frame_grid()); }

/// r_t = pi U_t f_t on the model grid.
inline ForwardCurve frame_view(const ExtendedCurve& f, double t, const GridSpec& model_grid) {
  return project(shift_ext(f, t), model_grid);
}

inline ExtendedCurve step_moving_frame(const ExtendedCurve& f, double t, double dt, const ModelSpec& m,
                                       std::span<const double> dW, std::span<const JumpArrival> jumps,
                                       std::vector<JumpEvent>* log = nullptr) {
  if (!(f.grid() == m.grid.frame_grid())) throw GridAlignmentError("moving frame: state not on the frame window");
  std::vector<double> v = f.vector();
  if (!detail::advance_moving_frame(v, m.grid, t, dt, m, dW, jumps, log, nullptr)) {
    throw ExplosionError("moving frame: state exploded at t = " + std::to_string(t + dt));
  }
  return ExtendedCurve(f.grid(), std::move(v));
}

inline ForwardCurve step_mild(const ForwardCurve& r, double t, double dt, const ModelSpec& m,
                              std::span<const double> dW, std::span<const JumpArrival> jumps,
                              std::vector<JumpEvent>* log = nullptr) {
  std::vector<double> v = r.vector();
  if (!detail::advance_mild(v, m.grid, dt, m, dW, jumps, log, nullptr)) {
    throw ExplosionError("mild step: state exploded at t = " + std::to_string(t + dt));
  }
  return ForwardCurve(r.grid(), std::move(v));
}

// ---------------------------------------------------------------------------
// Paths and ensembles.

/// One path. Snapshots are taken at output_times (multiples of dt).
inline PathResult simulate_path(const ModelSpec& m, const ForwardCurve& h0, const SimConfig& cfg,
                                const std::vector<double>& output_times, std::size_t path,
                                const CoefficientCache* cache = nullptr, bool keep_jump_curves = true) {
  const GridSpec& g = m.grid;
  const std::size_t steps = cfg.steps();
  std::vector<std::size_t> snap_steps;
  for (double t : output_times) snap_steps.push_back(static_cast<std::size_t>(std::llround(t / cfg.dt)));

  auto rng = path_rng(cfg.seed, path);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sqrt_dt = std::sqrt(cfg.dt);

  PathResult out;
  out.short_rate.reserve(steps + 1);
  std::vector<double> state = cfg.scheme == Scheme::MovingFrame ? initial_frame(h0).vector() : h0.vector();
  const std::size_t left = g.left_nodes();
  const std::size_t k_dt = static_cast<std::size_t>(g.steps(cfg.dt));
  std::size_t next_snap = 0;

  auto observe = [&](std::size_t step) {
    const std::size_t offset = cfg.scheme == Scheme::MovingFrame ? left + step * k_dt : 0;
    const auto first = state.begin() + static_cast<std::ptrdiff_t>(offset);
    out.short_rate.push_back(*first);
    out.min_value = std::min(out.min_value, *std::min_element(first, first + static_cast<std::ptrdiff_t>(g.size())));
    while (next_snap < snap_steps.size() && snap_steps[next_snap] == step) {
      out.snapshots.emplace_back(g, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(g.size())));
      ++next_snap;
    }
  };

  observe(0);
  std::vector<double> dW(m.factors());
  std::vector<JumpEvent> scratch;
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * cfg.dt;
    for (double& w : dW) w = sqrt_dt * normal(rng);
    const auto jumps = sample_jumps(m, t, t + cfg.dt, rng);
    scratch.clear();
    const bool ok = cfg.scheme == Scheme::MovingFrame
                        ? detail::advance_moving_frame(state, g, t, cfg.dt, m, dW, jumps, &scratch, cache)
                        : detail::advance_mild(state, g, cfg.dt, m, dW, jumps, &scratch, cache);
    for (auto& e : scratch) {
      if (!keep_jump_curves) e.applied.clear();
      out.jumps.push_back(std::move(e));
    }
    if (!ok) {
      out.exploded = true;
      out.explosion_time = t + cfg.dt;
      break;
    }
    observe(s + 1);
  }
  return out;
}

inline void validate_output_times(const std::vector<double>& times, const SimConfig& cfg) {
  double prev = -1.0;
  for (double t : times) {
    if (t < 0.0 || t > cfg.horizon * (1.0 + 1e-12) || t <= prev) {
      throw ConfigError("output_times must be increasing and within [0, horizon]", "output_times");
    }
    const double ratio = t / cfg.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
      throw ConfigError("output_times must be multiples of dt", "output_times");
    }
    prev = t;
  }
}

/// Runs every path and maps it through summarize(path_index, PathResult&&);
/// results are ordered by path index whatever the thread count.
template <class Summarize>
auto run_paths(const ModelSpec& m, const ForwardCurve& h0, const SimConfig& cfg,
               const std::vector<double>& output_times, Summarize summarize, bool keep_jump_curves = true) {
  using Summary = std::invoke_result_t<Summarize&, std::size_t, PathResult&&>;
  m.validate();
  cfg.validate(m.grid);
  if (!(h0.grid() == m.grid)) throw GridAlignmentError("initial curve not on the model grid");
  validate_output_times(output_times, cfg);
  const auto cache = CoefficientCache::build(m, h0);
  const CoefficientCache* cache_ptr = cache ? &*cache : nullptr;

  return parallel_map(cfg.n_paths, cfg.threads, [&](std::size_t p) -> Summary {
    return summarize(p, simulate_path(m, h0, cfg, output_times, p, cache_ptr, keep_jump_curves));
  });
}

inline std::vector<double> step_times(const SimConfig& cfg) {
  std::vector<double> t(cfg.steps() + 1);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<double>(k) * cfg.dt;
  return t;
}

inline EnsembleResult simulate_ensemble(const ModelSpec& m, const ForwardCurve& h0, const SimConfig& cfg,
                                        const std::vector<double>& output_times) {
  EnsembleResult res;
  res.output_times = output_times;
  res.step_times = step_times(cfg);
  res.paths = run_paths(m, h0, cfg, output_times, [](std::size_t, PathResult&& p) { return std::move(p); });
  return res;
}

}  // namespace hjmm
