#pragma once

// Discrete forward-curve spaces.
//
// Curves are nodal samples on a uniform grid of spacing dx. A ForwardCurve
// lives on [0, xi_max]; an ExtendedCurve lives on [-t_max, xi_max] (or, for
// the simulator's frame, on a window extended further to the right). Shifts
// are restricted to integer multiples of dx so they are exact index moves.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hjmm/errors.hpp"

namespace hjmm {

class GridSpec {
 public:
  /// Uniform grid on [0, xi_max] with n_points nodes; extended window
  /// [-t_max, xi_max]. dx must divide t_max exactly.
  static GridSpec make(double xi_max, double t_max, std::size_t n_points) {
    if (!(std::isfinite(xi_max) && xi_max > 0.0)) {
      throw GridAlignmentError("grid: xi_max must be finite and > 0");
    }
    if (!(std::isfinite(t_max) && t_max > 0.0)) {
      throw GridAlignmentError("grid: t_max must be finite and > 0");
    }
    if (n_points < 2) throw GridAlignmentError("grid: n_points must be >= 2");
    const double dx = xi_max / static_cast<double>(n_points - 1);
    const double ratio = t_max / dx;
    const double k = std::round(ratio);
    if (k < 1.0 || std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio)) {
      throw GridAlignmentError("grid: spacing " + std::to_string(dx) +
                               " does not divide t_max " + std::to_string(t_max));
    }
    return GridSpec(dx, n_points, static_cast<std::size_t>(k), xi_max, t_max);
  }

  double xi_max() const noexcept { return xi_max_; }
  double t_max() const noexcept { return t_max_; }
  double spacing() const noexcept { return dx_; }
  /// Number of nodes on [0, xi_max].
  std::size_t size() const noexcept { return n_; }
  /// Number of extended-grid nodes strictly left of 0.
  std::size_t left_nodes() const noexcept { return left_; }
  std::size_t extended_size() const noexcept { return left_ + n_; }

  double node(std::size_t i) const noexcept { return static_cast<double>(i) * dx_; }
  double extended_node(std::size_t e) const noexcept {
    return (static_cast<double>(e) - static_cast<double>(left_)) * dx_;
  }

  /// Number of grid steps in a (possibly negative) time t. Throws unless t is
  /// an integer multiple of the spacing.
  std::ptrdiff_t steps(double t) const {
    const double ratio = t / dx_;
    const double k = std::round(ratio);
    if (!std::isfinite(ratio) || std::abs(ratio - k) > 1e-9 * std::max(1.0, std::abs(ratio))) {
      throw GridAlignmentError("time " + std::to_string(t) + " is not a multiple of the grid spacing " +
                               std::to_string(dx_));
    }
    return static_cast<std::ptrdiff_t>(k);
  }

  /// Grid whose [0, .] part is extended to the right by t_max, used as the
  /// moving-frame window [-t_max, xi_max + t_max].
  GridSpec frame_grid() const {
    return GridSpec(dx_, n_ + left_, left_, xi_max_ + static_cast<double>(left_) * dx_, t_max_);
  }

  friend bool operator==(const GridSpec& a, const GridSpec& b) noexcept {
    return a.dx_ == b.dx_ && a.n_ == b.n_ && a.left_ == b.left_;
  }

 private:
  GridSpec(double dx, std::size_t n, std::size_t left, double xi_max, double t_max)
      : dx_(dx), n_(n), left_(left), xi_max_(xi_max), t_max_(t_max) {}

  double dx_;
  std::size_t n_;
  std::size_t left_;
  double xi_max_;
  double t_max_;
};

struct SpaceParams {
  double beta = 1.0;
  double beta_prime = 2.0;

  static SpaceParams make(double beta, double beta_prime) {
    if (!(beta > 0.0 && beta_prime > beta && std::isfinite(beta_prime))) {
      throw ConfigError("space: need 0 < beta < beta_prime", "space");
    }
    return SpaceParams{beta, beta_prime};
  }
};

namespace detail {

inline void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidCurveError(std::string(what) + ": non-finite sample");
  }
}

}  // namespace detail

/// Forward curve h: R+ -> R sampled on [0, xi_max].
class ForwardCurve {
 public:
  ForwardCurve(const GridSpec& grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw InvalidCurveError("forward curve: expected " + std::to_string(grid_.size()) +
                              " samples, got " + std::to_string(values_.size()));
    }
    detail::require_finite(values_, "forward curve");
  }

  static ForwardCurve constant(const GridSpec& grid, double c) {
    return ForwardCurve(grid, std::vector<double>(grid.size(), c));
  }

  template <class F>
  static ForwardCurve from_function(const GridSpec& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.node(i));
    return ForwardCurve(grid, std::move(v));
  }

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double front() const noexcept { return values_.front(); }
  double back() const noexcept { return values_.back(); }

  friend bool operator==(const ForwardCurve& a, const ForwardCurve& b) {
    return a.grid_ == b.grid_ && a.values_ == b.values_;
  }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// Curve on the extended window [-t_max, xi_max(grid)].
class ExtendedCurve {
 public:
  ExtendedCurve(const GridSpec& grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.extended_size()) {
      throw InvalidCurveError("extended curve: expected " + std::to_string(grid_.extended_size()) +
                              " samples, got " + std::to_string(values_.size()));
    }
    detail::require_finite(values_, "extended curve");
  }

  template <class F>
  static ExtendedCurve from_function(const GridSpec& grid, F&& f) {
    std::vector<double> v(grid.extended_size());
    for (std::size_t e = 0; e < v.size(); ++e) v[e] = f(grid.extended_node(e));
    return ExtendedCurve(grid, std::move(v));
  }

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t e) const noexcept { return values_[e]; }
  /// Value at xi = 0.
  double at_origin() const noexcept { return values_[grid_.left_nodes()]; }

  friend bool operator==(const ExtendedCurve& a, const ExtendedCurve& b) {
    return a.grid_ == b.grid_ && a.values_ == b.values_;
  }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Quadrature on uniform samples.

/// Trapezoid rule over all samples.
inline double trapezoid(std::span<const double> v, double dx) {
  if (v.size() < 2) return 0.0;
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
  return s * dx;
}

/// Running trapezoid integral from the first node; result[0] = 0.
inline std::vector<double> cumulative_trapezoid(std::span<const double> v, double dx) {
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t i = 1; i < v.size(); ++i) out[i] = out[i - 1] + 0.5 * dx * (v[i - 1] + v[i]);
  return out;
}

/// Integral of the piecewise-linear interpolant of v (spacing dx, first node
/// at 0) over [0, x], 0 <= x <= (n-1) dx.
inline double integral_to(std::span<const double> v, double dx, double x) {
  if (x <= 0.0 || v.size() < 2) return 0.0;
  const double pos = x / dx;
  const double snapped = std::round(pos);
  std::size_t full;
  double frac;
  if (std::abs(pos - snapped) <= 1e-9 * std::max(1.0, pos)) {
    full = static_cast<std::size_t>(snapped);
    frac = 0.0;
  } else {
    full = static_cast<std::size_t>(std::floor(pos));
    frac = pos - static_cast<double>(full);
  }
  full = std::min(full, v.size() - 1);
  if (full == v.size() - 1) frac = 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < full; ++i) s += 0.5 * dx * (v[i] + v[i + 1]);
  if (frac > 0.0) {
    const double end = v[full] + frac * (v[full + 1] - v[full]);
    s += 0.5 * frac * dx * (v[full] + end);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Norms.

namespace detail {

/// Sum over cells of dx * d_i^2 * (w(x_i) + w(x_{i+1})) / 2 with d_i the
/// forward difference on the cell. Node positions are (i - offset) * dx.
inline double weighted_derivative_energy(std::span<const double> v, double dx, std::size_t offset,
                                         double beta) {
  double q = 0.0;
  auto weight = [&](std::size_t i) {
    const double x = (static_cast<double>(i) - static_cast<double>(offset)) * dx;
    return std::exp(beta * std::abs(x));
  };
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double d = (v[i + 1] - v[i]) / dx;
    if (d == 0.0) continue;
    q += dx * d * d * 0.5 * (weight(i) + weight(i + 1));
  }
  return q;
}

}  // namespace detail

/// ||h||_beta = sqrt(h(0)^2 + int |h'|^2 e^{beta xi}).
inline double hbeta_norm(const ForwardCurve& h, double beta) {
  const auto v = h.values();
  const double q = detail::weighted_derivative_energy(v, h.grid().spacing(), 0, beta);
  return std::sqrt(v.front() * v.front() + q);
}

inline double hbeta_norm(const ForwardCurve& h, const SpaceParams& p) { return hbeta_norm(h, p.beta); }

/// Norm on the extended space, weight e^{beta |xi|} over the whole window.
inline double extended_norm(const ExtendedCurve& f, double beta) {
  const auto v = f.values();
  const double q = detail::weighted_derivative_energy(v, f.grid().spacing(), f.grid().left_nodes(), beta);
  const double f0 = f.at_origin();
  return std::sqrt(f0 * f0 + q);
}

inline double extended_norm(const ExtendedCurve& f, const SpaceParams& p) {
  return extended_norm(f, p.beta);
}

/// Discrete L1 norm of the derivative, sum_i |d_i| dx.
inline double derivative_l1(std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) s += std::abs(v[i + 1] - v[i]);
  return s;
}

/// Trapezoid of (h - h(inf))^2 e^{beta xi}, h(inf) taken as h(xi_max).
inline double tail_weighted_l2(const ForwardCurve& h, double beta) {
  const auto v = h.values();
  const double h_inf = v.back();
  std::vector<double> g(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - h_inf;
    g[i] = d * d * std::exp(beta * h.grid().node(i));
  }
  return trapezoid(g, h.grid().spacing());
}

// ---------------------------------------------------------------------------
// Embedding, projection, shifts.

/// ell: constant extension by h(0) to the left (and by h(xi_max) to the right
/// when the target window reaches past xi_max).
inline ExtendedCurve embed(const ForwardCurve& h, const GridSpec& window) {
  const GridSpec& g = h.grid();
  if (window.spacing() != g.spacing() || window.left_nodes() != g.left_nodes() || window.size() < g.size()) {
    throw GridAlignmentError("embed: window incompatible with curve grid");
  }
  std::vector<double> out(window.extended_size());
  const std::size_t left = g.left_nodes();
  for (std::size_t e = 0; e < out.size(); ++e) {
    const std::size_t i = e < left ? 0 : std::min(e - left, g.size() - 1);
    out[e] = h[i];
  }
  return ExtendedCurve(window, std::move(out));
}

inline ExtendedCurve embed(const ForwardCurve& h) { return embed(h, h.grid()); }

/// pi: restriction to the nodes xi >= 0 of the target grid.
inline ForwardCurve project(const ExtendedCurve& f, const GridSpec& target) {
  const GridSpec& g = f.grid();
  if (target.spacing() != g.spacing() || target.left_nodes() != g.left_nodes() || target.size() > g.size()) {
    throw GridAlignmentError("project: target grid incompatible with curve window");
  }
  const auto v = f.values();
  const auto first = v.begin() + static_cast<std::ptrdiff_t>(g.left_nodes());
  return ForwardCurve(target, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(target.size())));
}

inline ForwardCurve project(const ExtendedCurve& f) { return project(f, f.grid()); }

/// S_t h = h(t + .), right end filled with h(xi_max). t >= 0, grid-aligned.
inline ForwardCurve shift(const ForwardCurve& h, double t) {
  const std::ptrdiff_t k = h.grid().steps(t);
  if (k < 0) throw DomainError("shift: S_t requires t >= 0");
  const std::size_t n = h.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = h[std::min(i + static_cast<std::size_t>(k), n - 1)];
  return ForwardCurve(h.grid(), std::move(out));
}

/// U_t f = f(t + .) on the extended window, constant extrapolation at both ends.
inline ExtendedCurve shift_ext(const ExtendedCurve& f, double t) {
  const std::ptrdiff_t k = f.grid().steps(t);
  const auto n = static_cast<std::ptrdiff_t>(f.size());
  std::vector<double> out(f.size());
  for (std::ptrdiff_t e = 0; e < n; ++e) out[static_cast<std::size_t>(e)] = f[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(e + k, 0, n - 1))];
  return ExtendedCurve(f.grid(), std::move(out));
}

// ---------------------------------------------------------------------------
// Point evaluation.

namespace detail {

/// Linear interpolation of samples at real index pos; constant outside.
inline double interpolate_index(std::span<const double> v, double pos) {
  if (pos <= 0.0) return v.front();
  const double last = static_cast<double>(v.size() - 1);
  if (pos >= last) return v.back();
  const double r = std::round(pos);
  if (std::abs(pos - r) <= 1e-9 * std::max(1.0, pos)) return v[static_cast<std::size_t>(r)];
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double w = pos - static_cast<double>(i);
  return v[i] + w * (v[i + 1] - v[i]);
}

}  // namespace detail

inline double point_eval(const ForwardCurve& h, double xi) {
  return detail::interpolate_index(h.values(), xi / h.grid().spacing());
}

inline double point_eval(const ExtendedCurve& f, double xi) {
  return detail::interpolate_index(f.values(), xi / f.grid().spacing() +
                                                   static_cast<double>(f.grid().left_nodes()));
}

/// Constant K2 = 1 + sqrt(2/beta) bounding sup|f| by the extended norm.
inline double sup_norm_constant(double beta) { return 1.0 + std::sqrt(2.0 / beta); }

// ---------------------------------------------------------------------------
// CSV (header "xi,value", shortest round-trip decimal).

inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline void write_csv(std::ostream& os, const ForwardCurve& h) {
  os << "xi,value\n";
  for (std::size_t i = 0; i < h.size(); ++i) {
    os << format_double(h.grid().node(i)) << ',' << format_double(h[i]) << '\n';
  }
}

inline void write_csv(std::ostream& os, const ExtendedCurve& f) {
  os << "xi,value\n";
  for (std::size_t e = 0; e < f.size(); ++e) {
    os << format_double(f.grid().extended_node(e)) << ',' << format_double(f[e]) << '\n';
  }
}

/// Reads a curve written by write_csv; node positions must match the grid.
inline ForwardCurve read_csv(std::istream& is, const GridSpec& grid) {
  std::string line;
  if (!std::getline(is, line) || line != "xi,value") throw InvalidCurveError("curve csv: bad header");
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidCurveError("curve csv: malformed row '" + line + "'");
    double xi = 0.0, value = 0.0;
    const char* b = line.data();
    if (std::from_chars(b, b + comma, xi).ec != std::errc{} ||
        std::from_chars(b + comma + 1, b + line.size(), value).ec != std::errc{}) {
      throw InvalidCurveError("curve csv: unparsable row '" + line + "'");
    }
    if (std::abs(xi - grid.node(values.size())) > 1e-9 * std::max(1.0, grid.xi_max())) {
      throw GridAlignmentError("curve csv: node " + std::to_string(values.size()) + " off grid");
    }
    values.push_back(value);
  }
  return ForwardCurve(grid, std::move(values));
}

}  // namespace hjmm
