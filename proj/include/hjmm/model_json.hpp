#pragma once

// Strict JSON loading of model specifications. Unknown keys are errors.
//
//   space      {beta, beta_prime}
//   grid       {xi_max, t_max, n_points}
//   noise      {lambdas: [...]}
//   vol        {variant: deterministic|local|benchmark, params: {factors: [...]}}
//   jumps      {variant: levy|marked, factors: [{field, measure}]}
//   drift_mode "hjm" | "zero" | {custom: <local>}
//
// curve:   {family: constant, value} | {family: exponential, scale, decay}
//          | {family: hump, a, b, decay} | {family: values, values: [...]}
// local:   {shape: constant|linear|capped|sqrt, scale, decay, cap}
//          meaning scale * e^{-decay xi} * g(y)
// measure: {kind: point_mass, size, intensity}
//          | {kind: compound_poisson, intensity, atoms: [{size, probability}]}
//          | {kind: truncated_exponential, intensity, rate, lower, upper}
//          each with optional moment_bound (N) and epsilon.

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "hjmm/curve_space.hpp"
#include "hjmm/errors.hpp"
#include "hjmm/model_spec.hpp"

namespace hjmm {

using json = nlohmann::json;

/// Object view that records which keys were read; finish() rejects the rest.
class JsonObject {
 public:
  JsonObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object", last_key(path_));
  }

  const std::string& path() const noexcept { return path_; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& get(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(path_ + ": missing key '" + key + "'", key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) throw ConfigError(sub(key) + ": expected a number", key);
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(sub(key) + ": must be finite", key);
    return d;
  }

  double number_or(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::uint64_t unsigned_integer(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_unsigned()) throw ConfigError(sub(key) + ": expected a nonnegative integer", key);
    return v.get<std::uint64_t>();
  }

  std::uint64_t unsigned_or(const std::string& key, std::uint64_t fallback) {
    return has(key) ? unsigned_integer(key) : fallback;
  }

  std::string string(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) throw ConfigError(sub(key) + ": expected a string", key);
    return v.get<std::string>();
  }

  std::string string_or(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  bool boolean_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_boolean()) throw ConfigError(sub(key) + ": expected true or false", key);
    return v.get<bool>();
  }

  JsonObject object(const std::string& key) { return JsonObject(get(key), sub(key)); }

  const json& array(const std::string& key) {
    const json& v = get(key);
    if (!v.is_array()) throw ConfigError(sub(key) + ": expected an array", key);
    return v;
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    for (const auto& v : array(key)) {
      if (!v.is_number()) throw ConfigError(sub(key) + ": expected an array of numbers", key);
      out.push_back(v.get<double>());
    }
    return out;
  }

  /// Marks a key as handled without reading it.
  void accept(const std::string& key) { seen_.insert(key); }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(path_ + ": unknown key '" + item.key() + "'", item.key());
    }
  }

  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  static std::string last_key(const std::string& path) {
    const auto dot = path.rfind('.');
    std::string k = dot == std::string::npos ? path : path.substr(dot + 1);
    const auto br = k.find('[');
    return br == std::string::npos ? k : k.substr(0, br);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------

inline GridSpec grid_from_json(JsonObject o) {
  const double xi_max = o.number("xi_max");
  const double t_max = o.number("t_max");
  const auto n = o.unsigned_integer("n_points");
  o.finish();
  try {
    return GridSpec::make(xi_max, t_max, static_cast<std::size_t>(n));
  } catch (const GridAlignmentError& e) {
    throw ConfigError(e.what(), "grid");
  }
}

inline SpaceParams space_from_json(JsonObject o) {
  const double b = o.number("beta");
  const double bp = o.number("beta_prime");
  o.finish();
  return SpaceParams::make(b, bp);
}

/// Deterministic curve families.
inline std::vector<double> curve_from_json(JsonObject o, const GridSpec& g) {
  const std::string family = o.string("family");
  std::vector<double> v(g.size());
  if (family == "constant") {
    const double c = o.number("value");
    std::fill(v.begin(), v.end(), c);
  } else if (family == "exponential") {
    const double s = o.number("scale");
    const double d = o.number("decay");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * std::exp(-d * g.node(i));
  } else if (family == "hump") {
    const double a = o.number("a");
    const double b = o.number("b");
    const double d = o.number("decay");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (a + b * g.node(i)) * std::exp(-d * g.node(i));
  } else if (family == "values") {
    v = o.numbers("values");
    if (v.size() != g.size()) {
      throw ConfigError(o.path() + ": values has " + std::to_string(v.size()) + " entries, grid has " +
                            std::to_string(g.size()),
                        "values");
    }
  } else {
    throw ConfigError(o.path() + ": unknown family '" + family + "'", "family");
  }
  o.finish();
  return v;
}

/// scale * e^{-decay xi} * g(y)
inline ScalarField local_from_json(JsonObject o) {
  const std::string shape = o.string("shape");
  const double scale = o.number("scale");
  const double decay = o.number_or("decay", 0.0);
  std::function<double(double)> gy;
  if (shape == "constant") {
    gy = [](double) { return 1.0; };
  } else if (shape == "linear") {
    gy = [](double y) { return y; };
  } else if (shape == "capped") {
    const double cap = o.number("cap");
    if (!(cap > 0.0)) throw ConfigError(o.sub("cap") + ": must be > 0", "cap");
    gy = [cap](double y) { return std::min(y, cap); };
  } else if (shape == "sqrt") {
    gy = [](double y) { return std::sqrt(std::max(y, 0.0)); };
  } else {
    throw ConfigError(o.path() + ": unknown shape '" + shape + "'", "shape");
  }
  o.finish();
  return [scale, decay, gy](double xi, double y) { return scale * std::exp(-decay * xi) * gy(y); };
}

inline LevyMeasure measure_from_json(JsonObject o) {
  const std::string kind = o.string("kind");
  const double n_bound = o.number_or("moment_bound", 10.0);
  const double eps = o.number_or("epsilon", 1.0);
  LevyMeasure::Kind k;
  if (kind == "point_mass") {
    k = PointMass{o.number("size"), o.number("intensity")};
  } else if (kind == "compound_poisson") {
    DiscreteJumps d;
    d.intensity = o.number("intensity");
    const json& atoms = o.array("atoms");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      JsonObject a(atoms[i], o.sub("atoms[" + std::to_string(i) + "]"));
      d.atoms.push_back({a.number("size"), a.number("probability")});
      a.finish();
    }
    k = std::move(d);
  } else if (kind == "truncated_exponential") {
    k = TruncatedExponential{o.number("intensity"), o.number("rate"), o.number("lower"), o.number("upper")};
  } else {
    throw ConfigError(o.path() + ": unknown measure kind '" + kind + "'", "kind");
  }
  o.finish();
  return LevyMeasure(std::move(k), n_bound, eps);
}

inline BenchmarkField benchmark_from_json(JsonObject o, const GridSpec& g) {
  BenchmarkField b;
  b.shape = curve_from_json(o.object("shape"), g);
  const json& fs = o.array("functionals");
  for (std::size_t i = 0; i < fs.size(); ++i) {
    JsonObject f(fs[i], o.sub("functionals[" + std::to_string(i) + "]"));
    const std::string kind = f.string("kind");
    BenchmarkFunctional ell;
    if (kind == "forward") {
      ell.kind = BenchmarkKind::Forward;
    } else if (kind == "yield") {
      ell.kind = BenchmarkKind::Yield;
    } else {
      throw ConfigError(f.path() + ": kind must be forward or yield", "kind");
    }
    ell.xi = f.number("xi");
    ell.weight = f.number_or("weight", 1.0);
    f.finish();
    b.functionals.push_back(ell);
  }
  if (o.has("cap")) b.cap = o.number("cap");
  o.finish();
  return b;
}

/// A Levy loading: {family: ...} is deterministic, {shape: ...} is local.
inline CurveField loading_from_json(JsonObject o, const GridSpec& g) {
  if (o.has("family")) return DeterministicField{curve_from_json(std::move(o), g)};
  if (o.has("shape")) return LocalField{local_from_json(std::move(o))};
  throw ConfigError(o.path() + ": field needs 'family' (deterministic) or 'shape' (local)", "field");
}

inline std::vector<CurveField> vol_from_json(JsonObject o, const GridSpec& g) {
  const std::string variant = o.string("variant");
  JsonObject params = o.object("params");
  const json& factors = params.array("factors");
  std::vector<CurveField> out;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    JsonObject f(factors[i], params.sub("factors[" + std::to_string(i) + "]"));
    if (variant == "deterministic") {
      out.emplace_back(DeterministicField{curve_from_json(std::move(f), g)});
    } else if (variant == "local") {
      out.emplace_back(LocalField{local_from_json(std::move(f))});
    } else if (variant == "benchmark") {
      out.emplace_back(benchmark_from_json(std::move(f), g));
    } else {
      throw ConfigError(o.path() + ": unknown variant '" + variant + "'", "variant");
    }
  }
  params.finish();
  o.finish();
  return out;
}

/// scale * e^{-decay xi} * g(y) * x^mark_power
inline MarkedScalarField marked_from_json(JsonObject o) {
  const double power = o.number_or("mark_power", 1.0);
  if (power != std::round(power) || power < 0.0) {
    throw ConfigError(o.sub("mark_power") + ": must be a nonnegative integer", "mark_power");
  }
  ScalarField base = local_from_json(std::move(o));
  const int p = static_cast<int>(power);
  return [base, p](double xi, double y, double x) { return base(xi, y) * std::pow(x, p); };
}

inline JumpField jumps_from_json(JsonObject o, const GridSpec& g) {
  const std::string variant = o.string("variant");
  const json& factors = o.array("factors");
  JumpField out;
  if (variant == "levy") {
    LevyJumps l;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      JsonObject f(factors[i], o.sub("factors[" + std::to_string(i) + "]"));
      CurveField delta = loading_from_json(f.object("field"), g);
      LevyMeasure fk = measure_from_json(f.object("measure"));
      f.finish();
      l.factors.push_back({std::move(delta), std::move(fk)});
    }
    out = std::move(l);
  } else if (variant == "marked") {
    MarkedJumps mk;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      JsonObject f(factors[i], o.sub("factors[" + std::to_string(i) + "]"));
      MarkedScalarField gamma = marked_from_json(f.object("field"));
      LevyMeasure fk = measure_from_json(f.object("measure"));
      f.finish();
      mk.components.push_back({std::move(gamma), std::move(fk)});
    }
    out = std::move(mk);
  } else {
    throw ConfigError(o.path() + ": unknown variant '" + variant + "'", "variant");
  }
  o.finish();
  return out;
}

/// Model keys of a document; `extra` lists further top-level keys the caller
/// handles itself.
inline ModelSpec model_from_json(const json& doc, const std::set<std::string>& extra = {}) {
  JsonObject top(doc, "");
  for (const auto& k : extra) top.accept(k);
  const GridSpec grid = grid_from_json(top.object("grid"));
  ModelSpec m{grid};
  m.space = top.has("space") ? space_from_json(top.object("space")) : SpaceParams{};
  if (top.has("noise")) {
    JsonObject noise = top.object("noise");
    m.noise.lambdas = noise.numbers("lambdas");
    noise.finish();
  }
  if (top.has("vol")) m.vol = vol_from_json(top.object("vol"), grid);
  if (top.has("jumps")) m.jumps = jumps_from_json(top.object("jumps"), grid);
  if (top.has("drift_mode")) {
    const json& d = top.get("drift_mode");
    if (d.is_string()) {
      const auto s = d.get<std::string>();
      if (s == "hjm") {
        m.drift_mode = DriftMode::Hjm;
      } else if (s == "zero") {
        m.drift_mode = DriftMode::Zero;
      } else {
        throw ConfigError("drift_mode: expected \"hjm\", \"zero\" or {custom: ...}", "drift_mode");
      }
    } else {
      JsonObject c(d, "drift_mode");
      m.drift_mode = DriftMode::Custom;
      m.custom_drift = local_from_json(c.object("custom"));
      c.finish();
    }
  }
  top.finish();
  m.validate();
  return m;
}

}  // namespace hjmm
