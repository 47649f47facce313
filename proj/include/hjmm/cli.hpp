#pragma once

// Command implementations behind tools/hjmm. One JSON document per run:
//
//   <model keys>  see model_json.hpp
//   run         {dt, horizon, n_paths, seed, threads, scheme, output_times,
//                initial_curve, maturity, residual_tol, quad_tol}
//   positivity  {n_samples, seed, tol, fd_step, strat_tol, y_max, n_y}
//   bh          {density, fields: [{kind: vol|jump, form, <local>, measure}],
//                mass_tol, maturities}
//
// Exit codes: 0 success, 1 check failed, 2 config error, 3 runtime error.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "hjmm/arbitrage.hpp"
#include "hjmm/brody_hughston.hpp"
#include "hjmm/curve_space.hpp"
#include "hjmm/errors.hpp"
#include "hjmm/model_json.hpp"
#include "hjmm/model_spec.hpp"
#include "hjmm/positivity.hpp"
#include "hjmm/simulator.hpp"

#ifndef HJMM_VERSION
#define HJMM_VERSION "0.0.0"
#endif

namespace hjmm::cli {

namespace fs = std::filesystem;

enum ExitCode : int { Success = 0, CheckFailed = 1, ConfigFailure = 2, RuntimeFailure = 3 };

struct Options {
  std::string command;
  fs::path config;
  fs::path out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool verbose = false;
};

/// Config error with the 1-based line of the offending key, 0 if unknown.
class LocatedError : public Error {
 public:
  LocatedError(const std::string& what, std::size_t line) : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// ---------------------------------------------------------------------------
// Config documents.

struct RunSection {
  SimConfig sim;
  std::vector<double> output_times;
  std::optional<std::vector<double>> initial_curve;
  std::optional<double> maturity;
  double residual_tol = 1e-6;
  double quad_tol = 1e-9;
};

struct BHSection {
  std::vector<double> density;
  BHFieldSpec fields;
  double mass_tol = 1e-3;
  std::vector<double> maturities;
};

struct Document {
  json raw;
  GridSpec grid;
  ModelSpec model;
  std::optional<RunSection> run;
  PositivityOptions positivity;
  std::optional<BHSection> bh;
};

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Follows the components of a dotted key path ("vol.params.factors[0]")
/// through the raw text and returns the line of the last one found.
inline std::size_t locate_key(const std::string& text, const std::string& path, const std::string& key) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string p; std::getline(ss, p, '.');) {
    const auto br = p.find('[');
    if (br != std::string::npos) p = p.substr(0, br);
    if (!p.empty()) parts.push_back(p);
  }
  if (!key.empty() && (parts.empty() || parts.back() != key)) parts.push_back(key);
  std::size_t pos = 0;
  std::optional<std::size_t> found;
  for (const auto& p : parts) {
    const auto at = text.find('"' + p + '"', pos);
    if (at == std::string::npos) continue;
    found = at;
    pos = at + p.size() + 2;
  }
  return found ? line_of_offset(text, *found) : 0;
}

inline RunSection run_from_json(JsonObject o, const GridSpec& g) {
  RunSection r;
  r.sim.dt = o.number("dt");
  r.sim.horizon = o.number("horizon");
  r.sim.n_paths = static_cast<std::size_t>(o.unsigned_or("n_paths", 1));
  r.sim.seed = o.unsigned_or("seed", 0);
  r.sim.threads = static_cast<unsigned>(o.unsigned_or("threads", 1));
  const std::string scheme = o.string_or("scheme", "moving_frame");
  if (scheme == "moving_frame") {
    r.sim.scheme = Scheme::MovingFrame;
  } else if (scheme == "mild_splitting") {
    r.sim.scheme = Scheme::MildSplitting;
  } else {
    throw ConfigError(o.sub("scheme") + ": expected moving_frame or mild_splitting", "scheme");
  }
  r.output_times = o.has("output_times") ? o.numbers("output_times") : std::vector<double>{0.0, r.sim.horizon};
  if (o.has("initial_curve")) r.initial_curve = curve_from_json(o.object("initial_curve"), g);
  if (o.has("maturity")) r.maturity = o.number("maturity");
  r.residual_tol = o.number_or("residual_tol", r.residual_tol);
  r.quad_tol = o.number_or("quad_tol", r.quad_tol);
  o.finish();
  try {
    r.sim.validate(g);
    validate_output_times(r.output_times, r.sim);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("run.") + e.what(), e.key());
  }
  if (r.maturity && !(*r.maturity > 0.0)) throw ConfigError("run.maturity: must be > 0", "maturity");
  return r;
}

inline BHField bh_field_from_json(JsonObject& o) {
  BHField f;
  const std::string form = o.string_or("form", "centered");
  if (form == "centered") {
    f.form = BHField::Form::Centered;
  } else if (form == "raw") {
    f.form = BHField::Form::Raw;
  } else {
    throw ConfigError(o.sub("form") + ": expected centered or raw", "form");
  }
  return f;
}

inline BHSection bh_from_json(JsonObject o, const GridSpec& g) {
  BHSection b;
  b.density = curve_from_json(o.object("density"), g);
  const json& fields = o.array("fields");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    JsonObject f(fields[i], o.sub("fields[" + std::to_string(i) + "]"));
    const std::string kind = f.string("kind");
    BHField field = bh_field_from_json(f);
    if (kind == "vol") {
      field.a = local_from_json(std::move(f));
      b.fields.vol.push_back(std::move(field));
    } else if (kind == "jump") {
      LevyMeasure measure = measure_from_json(f.object("measure"));
      field.a = local_from_json(std::move(f));
      b.fields.jumps.push_back({std::move(field), std::move(measure)});
    } else {
      throw ConfigError(f.sub("kind") + ": expected vol or jump", "kind");
    }
  }
  b.mass_tol = o.number_or("mass_tol", b.mass_tol);
  if (o.has("maturities")) {
    b.maturities = o.numbers("maturities");
  } else {
    for (double T = 0.0; T <= g.xi_max() * (1.0 + 1e-12); T += 1.0) b.maturities.push_back(T);
  }
  for (double T : b.maturities) {
    if (T < 0.0 || T > g.xi_max() * (1.0 + 1e-12)) throw ConfigError("bh.maturities: outside [0, xi_max]", "maturities");
  }
  o.finish();
  return b;
}

inline void positivity_from_json(JsonObject o, Document& d) {
  auto& p = d.positivity;
  p.n_samples = static_cast<std::size_t>(o.unsigned_or("n_samples", p.n_samples));
  p.seed = o.unsigned_or("seed", p.seed);
  p.tol = o.number_or("tol", p.tol);
  p.fd_step = o.number_or("fd_step", p.fd_step);
  p.strat_tol = o.number_or("strat_tol", p.strat_tol);
  p.scalar.y_max = o.number_or("y_max", p.scalar.y_max);
  p.scalar.n_y = static_cast<std::size_t>(o.unsigned_or("n_y", p.scalar.n_y));
  p.scalar.tol = p.tol;
  o.finish();
  if (p.scalar.n_y < 2) throw ConfigError("positivity.n_y: must be >= 2", "n_y");
}

/// Parses and validates every section present in the document.
inline Document parse_document(const json& raw) {
  static const std::set<std::string> sections{"run", "positivity", "bh"};
  ModelSpec model = model_from_json(raw, sections);
  Document d{raw, model.grid, std::move(model), {}, {}, {}};
  JsonObject top(raw, "");
  if (top.has("run")) d.run = run_from_json(top.object("run"), d.grid);
  if (top.has("positivity")) positivity_from_json(top.object("positivity"), d);
  if (top.has("bh")) d.bh = bh_from_json(top.object("bh"), d.grid);
  return d;
}

/// Parses config text; every schema failure becomes a LocatedError.
inline Document load_document(const std::string& text) {
  json raw;
  try {
    raw = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LocatedError(std::string("malformed JSON: ") + e.what(), line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  try {
    return parse_document(raw);
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    const auto colon = what.find(": ");
    const std::string path = colon == std::string::npos ? std::string() : what.substr(0, colon);
    throw LocatedError(what, locate_key(text, path, e.key()));
  } catch (const Error& e) {
    throw LocatedError(e.what(), 0);
  }
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Output.

/// JSON number, or a string for non-finite values.
inline json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

/// Writes via a temporary file and rename.
inline void write_atomic(const fs::path& p, const std::string& content) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, p);
}

inline void write_json(const fs::path& p, const json& j) { write_atomic(p, j.dump(2) + "\n"); }

inline json to_json(const MartingaleReport& r) {
  return json{{"T", r.maturity},       {"times", numbers(r.times)}, {"mean", numbers(r.mean)},
              {"se", numbers(r.se)},   {"max_z", number(r.max_z)},  {"pass", r.pass}};
}

inline json to_json(const Witness& w) {
  return json{{"node", w.node},       {"xi", w.xi},       {"component", w.component},
              {"mark", number(w.mark)}, {"y", number(w.y)}, {"value", number(w.value)},
              {"step", number(w.step)}, {"curve", numbers(w.curve)}};
}

inline json to_json(const ConditionResult& c) {
  json j{{"id", c.id}, {"verdict", to_string(c.verdict)}, {"evidence_level", to_string(c.evidence)},
         {"tol", number(c.tol)}};
  if (c.witness) j["witness"] = to_json(*c.witness);
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

inline json to_json(const std::vector<ConditionResult>& cs) {
  json conds = json::array();
  bool all = true;
  for (const auto& c : cs) {
    conds.push_back(to_json(c));
    all = all && c.ok();
  }
  return json{{"conditions", conds}, {"all_hold", all}};
}

inline std::string wall_clock() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Commands.

struct Context {
  const Options& opt;
  const Document& doc;
  std::ostream& log;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  double runtime() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  void note(const std::string& msg) const {
    if (opt.verbose) log << "hjmm: " << msg << '\n';
  }

  const RunSection& run() const {
    if (!doc.run) throw LocatedError("config: command '" + opt.command + "' needs a 'run' section", 0);
    return *doc.run;
  }

  /// run.sim with --seed / --threads applied.
  SimConfig sim() const {
    SimConfig s = run().sim;
    if (opt.seed) s.seed = *opt.seed;
    if (opt.threads) s.threads = *opt.threads;
    if (s.threads == 0) s.threads = std::max(1u, std::thread::hardware_concurrency());
    return s;
  }

  ForwardCurve initial_curve() const {
    const auto& r = run();
    if (!r.initial_curve) throw LocatedError("config: run.initial_curve is required by '" + opt.command + "'", 0);
    return ForwardCurve(doc.grid, *r.initial_curve);
  }

  double maturity() const {
    const auto& r = run();
    if (!r.maturity) throw LocatedError("config: run.maturity is required by '" + opt.command + "'", 0);
    return *r.maturity;
  }

  fs::path out(const std::string& name) const { return opt.out / name; }
};

inline std::string jump_rows(std::size_t path, const std::vector<JumpEvent>& jumps) {
  std::string s;
  for (const auto& e : jumps) {
    s += std::to_string(path) + ',' + format_double(e.time) + ',' + std::to_string(e.factor) + ',' +
         format_double(e.size) + '\n';
  }
  return s;
}

inline std::string curve_rows(std::size_t path, double t, const ForwardCurve& r) {
  std::string s;
  const std::string prefix = std::to_string(path) + ',' + format_double(t) + ',';
  for (std::size_t i = 0; i < r.size(); ++i) {
    s += prefix + format_double(r.grid().node(i)) + ',' + format_double(r[i]) + '\n';
  }
  return s;
}

inline int cmd_simulate(const Context& ctx) {
  const auto cfg = ctx.sim();
  const auto h0 = ctx.initial_curve();
  const auto& times = ctx.run().output_times;
  ctx.note("simulating " + std::to_string(cfg.n_paths) + " paths, " + std::to_string(cfg.steps()) + " steps");
  EnsembleResult res;
  res.output_times = times;
  res.step_times = step_times(cfg);
  res.paths = run_paths(ctx.doc.model, h0, cfg, times, [](std::size_t, PathResult&& p) { return std::move(p); }, false);

  std::string paths = "path,t,xi,value\n";
  std::string jumps = "path,t,factor,size\n";
  for (std::size_t p = 0; p < res.paths.size(); ++p) {
    const auto& path = res.paths[p];
    for (std::size_t o = 0; o < path.snapshots.size(); ++o) paths += curve_rows(p, times[o], path.snapshots[o]);
    jumps += jump_rows(p, path.jumps);
  }
  write_atomic(ctx.out("paths.csv"), paths);
  write_atomic(ctx.out("jumps.csv"), jumps);
  const std::size_t exploded = res.exploded_paths();
  write_json(ctx.out("diagnostics.json"), json{{"min_value", number(res.min_value())},
                                               {"exploded_paths", exploded},
                                               {"runtime_seconds", ctx.runtime()}});
  ctx.note("wrote " + std::to_string(res.paths.size()) + " paths");
  if (exploded > 0) {
    ctx.log << "hjmm: " << exploded << " path(s) exploded\n";
    return RuntimeFailure;
  }
  return Success;
}

inline int cmd_check_positivity(const Context& ctx) {
  const auto rep = check_positivity(ctx.doc.model, ctx.doc.positivity);
  write_json(ctx.out("positivity.json"), to_json(rep.conditions));
  for (const auto& c : rep.conditions) ctx.note(c.id + ": " + to_string(c.verdict) + " (" + to_string(c.evidence) + ")");
  if (rep.all_hold()) return Success;
  for (const auto& c : rep.conditions) {
    if (!c.ok()) {
      ctx.log << "hjmm: condition " << c.id << " " << to_string(c.verdict);
      if (c.witness) ctx.log << " at xi = " << format_double(c.witness->xi) << ", value " << format_double(c.witness->value);
      ctx.log << '\n';
    }
  }
  return CheckFailed;
}

inline int cmd_verify_arbitrage(const Context& ctx) {
  const auto cfg = ctx.sim();
  const auto h0 = ctx.initial_curve();
  const double T = ctx.maturity();
  const auto& run = ctx.run();
  const auto& times = run.output_times;
  const double residual = integrated_drift_residual(ctx.doc.model, h0);
  ctx.note("drift residual " + format_double(residual));

  struct Summary {
    std::vector<double> series;
    double min_value;
    bool exploded;
  };
  const auto summaries = run_paths(
      ctx.doc.model, h0, cfg, times,
      [&](std::size_t, PathResult&& p) {
        Summary s{{}, p.min_value, p.exploded};
        if (!p.exploded) s.series = discounted_bond_series(p, times, cfg.dt, T);
        return s;
      },
      false);
  double min_value = std::numeric_limits<double>::infinity();
  std::size_t exploded = 0;
  std::vector<std::vector<double>> values;
  for (const auto& s : summaries) {
    min_value = std::min(min_value, s.min_value);
    exploded += s.exploded ? 1 : 0;
    values.push_back(s.series);
  }
  json diag{{"min_value", number(min_value)},
            {"exploded_paths", exploded},
            {"drift_residual", number(residual)},
            {"residual_tol", run.residual_tol}};
  if (exploded > 0) {
    diag["runtime_seconds"] = ctx.runtime();
    write_json(ctx.out("diagnostics.json"), diag);
    ctx.log << "hjmm: " << exploded << " path(s) exploded\n";
    return RuntimeFailure;
  }
  const auto rep = martingale_test(values, observation_times(times, T, ctx.doc.grid.xi_max()), T, run.quad_tol);
  write_json(ctx.out("martingale.json"), to_json(rep));
  diag["runtime_seconds"] = ctx.runtime();
  write_json(ctx.out("diagnostics.json"), diag);
  ctx.note("martingale max_z " + format_double(rep.max_z) + (rep.pass ? " PASS" : " FAIL"));
  const bool ok = residual <= run.residual_tol && rep.pass;
  if (!ok) {
    if (residual > run.residual_tol) ctx.log << "hjmm: drift residual " << format_double(residual) << " above tolerance\n";
    if (!rep.pass) ctx.log << "hjmm: martingale test FAIL, max |z| = " << format_double(rep.max_z) << '\n';
  }
  return ok ? Success : CheckFailed;
}

inline int cmd_bh(const Context& ctx) {
  if (!ctx.doc.bh) throw LocatedError("config: command 'bh' needs a 'bh' section", 0);
  const auto& bh = *ctx.doc.bh;
  const auto& run = ctx.run();
  const auto sim = ctx.sim();
  BHConfig cfg;
  cfg.dt = sim.dt;
  cfg.horizon = sim.horizon;
  cfg.n_paths = sim.n_paths;
  cfg.seed = sim.seed;
  cfg.threads = sim.threads;
  cfg.mass_tol = bh.mass_tol;
  const auto rho0 = DensityCurve::make(ForwardCurve(ctx.doc.grid, bh.density), bh.mass_tol);
  const auto checks = validate_bh_fields(bh.fields, sample_boundary_densities(ctx.doc.grid, ctx.doc.positivity.n_samples,
                                                                             ctx.doc.positivity.seed),
                                         ctx.doc.positivity.tol);
  write_json(ctx.out("positivity.json"), to_json(checks));

  const auto& times = run.output_times;
  ctx.note("simulating " + std::to_string(cfg.n_paths) + " density paths");
  const auto paths = simulate_bh(bh.fields, rho0, cfg, times);

  std::string dens = "path,t,u,value\n";
  std::string mass = "path,t,mass\n";
  std::string prices = "path,t,T,price\n";
  std::string jumps = "path,t,factor,size\n";
  double min_value = std::numeric_limits<double>::infinity();
  double mass_err = 0.0;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const auto& path = paths[p];
    for (std::size_t o = 0; o < path.snapshots.size(); ++o) {
      const double t = times[o];
      dens += curve_rows(p, t, path.snapshots[o]);
      for (double T : bh.maturities) {
        if (T < t || T - t > ctx.doc.grid.xi_max() * (1.0 + 1e-12)) continue;
        prices += std::to_string(p) + ',' + format_double(t) + ',' + format_double(T) + ',' +
                  format_double(bh_bond_price(path.snapshots[o], t, T)) + '\n';
      }
    }
    for (std::size_t k = 0; k < path.mass.size(); ++k) {
      mass += std::to_string(p) + ',' + format_double(static_cast<double>(k) * cfg.dt) + ',' + format_double(path.mass[k]) + '\n';
      mass_err = std::max(mass_err, std::abs(path.mass[k] - 1.0));
    }
    jumps += jump_rows(p, path.jumps);
    min_value = std::min(min_value, path.min_value);
  }
  write_atomic(ctx.out("densities.csv"), dens);
  write_atomic(ctx.out("mass.csv"), mass);
  write_atomic(ctx.out("prices.csv"), prices);
  write_atomic(ctx.out("jumps.csv"), jumps);

  int code = Success;
  if (run.maturity) {
    const auto rep = bh_martingale_test(paths, times, cfg.dt, *run.maturity, run.quad_tol);
    write_json(ctx.out("martingale.json"), to_json(rep));
    ctx.note("martingale max_z " + format_double(rep.max_z) + (rep.pass ? " PASS" : " FAIL"));
    if (!rep.pass) {
      ctx.log << "hjmm: martingale test FAIL, max |z| = " << format_double(rep.max_z) << '\n';
      code = CheckFailed;
    }
  }
  write_json(ctx.out("diagnostics.json"), json{{"min_value", number(min_value)},
                                               {"exploded_paths", 0},
                                               {"max_mass_error", number(mass_err)},
                                               {"runtime_seconds", ctx.runtime()}});
  return code;
}

// ---------------------------------------------------------------------------
// Driver.

inline const std::set<std::string>& commands() {
  static const std::set<std::string> c{"simulate", "check-positivity", "verify-arbitrage", "bh"};
  return c;
}

/// Runs one command on parsed config text. `config_label` names the config
/// in messages and the manifest.
inline int run_text(const Options& opt, const std::string& text, const std::string& config_label, std::ostream& log) {
  try {
    if (!commands().count(opt.command)) throw LocatedError("unknown command '" + opt.command + "'", 0);
    const Document doc = load_document(text);
    fs::create_directories(opt.out);
    Context ctx{opt, doc, log};
    int code = Success;
    if (opt.command == "simulate") {
      code = cmd_simulate(ctx);
    } else if (opt.command == "check-positivity") {
      code = cmd_check_positivity(ctx);
    } else if (opt.command == "verify-arbitrage") {
      code = cmd_verify_arbitrage(ctx);
    } else {
      code = cmd_bh(ctx);
    }
    if (code == Success || code == CheckFailed) {
      json manifest{{"command", opt.command},
                    {"config", config_label},
                    {"config_document", doc.raw},
                    {"seed", doc.run ? (opt.seed ? *opt.seed : doc.run->sim.seed) : 0},
                    {"out_dir", opt.out.string()},
                    {"version", HJMM_VERSION},
                    {"wall_clock", wall_clock()}};
      write_json(opt.out / "manifest.json", manifest);
    }
    return code;
  } catch (const LocatedError& e) {
    log << "hjmm: " << config_label;
    if (e.line() > 0) log << ':' << e.line();
    log << ": " << e.what() << '\n';
    return ConfigFailure;
  } catch (const InsufficientSampleError& e) {
    log << "hjmm: " << config_label << ": " << e.what() << '\n';
    return ConfigFailure;
  } catch (const ConservationError& e) {
    log << "hjmm: mass conservation failed at t = " << format_double(e.time()) << ", mass "
        << format_double(e.mass()) << ": " << e.what() << '\n';
    return RuntimeFailure;
  } catch (const std::exception& e) {
    log << "hjmm: " << e.what() << '\n';
    return RuntimeFailure;
  }
}

inline int run(const Options& opt, std::ostream& log = std::cerr) {
  std::string text;
  try {
    text = read_file(opt.config);
  } catch (const Error& e) {
    log << "hjmm: " << e.what() << '\n';
    return ConfigFailure;
  }
  return run_text(opt, text, opt.config.string(), log);
}

/// Re-runs the command recorded in a manifest into `out`.
inline int replay(const fs::path& manifest_path, const fs::path& out, std::optional<unsigned> threads, bool verbose,
                  std::ostream& log = std::cerr) {
  json m;
  try {
    m = json::parse(read_file(manifest_path));
    Options opt;
    opt.command = m.at("command").get<std::string>();
    opt.out = out;
    opt.seed = m.at("seed").get<std::uint64_t>();
    opt.threads = threads;
    opt.verbose = verbose;
    return run_text(opt, m.at("config_document").dump(), m.at("config").get<std::string>(), log);
  } catch (const json::exception& e) {
    log << "hjmm: " << manifest_path.string() << ": bad manifest: " << e.what() << '\n';
    return ConfigFailure;
  } catch (const Error& e) {
    log << "hjmm: " << e.what() << '\n';
    return ConfigFailure;
  }
}

}  // namespace hjmm::cli
