#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hjmm/model_json.hpp"
#include "hjmm/model_spec.hpp"
#include "support/models.hpp"
#include "support/random_curves.hpp"

namespace hjmm {
namespace {

GridSpec grid20(std::size_t n = 2001) { return GridSpec::make(20.0, 5.0, n); }

std::size_t node_at(const GridSpec& g, double xi) { return static_cast<std::size_t>(std::llround(xi / g.spacing())); }

// Brute-force trapezoid over a fine partition of [lo, hi] against density c e^{-r x}.
double brute_integral(double lo, double hi, double rate, double mass, const std::function<double(double)>& f) {
  const int n = 200000;
  const double dx = (hi - lo) / n;
  double z = 0.0, s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * dx;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    z += w * std::exp(-rate * x);
    s += w * std::exp(-rate * x) * f(x);
  }
  return mass * s / z;
}

TEST(BigSigma, VasicekClosedForm) {
  const auto g = grid20();
  const auto m = testing::vasicek(g, 0.02, 0.1);
  const auto h = ForwardCurve::constant(g, 0.0);
  const auto s = big_sigma(m, h, 0);
  EXPECT_EQ(s[0], 0.0);
  EXPECT_NEAR(s[node_at(g, 10.0)], 0.2 * (1.0 - std::exp(-1.0)), 1e-7);
  EXPECT_NEAR(s[node_at(g, 10.0)], 0.126424, 1e-6);
}

TEST(BigSigma, ZeroAndConstant) {
  const auto g = grid20(401);
  ModelSpec m{g};
  m.noise.lambdas = {1.0, 1.0};
  m.vol = {DeterministicField{std::vector<double>(g.size(), 0.0)}, DeterministicField{std::vector<double>(g.size(), 0.3)}};
  const auto h = ForwardCurve::constant(g, 0.01);
  const auto z1 = big_sigma(m, h, 0);
  for (double v : z1.values()) EXPECT_EQ(v, 0.0);
  const auto s = big_sigma(m, h, 1);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(s[i], 0.3 * g.node(i), 1e-12);
}

TEST(BigSigma, NoiseWeightScalesField) {
  const auto g = grid20(401);
  auto m = testing::vasicek(g, 0.02, 0.1);
  m.noise.lambdas = {4.0};
  const auto h = ForwardCurve::constant(g, 0.0);
  EXPECT_NEAR(volatility(m, h, 0)[0], 0.04, 1e-15);
}

TEST(BigGamma, ConstantAndExponentialLoadings) {
  const auto g = grid20();
  const auto h = ForwardCurve::constant(g, 0.0);
  const auto flat = testing::levy_point_mass(g, 0.01, 1.0, 2.0);
  const auto gc = big_gamma(flat, h, Mark{0, 0.7});
  for (std::size_t i = 0; i < g.size(); i += 97) EXPECT_NEAR(gc[i], -0.007 * g.node(i), 1e-13);
  EXPECT_EQ(gc[0], 0.0);

  ModelSpec m{g};
  m.jumps = LevyJumps{{{DeterministicField{testing::exp_curve(g, 0.05, 0.3)}, LevyMeasure(PointMass{1.0, 1.0})}}};
  const auto ge = big_gamma(m, h, Mark{0, -2.0});
  for (std::size_t i = 0; i < g.size(); i += 97) {
    const double xi = g.node(i);
    EXPECT_NEAR(ge[i], -(0.05 * -2.0 / 0.3) * (1.0 - std::exp(-0.3 * xi)), 1e-6);
  }
  ModelSpec none{g};
  const auto z2 = big_gamma(none, h, Mark{0, 1.0});
  for (double v : z2.values()) EXPECT_EQ(v, 0.0);
}

TEST(Cumulant, PointMassAndAtoms) {
  const LevyMeasure pm(PointMass{0.5, 2.0});
  EXPECT_EQ(cumulant_psi_prime(pm, 0.0), 0.0);
  EXPECT_NEAR(cumulant_psi_prime(pm, 1.0), 2.0 * 0.5 * (std::exp(0.5) - 1.0), 1e-15);
  EXPECT_NEAR(cumulant_psi_prime(pm, 1.0), 0.648721, 1e-6);

  const LevyMeasure cp(DiscreteJumps{3.0, {{0.5, 0.4}, {-0.25, 0.6}}});
  double oracle = 0.0;
  for (auto [a, p] : {std::pair{0.5, 0.4}, std::pair{-0.25, 0.6}}) oracle += 3.0 * p * a * (std::exp(0.2 * a) - 1.0);
  EXPECT_NEAR(cumulant_psi_prime(cp, 0.2), oracle, 1e-15);
  double psi = 0.0;
  for (auto [a, p] : {std::pair{0.5, 0.4}, std::pair{-0.25, 0.6}}) psi += 3.0 * p * (std::exp(0.2 * a) - 1.0 - 0.2 * a);
  EXPECT_NEAR(cumulant_psi(cp, 0.2), psi, 1e-15);
  EXPECT_NEAR(cp.first_moment(), 3.0 * (0.4 * 0.5 - 0.6 * 0.25), 1e-15);
}

TEST(Cumulant, TruncatedExponentialMatchesQuadrature) {
  for (const auto& t : {TruncatedExponential{2.0, 1.5, -0.5, 1.0}, TruncatedExponential{0.7, -2.0, 0.1, 3.0},
                        TruncatedExponential{1.0, 1e-3, -1.0, 1.0}}) {
    const LevyMeasure fk(t);
    for (double z : {-3.0, -0.4, -1e-4, 0.0, 1e-4, 0.3, 2.5}) {
      const double pp = brute_integral(t.lower, t.upper, t.rate, t.intensity, [z](double x) { return x * std::expm1(z * x); });
      const double ps = brute_integral(t.lower, t.upper, t.rate, t.intensity,
                                       [z](double x) { return std::expm1(z * x) - z * x; });
      EXPECT_NEAR(fk.psi_prime(z), pp, 1e-8 * (1.0 + std::abs(pp)));
      EXPECT_NEAR(fk.psi(z), ps, 1e-8 * (1.0 + std::abs(ps)));
    }
    EXPECT_NEAR(fk.first_moment(), brute_integral(t.lower, t.upper, t.rate, t.intensity, [](double x) { return x; }), 1e-9);
  }
}

TEST(Cumulant, NondecreasingAndDomain) {
  const std::vector<LevyMeasure> measures{LevyMeasure(PointMass{-0.8, 1.0}),
                                          LevyMeasure(DiscreteJumps{2.0, {{1.0, 0.3}, {-2.0, 0.7}}}),
                                          LevyMeasure(TruncatedExponential{1.0, 0.5, -1.0, 2.0})};
  for (const auto& fk : measures) {
    EXPECT_EQ(fk.psi_prime(0.0), 0.0);
    double prev = -std::numeric_limits<double>::infinity();
    for (double z = -fk.smoothness_radius(); z <= fk.smoothness_radius(); z += 0.05) {
      const double v = fk.psi_prime(z);
      EXPECT_GE(v, prev - 1e-12);
      prev = v;
    }
    EXPECT_THROW(fk.psi_prime(fk.smoothness_radius() * 1.01), DomainError);
  }
}

TEST(LevyMeasure, Validation) {
  EXPECT_THROW(LevyMeasure(PointMass{0.0, 1.0}), ConfigError);
  EXPECT_THROW(LevyMeasure(DiscreteJumps{1.0, {{0.5, 0.5}, {0.0, 0.5}}}), ConfigError);
  EXPECT_THROW(LevyMeasure(DiscreteJumps{1.0, {{0.5, 0.5}, {1.0, 0.4}}}), ConfigError);
  EXPECT_THROW(LevyMeasure(TruncatedExponential{1.0, 1.0, 2.0, 1.0}), ConfigError);
  // e^{(1+eps) N x} overflows for x = 100
  EXPECT_THROW(LevyMeasure(PointMass{100.0, 1.0}, 10.0, 1.0), ConfigError);
  EXPECT_NO_THROW(LevyMeasure(PointMass{100.0, 1.0}, 1.0, 1.0));
}

TEST(LevyMeasure, SamplingMatchesLaw) {
  std::mt19937_64 rng(5);
  const LevyMeasure te(TruncatedExponential{1.0, 1.2, -0.5, 2.0});
  const LevyMeasure cp(DiscreteJumps{1.0, {{0.5, 0.25}, {-1.0, 0.75}}});
  const LevyMeasure pm(PointMass{0.3, 4.0});
  double s_te = 0.0, s_cp = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = te.sample_size(rng);
    ASSERT_GE(x, -0.5);
    ASSERT_LE(x, 2.0);
    s_te += x;
    s_cp += cp.sample_size(rng);
    ASSERT_EQ(pm.sample_size(rng), 0.3);
  }
  EXPECT_NEAR(s_te / n, te.first_moment(), 0.01);
  EXPECT_NEAR(s_cp / n, cp.first_moment(), 0.01);
}

TEST(HjmDrift, VasicekClosedForm) {
  const auto g = grid20();
  const auto m = testing::vasicek(g, 0.02, 0.1);
  const auto a = hjm_drift(m, ForwardCurve::constant(g, 0.03));
  EXPECT_EQ(a[0], 0.0);
  EXPECT_NEAR(a[node_at(g, 10.0)], 0.004 * std::exp(-1.0) * (1.0 - std::exp(-1.0)), 1e-9);
  // 0.004 e^{-1} (1 - e^{-1}) = 9.30177e-4
  EXPECT_NEAR(a[node_at(g, 10.0)], 9.30177e-4, 1e-8);
}

TEST(HjmDrift, LevyPointMassBothRoutes) {
  const auto g = grid20();
  const double d0 = 0.01, mu = 2.0;
  const auto m = testing::levy_point_mass(g, d0, 1.0, mu);
  const auto h = ForwardCurve::constant(g, 0.0);
  const auto a = hjm_drift(m, h);
  const auto b = hjm_drift_levy(m, h);
  for (std::size_t i = 0; i < g.size(); i += 50) {
    const double oracle = -mu * d0 * std::expm1(-d0 * g.node(i));
    EXPECT_NEAR(a[i], oracle, 1e-14);
    EXPECT_NEAR(b[i], oracle, 1e-14);
  }
}

TEST(HjmDrift, ZeroModel) {
  const auto g = grid20(401);
  ModelSpec m{g};
  const auto z3 = hjm_drift(m, ForwardCurve::constant(g, 1.0));
  for (double v : z3.values()) EXPECT_EQ(v, 0.0);
  const auto z4 = hjm_drift_levy(m, ForwardCurve::constant(g, 1.0));
  for (double v : z4.values()) EXPECT_EQ(v, 0.0);
}

TEST(HjmDrift, LevyRouteAgreesWithAtomSum) {
  const auto g = grid20(801);
  std::mt19937_64 rng(41);
  for (int c = 0; c < 20; ++c) {
    const auto m = testing::random_levy_model(g, rng);
    const auto h = testing::random_curve(g, rng);
    const auto generic = hjm_drift_jump_part(m, h);
    const auto levy = hjm_drift_levy(m, h);
    for (std::size_t i = 0; i < g.size(); ++i) ASSERT_NEAR(generic[i], levy[i], 1e-12);
  }
}

TEST(HjmDrift, VanishesAtZeroMaturity) {
  const auto g = grid20(401);
  std::mt19937_64 rng(43);
  for (int c = 0; c < 20; ++c) {
    const auto m = testing::random_levy_model(g, rng);
    EXPECT_EQ(hjm_drift(m, testing::random_curve(g, rng))[0], 0.0);
  }
}

TEST(HjmDrift, StateIndependentModelsIgnoreTheCurve) {
  const auto g = grid20(401);
  const auto m = testing::vasicek_with_jumps(g, 0.02, 0.1, 0.01, 0.2, 1.0, {{0.5, 0.5}, {-0.5, 0.5}});
  std::mt19937_64 rng(47);
  EXPECT_EQ(hjm_drift(m, testing::random_curve(g, rng)), hjm_drift(m, testing::random_curve(g, rng)));
  EXPECT_TRUE(m.state_independent());
}

TEST(HjmDrift, TruncatedExponentialNeedsCumulantRoute) {
  const auto g = grid20(401);
  ModelSpec m{g};
  m.jumps = LevyJumps{{{DeterministicField{testing::exp_curve(g, 0.01, 0.5)},
                        LevyMeasure(TruncatedExponential{1.0, 1.0, -0.5, 1.0})}}};
  const auto h = ForwardCurve::constant(g, 0.0);
  EXPECT_THROW(hjm_drift(m, h), UnsupportedMeasureError);
  EXPECT_NO_THROW(hjm_drift_levy(m, h));
  EXPECT_LT(integrated_drift_residual(m, h), 1e-7);
}

TEST(HjmDrift, LevyRouteDomainError) {
  const auto g = grid20(401);
  ModelSpec m{g};
  // int_0^20 delta = 20 > (1 + eps/4) N = 1.25
  m.jumps = LevyJumps{{{DeterministicField{std::vector<double>(g.size(), 1.0)}, LevyMeasure(PointMass{0.1, 1.0}, 1.0, 1.0)}}};
  EXPECT_THROW(hjm_drift_levy(m, ForwardCurve::constant(g, 0.0)), DomainError);
}

TEST(DriftResidual, SecondOrderUnderRefinement) {
  auto residuals = [](std::size_t n) {
    const auto g = grid20(n);
    const auto h = ForwardCurve::constant(g, 0.0);
    return std::pair{integrated_drift_residual(testing::vasicek(g, 0.02, 0.1), h),
                     integrated_drift_residual(testing::levy_point_mass(g, 0.01, 1.0, 2.0), h)};
  };
  const auto [v1, l1] = residuals(1001);
  const auto [v2, l2] = residuals(2001);
  EXPECT_LE(v2, 1e-6);
  EXPECT_LE(l2, 1e-6);
  EXPECT_NEAR(v1 / v2, 4.0, 1.2);
  EXPECT_NEAR(l1 / l2, 4.0, 1.2);
  EXPECT_EQ(integrated_drift_residual(ModelSpec{grid20(101)}, ForwardCurve::constant(grid20(101), 0.0)), 0.0);
}

TEST(ModelSpec, ValidateAndTails) {
  const auto g = grid20(401);
  auto m = testing::vasicek(g, 0.02, 0.1);
  m.noise.lambdas = {1.0, 1.0};
  EXPECT_THROW(m.validate(), ConfigError);
  m.noise.lambdas = {-1.0};
  EXPECT_THROW(m.validate(), ConfigError);

  const auto h = ForwardCurve::constant(g, 0.0);
  EXPECT_TRUE(check_field_tails(testing::vasicek(g, 0.02, 0.5), h, 0.2).empty());
  // e^{-0.02 * 20} = 0.67 of the peak: does not vanish at xi_max
  EXPECT_EQ(check_field_tails(testing::vasicek(g, 0.02, 0.02), h, 0.2).size(), 1u);
}

TEST(ModelJson, LoadsAllVariants) {
  const auto doc = json::parse(R"({
    "space": {"beta": 0.5, "beta_prime": 1.0},
    "grid": {"xi_max": 10, "t_max": 1, "n_points": 201},
    "noise": {"lambdas": [1.0, 0.5]},
    "vol": {"variant": "local", "params": {"factors": [
      {"shape": "capped", "scale": 0.3, "decay": 1.0, "cap": 0.1},
      {"shape": "linear", "scale": 0.1}]}},
    "jumps": {"variant": "levy", "factors": [
      {"field": {"shape": "linear", "scale": 1.0, "decay": 1.0},
       "measure": {"kind": "compound_poisson", "intensity": 1.5,
                   "atoms": [{"size": -0.5, "probability": 0.5}, {"size": 0.5, "probability": 0.5}]}},
      {"field": {"family": "exponential", "scale": 0.01, "decay": 0.5},
       "measure": {"kind": "truncated_exponential", "intensity": 1, "rate": 2, "lower": 0, "upper": 1}}]},
    "drift_mode": "hjm"
  })");
  const auto m = model_from_json(doc);
  EXPECT_EQ(m.factors(), 2u);
  EXPECT_EQ(m.jump_components(), 2u);
  EXPECT_DOUBLE_EQ(m.space.beta, 0.5);
  const auto h = ForwardCurve::constant(m.grid, 0.2);
  EXPECT_NEAR(volatility(m, h, 0)[0], 0.3 * 0.1, 1e-15);
  EXPECT_NEAR(volatility(m, h, 1)[0], std::sqrt(0.5) * 0.1 * 0.2, 1e-15);
  EXPECT_FALSE(m.state_independent());
}

TEST(ModelJson, BenchmarkMarkedAndCustomDrift) {
  const auto doc = json::parse(R"({
    "grid": {"xi_max": 10, "t_max": 1, "n_points": 101},
    "noise": {"lambdas": [1.0]},
    "vol": {"variant": "benchmark", "params": {"factors": [
      {"shape": {"family": "exponential", "scale": 1.0, "decay": 0.3},
       "functionals": [{"kind": "forward", "xi": 2.0}, {"kind": "yield", "xi": 5.0, "weight": 0.5}], "cap": 0.5}]}},
    "jumps": {"variant": "marked", "factors": [
      {"field": {"shape": "linear", "scale": 1.0, "mark_power": 1},
       "measure": {"kind": "point_mass", "size": -0.5, "intensity": 1.0}}]},
    "drift_mode": {"custom": {"shape": "constant", "scale": 0.001}}
  })");
  const auto m = model_from_json(doc);
  const auto h = ForwardCurve::constant(m.grid, 0.04);
  // level = 0.04 + 0.5 * 0.04 = 0.06
  EXPECT_NEAR(volatility(m, h, 0)[0], 0.06, 1e-14);
  EXPECT_NEAR(jump_values(m, h, Mark{0, -0.5})[3], -0.02, 1e-15);
  EXPECT_NEAR(model_drift(m, h)[7], 0.001, 1e-15);
}

TEST(ModelJson, StrictKeys) {
  auto expect_key = [](const char* text, const std::string& key) {
    try {
      model_from_json(json::parse(text));
      ADD_FAILURE() << "no error for " << text;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.key(), key) << e.what();
    }
  };
  expect_key(R"({"grid": {"xi_max": 10, "t_max": 1, "n_points": 101}, "volatility": {}})", "volatility");
  expect_key(R"({"grid": {"xi_max": 10, "t_max": 1, "n_points": 101, "dx": 0.1}})", "dx");
  expect_key(R"({"grid": {"xi_max": 10, "t_max": 1}})", "n_points");
  expect_key(R"({"grid": {"xi_max": 10, "t_max": 1, "n_points": 101}, "drift_mode": "fast"})", "drift_mode");
  expect_key(R"({"grid": {"xi_max": 10, "t_max": 1, "n_points": 101},
                "jumps": {"variant": "levy", "factors": [{"field": {"family": "constant", "value": 1},
                "measure": {"kind": "point_mass", "size": 0, "intensity": 1}}]}})", "size");
  EXPECT_NO_THROW(model_from_json(json::parse(R"({"grid": {"xi_max": 10, "t_max": 1, "n_points": 101}, "sim": 1})"),
                                  {"sim"}));
}

}  // namespace
}  // namespace hjmm
