#include <gtest/gtest.h>

#include <cmath>

#include "hjmm/positivity.hpp"
#include "support/models.hpp"

namespace hjmm {
namespace {

GridSpec grid() { return GridSpec::make(10.0, 2.0, 201); }

// sigma~(xi, y) = 0.3 min(y, 0.1) e^{-xi}, delta~(xi, y) = y e^{-xi}
ModelSpec local_positive(const GridSpec& g, std::vector<Atom> atoms = {{-0.5, 0.5}, {0.5, 0.5}}) {
  ModelSpec m{g};
  m.noise.lambdas = {1.0};
  m.vol = {LocalField{[](double xi, double y) { return 0.3 * std::min(y, 0.1) * std::exp(-xi); }}};
  m.jumps = LevyJumps{{{LocalField{[](double xi, double y) { return y * std::exp(-xi); }},
                        LevyMeasure(DiscreteJumps{1.0, std::move(atoms)})}}};
  return m;
}

ModelSpec proportional(const GridSpec& g, double c) {
  ModelSpec m{g};
  m.noise.lambdas = {1.0};
  m.vol = {LocalField{[c](double, double y) { return c * y; }}};
  return m;
}

void expect_witness_sound(const ModelSpec& m, const ConditionResult& c) {
  ASSERT_TRUE(c.witness.has_value()) << c.id;
  const double v = reevaluate_witness(m, c);
  EXPECT_EQ(v, c.witness->value) << c.id;
  if (c.id == "jump_in_cone" || c.id == "drift_inward" || c.note.find("< 0") != std::string::npos) {
    EXPECT_LT(v, -c.tol) << c.id;
  } else {
    EXPECT_GT(std::abs(v), c.tol) << c.id;
  }
}

TEST(BoundarySamples, CornersCountAndPinning) {
  const auto g = grid();
  const auto s = sample_boundary_curves(g, 40, 7);
  ASSERT_EQ(s.size(), 40u);
  for (double v : s[0].curve.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(s[1].zero_node, 1u);
  EXPECT_GT(s[1].curve[0], 0.0);
  EXPECT_GT(s[1].curve[2], 0.0);
  EXPECT_EQ(s[2].zero_node, g.size() - 1);
  for (const auto& b : s) {
    EXPECT_EQ(b.curve[b.zero_node], 0.0);
    for (double v : b.curve.values()) EXPECT_GE(v, 0.0);
  }
  EXPECT_EQ(sample_boundary_curves(g, 2, 7).size(), 2u);
  EXPECT_EQ(sample_boundary_curves(g, 40, 7)[17].curve, s[17].curve);
  EXPECT_NE(sample_boundary_curves(g, 40, 8)[17].curve, s[17].curve);
  EXPECT_EQ(sample_cone_curves(g, 9, 3).size(), 9u);
}

TEST(SigmaBoundary, VasicekFailsWithWitness) {
  const auto g = grid();
  const auto m = testing::vasicek(g, 0.02, 0.1);
  const auto res = check_sigma_boundary(m, sample_boundary_curves(g, 32, 1), 1e-12);
  EXPECT_EQ(res.verdict, Verdict::Fails);
  expect_witness_sound(m, res);
  // largest |sigma| over the boundary nodes: the all-zero curve at xi = 0
  EXPECT_NEAR(std::abs(res.witness->value), 0.02, 1e-15);
}

TEST(SigmaBoundary, ProportionalAndZeroHold) {
  const auto g = grid();
  const auto samples = sample_boundary_curves(g, 32, 1);
  EXPECT_EQ(check_sigma_boundary(proportional(g, 0.3), samples, 1e-12).verdict, Verdict::Holds);
  EXPECT_EQ(check_sigma_boundary(ModelSpec{g}, samples, 1e-12).verdict, Verdict::Holds);
}

TEST(JumpChecks, DeterministicLoadingFailsGammaBoundary) {
  const auto g = grid();
  const auto m = testing::levy_point_mass(g, 0.01, 1.0, 2.0);
  const auto b = sample_boundary_curves(g, 16, 2);
  const auto res = check_gamma_boundary(m, b, 1e-12);
  EXPECT_EQ(res.verdict, Verdict::Fails);
  expect_witness_sound(m, res);
  // positive jumps of a positive loading keep curves in P
  EXPECT_EQ(check_jump_stays_in_cone(m, sample_cone_curves(g, 16, 2), 1e-12).verdict, Verdict::Holds);
}

TEST(JumpChecks, OvershootingJumpLeavesCone) {
  const auto g = grid();
  ModelSpec m{g};
  m.jumps = LevyJumps{{{LocalField{[](double xi, double y) { return 2.0 * y * std::exp(-xi); }},
                        LevyMeasure(PointMass{-1.0, 1.0})}}};
  const auto res = check_jump_stays_in_cone(m, sample_cone_curves(g, 16, 3), 1e-12);
  EXPECT_EQ(res.verdict, Verdict::Fails);
  expect_witness_sound(m, res);
  const auto closed = check_local_closed_form(m);
  EXPECT_EQ(closed.verdict, Verdict::Fails);
  EXPECT_EQ(closed.note, "y + delta(xi, y) x < 0");
  expect_witness_sound(m, closed);
}

TEST(JumpChecks, NoJumpsHoldStructurally) {
  const auto g = grid();
  const auto r = check_positivity(proportional(g, 0.2));
  EXPECT_EQ(r.at("jump_in_cone").evidence, Evidence::Structural);
  EXPECT_EQ(r.at("gamma_boundary").evidence, Evidence::Structural);
  EXPECT_EQ(r.at("finite_compensator").verdict, Verdict::Holds);
  EXPECT_TRUE(r.all_hold());
}

TEST(DriftInward, HjmIsImpliedCustomIsSampled) {
  const auto g = grid();
  const auto b = sample_boundary_curves(g, 16, 4);
  auto m = proportional(g, 0.2);
  EXPECT_EQ(check_drift_inward(m, b, 1e-12).verdict, Verdict::Implied);
  m.drift_mode = DriftMode::Custom;
  m.custom_drift = [](double xi, double) { return -0.001 * std::exp(-xi); };
  const auto res = check_drift_inward(m, b, 1e-12);
  EXPECT_EQ(res.verdict, Verdict::Fails);
  expect_witness_sound(m, res);
  const auto closed = check_local_closed_form(m);
  EXPECT_EQ(closed.verdict, Verdict::Fails);
  expect_witness_sound(m, closed);
  m.custom_drift = [](double, double y) { return 0.5 * y; };
  EXPECT_EQ(check_drift_inward(m, b, 1e-12).verdict, Verdict::Holds);
}

TEST(ClosedForm, PositiveLocalModelPasses) {
  const auto g = grid();
  const auto m = local_positive(g);
  const auto closed = check_local_closed_form(m);
  EXPECT_EQ(closed.verdict, Verdict::Holds);
  EXPECT_EQ(closed.evidence, Evidence::ScalarGrid);
  // closed form holds => sampled checks hold
  const auto r = check_positivity(m);
  for (const auto& c : r.conditions) EXPECT_TRUE(c.ok()) << c.id << " " << to_string(c.verdict);
  // atoms down to -1 still satisfy y + y e^{-xi} x >= 0
  EXPECT_TRUE(check_positivity(local_positive(g, {{-1.0, 0.5}, {2.0, 0.5}})).all_hold());
}

TEST(ClosedForm, VasicekFailsAtZeroLevel) {
  const auto g = grid();
  const auto m = testing::vasicek(g, 0.02, 0.1);
  const auto c = check_local_closed_form(m);
  EXPECT_EQ(c.verdict, Verdict::Fails);
  EXPECT_EQ(c.note, "sigma(xi, 0) != 0");
  expect_witness_sound(m, c);
  EXPECT_FALSE(check_positivity(m).all_hold());
}

TEST(ClosedForm, MarkedFields) {
  const auto g = grid();
  ModelSpec m{g};
  m.jumps = MarkedJumps{{{[](double, double y, double x) { return x * y; }, LevyMeasure(PointMass{-0.9, 1.0})}}};
  EXPECT_EQ(check_local_closed_form(m).verdict, Verdict::Holds);
  m.jumps = MarkedJumps{{{[](double, double y, double x) { return x * (y + 0.01); }, LevyMeasure(PointMass{0.5, 1.0})}}};
  const auto c = check_local_closed_form(m);
  EXPECT_EQ(c.verdict, Verdict::Fails);
  EXPECT_EQ(c.note, "gamma(xi, 0, x) != 0");
  expect_witness_sound(m, c);
}

TEST(ClosedForm, BenchmarkNotApplicable) {
  const auto g = grid();
  ModelSpec m{g};
  m.noise.lambdas = {1.0};
  m.vol = {BenchmarkField{testing::exp_curve(g, 1.0, 0.3), {{BenchmarkKind::Forward, 1.0, 1.0}}, 0.1}};
  const auto c = check_local_closed_form(m);
  EXPECT_EQ(c.verdict, Verdict::NotApplicable);
  EXPECT_TRUE(c.ok());
}

TEST(EveryFailingWitnessReevaluates, AcrossModels) {
  const auto g = grid();
  std::vector<ModelSpec> models{testing::vasicek(g, 0.02, 0.1), testing::levy_point_mass(g, 0.01, -1.0, 2.0),
                                testing::vasicek_with_jumps(g, 0.02, 0.1, 0.5, 0.1, 1.0, {{-3.0, 0.5}, {1.0, 0.5}})};
  for (const auto& m : models) {
    const auto report = check_positivity(m);
    for (const auto& c : report.conditions) {
      if (c.verdict == Verdict::Fails) expect_witness_sound(m, c);
    }
  }
}

TEST(Stratonovich, StateIndependentAndZeroVolatility) {
  const auto g = grid();
  const auto h = ForwardCurve::from_function(g, [](double x) { return 0.03 + 0.01 * std::sin(x); });
  for (double v : stratonovich_correction(testing::vasicek(g, 0.02, 0.1), h, 1e-4)) EXPECT_EQ(v, 0.0);
  for (double v : stratonovich_correction(ModelSpec{g}, h, 1e-4)) EXPECT_EQ(v, 0.0);
}

TEST(Stratonovich, ProportionalFieldHandOracle) {
  const auto g = grid();
  const double c = 0.4;
  const auto m = proportional(g, c);
  for (const auto& s : sample_boundary_curves(g, 8, 5)) {
    const auto d = stratonovich_correction(m, s.curve, default_fd_step(s.curve, m.space.beta));
    // D sigma sigma = c^2 h, exact for a linear field up to round-off
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(d[i], c * c * s.curve[i], 1e-12);
    EXPECT_EQ(d[s.zero_node], 0.0);
  }
}

TEST(Stratonovich, CappedFieldVanishesOnBoundary) {
  const auto g = grid();
  const auto m = local_positive(g);
  const auto res = check_stratonovich_correction(m, sample_boundary_curves(g, 64, 6), 0.0, 1e-6);
  EXPECT_EQ(res.verdict, Verdict::Holds);
  // away from the kink at y = 0.1 the oracle is 0.09 e^{-2 xi} y
  const auto h = ForwardCurve::constant(g, 0.05);
  const auto d = stratonovich_correction(m, h, 1e-6);
  for (std::size_t i = 0; i < g.size(); i += 20) EXPECT_NEAR(d[i], 0.09 * std::exp(-2.0 * g.node(i)) * 0.05, 1e-12);
}

TEST(Stratonovich, NonvanishingFieldFails) {
  const auto g = grid();
  ModelSpec m{g};
  m.noise.lambdas = {1.0};
  m.vol = {LocalField{[](double, double y) { return 0.1 + y; }}};
  const auto res = check_stratonovich_correction(m, sample_boundary_curves(g, 8, 6), 0.0, 1e-6);
  EXPECT_EQ(res.verdict, Verdict::Fails);
  expect_witness_sound(m, res);
  // D sigma sigma = 0.1 + y = 0.1 on the boundary
  EXPECT_NEAR(res.witness->value, 0.1, 1e-10);
}

TEST(Monitor, CountsNegativeNodes) {
  const auto g = grid();
  EnsembleResult e;
  PathResult p;
  p.snapshots.push_back(ForwardCurve::constant(g, 0.01));
  e.paths.push_back(p);
  EXPECT_EQ(monitor_ensemble(e, numerical_floor(0.01)).fraction(), 0.0);
  auto v = std::vector<double>(g.size(), 0.01);
  v[3] = -1e-3;
  v[4] = -1e-20;
  PathResult q;
  q.snapshots.push_back(ForwardCurve(g, v));
  e.paths.push_back(q);
  const auto rep = monitor_ensemble(e, numerical_floor(0.01));
  EXPECT_EQ(rep.negative, 1u);
  EXPECT_EQ(rep.total, 2 * g.size());
  EXPECT_EQ(rep.path_min[1], -1e-3);
  EXPECT_NEAR(numerical_floor(0.01), 10.0 * 2.220446049250313e-16 * 0.01, 1e-30);
}

}  // namespace
}  // namespace hjmm
