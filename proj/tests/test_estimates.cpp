#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "csf/estimates.hpp"

using namespace csf;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTau = 1 / kPi;

const WedgeProfile& wedge() {
  static const WedgeProfile w = solve_wedge();
  return w;
}

FlowTrace hat_trace(int n, double L, double h, double t_end) {
  RunOptions o;
  o.t_end = t_end;
  o.snap_every = 0.05;
  o.extra_times = {0.01, 0.02, 0.35, 2 * kTau};
  return run(witch_hat(n), Grid::with_spacing(L, h), o);
}

const FlowTrace& hat20() {
  static const FlowTrace tr = hat_trace(20, 3.0, 0.005, 1.0);
  return tr;
}

// Wedge solution W(x + shift, t0 + t) on a window where it is a smooth graph;
// snapshot times are relabelled to the wedge's own clock.
FlowTrace wedge_flow(double h, double t_end) {
  const double L = 1.8, shift = 2.2, t0 = 1.0;
  const Grid g = Grid::with_spacing(L, h);
  const auto y0 = GridFunction::from(g, [&](double x) { return scaled_wedge(wedge(), x + shift, t0); });
  RunOptions o;
  o.t_end = t_end;
  o.snap_every = t_end / 4;
  o.boundary_values = [=](double t) {
    return std::pair{scaled_wedge(wedge(), -L + shift, t0 + t), scaled_wedge(wedge(), L + shift, t0 + t)};
  };
  auto tr = run(y0, o);
  for (auto& s : tr.snapshots) s.t += t0;
  return tr;
}

}  // namespace

TEST(Report, DefaultSlack) {
  EXPECT_DOUBLE_EQ(default_slack(1e-4), 1e-3);
  EXPECT_DOUBLE_EQ(default_slack(0.01), 0.05);
  EXPECT_THROW(verify_harnack(hat20(), 1.0, -1.0), PreconditionError);
}

TEST(Report, PassIsMonotoneInSlack) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (int k = 0; k < 200; ++k) {
    EstimateReport r;
    for (int i = 0; i < 5; ++i) r.per_snapshot.push_back({0.1 * i, u(rng), 0.0, u(rng) > -0.05});
    r.slack = std::abs(u(rng));
    r.finalize();
    const bool at = r.pass;
    r.slack += std::abs(u(rng));
    r.finalize();
    if (at) {
      EXPECT_TRUE(r.pass);
    }
  }
}

TEST(Report, WorstSkipsInapplicable) {
  EstimateReport r;
  r.per_snapshot = {{0.1, 5.0, 0.0, false}, {0.2, -1.0, 0.3, true}};
  r.finalize();
  EXPECT_TRUE(r.pass);
  ASSERT_TRUE(r.worst());
  EXPECT_EQ(r.worst()->t, 0.2);
}

TEST(Harnack, WitchHatPasses) {
  const auto r = verify_harnack(hat20(), 1.0, 1e-2);
  EXPECT_TRUE(r.pass) << r.worst()->max_violation << " at t=" << r.worst()->t;
  EXPECT_NEAR(*r.threshold_time, kTau, 1e-15);
  EXPECT_TRUE(verify_harnack_bounds(hat20(), 1.0, 1e-2).pass);
}

TEST(Harnack, EvenCorollary) {
  const auto r = verify_harnack_even(hat20(), 1.0, 1e-2);
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(r.per_snapshot.front().applicable);
}

TEST(Harnack, RejectsNegativeData) {
  const Grid g(1.0, 20);
  RunOptions o;
  o.t_end = 0.01;
  const auto tr = run(GridFunction(g, -1.0), o);
  EXPECT_THROW(verify_harnack(tr, 1.0, 1e-2), PreconditionError);
}

TEST(DelayedGradient, WitchHatAtTwiceThreshold) {
  const auto r = verify_delayed_gradient(hat20(), 1.0, 1e-2);
  EXPECT_TRUE(r.pass);
  const auto* s = hat20().at(2 * kTau);
  ASSERT_NE(s, nullptr);
  EXPECT_LE(std::atan(norms(s->f).lip), kPi / 8 + kPi / 4 + 1e-2);
}

TEST(RefinedGradient, ImpliesDelayedGradient) {
  for (double t = 1.05 * kTau; t < 5; t *= 1.3) {
    const double refined = bigF(wedge(), 1.0 / (2 * t));
    EXPECT_LE(std::tan(refined), std::tan(1.0 / (4 * t) + kPi / 4)) << t;
  }
}

TEST(RefinedGradient, WitchHatPasses) {
  const auto r = verify_refined_gradient(hat20(), 1.0, wedge(), 1e-2);
  EXPECT_TRUE(r.pass);
  for (const auto& c : r.per_snapshot) EXPECT_EQ(c.applicable, c.t > kTau * 1.01) << c.t;
}

TEST(HeightGradient, WedgeProfileIsSharp) {
  // on the exact wedge, |y_x| = tan A1(y / sqrt t)
  for (double x : {0.3, 0.8, 1.5, 3.0}) {
    const double y = eval_W(wedge(), x);
    EXPECT_NEAR(std::abs(eval_Wprime(wedge(), x)), std::tan(area_A1(wedge(), y)), 1e-6 * std::tan(area_A1(wedge(), y)));
  }
}

TEST(HeightGradient, DiscreteWedgeFlowRatio) {
  const auto tr = wedge_flow(0.01, 0.2);
  for (const auto& rr : height_gradient_ratio(tr, wedge())) {
    EXPECT_GE(rr.min, 0.95) << rr.t;
    EXPECT_LE(rr.max, 1.01) << rr.t;
  }
  EXPECT_TRUE(verify_height_controls_gradient(tr, wedge(), 1e-2).pass);
}

TEST(HeightGradient, WitchHatAndShift) {
  const double C1 = derived_constants(wedge()).gradient_height;
  EXPECT_TRUE(verify_height_gradient_corollary(hat20(), C1, 1e-2).pass);
  const auto shifted = verify_height_controls_gradient(hat20(), wedge(), 1e-2, 0.5);
  EXPECT_EQ(shifted.shift, 0.5);
  RunOptions o;
  o.t_end = 0.01;
  const auto neg = run(GridFunction(Grid(1.0, 20), -1.0), o);
  EXPECT_THROW(verify_height_controls_gradient(neg, wedge(), 1e-2), PreconditionError);
  EXPECT_NO_THROW(verify_height_controls_gradient(neg, wedge(), 1e-2, 2.0));
}

TEST(DelayedHeight, WitchHatPasses) {
  const double C = derived_constants(wedge()).delayed_height;
  const auto r = verify_delayed_height(hat20(), 1.0, wedge(), 1e-2, C);
  EXPECT_TRUE(r.pass);
  ASSERT_EQ(r.sub_checks.size(), 2u);
  const auto* s = hat20().at(0.35);
  EXPECT_LE(norms(s->f).sup, delayed_height_bound(wedge(), 1.0, 0.35) + 1e-2);
  const auto* s2 = hat20().at(2 * kTau);
  EXPECT_LE(norms(s2->f).sup, C * std::sqrt(2 * kTau) + 1e-2);
}

TEST(DelayedHeight, LogFormDominatesSharpBound) {
  for (double eps : {0.09, 0.05, 0.01, 1e-3, 1e-5}) {
    const double t = 1.0 / (2 * (kPi / 2 - eps));
    EXPECT_GE(delayed_height_log_bound(1.0, t), delayed_height_bound(wedge(), 1.0, t)) << eps;
  }
  EXPECT_THROW(delayed_height_bound(wedge(), 1.0, 0.9 * kTau), PreconditionError);
}

TEST(WedgeBarrier, WitchHatRightOfSupport) {
  const double n = 20;
  const auto r = verify_wedge_barrier(hat20(), wedge(), 1e-2, 1 / n);
  EXPECT_TRUE(r.pass);
  EXPECT_THROW(verify_wedge_barrier(hat20(), wedge(), 1e-2, 0.0), PreconditionError);
}

TEST(WedgeBarrier, BoundMagnitudeMatchesTail) {
  const double shift = 0.1, t = 0.1;
  const double xi = (2 - shift) / std::sqrt(t);
  const double u = 1 / (xi * xi);
  const double series = 1 - 6 * u + 60 * u * u - 840 * u * u * u;
  const double tail = std::sqrt(t) * wedge().tail_formula(xi) * series;
  EXPECT_NEAR(scaled_wedge(wedge(), 2 - shift, t), tail, 15120 * std::pow(u, 4) * tail);
}

TEST(LpSmoothing, WindowEndpointIdentity) {
  for (double p : {1.5, 2.0, 3.0}) {
    for (double norm : {0.5, 1.0, 3.7}) {
      const double t = lp_window(p, norm);
      EXPECT_NEAR(std::sqrt(t), std::pow(t, -1 / (p - 1)) * std::pow(norm, p / (p - 1)), 1e-12 * std::sqrt(t));
    }
  }
}

TEST(LpSmoothing, BoundBranches) {
  EXPECT_DOUBLE_EQ(lp_height_bound(2, 3.0, 1.0, 1.1, 2.0), 1.1 * std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(lp_height_bound(2, 3.0, 1.0, 1.1, 0.5), 9.0 / 0.5 + 1.1 * std::sqrt(0.5));
  EXPECT_THROW(lp_height_bound(1.0, 1, 1, 1, 1), PreconditionError);
}

TEST(LpSmoothing, WitchHatP2) {
  const double C = derived_constants(wedge()).delayed_height;
  const double norm2 = witch_hat(20).lp_norm(2);
  const auto r = verify_lp_smoothing(hat20(), 2.0, norm2, C, 1e-2);
  EXPECT_TRUE(r.pass);
  for (const auto& c : r.per_snapshot) EXPECT_EQ(c.applicable, c.t < lp_window(2, norm2));
}

TEST(Separation, WitchHatPairOnSharedGrid) {
  const auto a = hat_trace(10, 3.0, 0.005, 0.5);
  const auto b = hat_trace(20, 3.0, 0.005, 0.5);
  EXPECT_TRUE(verify_separation(a, b, 1e-3).pass);
  EXPECT_TRUE(verify_separation(b, a, 1e-3).pass);
  const auto c = hat_trace(20, 3.0, 0.01, 0.5);
  EXPECT_THROW(verify_separation(a, c, 1e-3), PreconditionError);
}

TEST(Comparison, OrderingPersists) {
  const Grid g = Grid::with_spacing(3.0, 0.01);
  const auto lo = sample_initial(witch_hat(5), g);
  auto hi = lo;
  const auto extra = sample_initial(witch_hat(3), g);
  for (std::size_t i = 0; i < g.size(); ++i) hi[i] += extra[i];
  RunOptions o;
  o.t_end = 0.3;
  o.snap_every = 0.1;
  const auto a = run(lo, o), b = run(hi, o);
  EXPECT_TRUE(verify_comparison(a, b, 0.0).pass);
  EXPECT_THROW(verify_comparison(b, a, 0.0), PreconditionError);
}

TEST(AreaConservation, DriftSmallAndStableUnderRefinement) {
  EXPECT_TRUE(verify_area_conservation(hat20(), 1e-6).pass);
  for (double h : {0.01, 0.005}) {
    RunOptions o;
    o.t_end = 0.3;
    o.snap_every = 0.1;
    const auto tr = run(witch_hat(10), Grid::with_spacing(10.0, h), o);
    EXPECT_LT(max_relative_area_drift(tr), 1e-6) << h;
  }
}

TEST(Refinement, RetriesUntilPass) {
  std::vector<int> levels;
  const auto r = verify_with_refinement(
      [&](int level) {
        levels.push_back(level);
        EstimateReport e;
        e.name = "probe";
        e.per_snapshot = {{1.0, level >= 1 ? -1.0 : 1.0, 0.0, true}};
        e.finalize();
        return e;
      },
      3);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.refinement_level, 1);
  EXPECT_EQ(levels, (std::vector<int>{0, 1}));
}
