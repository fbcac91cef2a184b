#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "csf/analysis.hpp"
#include "csf/initial_data.hpp"
#include "csf/solver.hpp"

using namespace csf;

namespace {

// Midpoint rule on a dense uniform grid.
template <class Fn>
double midpoint(Fn f, double a, double b, int n = 200000) {
  const double h = (b - a) / n;
  double s = 0;
  for (int i = 0; i < n; ++i) s += f(a + (i + 0.5) * h);
  return s * h;
}

}  // namespace

TEST(Grid, NodesAreAntisymmetric) {
  const Grid g(3.7, 37);
  EXPECT_EQ(g.size(), 38u);
  EXPECT_DOUBLE_EQ(g.x(0), -3.7);
  EXPECT_DOUBLE_EQ(g.x(37), 3.7);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g.x(g.size() - 1 - i), -g.x(i));
  EXPECT_NEAR(g.h(), 0.2, 1e-15);
}

TEST(Grid, RejectsBadShapes) {
  EXPECT_THROW(Grid(1.0, 15), PreconditionError);
  EXPECT_THROW(Grid(0.0, 32), PreconditionError);
  EXPECT_THROW(Grid::with_spacing(1.0, 0.3), PreconditionError);
  EXPECT_THROW(Grid::with_spacing(1.0, -0.1), PreconditionError);
  EXPECT_EQ(Grid::with_spacing(10.0, 0.005).n, 4000);
  EXPECT_EQ(Grid::with_spacing(1.27, 0.01).n, 254);
}

TEST(Grid, FunctionSizeChecked) {
  const Grid g(1.0, 16);
  EXPECT_THROW(GridFunction(g, std::vector<double>(5)), PreconditionError);
  const auto f = GridFunction::from(g, [](double x) { return x * x; });
  EXPECT_DOUBLE_EQ(f[0], 1.0);
}

TEST(PiecewiseLinear, Validation) {
  EXPECT_THROW(PiecewiseLinear({0, 1}, {0}), PreconditionError);
  EXPECT_THROW(PiecewiseLinear({1, 0}, {0, 0}), PreconditionError);
  EXPECT_THROW(PiecewiseLinear({0, 1, 1, 1}, {0, 1, 2, 3}), PreconditionError);
  EXPECT_THROW(PiecewiseLinear({0, NAN}, {0, 1}), PreconditionError);
  EXPECT_NO_THROW(PiecewiseLinear({0, 1, 1, 2}, {0, 1, 3, 0}));
}

TEST(PiecewiseLinear, JumpsAndLimits) {
  const PiecewiseLinear f({0, 1, 1, 2}, {0, 1, 3, 0});
  EXPECT_DOUBLE_EQ(f(0.5), 0.5);
  EXPECT_DOUBLE_EQ(f(1.0), 2.0);
  EXPECT_DOUBLE_EQ(f.left_limit(1.0), 1.0);
  EXPECT_DOUBLE_EQ(f.right_limit(1.0), 3.0);
  EXPECT_DOUBLE_EQ(f(1.5), 1.5);
  EXPECT_DOUBLE_EQ(f(-1), 0.0);
  EXPECT_DOUBLE_EQ(f(3), 0.0);
  // jump from zero at the table ends
  const PiecewiseLinear g({0, 1}, {2, 2});
  EXPECT_DOUBLE_EQ(g(0.0), 1.0);
  EXPECT_DOUBLE_EQ(g.right_limit(0.0), 2.0);
  EXPECT_DOUBLE_EQ(g.left_limit(0.0), 0.0);
}

TEST(PiecewiseLinear, PowerIntegralMatchesQuadrature) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> xs{-1}, ys{0};
    for (int k = 0; k < 6; ++k) xs.push_back(xs.back() + 0.1 + std::abs(u(rng))), ys.push_back(u(rng));
    xs.push_back(xs.back() + 0.5), ys.push_back(0);
    const PiecewiseLinear f(xs, ys);
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      const double want = midpoint([&](double x) { return std::pow(std::abs(f(x)), p); }, xs.front(), xs.back());
      EXPECT_NEAR(power_integral(f, p), want, 1e-6 * std::max(1.0, want)) << "p=" << p;
    }
    const double pos = midpoint([&](double x) { return std::max(0.0, f(x)); }, xs.front(), xs.back());
    EXPECT_NEAR(positive_integral(f), pos, 1e-6);
  }
}

TEST(WitchHat, ShapeAndNorms) {
  for (int n : {1, 3, 10, 40}) {
    const auto w = witch_hat(n);
    EXPECT_DOUBLE_EQ(w.value(0.0), n);
    EXPECT_DOUBLE_EQ(w.value(1.0 / n), 0.0);
    EXPECT_DOUBLE_EQ(w.value(-1.5 / n), 0.0);
    EXPECT_DOUBLE_EQ(w.l1_norm(), 1.0);
    EXPECT_NEAR(w.l1_norm() / std::numbers::pi, 1 / std::numbers::pi, 0);
    EXPECT_NEAR(power_integral(w.table(), 1.0), 1.0, 1e-14);
    for (double p : {1.5, 2.0, 3.0}) {
      // closed form: integral of (n(1 - n|x|))^p = 2 n^{p-1} / (p + 1)
      EXPECT_NEAR(w.lp_norm(p), std::pow(2 * std::pow(n, p - 1) / (p + 1), 1 / p), 1e-12);
      EXPECT_NEAR(std::pow(power_integral(w.table(), p), 1 / p), w.lp_norm(p), 1e-12 * w.lp_norm(p));
    }
  }
  EXPECT_THROW(witch_hat(0), PreconditionError);
}

TEST(WitchHat, TrapezoidAreaOnFineGrids) {
  for (int n : {5, 10, 20}) {
    // aligned grid: kinks on nodes, trapezoid is exact
    const Grid aligned = Grid::with_spacing(2.0, 1.0 / (10 * n));
    EXPECT_NEAR(trapezoid_area(sample_initial(witch_hat(n), aligned)), 1.0, 1e-12);
    // misaligned grid with h <= 1/(10n): still within one percent
    const Grid off(2.0 + 0.37 / (10 * n), static_cast<int>(std::ceil((4.0 + 0.74 / (10 * n)) * 10 * n)) + 1);
    ASSERT_LE(off.h(), 1.0 / (10 * n));
    EXPECT_NEAR(trapezoid_area(sample_initial(witch_hat(n), off)), 1.0, 1e-2);
  }
}

TEST(Mollify, BumpWeights) {
  const auto [s, w] = bump_weights(0.3);
  double total = 0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    total += w[j];
    EXPECT_NEAR(w[j], w[w.size() - 1 - j], 1e-15);
    EXPECT_NEAR(s[j], -s[s.size() - 1 - j], 1e-15);
    EXPECT_LT(std::abs(s[j]), 0.3);
  }
  EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(Mollify, PreservesConstantsAwayFromEdges) {
  const InitialData plateau(PiecewiseLinear({-5, -4, 4, 5}, {0, 2, 2, 0}));
  const auto m = mollify(plateau, 0.1);
  for (double x : {-3.0, 0.0, 0.123, 3.5}) EXPECT_NEAR(m.value(x), 2.0, 1e-12);
  EXPECT_EQ(m.type_name(), "mollified");
  EXPECT_THROW(mollify(plateau, 0.0), PreconditionError);
}

TEST(Mollify, PreservesMassOfNonnegativeData) {
  const InitialData hat(PiecewiseLinear({-1, 0, 0, 2}, {0, 3, 1, 0}));
  for (double r : {0.1, 0.05}) EXPECT_NEAR(mollify(hat, r).l1_norm(), hat.l1_norm(), 2e-3) << r;
}

TEST(Mollify, ConvergesToBaseInL1) {
  const InitialData jump(PiecewiseLinear({0, 0, 1, 1}, {0, 1, 1, 0}));
  double prev = INFINITY;
  for (double r : {0.1, 0.05, 0.025}) {
    const double d = l1_distance(mollify(jump, r).table(), jump.table());
    EXPECT_LT(d, prev) << r;
    prev = d;
    // each unit jump contributes r E|U| with U distributed as the bump on (-1, 1)
    const auto [sj, wj] = bump_weights(r);
    double mean_abs = 0;
    for (std::size_t j = 0; j < sj.size(); ++j) mean_abs += wj[j] * std::abs(sj[j]);
    EXPECT_NEAR(d, 2 * mean_abs, 0.02 * d) << r;
  }
}

TEST(Mollify, PositivePartDoesNotGrow) {
  const InitialData mixed(PiecewiseLinear({-2, -1, 0, 0.3, 1, 2}, {0, 1.5, -2, 1, -0.5, 0}));
  for (double r : {0.2, 0.1, 0.05}) EXPECT_LE(mollify(mixed, r).positive_l1(), mixed.positive_l1() + 1e-9) << r;
}

TEST(SampleInitial, WarnsWhenTableIsCut) {
  const Grid g(4.0, 64);
  int warnings = 0;
  auto warn = [&](const std::string&) { ++warnings; };
  sample_initial(InitialData(PiecewiseLinear({-1, 1}, {1, 1})), g, warn);
  EXPECT_EQ(warnings, 1);
  sample_initial(witch_hat(3), g, warn);
  sample_initial(InitialData(PiecewiseLinear({-5, 5}, {1, 1})), g, warn);
  EXPECT_EQ(warnings, 1);
}

TEST(SampleInitial, WitchHatNodalValuesAreExact) {
  const Grid g = Grid::with_spacing(1.0, 0.01);
  const auto f = sample_initial(witch_hat(10), g);
  EXPECT_DOUBLE_EQ(f[100], 10.0);
  EXPECT_DOUBLE_EQ(f[90], 0.0);
  EXPECT_NEAR(f[95], 5.0, 1e-12);
}
