#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "csf/experiments.hpp"

using namespace csf;

namespace {

const WedgeProfile& wedge() {
  static const WedgeProfile w = solve_wedge();
  return w;
}

DeltaOptions small_delta() {
  DeltaOptions o;
  o.ns = {8, 2, 4};   // deliberately unsorted
  o.L = 4;
  o.jobs = 3;
  return o;
}

std::size_t column(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  EXPECT_NE(it, t.columns.end()) << name;
  return static_cast<std::size_t>(it - t.columns.begin());
}

}  // namespace

TEST(WitchHatGrid, BreakpointsAreNodes) {
  for (int n : {1, 7, 20}) {
    const Grid g = witch_hat_grid(n, 3.0);
    EXPECT_LE(g.h(), 1.0 / (10 * n) + 1e-15);
    std::set<long> hits;
    for (std::size_t i = 0; i < g.size(); ++i)
      for (double b : {-1.0 / n, 0.0, 1.0 / n})
        if (std::abs(g.x(i) - b) < 1e-12) hits.insert(std::lround(b * n));
    EXPECT_EQ(hits.size(), 3u);
  }
  EXPECT_THROW(witch_hat_grid(0, 1.0), PreconditionError);
}

TEST(DeltaHelpers, EvennessAndOrigin) {
  const Grid g(1.0, 20);
  const auto even = GridFunction::from(g, [](double x) { return std::cos(x); });
  EXPECT_EQ(evenness_defect(even), 0.0);
  EXPECT_EQ(value_at_origin(even), 1.0);
  const auto odd = GridFunction::from(g, [](double x) { return x; });
  EXPECT_NEAR(evenness_defect(odd), 2.0, 1e-15);
}

TEST(DeltaHelpers, WedgeDeviationOfExactWedge) {
  const Grid g = Grid::with_spacing(3.0, 0.01);
  const double t = 0.2;
  const auto f = GridFunction::from(g, [&](double x) { return x > 0 ? scaled_wedge(wedge(), x, t) : 0.0; });
  EXPECT_LT(wedge_deviation(f, t, wedge()), 1e-14);
}

TEST(DeltaExperiment, TableCompleteAndTrendsHold) {
  const auto o = small_delta();
  const auto rep = run_delta_experiment(o, wedge());
  const Table* tab = rep.table("sup_norms");
  ASSERT_NE(tab, nullptr);
  EXPECT_EQ(tab->rows.size(), o.ns.size() * o.times.size());
  std::set<std::pair<int, double>> seen;
  for (const auto& r : tab->rows) seen.insert({static_cast<int>(r[0]), r[1]});
  EXPECT_EQ(seen.size(), o.ns.size() * o.times.size());
  for (const auto& [name, ok] : rep.conclusions) EXPECT_TRUE(ok) << name;
  EXPECT_TRUE(rep.pass());
  EXPECT_EQ(rep.parameter("threshold_time"), format_double(1 / std::numbers::pi));
}

TEST(DeltaExperiment, PeakAndLowerBoundColumns) {
  DeltaOptions o = small_delta();
  o.times = {0.1};
  const auto rep = run_delta_experiment(o, wedge());
  const Table& tab = *rep.table("sup_norms");
  const auto n = column(tab, "n"), y0 = column(tab, "y_origin"), lb = column(tab, "origin_lower_bound");
  for (const auto& r : tab.rows) {
    EXPECT_NEAR(r[lb], r[n] / 2 * (1 - std::numbers::pi * 0.1), 1e-12);
    EXPECT_GE(r[y0], r[lb]);
  }
}

TEST(DeltaExperiment, RejectsMissingInputs) {
  DeltaOptions o = small_delta();
  o.ns.clear();
  EXPECT_THROW(run_delta_experiment(o, wedge()), PreconditionError);
}

TEST(L1Pipeline, SmoothDataAttainedQuickly) {
  const InitialData tent(PiecewiseLinear({-1, 0, 1}, {0, 1, 0}));
  L1Options o;
  o.L = 3;
  o.jobs = 2;
  const auto rep = run_l1_pipeline(tent, o);
  const Table& att = *rep.table("attainment");
  // |y_t| integrates to at most the total variation of arctan y_x, which is pi
  // for the tent and does not grow, so the flow moves at most pi t in L1.
  for (const auto& r : att.rows) {
    const double moll = l1_distance(mollify(tent, r[0]).table(), tent.table());
    EXPECT_LE(r[2], std::numbers::pi * r[1] + moll + 1e-4) << "r=" << r[0] << " t=" << r[1];
  }
  EXPECT_TRUE(rep.pass());
}

TEST(L1Pipeline, JumpDataStillAttainedInL1) {
  const InitialData box(PiecewiseLinear({0, 0, 1, 1}, {0, 1, 1, 0}));
  L1Options o;
  o.L = 3;
  const auto rep = run_l1_pipeline(box, o);
  EXPECT_TRUE(rep.conclusion("attainment_shrinking"));
  EXPECT_TRUE(rep.conclusion("separation_consistent"));
  EXPECT_EQ(rep.table("separation")->rows.size(), 2u);
  EXPECT_EQ(rep.table("cauchy")->rows.size(), 2u * 3u);
  EXPECT_EQ(rep.table("attainment")->rows.size(), 3u * 4u);
}

TEST(LpSweep, CapsAndValidatedRange) {
  LpOptions o;
  o.ps = {1.02, 2.0};
  o.ns = {4, 8};
  o.L = 4;
  o.t_end = 0.5;
  const double C = derived_constants(wedge()).delayed_height;
  const auto rep = lp_sweep(o, C);
  const Table& caps = *rep.table("caps");
  EXPECT_EQ(caps.rows.size(), 4u);
  const auto vcol = column(caps, "validated"), pcol = column(caps, "p"), ccol = column(caps, "cap");
  for (const auto& r : caps.rows) {
    EXPECT_EQ(r[vcol], r[pcol] > 1.05 ? 1.0 : 0.0);
    EXPECT_GT(r[ccol], 0.0);
  }
  EXPECT_TRUE(rep.conclusion("two_branch_bound"));
}

TEST(LpSweep, NormalisedHeight) {
  EXPECT_DOUBLE_EQ(lp_normalised_height(2.0, 0.5, 2.0, 1.0), 1.0);
  EXPECT_NEAR(lp_normalised_height(3.0, 0.25, 3.0, 2.0), 3.0 * 0.5 / std::pow(2.0, 1.5), 1e-15);
}
