#pragma once

// Checks of the flow inequalities against computed traces. Every check is
// phrased as a signed violation (left side minus right side, in the natural
// units of the left side); a report passes when no applicable violation
// exceeds the slack.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "csf/analysis.hpp"
#include "csf/error.hpp"
#include "csf/solver.hpp"
#include "csf/wedge.hpp"

namespace csf {

struct SnapshotCheck {
  double t = 0;
  double max_violation = -std::numeric_limits<double>::infinity();
  double arg_x = 0;            // node of the worst violation (for separation: the earlier time s)
  bool applicable = false;
};

struct EstimateReport {
  std::string name;
  std::optional<double> threshold_time;
  std::vector<SnapshotCheck> per_snapshot;
  bool pass = true;
  double slack = 0;
  double shift = 0;
  int refinement_level = 0;
  std::vector<EstimateReport> sub_checks;

  /// Applicable snapshot with the largest violation.
  [[nodiscard]] std::optional<SnapshotCheck> worst() const {
    std::optional<SnapshotCheck> w;
    for (const auto& c : per_snapshot)
      if (c.applicable && (!w || c.max_violation > w->max_violation)) w = c;
    return w;
  }

  void finalize() {
    pass = true;
    for (const auto& c : per_snapshot)
      if (c.applicable && !(c.max_violation <= slack)) pass = false;
    for (const auto& s : sub_checks) pass = pass && s.pass;
  }
};

inline double default_slack(double h) { return std::max(1e-3, 5.0 * h); }

namespace detail {

constexpr double kPi = std::numbers::pi;

inline EstimateReport start_report(const std::string& name, double slack) {
  require(slack >= 0, name + ": slack must be nonnegative");
  EstimateReport r;
  r.name = name;
  r.slack = slack;
  return r;
}

// Max of violation(i) over nodes i in [first, last).
template <class Fn>
SnapshotCheck scan_nodes(const Snapshot& s, std::size_t first, std::size_t last, Fn violation) {
  SnapshotCheck c;
  c.t = s.t;
  c.applicable = true;
  for (std::size_t i = first; i < last; ++i) {
    const double v = violation(i);
    if (v > c.max_violation) c.max_violation = v, c.arg_x = s.f.grid.x(i);
  }
  if (c.max_violation == -std::numeric_limits<double>::infinity()) c.applicable = false;
  return c;
}

inline SnapshotCheck not_applicable(double t) {
  SnapshotCheck c;
  c.t = t;
  c.applicable = false;
  return c;
}

inline void require_nonnegative(const FlowTrace& tr, const std::string& who) {
  require(!tr.snapshots.empty(), who + ": empty trace");
  for (double v : tr.snapshots.front().f.values)
    if (v < 0) throw PreconditionError(who + ": estimate is stated for nonnegative data");
}

inline double sup_abs(const GridFunction& f) { return norms(f).sup; }

}  // namespace detail

// Gradient-type estimates are evaluated at cell midpoints (see Midpoints), the
// scheme's own slope and area variables.

namespace detail {

// Max of violation(k) over midpoints k in [first, last).
template <class Fn>
SnapshotCheck scan_cells(const Snapshot& s, const Midpoints& c, std::size_t first, std::size_t last,
                         Fn violation) {
  SnapshotCheck out;
  out.t = s.t;
  out.applicable = true;
  for (std::size_t k = first; k < last; ++k) {
    const double v = violation(k);
    if (v > out.max_violation) out.max_violation = v, out.arg_x = c.x[k];
  }
  if (out.max_violation == -std::numeric_limits<double>::infinity()) out.applicable = false;
  return out;
}

}  // namespace detail

/// Both Harnack bounds: arctan y_x <= A/2t + pi/4 and arctan y_x >= -[(A0 - A)/2t + pi/4].
inline EstimateReport verify_harnack(const FlowTrace& tr, double A0, double slack) {
  detail::require_nonnegative(tr, "verify_harnack");
  auto r = detail::start_report("harnack", slack);
  r.threshold_time = A0 / detail::kPi;
  for (const auto& s : tr.snapshots) {
    if (s.t <= 0) continue;
    const auto c = midpoints(s.f);
    r.per_snapshot.push_back(detail::scan_cells(s, c, 0, c.size(), [&](std::size_t k) {
      const double angle = std::atan(c.slope[k]);
      const double up = angle - (c.area[k] / (2 * s.t) + detail::kPi / 4);
      const double lo = -((A0 - c.area[k]) / (2 * s.t) + detail::kPi / 4) - angle;
      return std::max(up, lo);
    }));
  }
  r.finalize();
  return r;
}

/// Consequence for even solutions: arctan y_x <= A0/4t + pi/4 on x <= 0 once t >= tau.
inline EstimateReport verify_harnack_even(const FlowTrace& tr, double A0, double slack) {
  detail::require_nonnegative(tr, "verify_harnack_even");
  auto r = detail::start_report("harnack_even", slack);
  const double tau = A0 / detail::kPi;
  r.threshold_time = tau;
  for (const auto& s : tr.snapshots) {
    if (s.t <= 0) continue;
    if (s.t < tau) {
      r.per_snapshot.push_back(detail::not_applicable(s.t));
      continue;
    }
    const auto c = midpoints(s.f);
    std::size_t last = 0;
    while (last < c.size() && c.x[last] <= 0) ++last;
    r.per_snapshot.push_back(detail::scan_cells(s, c, 0, last, [&](std::size_t k) {
      return std::atan(c.slope[k]) - (A0 / (4 * s.t) + detail::kPi / 4);
    }));
  }
  r.finalize();
  return r;
}

/// -t pi/2 <= H <= A0 + t pi/2 for the Harnack quantity H = A - 2t arctan y_x.
inline EstimateReport verify_harnack_bounds(const FlowTrace& tr, double A0, double slack) {
  auto r = detail::start_report("harnack_bounds", slack);
  for (const auto& s : tr.snapshots) {
    const auto c = midpoints(s.f);
    r.per_snapshot.push_back(detail::scan_cells(s, c, 0, c.size(), [&](std::size_t k) {
      const double hq = c.area[k] - 2 * s.t * std::atan(c.slope[k]);
      return std::max(hq - (A0 + s.t * detail::kPi / 2), -s.t * detail::kPi / 2 - hq);
    }));
  }
  r.finalize();
  return r;
}

/// arctan|y_x| <= A0/4t + pi/4 at every t > 0; the bound is below pi/2 only after tau.
inline EstimateReport verify_delayed_gradient(const FlowTrace& tr, double A0, double slack) {
  detail::require_nonnegative(tr, "verify_delayed_gradient");
  require(A0 > 0 && std::isfinite(A0), "verify_delayed_gradient: A0 must be positive");
  auto r = detail::start_report("delayed_gradient", slack);
  r.threshold_time = A0 / detail::kPi;
  for (const auto& s : tr.snapshots) {
    if (s.t <= 0) continue;
    const auto c = midpoints(s.f);
    const double bound = A0 / (4 * s.t) + detail::kPi / 4;
    r.per_snapshot.push_back(detail::scan_cells(
        s, c, 0, c.size(), [&](std::size_t k) { return std::atan(std::abs(c.slope[k])) - bound; }));
  }
  r.finalize();
  return r;
}

/// arctan|y_x| <= F(A0/2t) for t > tau.
inline EstimateReport verify_refined_gradient(const FlowTrace& tr, double A0, const WedgeProfile& w,
                                              double slack) {
  detail::require_nonnegative(tr, "verify_refined_gradient");
  require(A0 > 0 && std::isfinite(A0), "verify_refined_gradient: A0 must be positive");
  auto r = detail::start_report("refined_gradient", slack);
  const double tau = A0 / detail::kPi;
  r.threshold_time = tau;
  for (const auto& s : tr.snapshots) {
    if (s.t <= 0) continue;
    if (s.t <= tau * (1 + slack)) {
      r.per_snapshot.push_back(detail::not_applicable(s.t));
      continue;
    }
    const auto c = midpoints(s.f);
    const double bound = bigF(w, A0 / (2 * s.t));
    r.per_snapshot.push_back(detail::scan_cells(
        s, c, 0, c.size(), [&](std::size_t k) { return std::atan(std::abs(c.slope[k])) - bound; }));
  }
  r.finalize();
  return r;
}

namespace detail {

// Midpoints of y + shift; rejects negative values, skips zeros (bound is infinite there).
template <class Fn>
SnapshotCheck scan_shifted(const Snapshot& s, double shift, const std::string& who, Fn violation) {
  const auto c = midpoints(s.f);
  return scan_cells(s, c, 0, c.size(), [&](std::size_t k) {
    const double v = c.y[k] + shift;
    if (v < 0) throw PreconditionError(who + ": negative snapshot value; configure a shift");
    if (v == 0) return -std::numeric_limits<double>::infinity();
    return violation(v, std::abs(c.slope[k]));
  });
}

}  // namespace detail

/// arctan|y_x| <= A1((y + shift)/sqrt t).
inline EstimateReport verify_height_controls_gradient(const FlowTrace& tr, const WedgeProfile& w,
                                                      double slack, double shift = 0) {
  auto r = detail::start_report("height_controls_gradient", slack);
  r.shift = shift;
  for (const auto& s : tr.snapshots) {
    if (s.t <= 0) continue;
    const double rt = std::sqrt(s.t);
    r.per_snapshot.push_back(detail::scan_shifted(s, shift, r.name, [&](double v, double slope) {
      const double x = v / rt;
      if (!(x > 0)) return -std::numeric_limits<double>::infinity();
      return std::atan(slope) - area_A1(w, x);
    }));
  }
  r.finalize();
  return r;
}

/// |y_x| <= C1 (sqrt(y^2/t) e^{y^2/4t} + 1), compared as angles like the other
/// gradient bounds.
inline EstimateReport verify_height_gradient_corollary(const FlowTrace& tr, double C1, double slack,
                                                       double shift = 0) {
  auto r = detail::start_report("height_gradient_corollary", slack);
  r.shift = shift;
  for (const auto& s : tr.snapshots) {
    if (s.t <= 0) continue;
    r.per_snapshot.push_back(detail::scan_shifted(s, shift, r.name, [&](double v, double slope) {
      const double q = v * v / s.t;
      return std::atan(slope) - std::atan(C1 * (std::sqrt(q) * std::exp(0.25 * q) + 1.0));
    }));
  }
  r.finalize();
  return r;
}

struct RatioRange {
  double t = 0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
};

/// Per snapshot, the range of |y_x| / tan A1((y + shift)/sqrt t) over cell
/// midpoints at least `margin` cells from either end.
inline std::vector<RatioRange> height_gradient_ratio(const FlowTrace& tr, const WedgeProfile& w,
                                                     double shift = 0, std::size_t margin = 1) {
  std::vector<RatioRange> out;
  for (const auto& s : tr.snapshots) {
    if (s.t <= 0) continue;
    const auto c = midpoints(s.f);
    RatioRange rr;
    rr.t = s.t;
    for (std::size_t k = margin; k + margin < c.size(); ++k) {
      const double v = c.y[k] + shift;
      require(v > 0, "height_gradient_ratio: non-positive value");
      const double q = std::abs(c.slope[k]) / std::tan(area_A1(w, v / std::sqrt(s.t)));
      rr.min = std::min(rr.min, q), rr.max = std::max(rr.max, q);
    }
    out.push_back(rr);
  }
  return out;
}

/// sqrt(t) W(sigma^{-1}(A0/2t)), the height bound after the threshold time.
inline double delayed_height_bound(const WedgeProfile& w, double A0, double t) {
  require(t > A0 / std::numbers::pi, "delayed_height_bound: t must exceed A0/pi");
  return std::sqrt(t) * eval_W(w, inverse_sigma(w, A0 / (2 * t)));
}

/// 2 sqrt(t) sqrt(-log(pi/2 - A0/2t)).
inline double delayed_height_log_bound(double A0, double t) {
  const double eps = std::numbers::pi / 2 - A0 / (2 * t);
  require(eps > 0 && eps < 1, "delayed_height_log_bound: need 0 < pi/2 - A0/2t < 1");
  return 2 * std::sqrt(t) * std::sqrt(-std::log(eps));
}

/// Sharp delayed height bound for t > tau; sub-checks: C sqrt(t) for t >= 2 tau,
/// and the logarithmic form where pi/2 - A0/2t < log_window.
inline EstimateReport verify_delayed_height(const FlowTrace& tr, double A0, const WedgeProfile& w,
                                            double slack, double C_refine, double log_window = 0.1) {
  detail::require_nonnegative(tr, "verify_delayed_height");
  require(A0 > 0 && std::isfinite(A0), "verify_delayed_height: A0 must be positive");
  const double tau = A0 / detail::kPi;
  auto sharp = detail::start_report("delayed_height", slack);
  auto simple = detail::start_report("delayed_height_simple", slack);
  auto logf = detail::start_report("delayed_height_log", slack);
  sharp.threshold_time = simple.threshold_time = logf.threshold_time = tau;
  for (const auto& s : tr.snapshots) {
    if (s.t <= 0) continue;
    const auto peak = std::max_element(s.f.values.begin(), s.f.values.end());
    const double sup = *peak;
    auto check = [&](double bound) {
      SnapshotCheck c;
      c.t = s.t;
      c.applicable = true;
      c.max_violation = sup - bound;
      c.arg_x = s.f.grid.x(static_cast<std::size_t>(peak - s.f.values.begin()));
      return c;
    };
    const bool after = s.t > tau;
    sharp.per_snapshot.push_back(after ? check(delayed_height_bound(w, A0, s.t)) : detail::not_applicable(s.t));
    simple.per_snapshot.push_back(s.t >= 2 * tau * (1 - 1e-12) ? check(C_refine * std::sqrt(s.t))
                                                                 : detail::not_applicable(s.t));
    const double eps = detail::kPi / 2 - A0 / (2 * s.t);
    logf.per_snapshot.push_back(after && eps < log_window ? check(delayed_height_log_bound(A0, s.t))
                                                          : detail::not_applicable(s.t));
  }
  simple.finalize();
  logf.finalize();
  sharp.sub_checks = {simple, logf};
  sharp.finalize();
  return sharp;
}

/// |y(x, t)| <= W(x - x_shift, t) for x > x_shift + sqrt(t), for data vanishing on [x_shift, inf).
inline EstimateReport verify_wedge_barrier(const FlowTrace& tr, const WedgeProfile& w, double slack,
                                           double x_shift) {
  require(!tr.snapshots.empty(), "verify_wedge_barrier: empty trace");
  const auto& f0 = tr.snapshots.front().f;
  for (std::size_t i = 0; i < f0.size(); ++i)
    if (f0.grid.x(i) >= x_shift && f0[i] != 0.0)
      throw PreconditionError("verify_wedge_barrier: initial data do not vanish right of the shift");
  auto r = detail::start_report("wedge_barrier", slack);
  r.shift = x_shift;
  for (const auto& s : tr.snapshots) {
    if (s.t <= 0) continue;
    const double from = x_shift + std::sqrt(s.t);
    std::size_t first = 0;
    while (first < s.f.size() && s.f.grid.x(first) <= from) ++first;
    if (first >= s.f.size()) {
      r.per_snapshot.push_back(detail::not_applicable(s.t));
      continue;
    }
    r.per_snapshot.push_back(detail::scan_nodes(s, first, s.f.size(), [&](std::size_t i) {
      return std::abs(s.f[i]) - scaled_wedge(w, s.f.grid.x(i) - x_shift, s.t);
    }));
  }
  r.finalize();
  return r;
}

/// Two-branch height bound from the Lp argument: C sqrt(t) once t >= |y0|_1,
/// otherwise k + C sqrt(t) with k = |y0|_p^{p/(p-1)} t^{-1/(p-1)}.
inline double lp_height_bound(double p, double norm_p, double norm_1, double C, double t) {
  require(p > 1, "lp_height_bound: p must exceed 1");
  const double base = C * std::sqrt(t);
  if (t >= norm_1) return base;
  return std::pow(norm_p, p / (p - 1)) * std::pow(t, -1.0 / (p - 1)) + base;
}

/// End of the time window 0 < t < |y0|_p^{2p/(p+1)}.
inline double lp_window(double p, double norm_p) { return std::pow(norm_p, 2 * p / (p + 1)); }

inline EstimateReport verify_lp_smoothing(const FlowTrace& tr, double p, double norm_p, double C,
                                          double slack) {
  require(p > 1, "verify_lp_smoothing: p must exceed 1");
  require(!tr.snapshots.empty(), "verify_lp_smoothing: empty trace");
  auto r = detail::start_report("lp_smoothing", slack);
  const double norm_1 = norms(tr.snapshots.front().f).l1;
  const double window = lp_window(p, norm_p);
  for (const auto& s : tr.snapshots) {
    if (s.t <= 0) continue;
    if (s.t >= window) {
      r.per_snapshot.push_back(detail::not_applicable(s.t));
      continue;
    }
    const double bound = lp_height_bound(p, norm_p, norm_1, C, s.t);
    r.per_snapshot.push_back(
        detail::scan_nodes(s, 0, s.f.size(), [&](std::size_t i) { return std::abs(s.f[i]) - bound; }));
  }
  r.finalize();
  return r;
}

namespace detail {

inline void require_matching(const FlowTrace& a, const FlowTrace& b, const std::string& who) {
  if (a.snapshots.size() != b.snapshots.size()) throw PreconditionError(who + ": snapshot counts differ");
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    if (!(a.snapshots[k].f.grid == b.snapshots[k].f.grid)) throw PreconditionError(who + ": grids differ");
    if (std::abs(a.snapshots[k].t - b.snapshots[k].t) > 1e-12 * std::max(1.0, a.snapshots[k].t))
      throw PreconditionError(who + ": snapshot times differ");
  }
}

}  // namespace detail

/// |(y1 - y2)_+|_1(t) <= |(y1 - y2)_+|_1(s) + 2 pi (t - s) over all s < t.
/// arg_x holds the earlier time s of the worst pair.
inline EstimateReport verify_separation(const FlowTrace& a, const FlowTrace& b, double slack) {
  detail::require_matching(a, b, "verify_separation");
  auto r = detail::start_report("separation", slack);
  std::vector<double> d;
  for (std::size_t k = 0; k < a.snapshots.size(); ++k)
    d.push_back(positive_part_l1(a.snapshots[k].f, b.snapshots[k].f));
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double t = a.snapshots[k].t;
    if (k == 0) {
      r.per_snapshot.push_back(detail::not_applicable(t));
      continue;
    }
    SnapshotCheck c;
    c.t = t;
    c.applicable = true;
    for (std::size_t j = 0; j < k; ++j) {
      const double s = a.snapshots[j].t;
      const double v = d[k] - d[j] - 2 * detail::kPi * (t - s);
      if (v > c.max_violation) c.max_violation = v, c.arg_x = s;
    }
    r.per_snapshot.push_back(c);
  }
  r.finalize();
  return r;
}

/// y_a <= y_b nodewise at every snapshot, given y_a(0) <= y_b(0).
inline EstimateReport verify_comparison(const FlowTrace& a, const FlowTrace& b, double slack) {
  detail::require_matching(a, b, "verify_comparison");
  const auto& a0 = a.snapshots.front().f;
  const auto& b0 = b.snapshots.front().f;
  for (std::size_t i = 0; i < a0.size(); ++i)
    if (a0[i] > b0[i]) throw PreconditionError("verify_comparison: initial data are not ordered");
  auto r = detail::start_report("comparison", slack);
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    const auto& fa = a.snapshots[k].f;
    const auto& fb = b.snapshots[k].f;
    r.per_snapshot.push_back(
        detail::scan_nodes(a.snapshots[k], 0, fa.size(), [&](std::size_t i) { return fa[i] - fb[i]; }));
  }
  r.finalize();
  return r;
}

/// Relative area change beyond what the boundary flux accounts for.
inline EstimateReport verify_area_conservation(const FlowTrace& tr, double slack) {
  require(!tr.snapshots.empty(), "verify_area_conservation: empty trace");
  auto r = detail::start_report("area_conservation", slack);
  const double a0 = trapezoid_area(tr.snapshots.front().f);
  const double scale = a0 > 0 ? a0 : 1.0;
  for (const auto& s : tr.snapshots) {
    SnapshotCheck c;
    c.t = s.t;
    c.applicable = true;
    c.max_violation = (std::abs(trapezoid_area(s.f) - a0) - std::abs(s.boundary_inflow)) / scale;
    r.per_snapshot.push_back(c);
  }
  r.finalize();
  return r;
}

/// Relative drift |area(t) - area(0)| / area(0), maximised over snapshots.
inline double max_relative_area_drift(const FlowTrace& tr) {
  const double a0 = trapezoid_area(tr.snapshots.front().f);
  double worst = 0;
  for (const auto& s : tr.snapshots) worst = std::max(worst, std::abs(trapezoid_area(s.f) - a0) / a0);
  return worst;
}

/// Runs make(level) for level = 0, 1, ... until a report passes or max_level
/// is reached. Level k is expected to use grid spacing h / 2^k.
template <class Make>
EstimateReport verify_with_refinement(Make make, int max_level = 1) {
  EstimateReport r = make(0);
  for (int level = 1; !r.pass && level <= max_level; ++level) {
    r = make(level);
    r.refinement_level = level;
  }
  return r;
}

}  // namespace csf
