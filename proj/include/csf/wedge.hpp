#pragma once

// Self-similar expanding solution of graphical curve shortening flow from a
// right-angled wedge, and the area functions derived from it.
//
// The time-1 profile W solves 2W'' = (1 + W'^2)(W - xW'), is decreasing and
// convex, satisfies W = W^{-1}, and encloses area pi/2 with the axes. It is
// computed by shooting from the symmetric point (x0, x0) with slope -1.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "csf/error.hpp"
#include "csf/hermite.hpp"

namespace csf {

struct WedgeSample {
  double x = 0;
  double w = 0;
  double wprime = 0;
};

/// Right-hand side of the profile ODE solved for W''.
inline double wedge_second_derivative(double x, double w, double wprime) {
  return 0.5 * (1.0 + wprime * wprime) * (w - x * wprime);
}

/// Value of the first integral (-xW' + W)^2 e^{(x^2+W^2)/2} / (1 + W'^2).
/// Constant along any solution; equals d^2 e^{d^2/2} on the wedge profile.
inline double wedge_first_integral(double x, double w, double wprime) {
  const double m = w - x * wprime;
  return m * m * std::exp(0.5 * (x * x + w * w)) / (1.0 + wprime * wprime);
}

/// Decaying solution x*I(x) of the linearised profile ODE 2w'' = w - xw',
/// with I(x) = e^{-x^2/4}/x - (sqrt(pi)/2) erfc(x/2). Returns (w, w').
inline std::pair<double, double> wedge_decaying_mode(double x) {
  const double g = std::exp(-0.25 * x * x);
  const double i = g / x - 0.5 * std::sqrt(std::numbers::pi) * std::erfc(0.5 * x);
  return {x * i, i - g / x};
}

enum class ShotEnd { reached_end, crossed_axis, turned_upward, reached_cap };

struct Shot {
  std::vector<WedgeSample> path;  // in integration order
  ShotEnd end = ShotEnd::reached_end;
  double terminal_x = 0;
  double terminal_angle = 0;  // arctan W' where the shot stopped
};

struct ShotSettings {
  double step_tol = 1e-10;
  double max_step = 0.02;
  int substeps = 4;  // dense-output samples per accepted step
  double w_cap = std::numeric_limits<double>::infinity();
  bool record = true;
};

namespace detail {

using OdeState = std::array<double, 2>;

// Integrates the profile ODE from (x_start, u) toward x_end (either direction),
// stopping early when W < 0, W' > 0 or W > w_cap. The stepper always runs
// forward in xi = dir * x, with state (W, dW/dxi).
inline Shot integrate_profile(double x_start, OdeState u, double x_end, const ShotSettings& s) {
  namespace ode = boost::numeric::odeint;
  if (!(s.step_tol > 0)) throw PreconditionError("shot: step_tol must be positive");
  const double dir = x_end >= x_start ? 1.0 : -1.0;
  auto rhs = [dir](const OdeState& v, OdeState& dv, double xi) {
    dv[0] = v[1];
    dv[1] = wedge_second_derivative(dir * xi, v[0], dir * v[1]);
  };
  auto stepper = ode::make_dense_output(s.step_tol * 1e-6, s.step_tol, s.max_step,
                                        ode::runge_kutta_dopri5<OdeState>());
  Shot shot;
  auto record = [&](double x, const OdeState& v) {
    if (s.record) shot.path.push_back({x, v[0], v[1]});
  };
  record(x_start, u);
  stepper.initialize(OdeState{u[0], dir * u[1]}, dir * x_start, std::min(1e-3, s.max_step));
  auto classify = [&](const OdeState& v) -> std::optional<ShotEnd> {
    if (v[0] < 0.0) return ShotEnd::crossed_axis;
    if (v[1] > 0.0) return ShotEnd::turned_upward;
    if (v[0] > s.w_cap) return ShotEnd::reached_cap;
    return std::nullopt;
  };
  const double xi_end = dir * x_end;
  constexpr int kMaxSteps = 2'000'000;
  for (int k = 0; k < kMaxSteps; ++k) {
    auto [xi0, xi1] = stepper.do_step(rhs);
    const bool past_end = xi1 >= xi_end;
    const double xi_stop = past_end ? xi_end : xi1;
    OdeState v{};
    for (int j = 1; j <= s.substeps; ++j) {
      const double xij = j == s.substeps ? xi_stop : xi0 + (xi_stop - xi0) * j / s.substeps;
      stepper.calc_state(xij, v);
      v[1] *= dir;  // back to dW/dx
      const double xj = dir * xij;
      if (!std::isfinite(v[0]) || !std::isfinite(v[1]))
        throw NumericalError("shot: non-finite profile at x = " + std::to_string(xj));
      if (auto end = classify(v)) {
        record(xj, v);
        shot.end = *end;
        shot.terminal_x = xj;
        shot.terminal_angle = std::atan(v[1]);
        return shot;
      }
      record(xj, v);
    }
    if (past_end) {
      shot.end = ShotEnd::reached_end;
      shot.terminal_x = x_end;
      shot.terminal_angle = std::atan(v[1]);
      return shot;
    }
  }
  throw NumericalError("shot: step budget exhausted");
}

inline void require_monotone(const std::vector<WedgeSample>& path) {
  for (std::size_t i = 1; i < path.size(); ++i) {
    const bool ordered = path[i].x > path[i - 1].x ? path[i].w < path[i - 1].w
                                                   : path[i].w > path[i - 1].w;
    if (!ordered) throw NumericalError("shot: profile not monotone; step size too coarse");
  }
}

}  // namespace detail

/// Forward shot from the symmetric point (x0, x0) with slope -1 to x_max.
/// The terminal tangent angle classifies x0: negative means the profile
/// crossed the axis (x0 too small), positive means it turned upward.
inline Shot shoot_forward(double x0, double x_max, double step_tol, bool record = true) {
  require(x0 > 0, "shoot_profile: x0 must be positive");
  require(x_max > x0, "shoot_profile: x_max must exceed x0");
  ShotSettings s;
  s.step_tol = step_tol;
  s.record = record;
  return detail::integrate_profile(x0, {x0, -1.0}, x_max, s);
}

/// Both branches through the symmetric point: forward to x_max and backward
/// toward 0 until W exceeds w_cap. Samples are returned in increasing x.
inline Shot shoot_profile(double x0, double x_max, double step_tol, double w_cap = 5.0) {
  Shot fwd = shoot_forward(x0, x_max, step_tol);
  ShotSettings s;
  s.step_tol = step_tol;
  s.w_cap = w_cap;
  Shot back = detail::integrate_profile(x0, {x0, -1.0}, x0 * 1e-9, s);
  if (back.end != ShotEnd::reached_cap)
    throw NumericalError("shoot_profile: backward branch did not reach the height cap");
  back.path.pop_back();  // the cap-crossing point
  Shot out;
  out.path.assign(back.path.rbegin(), back.path.rend() - 1);
  out.path.insert(out.path.end(), fwd.path.begin(), fwd.path.end());
  out.end = fwd.end;
  out.terminal_x = fwd.terminal_x;
  out.terminal_angle = fwd.terminal_angle;
  if (fwd.end == ShotEnd::reached_end) detail::require_monotone(out.path);
  return out;
}

/// Tabulated wedge profile. Immutable once built; safe to share between threads.
class WedgeProfile {
 public:
  WedgeProfile() = default;

  /// Builds the evaluator from samples in increasing x. One sample must be the
  /// symmetric point (w == x == symmetric_point).
  WedgeProfile(std::vector<WedgeSample> samples, double symmetric_point, double tolerance)
      : samples_(std::move(samples)), x0_(symmetric_point), tol_(tolerance) {
    require(samples_.size() >= 8, "WedgeProfile: too few samples");
    require(x0_ > samples_.front().x && x0_ < samples_.back().x,
            "WedgeProfile: symmetric point outside the sampled range");
    std::vector<double> lx, lw, lwp, lwpp, rx, rw, rwp, rwpp;
    for (const auto& s : samples_) {
      const double wpp = wedge_second_derivative(s.x, s.w, s.wprime);
      if (s.x <= x0_) {
        lx.push_back(s.x), lw.push_back(s.w), lwp.push_back(s.wprime), lwpp.push_back(wpp);
      }
      if (s.x >= x0_) {
        rx.push_back(s.x), rw.push_back(s.w), rwp.push_back(s.wprime), rwpp.push_back(wpp);
      }
    }
    require(lx.size() >= 2 && rx.size() >= 2 && lx.back() == rx.front(),
            "WedgeProfile: symmetric point must be a sample");
    left_w_ = HermiteTable(lx, lw, lwp);
    left_wp_ = HermiteTable(lx, lwp, lwpp);
    right_w_ = HermiteTable(rx, rw, rwp);
    right_wp_ = HermiteTable(std::move(rx), rwp, rwpp);
    d_ = std::sqrt(2.0) * x0_;
    tail_c_ = 2.0 * d_ * std::exp(0.25 * d_ * d_);
    tail_scale_ = samples_.back().w / wedge_decaying_mode(x_max()).first;
    tail_area_xmax_ = tail_integral(x_max());
    sigma_x0_ = right_w_.integral(x0_, x_max()) + tail_area_xmax_;
    const double xm = x_min(), wm = samples_.front().w;
    // Area under the steep part over (0, x_min) by reflection through y = x.
    total_area_ = xm * wm + sigma(wm) + left_w_.integral(xm, x0_) + sigma_x0_;
  }

  [[nodiscard]] std::span<const WedgeSample> samples() const { return samples_; }
  [[nodiscard]] double d() const { return d_; }
  [[nodiscard]] double symmetric_point() const { return x0_; }
  [[nodiscard]] double tail_coefficient() const { return tail_c_; }
  [[nodiscard]] double tolerance() const { return tol_; }
  [[nodiscard]] double x_min() const { return samples_.front().x; }
  [[nodiscard]] double x_max() const { return samples_.back().x; }
  [[nodiscard]] double total_area() const { return total_area_; }

  /// Leading-order tail c e^{-x^2/4}/x^2 used beyond x_max.
  [[nodiscard]] double tail_formula(double x) const {
    return tail_c_ * std::exp(-0.25 * x * x) / (x * x);
  }

  /// Relative jump W_table(x_max)/tail(x_max) - 1 at the splice.
  [[nodiscard]] double splice_mismatch() const {
    return samples_.back().w / tail_formula(x_max()) - 1.0;
  }

  /// Relative spread (max - min)/mean of the first integral over all samples.
  [[nodiscard]] double first_integral_spread() const {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0;
    for (const auto& s : samples_) {
      const double v = wedge_first_integral(s.x, s.w, s.wprime);
      lo = std::min(lo, v), hi = std::max(hi, v), sum += v;
    }
    return (hi - lo) / (sum / static_cast<double>(samples_.size()));
  }

  [[nodiscard]] double W(double x) const {
    require(x > 0, "eval_W: x must be positive");
    if (x > x_max()) return tail_mode(x).first;
    if (x >= x0_) return right_w_(x);
    if (x >= x_min()) return left_w_(x);
    return inverse_right(x);
  }

  [[nodiscard]] double Wprime(double x) const {
    require(x > 0, "eval_Wprime: x must be positive");
    if (x > x_max()) return tail_mode(x).second;
    if (x >= x0_) return right_wp_(x);
    if (x >= x_min()) return left_wp_(x);
    return 1.0 / Wprime(inverse_right(x));
  }

  /// Tail area: integral of W over (x, infinity).
  [[nodiscard]] double sigma(double x) const {
    require(x > 0, "tail_area: x must be positive");
    if (x >= x_max()) return tail_integral(x);
    if (x >= x0_) return right_w_.integral(x, x_max()) + tail_area_xmax_;
    if (x >= x_min()) return left_w_.integral(x, x0_) + sigma_x0_;
    const double xm = x_min(), wm = samples_.front().w, wx = W(x);
    return xm * wm - x * wx + sigma(wm) - sigma(wx) + sigma(xm);
  }

  [[nodiscard]] double A0(double x) const { return 0.5 * x * W(x) + sigma(x); }
  [[nodiscard]] double A1(double x) const { return 0.5 * std::numbers::pi - A0(x); }

  /// x with sigma(x) = a, for a in (0, pi/2).
  [[nodiscard]] double inverse_sigma(double a) const {
    require(a > 0 && a < 0.5 * std::numbers::pi, "inverse_sigma: a must lie in (0, pi/2)");
    double lo = std::log(x_min() * 1e-6), hi = std::log(60.0);
    if (a >= sigma(std::exp(lo))) return std::exp(lo);
    if (a <= sigma(std::exp(hi))) return std::exp(hi);
    auto f = [&](double u) { return sigma(std::exp(u)) - a; };
    return std::exp(solve_bracketed(f, lo, hi));
  }

  [[nodiscard]] double F(double a) const { return A0(inverse_sigma(a)); }

  [[nodiscard]] double scaled(double x, double t) const {
    require(x > 0 && t > 0, "scaled_wedge: x and t must be positive");
    const double r = std::sqrt(t);
    return r * W(x / r);
  }

 private:
  template <class Fn>
  static double solve_bracketed(Fn f, double lo, double hi) {
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50),
                                               iters);
    return 0.5 * (r.first + r.second);
  }

  // s > x0 with W(s) = v, for 0 < v < x0.
  [[nodiscard]] double inverse_right(double v) const {
    const double w_end = samples_.back().w;
    if (v > w_end) {
      return solve_bracketed([&](double s) { return right_w_(s) - v; }, x0_, x_max());
    }
    const double lv = std::log(v);
    const double edge = kTailEnd - 1;
    if (v < tail_mode(edge).first) {
      // Far tail: the mode is 2 e^{-s^2/4}/s^2 to leading order; Newton in log form.
      const double target = lv - std::log(2 * tail_scale_);
      double s = std::max(edge, 2.0 * std::sqrt(-target));
      for (int k = 0; k < 60; ++k) {
        const double next = s - (-0.25 * s * s - 2.0 * std::log(s) - target) / (-0.5 * s - 2.0 / s);
        if (std::abs(next - s) < 1e-15 * s) return next;
        s = next;
      }
      return s;
    }
    double hi = std::min(2 * x_max(), edge);
    while (hi < edge && tail_mode(hi).first > v) hi = std::min(2 * hi, edge);
    return solve_bracketed([&](double s) { return std::log(tail_mode(s).first) - lv; }, x_max(), hi);
  }

  // Beyond x_max: the decaying mode of the linearised equation, scaled to the
  // table end. The neglected nonlinear terms are O(W'^2), i.e. e^{-x^2/2}.
  [[nodiscard]] std::pair<double, double> tail_mode(double x) const {
    if (x >= kTailEnd) return {0.0, 0.0};
    const auto [m, mp] = wedge_decaying_mode(x);
    return {tail_scale_ * m, tail_scale_ * mp};
  }

  [[nodiscard]] double tail_integral(double x) const {
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [&](double s) { return tail_mode(s).first; };
    return integrator.integrate(f, x, std::numeric_limits<double>::infinity());
  }

  std::vector<WedgeSample> samples_;
  HermiteTable left_w_, left_wp_, right_w_, right_wp_;
  double x0_ = 0, tol_ = 0, d_ = 0, tail_c_ = 0;
  double tail_scale_ = 0, tail_area_xmax_ = 0, sigma_x0_ = 0, total_area_ = 0;
  static constexpr double kTailEnd = 36.0;  // W < 1e-140 here
};

struct WedgeOptions {
  double tol = 1e-8;       // bisection tolerance on x0; the ODE runs at tol / 100
  double x_max = 8.0;      // terminal point of the shooting oracle
  double x_fit = 4.0;      // matching point for the decaying tail
  double scan_lo = 0.3;    // coarse x0 scan used to find the bisection bracket
  double scan_hi = 1.5;
  int scan_points = 25;
  double w_cap = 5.0;      // backward branch stops once W exceeds this
};

struct WedgeDiagnostics {
  double bisection_x0 = 0;     // terminal-angle bisection estimate
  double refined_x0 = 0;       // after matching to the decaying tail
  double fit_slope_mismatch = 0;
  int bisection_steps = 0;
  bool refinement_used = false;
};

namespace detail {

// Backward shot of the decaying mode from x_max to x_fit, scaled so that
// W(x_fit) equals w_target. Returns the shot (in decreasing x).
inline Shot matched_tail(double w_target, double x_fit, double x_max, double step_tol) {
  auto [wm, wpm] = wedge_decaying_mode(x_max);
  ShotSettings s;
  s.step_tol = step_tol;
  double amp = w_target / wedge_decaying_mode(x_fit).first;
  Shot shot;
  for (int k = 0; k < 6; ++k) {
    shot = integrate_profile(x_max, {amp * wm, amp * wpm}, x_fit, s);
    if (shot.end != ShotEnd::reached_end) throw NumericalError("wedge: tail shot left the regime");
    const double ratio = w_target / shot.path.back().w;
    amp *= ratio;
    if (std::abs(ratio - 1.0) < 1e-14) break;
  }
  return shot;
}

struct FitResult {
  double residual;
  Shot forward;
  Shot tail;
};

inline FitResult fit_residual(double x0, const WedgeOptions& o, double step_tol) {
  FitResult r;
  r.forward = shoot_forward(x0, o.x_fit, step_tol);
  if (r.forward.end != ShotEnd::reached_end) {
    r.residual = r.forward.end == ShotEnd::crossed_axis ? -1.0 : 1.0;
    return r;
  }
  const auto& end = r.forward.path.back();
  r.tail = matched_tail(end.w, o.x_fit, o.x_max, step_tol);
  r.residual = end.wprime - r.tail.path.back().wprime;
  return r;
}

}  // namespace detail

/// Solves for the wedge profile. Stage 1 brackets and bisects x0 on the sign
/// of the terminal tangent angle at x_max; stage 2 refines x0 by matching to
/// the decaying tail at x_fit, which removes the growing-mode contamination
/// that limits stage 1.
inline WedgeProfile solve_wedge(const WedgeOptions& o = {}, WedgeDiagnostics* diag = nullptr) {
  require(o.tol > 0, "solve_wedge: tol must be positive");
  require(o.x_fit > o.scan_hi && o.x_max > o.x_fit, "solve_wedge: need scan_hi < x_fit < x_max");
  const double step_tol = o.tol * 1e-2;
  auto angle = [&](double x0) { return shoot_forward(x0, o.x_max, step_tol, false).terminal_angle; };

  // Coarse scan; the classification must change sign exactly once.
  std::vector<double> xs, signs;
  for (int i = 0; i < o.scan_points; ++i) {
    const double x0 = o.scan_lo + (o.scan_hi - o.scan_lo) * i / (o.scan_points - 1);
    xs.push_back(x0);
    signs.push_back(angle(x0) < 0 ? -1.0 : 1.0);
  }
  int changes = 0;
  std::size_t at = 0;
  for (std::size_t i = 1; i < signs.size(); ++i)
    if (signs[i] != signs[i - 1]) ++changes, at = i;
  if (changes != 1 || signs.front() > 0)
    throw NumericalError("solve_wedge: no monotone bisection bracket in the x0 scan range");

  double lo = xs[at - 1], hi = xs[at];
  int steps = 0;
  while (hi - lo > o.tol * std::max(1.0, lo) && steps < 200) {
    const double mid = 0.5 * (lo + hi);
    (angle(mid) < 0 ? lo : hi) = mid;
    ++steps;
  }
  const double x_bisect = 0.5 * (lo + hi);

  // Refinement: bracket the matching residual around the bisection estimate.
  auto residual = [&](double x0) { return detail::fit_residual(x0, o, step_tol).residual; };
  double x_ref = x_bisect;
  bool refined = false;
  double width = std::max(hi - lo, 1e-12);
  for (int k = 0; k < 40 && !refined; ++k, width *= 4) {
    const double a = x_bisect - width, b = x_bisect + width;
    const double ra = residual(a), rb = residual(b);
    if (ra < 0 && rb > 0) {
      boost::uintmax_t iters = 100;
      auto tol = [&](double u, double v) { return std::abs(u - v) < o.tol * 1e-4; };
      auto r = boost::math::tools::toms748_solve(residual, a, b, ra, rb, tol, iters);
      x_ref = 0.5 * (r.first + r.second);
      refined = true;
    }
    if (width > 1e-2) break;
  }

  // Assemble: backward branch, forward to x_fit, matched tail to x_max.
  Shot both = shoot_profile(x_ref, o.x_fit, step_tol, o.w_cap);
  if (both.end != ShotEnd::reached_end)
    throw NumericalError("solve_wedge: refined shot does not reach the matching point");
  auto fit = detail::fit_residual(x_ref, o, step_tol);
  std::vector<WedgeSample> samples = std::move(both.path);
  for (auto it = fit.tail.path.rbegin() + 1; it != fit.tail.path.rend(); ++it) samples.push_back(*it);
  detail::require_monotone(samples);

  if (diag) {
    diag->bisection_x0 = x_bisect;
    diag->refined_x0 = x_ref;
    diag->fit_slope_mismatch = fit.residual;
    diag->bisection_steps = steps;
    diag->refinement_used = refined;
  }
  return WedgeProfile(std::move(samples), x_ref, o.tol);
}

inline WedgeProfile solve_wedge(double tol) {
  WedgeOptions o;
  o.tol = tol;
  return solve_wedge(o);
}

// Free-function surface used throughout the estimates.

inline double eval_W(const WedgeProfile& p, double x) { return p.W(x); }
inline double eval_Wprime(const WedgeProfile& p, double x) { return p.Wprime(x); }
inline double tail_area(const WedgeProfile& p, double x) { return p.sigma(x); }
inline double area_A0(const WedgeProfile& p, double x) { return p.A0(x); }
inline double area_A1(const WedgeProfile& p, double x) { return p.A1(x); }
inline double inverse_sigma(const WedgeProfile& p, double a) { return p.inverse_sigma(a); }
inline double scaled_wedge(const WedgeProfile& p, double x, double t) { return p.scaled(x, t); }

/// Composition A0 o sigma^{-1}; extends continuously by F(0) = 0, F(pi/2) = pi/2.
inline double bigF(const WedgeProfile& p, double a) {
  require(a > 0 && a < 0.5 * std::numbers::pi, "bigF: a must lie in (0, pi/2)");
  return p.F(a);
}

struct DerivedConstants {
  double delayed_height = 0;    // W(sigma^{-1}(pi/4)): sup y <= C sqrt(t) once t >= 2 tau
  double gradient_height = 0;   // least C1 with 1/(-W'(y)) <= C1 (y e^{y^2/4} + 1)
};

inline DerivedConstants derived_constants(const WedgeProfile& p, int resolution = 4000) {
  DerivedConstants c;
  c.delayed_height = p.W(p.inverse_sigma(0.25 * std::numbers::pi));
  const double a = std::log(p.x_min()), b = std::log(p.x_max());
  for (int i = 0; i <= resolution; ++i) {
    const double y = std::exp(a + (b - a) * i / resolution);
    const double lhs = 1.0 / (-p.Wprime(y));
    c.gradient_height = std::max(c.gradient_height, lhs / (y * std::exp(0.25 * y * y) + 1.0));
  }
  return c;
}

/// Constant C of the barrier bound W(x) <= C e^{-x^2/4}/x^2 for x >= 1,
/// read off the profile (it approaches the tail coefficient from below).
inline double wedge_barrier_constant(const WedgeProfile& p, int resolution = 2000) {
  double c = p.tail_coefficient();
  for (int i = 0; i <= resolution; ++i) {
    const double x = 1.0 + (p.x_max() - 1.0) * i / resolution;
    c = std::max(c, p.W(x) * x * x * std::exp(0.25 * x * x));
  }
  return c;
}

}  // namespace csf
