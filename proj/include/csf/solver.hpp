#pragma once

// Explicit conservative finite-volume scheme for y_t = (arctan y_x)_x.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "csf/error.hpp"
#include "csf/grid.hpp"
#include "csf/initial_data.hpp"

namespace csf {

enum class Boundary { dirichlet, neumann };

inline std::string to_string(Boundary b) { return b == Boundary::dirichlet ? "dirichlet0" : "neumann"; }

inline Boundary parse_boundary(const std::string& s) {
  if (s == "dirichlet0" || s == "dirichlet") return Boundary::dirichlet;
  if (s == "neumann") return Boundary::neumann;
  throw PreconditionError("unknown boundary condition '" + s + "'");
}

/// Largest stable explicit step times a safety factor: safety * h^2 / 2.
inline double cfl_dt(double h, double safety) {
  require(h > 0, "cfl_dt: h must be positive");
  require(safety > 0 && safety <= 1, "cfl_dt: safety must lie in (0, 1]");
  return safety * h * h / 2.0;
}

namespace detail {

// In-place update. flux is scratch of size n. Returns the net inflow through
// the two ends, dt * (F_{n-1/2} - F_{1/2}).
inline double advance(std::vector<double>& y, std::vector<double>& flux, double h, double dt,
                      Boundary b) {
  const std::size_t n = y.size() - 1;
  const double ih = 1.0 / h, r = dt / h;
  for (std::size_t i = 0; i < n; ++i) flux[i] = std::atan((y[i + 1] - y[i]) * ih);
  for (std::size_t i = 1; i < n; ++i) y[i] += r * (flux[i] - flux[i - 1]);
  if (b == Boundary::neumann) {
    y[0] = y[1];
    y[n] = y[n - 1];
  }
  return dt * (flux[n - 1] - flux[0]);
}

inline void require_finite(const std::vector<double>& y, double t) {
  for (double v : y)
    if (!std::isfinite(v)) throw NumericalError("solver: non-finite value at t = " + std::to_string(t));
}

}  // namespace detail

/// One explicit step. Boundary values are held (Dirichlet) or copied from the
/// neighbouring node (Neumann).
inline GridFunction step(const GridFunction& f, double dt, Boundary b = Boundary::dirichlet) {
  const double h = f.grid.h();
  require(dt > 0, "step: dt must be positive");
  require(dt <= cfl_dt(h, 1.0) * (1 + 1e-12), "step: dt exceeds the stability limit h^2/2");
  GridFunction out = f;
  std::vector<double> flux(f.size() - 1);
  detail::advance(out.values, flux, h, dt, b);
  detail::require_finite(out.values, 0.0);
  return out;
}

struct SchemeInfo {
  double dt = 0;
  double h = 0;
  double L = 0;
  double safety = 0.8;
  Boundary boundary = Boundary::dirichlet;
  bool operator==(const SchemeInfo&) const = default;
};

struct Snapshot {
  double t = 0;
  GridFunction f;
  double boundary_inflow = 0;   // accumulated net flux through x = +-L up to t
  bool operator==(const Snapshot&) const = default;
};

struct FlowTrace {
  InitialData initial;
  std::vector<Snapshot> snapshots;
  SchemeInfo scheme;
  double total_area_initial = 0;

  [[nodiscard]] const Grid& grid() const { return snapshots.front().f.grid; }
  [[nodiscard]] std::vector<double> times() const {
    std::vector<double> ts;
    for (const auto& s : snapshots) ts.push_back(s.t);
    return ts;
  }
  /// Snapshot whose time is within 1e-9 of t.
  [[nodiscard]] const Snapshot* at(double t) const {
    for (const auto& s : snapshots)
      if (std::abs(s.t - t) <= 1e-9 * std::max(1.0, std::abs(t))) return &s;
    return nullptr;
  }
  bool operator==(const FlowTrace&) const = default;
};

/// Trapezoid area of a grid function.
inline double trapezoid_area(const GridFunction& f) {
  const auto& v = f.values;
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
  return s * f.grid.h();
}

struct RunOptions {
  double t_end = 1.0;
  double snap_every = 0;              // 0: only t = 0, t_end and extra_times
  std::vector<double> extra_times;
  Boundary boundary = Boundary::dirichlet;
  double safety = 0.8;
  // Prescribed boundary values (y(-L, t), y(L, t)); overrides held values.
  std::function<std::pair<double, double>(double)> boundary_values;
};

/// Sorted snapshot schedule: 0, multiples of snap_every, extras, t_end.
inline std::vector<double> snapshot_times(const RunOptions& o) {
  require(o.t_end > 0 && std::isfinite(o.t_end), "run: t_end must be positive");
  require(o.snap_every >= 0, "run: snap interval must be nonnegative");
  std::vector<double> ts{0.0, o.t_end};
  if (o.snap_every > 0) {
    const auto k = static_cast<long>(std::floor(o.t_end / o.snap_every + 1e-9));
    for (long i = 1; i <= k; ++i) ts.push_back(static_cast<double>(i) * o.snap_every);
  }
  for (double t : o.extra_times)
    if (t > 0 && t <= o.t_end) ts.push_back(t);
  std::sort(ts.begin(), ts.end());
  std::vector<double> out;
  for (double t : ts)
    if (out.empty() || t - out.back() > 1e-12 * std::max(1.0, t)) out.push_back(t);
  out.back() = o.t_end;
  if (out.size() >= 2 && out[out.size() - 2] >= o.t_end) out.erase(out.end() - 2);
  return out;
}

/// Evolves y0 to t_end. Each interval between snapshot times is split into
/// equal steps no longer than cfl_dt(h, safety), so snapshots land exactly.
inline FlowTrace run(const GridFunction& y0, const RunOptions& o, InitialData descriptor = {}) {
  require(o.safety > 0 && o.safety < 1, "run: safety must lie in (0, 1)");
  const double h = y0.grid.h();
  const double dt_max = cfl_dt(h, o.safety);
  detail::require_finite(y0.values, 0.0);

  FlowTrace trace;
  trace.initial = std::move(descriptor);
  trace.scheme = {dt_max, h, y0.grid.L, o.safety, o.boundary};
  trace.total_area_initial = trapezoid_area(y0);

  std::vector<double> y = y0.values, flux(y.size() - 1);
  const std::size_t n = y.size() - 1;
  double t = 0, inflow = 0;
  if (o.boundary_values) std::tie(y[0], y[n]) = o.boundary_values(0.0);
  trace.snapshots.push_back({0.0, GridFunction(y0.grid, y), 0.0});

  const auto schedule = snapshot_times(o);
  for (std::size_t k = 1; k < schedule.size(); ++k) {
    const double target = schedule[k], span = target - t;
    const auto steps = std::max(1L, static_cast<long>(std::ceil(span / dt_max - 1e-9)));
    const double dt = span / static_cast<double>(steps);
    for (long s = 0; s < steps; ++s) {
      inflow += detail::advance(y, flux, h, dt, o.boundary);
      const double t_next = s + 1 == steps ? target : t + static_cast<double>(s + 1) * dt;
      if (o.boundary_values) std::tie(y[0], y[n]) = o.boundary_values(t_next);
    }
    detail::require_finite(y, target);
    t = target;
    trace.snapshots.push_back({t, GridFunction(y0.grid, y), inflow});
  }
  return trace;
}

inline FlowTrace run(const InitialData& init, const Grid& grid, const RunOptions& o,
                     const std::function<void(const std::string&)>& warn = {}) {
  return run(sample_initial(init, grid, warn), o, init);
}

}  // namespace csf
