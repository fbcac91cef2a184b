#pragma once

// Quantities derived from snapshots: accumulated area, norms, gradients, the
// Harnack quantity, crossing counts and L1 distances.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "csf/error.hpp"
#include "csf/grid.hpp"
#include "csf/initial_data.hpp"
#include "csf/solver.hpp"

namespace csf {

/// Cumulative trapezoid integral of y from -L to each node.
struct AccumulatedArea {
  Grid grid;
  std::vector<double> values;
  [[nodiscard]] double total() const { return values.back(); }
};

inline AccumulatedArea accumulated_area(const GridFunction& f) {
  AccumulatedArea a{f.grid, std::vector<double>(f.size(), 0.0)};
  const double h = f.grid.h();
  for (std::size_t i = 1; i < f.size(); ++i) a.values[i] = a.values[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
  return a;
}

struct Norms {
  double l1 = 0;
  double sup = 0;
  double lip = 0;
};

inline Norms norms(const GridFunction& f) {
  Norms n;
  const double h = f.grid.h();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = std::abs(f[i]);
    n.sup = std::max(n.sup, a);
    n.l1 += (i == 0 || i + 1 == f.size()) ? 0.5 * a : a;
    if (i + 1 < f.size()) n.lip = std::max(n.lip, std::abs(f[i + 1] - f[i]) / h);
  }
  n.l1 *= h;
  return n;
}

/// Trapezoid approximation of (integral |y|^p)^{1/p}.
inline double lp_norm(const GridFunction& f, double p) {
  require(p > 1, "lp_norm: p must exceed 1");
  double s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = std::pow(std::abs(f[i]), p);
    s += (i == 0 || i + 1 == f.size()) ? 0.5 * v : v;
  }
  return std::pow(s * f.grid.h(), 1.0 / p);
}

/// Central differences inside, one-sided at the two ends.
inline GridFunction gradient(const GridFunction& f) {
  GridFunction g(f.grid);
  const double h = f.grid.h();
  const std::size_t n = f.size() - 1;
  g[0] = (f[1] - f[0]) / h;
  g[n] = (f[n] - f[n - 1]) / h;
  for (std::size_t i = 1; i < n; ++i) g[i] = (f[i + 1] - f[i - 1]) / (2 * h);
  return g;
}

/// H = A - 2t arctan(y_x).
inline GridFunction harnack_quantity(const GridFunction& f, double t) {
  require(t >= 0, "harnack_quantity: t must be nonnegative");
  const auto a = accumulated_area(f);
  const auto g = gradient(f);
  GridFunction hq(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) hq[i] = a.values[i] - 2.0 * t * std::atan(g[i]);
  return hq;
}

/// Values at the cell midpoints x_{i+1/2}, where the scheme carries its flux:
/// slope (y_{i+1} - y_i)/h, height (y_i + y_{i+1})/2 and area
/// h (y_0/2 + y_1 + ... + y_i). This area obeys A_t = arctan A_xx exactly
/// under the scheme, so estimates stated through A and arctan y_x are checked here.
struct Midpoints {
  std::vector<double> x, y, slope, area;
  [[nodiscard]] std::size_t size() const { return x.size(); }
};

inline Midpoints midpoints(const GridFunction& f) {
  const std::size_t m = f.size() - 1;
  const double h = f.grid.h();
  Midpoints c;
  c.x.resize(m), c.y.resize(m), c.slope.resize(m), c.area.resize(m);
  double acc = 0.5 * f[0];
  for (std::size_t i = 0; i < m; ++i) {
    if (i > 0) acc += f[i];
    c.x[i] = 0.5 * (f.grid.x(i) + f.grid.x(i + 1));
    c.y[i] = 0.5 * (f[i] + f[i + 1]);
    c.slope[i] = (f[i + 1] - f[i]) / h;
    c.area[i] = h * acc;
  }
  return c;
}

inline void require_same_grid(const GridFunction& f, const GridFunction& g, const char* who) {
  if (!(f.grid == g.grid)) throw PreconditionError(std::string(who) + ": grids differ");
}

/// Sign changes of f - g across the nodes. Values with |f - g| <= eps count as
/// zero; a zero run is a crossing only if the sign differs on its two sides.
inline int crossing_count(const GridFunction& f, const GridFunction& g, double eps = 0.0) {
  require_same_grid(f, g, "crossing_count");
  int count = 0, last = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f[i] - g[i];
    const int s = d > eps ? 1 : (d < -eps ? -1 : 0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++count;
    last = s;
  }
  return count;
}

/// Trapezoid integral of max(f - g, 0).
inline double positive_part_l1(const GridFunction& f, const GridFunction& g) {
  require_same_grid(f, g, "positive_part_l1");
  double s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = std::max(f[i] - g[i], 0.0);
    s += (i == 0 || i + 1 == f.size()) ? 0.5 * v : v;
  }
  return s * f.grid.h();
}

/// Trapezoid integral of |f - g|.
inline double l1_distance(const GridFunction& f, const GridFunction& g) {
  require_same_grid(f, g, "l1_distance");
  double s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v = std::abs(f[i] - g[i]);
    s += (i == 0 || i + 1 == f.size()) ? 0.5 * v : v;
  }
  return s * f.grid.h();
}

/// The snapshot read as the piecewise-linear interpolant of its nodal values
/// (zero outside [-L, L]).
inline PiecewiseLinear as_table(const GridFunction& f) { return PiecewiseLinear(f.grid.nodes(), f.values); }

/// Exact L1 distance between two piecewise-linear functions.
inline double l1_distance(const PiecewiseLinear& a, const PiecewiseLinear& b) {
  std::vector<double> xs;
  xs.reserve(a.xs.size() + b.xs.size());
  xs.insert(xs.end(), a.xs.begin(), a.xs.end());
  xs.insert(xs.end(), b.xs.begin(), b.xs.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  double s = 0;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double lo = xs[k], hi = xs[k + 1], dx = hi - lo;
    const double da = a.right_limit(lo) - b.right_limit(lo);
    const double db = a.left_limit(hi) - b.left_limit(hi);
    s += detail::over_signed_pieces(da, db, dx, [](double u, double v, double h) {
      return 0.5 * std::abs(u + v) * h;
    });
  }
  return s;
}

/// Exact L1 distance from a snapshot (as its interpolant) to initial data.
inline double l1_distance(const GridFunction& f, const InitialData& d) {
  return l1_distance(as_table(f), d.table());
}

}  // namespace csf
