#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "csf/error.hpp"

namespace csf {

/// Uniform grid on [-L, L] with n intervals.
struct Grid {
  double L = 1.0;
  int n = 16;

  Grid() = default;
  Grid(double half_width, int intervals) : L(half_width), n(intervals) {
    require(L > 0 && std::isfinite(L), "Grid: L must be positive");
    require(n >= 16, "Grid: need at least 16 intervals");
  }

  /// Grid with spacing h; 2L/h must be an integer up to rounding.
  static Grid with_spacing(double L, double h) {
    require(h > 0 && std::isfinite(h), "Grid: h must be positive");
    const double m = 2.0 * L / h;
    const double r = std::round(m);
    require(std::abs(m - r) < 1e-6 * std::max(1.0, r), "Grid: 2L/h must be an integer");
    return Grid(L, static_cast<int>(r));
  }

  [[nodiscard]] double h() const { return 2.0 * L / n; }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(n) + 1; }
  // Exactly antisymmetric: x(n - i) == -x(i).
  [[nodiscard]] double x(std::size_t i) const {
    return L * (2.0 * static_cast<double>(i) - n) / n;
  }
  [[nodiscard]] std::vector<double> nodes() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x(i);
    return out;
  }

  bool operator==(const Grid&) const = default;
};

/// One snapshot: heights at the nodes of a grid.
struct GridFunction {
  Grid grid;
  std::vector<double> values;

  GridFunction() = default;
  explicit GridFunction(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  GridFunction(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    require(values.size() == grid.size(), "GridFunction: value count does not match the grid");
  }

  template <class Fn>
  static GridFunction from(const Grid& g, Fn f) {
    GridFunction out(g);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = f(g.x(i));
    return out;
  }

  [[nodiscard]] std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool operator==(const GridFunction&) const = default;
};

}  // namespace csf
