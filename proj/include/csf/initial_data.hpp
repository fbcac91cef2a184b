#pragma once

// Symbolic initial data. Every descriptor reduces to a piecewise-linear table
// that is zero outside its first and last breakpoint, so norms and distances
// can be computed exactly.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "csf/error.hpp"
#include "csf/grid.hpp"

namespace csf {

/// Linear interpolation through (xs, ys), zero outside [xs.front(), xs.back()].
/// A repeated abscissa encodes a jump; the value at a jump is the mean of the
/// one-sided limits.
struct PiecewiseLinear {
  std::vector<double> xs, ys;

  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> x, std::vector<double> y) : xs(std::move(x)), ys(std::move(y)) {
    require(xs.size() == ys.size(), "piecewise_linear: xs and ys differ in length");
    for (std::size_t i = 0; i < xs.size(); ++i)
      require(std::isfinite(xs[i]) && std::isfinite(ys[i]), "piecewise_linear: non-finite entry");
    for (std::size_t i = 1; i < xs.size(); ++i)
      require(xs[i] >= xs[i - 1], "piecewise_linear: xs must be nondecreasing");
    for (std::size_t i = 2; i < xs.size(); ++i)
      require(!(xs[i] == xs[i - 1] && xs[i - 1] == xs[i - 2]), "piecewise_linear: abscissa repeated three times");
  }

  [[nodiscard]] bool empty() const { return xs.empty(); }

  [[nodiscard]] double operator()(double x) const {
    if (xs.empty() || x < xs.front() || x > xs.back()) return 0.0;
    const auto lo = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), x) - xs.begin());
    const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    if (lo != hi) {
      const double left = lo == 0 ? 0.0 : ys[lo];
      const double right = hi == xs.size() ? 0.0 : ys[hi - 1];
      return left == right ? left : 0.5 * (left + right);
    }
    const std::size_t k = hi - 1;
    const double s = (x - xs[k]) / (xs[k + 1] - xs[k]);
    return ys[k] + s * (ys[k + 1] - ys[k]);
  }

  /// Limit from the right at x.
  [[nodiscard]] double right_limit(double x) const {
    if (xs.empty() || x < xs.front() || x >= xs.back()) return 0.0;
    const auto k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    if (xs[k] == x) return ys[k];
    return ys[k] + (x - xs[k]) / (xs[k + 1] - xs[k]) * (ys[k + 1] - ys[k]);
  }

  /// Limit from the left at x.
  [[nodiscard]] double left_limit(double x) const {
    if (xs.empty() || x <= xs.front() || x > xs.back()) return 0.0;
    const auto k = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), x) - xs.begin());
    if (xs[k] == x) return ys[k];
    return ys[k - 1] + (x - xs[k - 1]) / (xs[k] - xs[k - 1]) * (ys[k] - ys[k - 1]);
  }

  bool operator==(const PiecewiseLinear&) const = default;
};

namespace detail {

// Integral of |a + (b - a) s|^p over a segment of length dx, for a, b of one sign.
inline double segment_power(double a, double b, double dx, double p) {
  a = std::abs(a), b = std::abs(b);
  const double m = 0.5 * (a + b), d = b - a;
  if (m == 0) return 0.0;
  if (std::abs(d) < 1e-5 * m) {
    const double r = d / m;
    return dx * std::pow(m, p) * (1.0 + p * (p - 1.0) * r * r / 24.0);
  }
  return dx * (std::pow(b, p + 1) - std::pow(a, p + 1)) / ((p + 1) * d);
}

// Splits a linear segment at its zero and applies fn(a, b, dx) to each one-signed piece.
template <class Fn>
double over_signed_pieces(double a, double b, double dx, Fn fn) {
  if ((a < 0 && b > 0) || (a > 0 && b < 0)) {
    const double z = dx * std::abs(a) / (std::abs(a) + std::abs(b));
    return fn(a, 0.0, z) + fn(0.0, b, dx - z);
  }
  return fn(a, b, dx);
}

}  // namespace detail

/// Integral of |f|^p, exact for a piecewise-linear f.
inline double power_integral(const PiecewiseLinear& f, double p) {
  double sum = 0;
  for (std::size_t k = 0; k + 1 < f.xs.size(); ++k) {
    const double dx = f.xs[k + 1] - f.xs[k];
    if (dx <= 0) continue;
    sum += detail::over_signed_pieces(f.ys[k], f.ys[k + 1], dx, [p](double a, double b, double h) {
      return detail::segment_power(a, b, h, p);
    });
  }
  return sum;
}

/// Integral of max(f, 0), exact for a piecewise-linear f.
inline double positive_integral(const PiecewiseLinear& f) {
  double sum = 0;
  for (std::size_t k = 0; k + 1 < f.xs.size(); ++k) {
    const double dx = f.xs[k + 1] - f.xs[k];
    if (dx <= 0) continue;
    sum += detail::over_signed_pieces(f.ys[k], f.ys[k + 1], dx, [](double a, double b, double h) {
      return a + b > 0 ? 0.5 * (a + b) * h : 0.0;
    });
  }
  return sum;
}

/// Tent of height n and half-width 1/n.
struct WitchHat {
  int n = 1;
  bool operator==(const WitchHat&) const = default;
};

/// Table read from a two-column CSV file.
struct SampledTable {
  std::string path;
  PiecewiseLinear table;
  bool operator==(const SampledTable&) const = default;
};

struct InitialData;

/// Convolution of a base descriptor with a unit-mass bump of the given radius,
/// stored as a dense table.
struct Mollified {
  std::shared_ptr<const InitialData> base;
  double radius = 0;
  PiecewiseLinear table;
  bool operator==(const Mollified& o) const;
};

struct InitialData {
  std::variant<WitchHat, PiecewiseLinear, SampledTable, Mollified> kind;

  InitialData() : kind(PiecewiseLinear{}) {}
  InitialData(WitchHat w) : kind(w) { require(w.n >= 1, "witch_hat: n must be at least 1"); }
  InitialData(PiecewiseLinear p) : kind(std::move(p)) {}
  InitialData(SampledTable s) : kind(std::move(s)) {}
  InitialData(Mollified m) : kind(std::move(m)) {}

  [[nodiscard]] std::string type_name() const {
    static const char* names[] = {"witch_hat", "piecewise_linear", "samples", "mollified"};
    return names[kind.index()];
  }

  /// Equivalent piecewise-linear table.
  [[nodiscard]] PiecewiseLinear table() const {
    return std::visit(
        [](const auto& k) -> PiecewiseLinear {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, WitchHat>) {
            const double r = 1.0 / k.n;
            return PiecewiseLinear({-r, 0.0, r}, {0.0, double(k.n), 0.0});
          } else if constexpr (std::is_same_v<T, PiecewiseLinear>) {
            return k;
          } else {
            return k.table;
          }
        },
        kind);
  }

  [[nodiscard]] double value(double x) const {
    if (const auto* w = std::get_if<WitchHat>(&kind)) return std::max(0.0, w->n * (1.0 - w->n * std::abs(x)));
    return table()(x);
  }

  [[nodiscard]] std::vector<double> breakpoints() const {
    auto xs = table().xs;
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
  }

  /// Closed interval outside which the data vanish; {0, 0} for zero data.
  [[nodiscard]] std::pair<double, double> support() const {
    const auto t = table();
    if (t.empty()) return {0.0, 0.0};
    return {t.xs.front(), t.xs.back()};
  }

  [[nodiscard]] double l1_norm() const {
    if (std::holds_alternative<WitchHat>(kind)) return 1.0;
    return power_integral(table(), 1.0);
  }

  [[nodiscard]] double lp_norm(double p) const {
    require(p >= 1, "lp_norm: p must be at least 1");
    if (const auto* w = std::get_if<WitchHat>(&kind))
      return std::pow(2.0 * std::pow(double(w->n), p - 1.0) / (p + 1.0), 1.0 / p);
    return std::pow(power_integral(table(), p), 1.0 / p);
  }

  [[nodiscard]] double positive_l1() const { return positive_integral(table()); }

  bool operator==(const InitialData& o) const { return kind == o.kind; }
};

inline bool Mollified::operator==(const Mollified& o) const {
  const bool same_base = (base && o.base) ? (*base == *o.base) : (base == o.base);
  return same_base && radius == o.radius && table == o.table;
}

inline InitialData witch_hat(int n) { return InitialData(WitchHat{n}); }

/// Bump kernel exp(-1/(1 - (s/r)^2)) on (-r, r), sampled at k midpoints with
/// weights normalised to sum to one.
inline std::pair<std::vector<double>, std::vector<double>> bump_weights(double radius, int k = 128) {
  std::vector<double> s(k), w(k);
  double total = 0;
  for (int j = 0; j < k; ++j) {
    s[j] = radius * (-1.0 + (2.0 * j + 1.0) / k);
    const double u = s[j] / radius;
    w[j] = std::exp(-1.0 / (1.0 - u * u));
    total += w[j];
  }
  for (auto& v : w) v /= total;
  return {s, w};
}

/// Mollification of `base` at the given radius, tabulated at spacing radius/16.
inline InitialData mollify(const InitialData& base, double radius) {
  require(radius > 0 && std::isfinite(radius), "mollify: radius must be positive");
  const auto src = base.table();
  Mollified m;
  m.base = std::make_shared<const InitialData>(base);
  m.radius = radius;
  if (src.empty()) return InitialData(std::move(m));
  const auto [s, w] = bump_weights(radius);
  const double a = src.xs.front() - radius, b = src.xs.back() + radius;
  const double spacing = radius / 16.0;
  const auto cells = static_cast<std::size_t>(std::ceil((b - a) / spacing));
  std::vector<double> xs(cells + 1), ys(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) {
    xs[i] = i == cells ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(cells);
    double v = 0;
    for (std::size_t j = 0; j < s.size(); ++j) v += w[j] * src(xs[i] - s[j]);
    ys[i] = v;
  }
  m.table = PiecewiseLinear(std::move(xs), std::move(ys));
  return InitialData(std::move(m));
}

/// Nodal values of the descriptor. Tables that end with a nonzero value inside
/// [-L, L] are extended by zero and reported through `warn`.
inline GridFunction sample_initial(const InitialData& init, const Grid& grid,
                                   const std::function<void(const std::string&)>& warn = {}) {
  GridFunction out(grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = init.value(grid.x(i));
  const auto t = init.table();
  if (warn && !t.empty()) {
    const bool cut_left = t.xs.front() > -grid.L && t.ys.front() != 0.0;
    const bool cut_right = t.xs.back() < grid.L && t.ys.back() != 0.0;
    if (cut_left || cut_right)
      warn("initial data table does not cover [-L, L]; extended by zero");
  }
  return out;
}

}  // namespace csf
