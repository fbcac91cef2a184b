#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "csf/error.hpp"

namespace csf {

/// Piecewise cubic Hermite interpolant through (x_i, f_i) with prescribed
/// slopes g_i. Nodes must be strictly increasing. Slopes that would break
/// monotonicity of an interval are limited (Fritsch-Carlson), so monotone data
/// gives a monotone interpolant.
class HermiteTable {
 public:
  HermiteTable() = default;

  HermiteTable(std::vector<double> x, std::vector<double> f, std::vector<double> g,
               bool limit_monotone = true)
      : x_(std::move(x)), f_(std::move(f)), g_(std::move(g)) {
    if (x_.size() < 2 || f_.size() != x_.size() || g_.size() != x_.size())
      throw PreconditionError("HermiteTable: need >= 2 nodes with matching values and slopes");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1]))
        throw PreconditionError("HermiteTable: nodes must be strictly increasing");
    if (limit_monotone) limit_slopes();
    cumulative_.assign(x_.size(), 0.0);
    for (std::size_t i = 1; i < x_.size(); ++i)
      cumulative_[i] = cumulative_[i - 1] + partial_integral(i - 1, 1.0);
  }

  [[nodiscard]] bool empty() const { return x_.empty(); }
  [[nodiscard]] double front() const { return x_.front(); }
  [[nodiscard]] double back() const { return x_.back(); }
  [[nodiscard]] std::span<const double> nodes() const { return x_; }
  [[nodiscard]] std::span<const double> values() const { return f_; }
  [[nodiscard]] std::span<const double> slopes() const { return g_; }

  [[nodiscard]] double operator()(double x) const {
    auto [i, s, h] = locate(x);
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * f_[i] + (s3 - 2 * s2 + s) * h * g_[i] +
           (-2 * s3 + 3 * s2) * f_[i + 1] + (s3 - s2) * h * g_[i + 1];
  }

  [[nodiscard]] double derivative(double x) const {
    auto [i, s, h] = locate(x);
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * f_[i] + (-6 * s2 + 6 * s) * f_[i + 1]) / h +
           (3 * s2 - 4 * s + 1) * g_[i] + (3 * s2 - 2 * s) * g_[i + 1];
  }

  /// Exact integral of the interpolant from the first node to x.
  [[nodiscard]] double primitive(double x) const {
    auto [i, s, h] = locate(x);
    (void)h;
    return cumulative_[i] + partial_integral(i, s);
  }

  [[nodiscard]] double integral(double a, double b) const { return primitive(b) - primitive(a); }

 private:
  struct Where {
    std::size_t i;
    double s;
    double h;
  };

  [[nodiscard]] Where locate(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    const double h = x_[i + 1] - x_[i];
    return {i, (x - x_[i]) / h, h};
  }

  [[nodiscard]] double partial_integral(std::size_t i, double s) const {
    const double h = x_[i + 1] - x_[i];
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    return h * ((s - s3 + 0.5 * s4) * f_[i] + (0.5 * s2 - 2.0 * s3 / 3.0 + 0.25 * s4) * h * g_[i] +
                (s3 - 0.5 * s4) * f_[i + 1] + (-s3 / 3.0 + 0.25 * s4) * h * g_[i + 1]);
  }

  void limit_slopes() {
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
      const double delta = (f_[i + 1] - f_[i]) / (x_[i + 1] - x_[i]);
      if (delta == 0.0) continue;
      const double a = g_[i] / delta, b = g_[i + 1] / delta;
      if (a < 0.0) g_[i] = 0.0;
      if (b < 0.0) g_[i + 1] = 0.0;
      const double r = a * a + b * b;
      if (r > 9.0) {
        const double tau = 3.0 / std::sqrt(r);
        g_[i] = tau * a * delta;
        g_[i + 1] = tau * b * delta;
      }
    }
  }

  std::vector<double> x_, f_, g_, cumulative_;
};

}  // namespace csf
