#pragma once

// End-to-end constructions: the witch's-hat family approaching a delta
// function, the mollification pipeline for L1 data, and Lp sweeps.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "csf/analysis.hpp"
#include "csf/estimates.hpp"
#include "csf/format.hpp"
#include "csf/initial_data.hpp"
#include "csf/parallel.hpp"
#include "csf/solver.hpp"
#include "csf/wedge.hpp"

namespace csf {

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<Table> tables;
  std::vector<std::pair<std::string, bool>> conclusions;

  [[nodiscard]] bool pass() const {
    return std::all_of(conclusions.begin(), conclusions.end(), [](const auto& c) { return c.second; });
  }
  [[nodiscard]] const Table* table(const std::string& n) const {
    for (const auto& t : tables)
      if (t.name == n) return &t;
    return nullptr;
  }
  [[nodiscard]] bool conclusion(const std::string& n) const {
    for (const auto& [k, v] : conclusions)
      if (k == n) return v;
    throw PreconditionError("experiment report: no conclusion '" + n + "'");
  }
  [[nodiscard]] std::string parameter(const std::string& n) const {
    for (const auto& [k, v] : parameters)
      if (k == n) return v;
    throw PreconditionError("experiment report: no parameter '" + n + "'");
  }
};

namespace detail {

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) {
    if (!s.empty()) s += ',';
    s += format_double(x);
  }
  return s;
}

inline std::vector<double> to_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Witch's hat family

struct DeltaOptions {
  std::vector<int> ns{10, 20, 40};
  std::vector<double> times{0.1, 0.2, 0.3, 0.5, 1.0};
  double L = 10;
  int cells_per_width = 10;   // h = 1 / (cells_per_width * n)
  double safety = 0.8;
  double snap_every = 0;      // additional uniform snapshots
  double slack = 1e-2;
  int jobs = 1;
};

/// Grid for witch_hat(n): spacing 1/(cells * n), so +-1/n and 0 are nodes.
inline Grid witch_hat_grid(int n, double L, int cells_per_width = 10) {
  require(n >= 1 && cells_per_width >= 1, "witch_hat_grid: n and cells must be positive");
  return Grid::with_spacing(L, 1.0 / (static_cast<double>(cells_per_width) * n));
}

/// Flows witch_hat(n) for every n. Keys are n.
inline std::map<int, FlowTrace> delta_traces(const DeltaOptions& o) {
  require(!o.ns.empty() && !o.times.empty(), "delta experiment: need at least one n and one time");
  RunOptions ro;
  ro.t_end = *std::max_element(o.times.begin(), o.times.end());
  ro.extra_times = o.times;
  ro.snap_every = o.snap_every;
  ro.safety = o.safety;
  std::vector<FlowTrace> out(o.ns.size());
  parallel_for(o.ns.size(), o.jobs, [&](std::size_t k) {
    const int n = o.ns[k];
    out[k] = run(witch_hat(n), witch_hat_grid(n, o.L, o.cells_per_width), ro);
  });
  std::map<int, FlowTrace> traces;
  for (std::size_t k = 0; k < o.ns.size(); ++k) traces.emplace(o.ns[k], std::move(out[k]));
  return traces;
}

/// max over nodes with x in [a, b] of |y - W(x, t)| / W(x, t).
inline double wedge_deviation(const GridFunction& f, double t, const WedgeProfile& w, double a = 0.5,
                              double b = 2.0) {
  double worst = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = f.grid.x(i);
    if (x < a - 1e-12 || x > b + 1e-12) continue;
    const double ref = scaled_wedge(w, x, t);
    worst = std::max(worst, std::abs(f[i] - ref) / ref);
  }
  return worst;
}

/// max |y(x) - y(-x)|.
inline double evenness_defect(const GridFunction& f) {
  double worst = 0;
  for (std::size_t i = 0, j = f.size() - 1; i < j; ++i, --j) worst = std::max(worst, std::abs(f[i] - f[j]));
  return worst;
}

inline double value_at_origin(const GridFunction& f) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (std::abs(f.grid.x(i)) < std::abs(f.grid.x(best))) best = i;
  return f[best];
}

inline ExperimentReport delta_report(const std::map<int, FlowTrace>& traces, const DeltaOptions& o,
                                     const WedgeProfile& w) {
  const double tau = 1.0 / std::numbers::pi;
  ExperimentReport rep;
  rep.name = "witch-hat";
  rep.parameters = {{"n", detail::join(detail::to_doubles(o.ns))},
                    {"times", detail::join(o.times)},
                    {"L", detail::join({o.L})},
                    {"cells_per_width", std::to_string(o.cells_per_width)},
                    {"safety", detail::join({o.safety})},
                    {"slack", detail::join({o.slack})},
                    {"threshold_time", detail::join({tau})}};
  Table tab{"sup_norms",
            {"n", "t", "sup_y", "sup_slope", "y_origin", "origin_lower_bound", "wedge_deviation",
             "slope_angle_margin", "evenness_defect"},
            {}};
  // sup[n][t] for the trend checks.
  std::map<double, std::vector<std::pair<double, double>>> by_time;
  std::map<double, std::vector<double>> deviation_by_time;
  bool lower_ok = true, angle_ok = true, even_ok = true;
  std::vector<double> times = o.times;
  std::sort(times.begin(), times.end());
  for (int n : o.ns) {
    const auto& tr = traces.at(n);
    for (double t : times) {
      const Snapshot* s = tr.at(t);
      require(s != nullptr, "delta experiment: missing snapshot time");
      const auto nm = norms(s->f);
      const double slope = nm.lip;
      const double y0 = value_at_origin(s->f);
      const double lower = t < tau ? 0.5 * n * (1 - std::numbers::pi * t) : 0.0;
      const double dev = wedge_deviation(s->f, t, w);
      const double margin = t > tau ? 0.25 * (1 / t + std::numbers::pi) - std::atan(slope) : 0.0;
      const double even = evenness_defect(s->f);
      tab.rows.push_back({double(n), t, nm.sup, slope, y0, lower, dev, margin, even});
      by_time[t].push_back({nm.sup, slope});
      deviation_by_time[t].push_back(dev);
      if (t < tau && y0 < lower - o.slack) lower_ok = false;
      if (t > tau && margin < -o.slack) angle_ok = false;
      if (even != 0.0) even_ok = false;
    }
  }
  rep.tables.push_back(std::move(tab));

  // ns may be unsorted; order the trend checks by n.
  std::vector<std::size_t> order(o.ns.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return o.ns[a] < o.ns[b]; });
  bool increasing = true, converging = true;
  for (double t : times) {
    if (t > tau) continue;
    const auto& v = by_time[t];
    const auto& d = deviation_by_time[t];
    for (std::size_t k = 1; k < order.size(); ++k) {
      const auto &lo = v[order[k - 1]], &hi = v[order[k]];
      if (!(hi.first > lo.first && hi.second > lo.second)) increasing = false;
      if (!(d[order[k]] < d[order[k - 1]])) converging = false;
    }
  }
  rep.conclusions = {{"pre_threshold_growth_in_n", increasing},
                     {"origin_lower_bound", lower_ok},
                     {"post_threshold_gradient_bound", angle_ok},
                     {"wedge_deviation_decreasing_in_n", converging},
                     {"evenness_preserved", even_ok}};
  return rep;
}

inline ExperimentReport run_delta_experiment(const DeltaOptions& o, const WedgeProfile& w) {
  return delta_report(delta_traces(o), o, w);
}

// ---------------------------------------------------------------------------
// L1 pipeline

struct L1Options {
  std::vector<double> radii{0.1, 0.05, 0.025};
  std::vector<double> t_probe{0.01, 0.05, 0.1};
  double L = 10;
  double h = 0.005;
  double safety = 0.8;
  double slack = 1e-3;
  int jobs = 1;
};

inline ExperimentReport run_l1_pipeline(const InitialData& y0, const L1Options& o) {
  require(!o.radii.empty() && !o.t_probe.empty(), "l1 pipeline: need radii and probe times");
  for (double r : o.radii) require(r > 0, "l1 pipeline: radii must be positive");
  const Grid grid = Grid::with_spacing(o.L, o.h);
  std::vector<double> radii = o.radii, probes = o.t_probe;
  std::sort(radii.rbegin(), radii.rend());
  std::sort(probes.begin(), probes.end());

  RunOptions ro;
  ro.t_end = probes.back();
  ro.extra_times = probes;
  ro.safety = o.safety;
  std::vector<FlowTrace> traces(radii.size());
  parallel_for(radii.size(), o.jobs, [&](std::size_t k) { traces[k] = run(mollify(y0, radii[k]), grid, ro); });

  ExperimentReport rep;
  rep.name = "l1";
  rep.parameters = {{"init", y0.type_name()},
                    {"radii", detail::join(radii)},
                    {"t_probe", detail::join(probes)},
                    {"L", detail::join({o.L})},
                    {"h", detail::join({o.h})},
                    {"initial_l1", detail::join({y0.l1_norm()})}};
  Table attain{"attainment", {"radius", "t", "l1_to_initial"}, {}};
  Table cauchy{"cauchy", {"radius_a", "radius_b", "t", "l1_distance"}, {}};
  Table sep{"separation", {"radius_a", "radius_b", "worst_violation"}, {}};
  std::map<std::pair<std::size_t, std::size_t>, double> dist;   // (radius index, probe index)
  for (std::size_t k = 0; k < radii.size(); ++k) {
    attain.rows.push_back({radii[k], 0.0, l1_distance(traces[k].snapshots.front().f, y0)});
    for (std::size_t j = 0; j < probes.size(); ++j) {
      const double d = l1_distance(traces[k].at(probes[j])->f, y0);
      dist[{k, j}] = d;
      attain.rows.push_back({radii[k], probes[j], d});
    }
  }
  bool separation_ok = true;
  for (std::size_t k = 1; k < radii.size(); ++k) {
    for (double t : probes)
      cauchy.rows.push_back({radii[k - 1], radii[k], t, l1_distance(traces[k - 1].at(t)->f, traces[k].at(t)->f)});
    const auto ab = verify_separation(traces[k - 1], traces[k], o.slack);
    const auto ba = verify_separation(traces[k], traces[k - 1], o.slack);
    const double worst = std::max(ab.worst()->max_violation, ba.worst()->max_violation);
    sep.rows.push_back({radii[k - 1], radii[k], worst});
    separation_ok = separation_ok && ab.pass && ba.pass;
  }
  // Distances shrink along the diagonal where radius and t decrease together.
  bool shrinking = true;
  const std::size_t m = std::min(radii.size(), probes.size());
  for (std::size_t i = 1; i < m; ++i) {
    const double prev = dist[{i - 1, m - i}], cur = dist[{i, m - 1 - i}];
    if (!(cur < prev)) shrinking = false;
  }
  rep.tables = {attain, cauchy, sep};
  rep.conclusions = {{"separation_consistent", separation_ok}, {"attainment_shrinking", shrinking}};
  return rep;
}

// ---------------------------------------------------------------------------
// Lp sweep

struct LpOptions {
  std::vector<double> ps{1.5, 2, 3};
  std::vector<int> ns{10, 20, 40};
  double t_end = 1.0;
  double snap_every = 0.01;
  double L = 10;
  int cells_per_width = 10;
  double safety = 0.8;
  double slack = 1e-2;
  double uniformity = 1.2;    // allowed max/min ratio of the cap across n
  int jobs = 1;
};

/// sup |y(t)| t^{1/(p-1)} / |y0|_p^{p/(p-1)}.
inline double lp_normalised_height(double sup, double t, double p, double norm_p) {
  return sup * std::pow(t, 1.0 / (p - 1)) / std::pow(norm_p, p / (p - 1));
}

/// Largest normalised height over snapshots inside the window of the estimate.
inline double lp_cap(const FlowTrace& tr, double p, double norm_p) {
  const double window = lp_window(p, norm_p);
  double cap = 0;
  for (const auto& s : tr.snapshots)
    if (s.t > 0 && s.t < window) cap = std::max(cap, lp_normalised_height(norms(s.f).sup, s.t, p, norm_p));
  return cap;
}

inline ExperimentReport lp_report(const std::map<int, FlowTrace>& traces, const LpOptions& o,
                                  double C_refine) {
  ExperimentReport rep;
  rep.name = "lp";
  rep.parameters = {{"p", detail::join(o.ps)},
                    {"n", detail::join(detail::to_doubles(o.ns))},
                    {"t_end", detail::join({o.t_end})},
                    {"L", detail::join({o.L})},
                    {"C", detail::join({C_refine})}};
  Table caps{"caps", {"p", "n", "norm_p", "window", "cap", "bound_worst_violation", "validated"}, {}};
  bool uniform = true, bounded = true;
  for (double p : o.ps) {
    require(p > 1, "lp sweep: p must exceed 1");
    const bool validated = p > 1.05;
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (int n : o.ns) {
      const auto& tr = traces.at(n);
      const double norm_p = witch_hat(n).lp_norm(p);
      const double cap = lp_cap(tr, p, norm_p);
      const auto r = verify_lp_smoothing(tr, p, norm_p, C_refine, o.slack);
      const auto w = r.worst();
      caps.rows.push_back({p, double(n), norm_p, lp_window(p, norm_p), cap,
                           w ? w->max_violation : 0.0, validated ? 1.0 : 0.0});
      if (validated) {
        lo = std::min(lo, cap), hi = std::max(hi, cap);
        bounded = bounded && r.pass;
      }
    }
    if (validated && hi > o.uniformity * lo) uniform = false;
  }
  rep.tables = {caps};
  rep.conclusions = {{"cap_uniform_in_n", uniform}, {"two_branch_bound", bounded}};
  return rep;
}

inline ExperimentReport lp_sweep(const LpOptions& o, double C_refine) {
  DeltaOptions d;
  d.ns = o.ns;
  d.times = {o.t_end};
  d.L = o.L;
  d.cells_per_width = o.cells_per_width;
  d.safety = o.safety;
  d.snap_every = o.snap_every;
  d.jobs = o.jobs;
  return lp_report(delta_traces(d), o, C_refine);
}

}  // namespace csf
