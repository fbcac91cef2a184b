#pragma once

// Command-line surface: parse_cli turns argv into a RunConfig, execute runs it.
// Exit codes: 0 pass, 1 estimate or experiment failure, 2 usage error,
// 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "csf/analysis.hpp"
#include "csf/error.hpp"
#include "csf/estimates.hpp"
#include "csf/experiments.hpp"
#include "csf/io.hpp"
#include "csf/solver.hpp"
#include "csf/wedge.hpp"

namespace csf {

struct WedgeConfig {
  double tol = 1e-8;
  double x_max = 8.0;
  std::string out;
};

struct FlowConfig {
  std::string init;
  double L = 20;
  double h = 0.01;
  double t_end = 1.0;
  double snap = 0.05;
  std::string boundary = "dirichlet0";
  double safety = 0.8;
  std::string out;
};

struct AnalyzeConfig {
  std::string trace;
  std::string quantity = "norms";
  double p = 2;
  std::string out;
};

struct VerifyConfig {
  std::string trace;
  std::string wedge;                           // empty: solve at default tolerance
  std::vector<std::string> estimates{"all"};
  std::optional<double> slack;                 // default max(1e-3, 5h)
  std::optional<double> A0;                    // default: initial area of the trace
  std::optional<double> x_shift;               // default: right end of the initial support
  double shift = 0;
  double p = 2;
  int refine = 0;
  std::string report;
};

struct WitchHatConfig {
  std::vector<int> n{10, 20, 40};
  std::vector<double> times{0.1, 0.2, 0.3, 0.5, 1.0};
  double L = 10;
  int cells = 10;
  double snap = 0;
  double slack = 1e-2;
  std::string wedge;
  std::string out;
};

struct L1Config {
  std::string init;
  std::vector<double> radii{0.1, 0.05, 0.025};
  std::vector<double> t_probe{0.01, 0.05, 0.1};
  double L = 10;
  double h = 0.005;
  std::string out;
};

struct LpConfig {
  std::vector<double> p{1.5, 2, 3};
  std::vector<int> n{10, 20, 40};
  double t_end = 1.0;
  double snap = 0.01;
  double L = 10;
  int cells = 10;
  std::string wedge;
  std::string out;
};

struct ExportConfig {
  std::string trace;
  std::string report;
  std::string kind = "snapshots";
  std::string wedge;
  double x_shift = 0;
  std::string out;
};

struct HelpRequest {
  std::string text;
};

using CommandParams = std::variant<HelpRequest, WedgeConfig, FlowConfig, AnalyzeConfig, VerifyConfig,
                                   WitchHatConfig, L1Config, LpConfig, ExportConfig>;

struct RunConfig {
  std::string command;   // "wedge", "flow", ..., "experiment witch-hat", "help"
  int jobs = 1;
  CommandParams params;
};

namespace detail {

inline std::string data_path(const char* root, const std::string& name) {
  if (root && *root) return (std::filesystem::path(root) / name).string();
  return name;
}

inline CLI::Validator open_unit_interval() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          const double v = parse_double(s);
          if (v > 0 && v < 1) return {};
        } catch (const FormatError&) {
        }
        return "value " + s + " not in (0, 1)";
      },
      "(0,1)");
}

inline CLI::Validator positive() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          const double v = parse_double(s);
          if (v > 0 && std::isfinite(v)) return {};
        } catch (const FormatError&) {
        }
        return "value " + s + " must be positive";
      },
      "POSITIVE");
}

}  // namespace detail

/// Parses arguments (without the program name). Output paths left unset
/// default to files under data_root (CSF_DATA_DIR) or the working directory.
inline RunConfig parse_cli(std::vector<std::string> args, const char* data_root = std::getenv("CSF_DATA_DIR")) {
  CLI::App app{"Numerical laboratory for graphical curve shortening flow", "csf"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_help_all_flag("--help-all", "Show help for all subcommands");
  RunConfig cfg;
  app.add_option("--jobs", cfg.jobs, "Worker threads for independent runs")->check(CLI::PositiveNumber);

  WedgeConfig w;
  auto* wedge = app.add_subcommand("wedge", "Compute the right-angled wedge profile");
  wedge->add_option("--tol", w.tol, "Bisection tolerance")->check(detail::positive());
  wedge->add_option("--xmax", w.x_max, "End of the tabulated range")->check(detail::positive());
  wedge->add_option("--out", w.out, "Output CSV (JSON sidecar written next to it)");

  FlowConfig f;
  auto* flow = app.add_subcommand("flow", "Evolve initial data and write a trace directory");
  flow->add_option("--init", f.init, "Initial data JSON")->required();
  flow->add_option("--L", f.L, "Half-width of the domain")->check(detail::positive());
  flow->add_option("--h", f.h, "Grid spacing")->check(detail::positive());
  flow->add_option("--t-end", f.t_end, "Final time")->check(detail::positive());
  flow->add_option("--snap", f.snap, "Snapshot interval")->check(detail::positive());
  flow->add_option("--boundary", f.boundary, "dirichlet0 or neumann")
      ->check(CLI::IsMember({"dirichlet0", "neumann"}));
  flow->add_option("--safety", f.safety, "Fraction of the stability limit h^2/2")->check(detail::open_unit_interval());
  flow->add_option("--out", f.out, "Trace directory");

  AnalyzeConfig a;
  auto* analyze = app.add_subcommand("analyze", "Derived quantities of a trace");
  analyze->add_option("--trace", a.trace, "Trace directory")->required();
  analyze->add_option("--quantity", a.quantity, "area, harnack, gradient or norms")
      ->check(CLI::IsMember({"area", "harnack", "gradient", "norms"}));
  analyze->add_option("--p", a.p, "Exponent for the Lp norm column")->check(CLI::Range(1.0 + 1e-12, 1e12));
  analyze->add_option("--out", a.out, "Output CSV");

  VerifyConfig v;
  std::string estimates = "all";
  double slack = 0, A0 = 0, xs = 0;
  auto* verify = app.add_subcommand("verify", "Check estimates against a trace");
  verify->add_option("--trace", v.trace, "Trace directory")->required();
  verify->add_option("--wedge", v.wedge, "Wedge CSV written by 'csf wedge'");
  verify->add_option("--estimates", estimates, "all or a comma-separated list");
  auto* slack_opt = verify->add_option("--slack", slack, "Numerical slack")->check(CLI::NonNegativeNumber);
  auto* a0_opt = verify->add_option("--A0", A0, "Initial area (default: from the trace)")->check(detail::positive());
  auto* xs_opt = verify->add_option("--x-shift", xs, "Support edge for the wedge barrier");
  verify->add_option("--shift", v.shift, "Vertical shift for the height-gradient check");
  verify->add_option("--p", v.p, "Exponent for the Lp check")->check(CLI::Range(1.0 + 1e-12, 1e12));
  verify->add_option("--refine", v.refine, "Grid refinements to try before flagging a failure")
      ->check(CLI::Range(0, 4));
  verify->add_option("--report", v.report, "Report JSON");

  auto* experiment = app.add_subcommand("experiment", "End-to-end experiments");
  experiment->require_subcommand(1);
  WitchHatConfig wh;
  auto* whc = experiment->add_subcommand("witch-hat", "Witch's hat family");
  whc->add_option("--n", wh.n, "Comma-separated n values")->delimiter(',')->check(CLI::PositiveNumber);
  whc->add_option("--times", wh.times, "Comma-separated report times")->delimiter(',')->check(detail::positive());
  whc->add_option("--L", wh.L, "Half-width of the domain")->check(detail::positive());
  whc->add_option("--cells", wh.cells, "Grid cells per 1/n")->check(CLI::PositiveNumber);
  whc->add_option("--snap", wh.snap, "Extra uniform snapshot interval")->check(CLI::NonNegativeNumber);
  whc->add_option("--slack", wh.slack, "Numerical slack")->check(CLI::NonNegativeNumber);
  whc->add_option("--wedge", wh.wedge, "Wedge CSV");
  whc->add_option("--out", wh.out, "Report JSON");
  L1Config l1;
  auto* l1c = experiment->add_subcommand("l1", "Mollification pipeline for L1 data");
  l1c->add_option("--init", l1.init, "Initial data JSON")->required();
  l1c->add_option("--radii", l1.radii, "Comma-separated radii")->delimiter(',')->check(detail::positive());
  l1c->add_option("--t-probe", l1.t_probe, "Comma-separated probe times")->delimiter(',')->check(detail::positive());
  l1c->add_option("--L", l1.L, "Half-width of the domain")->check(detail::positive());
  l1c->add_option("--h", l1.h, "Grid spacing")->check(detail::positive());
  l1c->add_option("--out", l1.out, "Report JSON");
  LpConfig lp;
  auto* lpc = experiment->add_subcommand("lp", "Lp smoothing sweep over the witch's hat family");
  lpc->add_option("--p", lp.p, "Comma-separated exponents (> 1)")->delimiter(',')->check(CLI::Range(1.0 + 1e-12, 1e12));
  lpc->add_option("--n", lp.n, "Comma-separated n values")->delimiter(',')->check(CLI::PositiveNumber);
  lpc->add_option("--t-end", lp.t_end, "Final time")->check(detail::positive());
  lpc->add_option("--snap", lp.snap, "Snapshot interval")->check(detail::positive());
  lpc->add_option("--L", lp.L, "Half-width of the domain")->check(detail::positive());
  lpc->add_option("--cells", lp.cells, "Grid cells per 1/n")->check(CLI::PositiveNumber);
  lpc->add_option("--wedge", lp.wedge, "Wedge CSV");
  lpc->add_option("--out", lp.out, "Report JSON");

  ExportConfig ex;
  auto* exc = app.add_subcommand("export", "Plot-ready CSV");
  auto* ex_trace = exc->add_option("--trace", ex.trace, "Trace directory");
  auto* ex_report = exc->add_option("--report", ex.report, "Report JSON from 'csf verify'");
  ex_trace->excludes(ex_report);
  exc->add_option("--kind", ex.kind, "snapshots, wedge-overlay or estimate-margins")
      ->check(CLI::IsMember({"snapshots", "wedge-overlay", "estimate-margins"}));
  exc->add_option("--wedge", ex.wedge, "Wedge CSV for wedge-overlay");
  exc->add_option("--x-shift", ex.x_shift, "Barrier shift for wedge-overlay");
  exc->add_option("--out", ex.out, "Output CSV");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    cfg.command = "help";
    cfg.params = HelpRequest{app.help()};
    return cfg;
  } catch (const CLI::CallForAllHelp&) {
    cfg.command = "help";
    cfg.params = HelpRequest{app.help("", CLI::AppFormatMode::All)};
    return cfg;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  auto out_or = [&](std::string& s, const std::string& name) {
    if (s.empty()) s = detail::data_path(data_root, name);
  };
  if (wedge->parsed()) {
    out_or(w.out, "wedge.csv");
    cfg.command = "wedge", cfg.params = w;
  } else if (flow->parsed()) {
    out_or(f.out, "trace");
    cfg.command = "flow", cfg.params = f;
  } else if (analyze->parsed()) {
    out_or(a.out, a.quantity + ".csv");
    cfg.command = "analyze", cfg.params = a;
  } else if (verify->parsed()) {
    v.estimates.clear();
    std::stringstream ss(estimates);
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) v.estimates.push_back(item);
    if (v.estimates.empty()) throw UsageError("--estimates: empty list");
    if (slack_opt->count()) v.slack = slack;
    if (a0_opt->count()) v.A0 = A0;
    if (xs_opt->count()) v.x_shift = xs;
    out_or(v.report, "report.json");
    cfg.command = "verify", cfg.params = v;
  } else if (whc->parsed()) {
    out_or(wh.out, "witch_hat_report.json");
    cfg.command = "experiment witch-hat", cfg.params = wh;
  } else if (l1c->parsed()) {
    out_or(l1.out, "l1_report.json");
    cfg.command = "experiment l1", cfg.params = l1;
  } else if (lpc->parsed()) {
    out_or(lp.out, "lp_report.json");
    cfg.command = "experiment lp", cfg.params = lp;
  } else if (exc->parsed()) {
    if (ex.trace.empty() == ex.report.empty()) throw UsageError("--trace/--report: give exactly one");
    if (ex.kind == "estimate-margins" && ex.report.empty()) throw UsageError("--kind: estimate-margins needs --report");
    if (ex.kind != "estimate-margins" && ex.trace.empty()) throw UsageError("--kind: " + ex.kind + " needs --trace");
    if (ex.kind == "wedge-overlay" && ex.wedge.empty()) throw UsageError("--wedge: required for wedge-overlay");
    out_or(ex.out, ex.kind + ".csv");
    cfg.command = "export", cfg.params = ex;
  }
  return cfg;
}

inline RunConfig parse_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return parse_cli(std::move(args));
}

// ---------------------------------------------------------------------------
// Config serialization

namespace detail {

template <class T>
Json opt_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <class T>
std::optional<T> opt_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace detail

inline Json to_json(const RunConfig& c) {
  Json p = std::visit(
      [](const auto& k) -> Json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, HelpRequest>) {
          return {{"text", k.text}};
        } else if constexpr (std::is_same_v<T, WedgeConfig>) {
          return {{"tol", k.tol}, {"x_max", k.x_max}, {"out", k.out}};
        } else if constexpr (std::is_same_v<T, FlowConfig>) {
          return {{"init", k.init},   {"L", k.L},           {"h", k.h},           {"t_end", k.t_end},
                  {"snap", k.snap},   {"boundary", k.boundary}, {"safety", k.safety}, {"out", k.out}};
        } else if constexpr (std::is_same_v<T, AnalyzeConfig>) {
          return {{"trace", k.trace}, {"quantity", k.quantity}, {"p", k.p}, {"out", k.out}};
        } else if constexpr (std::is_same_v<T, VerifyConfig>) {
          return {{"trace", k.trace},
                  {"wedge", k.wedge},
                  {"estimates", k.estimates},
                  {"slack", detail::opt_json(k.slack)},
                  {"A0", detail::opt_json(k.A0)},
                  {"x_shift", detail::opt_json(k.x_shift)},
                  {"shift", k.shift},
                  {"p", k.p},
                  {"refine", k.refine},
                  {"report", k.report}};
        } else if constexpr (std::is_same_v<T, WitchHatConfig>) {
          return {{"n", k.n},         {"times", k.times}, {"L", k.L},         {"cells", k.cells},
                  {"snap", k.snap},   {"slack", k.slack}, {"wedge", k.wedge}, {"out", k.out}};
        } else if constexpr (std::is_same_v<T, L1Config>) {
          return {{"init", k.init}, {"radii", k.radii}, {"t_probe", k.t_probe},
                  {"L", k.L},       {"h", k.h},         {"out", k.out}};
        } else if constexpr (std::is_same_v<T, LpConfig>) {
          return {{"p", k.p}, {"n", k.n},         {"t_end", k.t_end}, {"snap", k.snap},
                  {"L", k.L}, {"cells", k.cells}, {"wedge", k.wedge}, {"out", k.out}};
        } else {
          return {{"trace", k.trace}, {"report", k.report}, {"kind", k.kind},
                  {"wedge", k.wedge}, {"x_shift", k.x_shift}, {"out", k.out}};
        }
      },
      c.params);
  return {{"command", c.command}, {"jobs", c.jobs}, {"params", p}};
}

inline RunConfig config_from_json(const Json& j) {
  RunConfig c;
  try {
    c.command = j.at("command").get<std::string>();
    c.jobs = j.at("jobs").get<int>();
    const auto& p = j.at("params");
    if (c.command == "help") {
      c.params = HelpRequest{p.at("text").get<std::string>()};
    } else if (c.command == "wedge") {
      c.params = WedgeConfig{p.at("tol").get<double>(), p.at("x_max").get<double>(), p.at("out").get<std::string>()};
    } else if (c.command == "flow") {
      c.params = FlowConfig{p.at("init").get<std::string>(), p.at("L").get<double>(),    p.at("h").get<double>(),
                            p.at("t_end").get<double>(),     p.at("snap").get<double>(), p.at("boundary").get<std::string>(),
                            p.at("safety").get<double>(),    p.at("out").get<std::string>()};
    } else if (c.command == "analyze") {
      c.params = AnalyzeConfig{p.at("trace").get<std::string>(), p.at("quantity").get<std::string>(),
                               p.at("p").get<double>(), p.at("out").get<std::string>()};
    } else if (c.command == "verify") {
      VerifyConfig v;
      v.trace = p.at("trace").get<std::string>();
      v.wedge = p.at("wedge").get<std::string>();
      v.estimates = p.at("estimates").get<std::vector<std::string>>();
      v.slack = detail::opt_from<double>(p, "slack");
      v.A0 = detail::opt_from<double>(p, "A0");
      v.x_shift = detail::opt_from<double>(p, "x_shift");
      v.shift = p.at("shift").get<double>();
      v.p = p.at("p").get<double>();
      v.refine = p.at("refine").get<int>();
      v.report = p.at("report").get<std::string>();
      c.params = v;
    } else if (c.command == "experiment witch-hat") {
      c.params = WitchHatConfig{p.at("n").get<std::vector<int>>(), p.at("times").get<std::vector<double>>(),
                                p.at("L").get<double>(),          p.at("cells").get<int>(),
                                p.at("snap").get<double>(),       p.at("slack").get<double>(),
                                p.at("wedge").get<std::string>(), p.at("out").get<std::string>()};
    } else if (c.command == "experiment l1") {
      c.params = L1Config{p.at("init").get<std::string>(), p.at("radii").get<std::vector<double>>(),
                          p.at("t_probe").get<std::vector<double>>(), p.at("L").get<double>(),
                          p.at("h").get<double>(), p.at("out").get<std::string>()};
    } else if (c.command == "experiment lp") {
      c.params = LpConfig{p.at("p").get<std::vector<double>>(), p.at("n").get<std::vector<int>>(),
                          p.at("t_end").get<double>(),          p.at("snap").get<double>(),
                          p.at("L").get<double>(),              p.at("cells").get<int>(),
                          p.at("wedge").get<std::string>(),     p.at("out").get<std::string>()};
    } else if (c.command == "export") {
      c.params = ExportConfig{p.at("trace").get<std::string>(), p.at("report").get<std::string>(),
                              p.at("kind").get<std::string>(),  p.at("wedge").get<std::string>(),
                              p.at("x_shift").get<double>(),    p.at("out").get<std::string>()};
    } else {
      throw FormatError("config: unknown command '" + c.command + "'");
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Execution

/// Names accepted by `csf verify --estimates`.
inline const std::vector<std::string>& estimate_names() {
  static const std::vector<std::string> names{"harnack",          "harnack_bounds",           "delayed_gradient",
                                              "refined_gradient", "height_controls_gradient", "height_gradient_corollary",
                                              "delayed_height",   "wedge_barrier",            "lp_smoothing",
                                              "area_conservation"};
  return names;
}

/// Re-runs the trace's initial data on a grid refined by 2^level, with the
/// same snapshot times and scheme settings.
inline FlowTrace rerun_refined(const FlowTrace& tr, int level) {
  if (level == 0) return tr;
  const Grid g(tr.grid().L, tr.grid().n << level);
  RunOptions o;
  o.t_end = tr.snapshots.back().t;
  o.extra_times = tr.times();
  o.boundary = tr.scheme.boundary;
  o.safety = tr.scheme.safety;
  return run(tr.initial, g, o);
}

namespace detail {

inline WedgeProfile load_or_solve_wedge(const std::string& path) {
  return path.empty() ? solve_wedge(WedgeOptions{}) : read_wedge(path);
}

inline EstimateReport run_estimate(const std::string& name, const FlowTrace& tr, const WedgeProfile& w,
                                   const VerifyConfig& v, double slack) {
  const double A0 = v.A0 ? *v.A0 : tr.total_area_initial;
  if (name == "harnack") return verify_harnack(tr, A0, slack);
  if (name == "harnack_bounds") return verify_harnack_bounds(tr, A0, slack);
  if (name == "delayed_gradient") return verify_delayed_gradient(tr, A0, slack);
  if (name == "refined_gradient") return verify_refined_gradient(tr, A0, w, slack);
  if (name == "height_controls_gradient") return verify_height_controls_gradient(tr, w, slack, v.shift);
  if (name == "height_gradient_corollary")
    return verify_height_gradient_corollary(tr, derived_constants(w).gradient_height, slack, v.shift);
  if (name == "delayed_height") return verify_delayed_height(tr, A0, w, slack, derived_constants(w).delayed_height);
  if (name == "wedge_barrier") {
    const double xs = v.x_shift ? *v.x_shift : tr.initial.support().second;
    return verify_wedge_barrier(tr, w, slack, xs);
  }
  if (name == "lp_smoothing")
    return verify_lp_smoothing(tr, v.p, lp_norm(tr.snapshots.front().f, v.p), derived_constants(w).delayed_height,
                               slack);
  if (name == "area_conservation") return verify_area_conservation(tr, slack);
  throw UsageError("--estimates: unknown estimate '" + name + "'");
}

}  // namespace detail

inline int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return std::visit(
      [&](const auto& k) -> int {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, HelpRequest>) {
          out << k.text;
          return 0;
        } else if constexpr (std::is_same_v<T, WedgeConfig>) {
          WedgeOptions o;
          o.tol = k.tol;
          o.x_max = k.x_max;
          const auto w = solve_wedge(o);
          write_wedge(w, k.out);
          out << wedge_summary(w).dump(2) << "\n";
          return 0;
        } else if constexpr (std::is_same_v<T, FlowConfig>) {
          const auto init = read_initial(k.init);
          const auto grid = Grid::with_spacing(k.L, k.h);
          RunOptions o;
          o.t_end = k.t_end;
          o.snap_every = k.snap;
          o.boundary = parse_boundary(k.boundary);
          o.safety = k.safety;
          const auto tr = run(init, grid, o, [&](const std::string& m) { err << "warning: " << m << "\n"; });
          write_trace(tr, k.out);
          out << "wrote " << tr.snapshots.size() << " snapshots to " << k.out << "\n";
          return 0;
        } else if constexpr (std::is_same_v<T, AnalyzeConfig>) {
          const auto tr = read_trace(k.trace);
          std::vector<std::vector<double>> rows;
          std::vector<std::string> header;
          if (k.quantity == "norms") {
            header = {"t", "l1", "sup", "lip", "lp"};
            for (const auto& s : tr.snapshots) {
              const auto n = norms(s.f);
              rows.push_back({s.t, n.l1, n.sup, n.lip, lp_norm(s.f, k.p)});
            }
          } else {
            header = {"t", "x", k.quantity};
            for (const auto& s : tr.snapshots) {
              GridFunction q(s.f.grid);
              if (k.quantity == "area") q.values = accumulated_area(s.f).values;
              if (k.quantity == "harnack") q = harnack_quantity(s.f, s.t);
              if (k.quantity == "gradient") q = gradient(s.f);
              for (std::size_t i = 0; i < q.size(); ++i) rows.push_back({s.t, s.f.grid.x(i), q[i]});
            }
          }
          write_text(k.out, csv_text(header, rows));
          return 0;
        } else if constexpr (std::is_same_v<T, VerifyConfig>) {
          const auto tr = read_trace(k.trace);
          const auto w = detail::load_or_solve_wedge(k.wedge);
          std::vector<std::string> names = k.estimates;
          if (names.size() == 1 && names[0] == "all") names = estimate_names();
          for (const auto& n : names)
            if (std::find(estimate_names().begin(), estimate_names().end(), n) == estimate_names().end())
              throw UsageError("--estimates: unknown estimate '" + n + "'");
          std::vector<EstimateReport> reports;
          for (const auto& n : names) {
            auto make = [&](int level) {
              const auto t = rerun_refined(tr, level);
              const double slack = k.slack ? *k.slack : default_slack(t.scheme.h);
              return detail::run_estimate(n, t, w, k, slack);
            };
            reports.push_back(verify_with_refinement(make, k.refine));
          }
          const auto j = to_json(reports);
          write_json(k.report, j);
          for (const auto& r : reports) out << (r.pass ? "PASS " : "FAIL ") << r.name << "\n";
          return j.at("pass").template get<bool>() ? 0 : 1;
        } else if constexpr (std::is_same_v<T, WitchHatConfig>) {
          const auto w = detail::load_or_solve_wedge(k.wedge);
          DeltaOptions o;
          o.ns = k.n;
          o.times = k.times;
          o.L = k.L;
          o.cells_per_width = k.cells;
          o.snap_every = k.snap;
          o.slack = k.slack;
          o.jobs = cfg.jobs;
          const auto rep = run_delta_experiment(o, w);
          write_json(k.out, to_json(rep));
          for (const auto& [name, ok] : rep.conclusions) out << (ok ? "PASS " : "FAIL ") << name << "\n";
          return rep.pass() ? 0 : 1;
        } else if constexpr (std::is_same_v<T, L1Config>) {
          L1Options o;
          o.radii = k.radii;
          o.t_probe = k.t_probe;
          o.L = k.L;
          o.h = k.h;
          o.jobs = cfg.jobs;
          const auto rep = run_l1_pipeline(read_initial(k.init), o);
          write_json(k.out, to_json(rep));
          for (const auto& [name, ok] : rep.conclusions) out << (ok ? "PASS " : "FAIL ") << name << "\n";
          return rep.pass() ? 0 : 1;
        } else if constexpr (std::is_same_v<T, LpConfig>) {
          const auto w = detail::load_or_solve_wedge(k.wedge);
          LpOptions o;
          o.ps = k.p;
          o.ns = k.n;
          o.t_end = k.t_end;
          o.snap_every = k.snap;
          o.L = k.L;
          o.cells_per_width = k.cells;
          o.jobs = cfg.jobs;
          const auto rep = lp_sweep(o, derived_constants(w).delayed_height);
          write_json(k.out, to_json(rep));
          for (const auto& [name, ok] : rep.conclusions) out << (ok ? "PASS " : "FAIL ") << name << "\n";
          return rep.pass() ? 0 : 1;
        } else {
          const auto kind = parse_export_kind(k.kind);
          if (kind == ExportKind::estimate_margins) {
            write_text(k.out, export_margins(reports_from_json(read_json(k.report))));
          } else {
            const auto tr = read_trace(k.trace);
            std::optional<WedgeProfile> w;
            if (kind == ExportKind::wedge_overlay) w = read_wedge(k.wedge);
            write_text(k.out, export_trace(tr, kind, w ? &*w : nullptr, k.x_shift));
          }
          return 0;
        }
      },
      cfg.params);
}

/// Full entry point with the exit-code policy.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  try {
    return execute(parse_cli(argc, argv), out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace csf
