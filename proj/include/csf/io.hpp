#pragma once

// CSV + JSON formats for traces, initial data, wedge tables and reports.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "csf/analysis.hpp"
#include "csf/error.hpp"
#include "csf/estimates.hpp"
#include "csf/experiments.hpp"
#include "csf/format.hpp"
#include "csf/initial_data.hpp"
#include "csf/solver.hpp"
#include "csf/wedge.hpp"

namespace csf {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Plain files

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FormatError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw FormatError("cannot write " + p.string());
  out << text;
  if (!out) throw FormatError("write failed: " + p.string());
}

inline Json read_json(const fs::path& p) {
  try {
    return Json::parse(read_text(p));
  } catch (const Json::parse_error& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

inline void write_json(const fs::path& p, const Json& j) { write_text(p, j.dump(2) + "\n"); }

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Numeric CSV with a header line.
inline CsvTable read_csv(const fs::path& p) {
  std::istringstream in(read_text(p));
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(p.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split_csv_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != t.header.size())
      throw FormatError(p.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.header.size()) + " fields");
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        row.push_back(parse_double(c));
      } catch (const FormatError& e) {
        throw FormatError(p.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string s;
  for (std::size_t k = 0; k < header.size(); ++k) s += (k ? "," : "") + header[k];
  s += '\n';
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k) s += ',';
      if (!std::isnan(r[k])) s += format_double(r[k]);
    }
    s += '\n';
  }
  return s;
}

inline void require_header(const CsvTable& t, const std::vector<std::string>& want, const fs::path& p) {
  if (t.header != want) {
    std::string w;
    for (const auto& c : want) w += (w.empty() ? "" : ",") + c;
    throw FormatError(p.string() + ": expected header " + w);
  }
}

// ---------------------------------------------------------------------------
// Initial data

/// Two-column x,y table; a repeated x encodes a jump.
inline PiecewiseLinear read_samples(const fs::path& p) {
  const auto t = read_csv(p);
  if (t.header.size() != 2) throw FormatError(p.string() + ": expected two columns x,y");
  std::vector<double> xs, ys;
  for (const auto& r : t.rows) xs.push_back(r[0]), ys.push_back(r[1]);
  try {
    return PiecewiseLinear(std::move(xs), std::move(ys));
  } catch (const PreconditionError& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

inline Json to_json(const InitialData& d) {
  return std::visit(
      [](const auto& k) -> Json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, WitchHat>) {
          return {{"type", "witch_hat"}, {"n", k.n}};
        } else if constexpr (std::is_same_v<T, PiecewiseLinear>) {
          return {{"type", "piecewise_linear"}, {"xs", k.xs}, {"ys", k.ys}};
        } else if constexpr (std::is_same_v<T, SampledTable>) {
          // Values are embedded so traces stay readable without the original file.
          return {{"type", "samples"}, {"path", k.path}, {"xs", k.table.xs}, {"ys", k.table.ys}};
        } else {
          return {{"type", "mollified"}, {"base", to_json(*k.base)}, {"radius", k.radius}};
        }
      },
      d.kind);
}

/// Parses a descriptor; relative sample paths resolve against base_dir.
inline InitialData initial_from_json(const Json& j, const fs::path& base_dir = {}) {
  try {
    const auto type = j.at("type").get<std::string>();
    if (type == "witch_hat") return witch_hat(j.at("n").get<int>());
    if (type == "piecewise_linear")
      return InitialData(PiecewiseLinear(j.at("xs").get<std::vector<double>>(), j.at("ys").get<std::vector<double>>()));
    if (type == "samples") {
      const auto path = j.at("path").get<std::string>();
      if (j.contains("xs"))
        return InitialData(SampledTable{
            path, PiecewiseLinear(j.at("xs").get<std::vector<double>>(), j.at("ys").get<std::vector<double>>())});
      fs::path p(path);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      return InitialData(SampledTable{path, read_samples(p)});
    }
    if (type == "mollified") return mollify(initial_from_json(j.at("base"), base_dir), j.at("radius").get<double>());
    throw FormatError("unknown initial data type '" + type + "'");
  } catch (const Json::exception& e) {
    throw FormatError(std::string("initial data: ") + e.what());
  } catch (const PreconditionError& e) {
    throw FormatError(std::string("initial data: ") + e.what());
  }
}

inline InitialData read_initial(const fs::path& p) { return initial_from_json(read_json(p), p.parent_path()); }

// ---------------------------------------------------------------------------
// Traces: one t_<time>.csv per snapshot plus meta.json

inline std::string snapshot_file_name(double t) { return "t_" + format_double(t) + ".csv"; }

inline void write_trace(const FlowTrace& tr, const fs::path& dir) {
  require(!tr.snapshots.empty(), "write_trace: empty trace");
  fs::create_directories(dir);
  Json snaps = Json::array();
  for (const auto& s : tr.snapshots) {
    std::vector<std::vector<double>> rows;
    rows.reserve(s.f.size());
    for (std::size_t i = 0; i < s.f.size(); ++i) rows.push_back({s.f.grid.x(i), s.f[i]});
    const auto name = snapshot_file_name(s.t);
    write_text(dir / name, csv_text({"x", "y"}, rows));
    snaps.push_back({{"t", s.t}, {"file", name}, {"boundary_inflow", s.boundary_inflow}});
  }
  Json meta = {{"initial", to_json(tr.initial)},
               {"grid", {{"L", tr.grid().L}, {"n", tr.grid().n}}},
               {"scheme",
                {{"dt", tr.scheme.dt},
                 {"h", tr.scheme.h},
                 {"L", tr.scheme.L},
                 {"safety", tr.scheme.safety},
                 {"boundary", to_string(tr.scheme.boundary)}}},
               {"total_area_initial", tr.total_area_initial},
               {"snapshots", snaps}};
  write_json(dir / "meta.json", meta);
}

inline FlowTrace read_trace(const fs::path& dir) {
  const auto meta_path = dir / "meta.json";
  if (!fs::exists(meta_path)) throw FormatError("missing " + meta_path.string());
  const Json meta = read_json(meta_path);
  FlowTrace tr;
  try {
    const Grid grid(meta.at("grid").at("L").get<double>(), meta.at("grid").at("n").get<int>());
    tr.initial = initial_from_json(meta.at("initial"), dir);
    const auto& sc = meta.at("scheme");
    tr.scheme = {sc.at("dt").get<double>(), sc.at("h").get<double>(), sc.at("L").get<double>(),
                 sc.at("safety").get<double>(), parse_boundary(sc.at("boundary").get<std::string>())};
    tr.total_area_initial = meta.at("total_area_initial").get<double>();
    for (const auto& s : meta.at("snapshots")) {
      const auto file = dir / s.at("file").get<std::string>();
      const auto t = read_csv(file);
      require_header(t, {"x", "y"}, file);
      if (t.rows.size() != grid.size())
        throw FormatError(file.string() + ": expected " + std::to_string(grid.size()) + " nodes, found " +
                          std::to_string(t.rows.size()));
      GridFunction f(grid);
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (std::abs(t.rows[i][0] - grid.x(i)) > 1e-9 * grid.L)
          throw FormatError(file.string() + ": node " + std::to_string(i) + " does not match the grid");
        f[i] = t.rows[i][1];
      }
      tr.snapshots.push_back({s.at("t").get<double>(), std::move(f), s.at("boundary_inflow").get<double>()});
    }
  } catch (const Json::exception& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  } catch (const PreconditionError& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }
  if (tr.snapshots.empty()) throw FormatError(meta_path.string() + ": no snapshots");
  for (std::size_t k = 1; k < tr.snapshots.size(); ++k)
    if (!(tr.snapshots[k].t > tr.snapshots[k - 1].t)) throw FormatError(meta_path.string() + ": times not increasing");
  return tr;
}

// ---------------------------------------------------------------------------
// Wedge table: x,w,wprime CSV plus a JSON sidecar

inline fs::path wedge_sidecar(const fs::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

inline Json wedge_summary(const WedgeProfile& w) {
  return {{"d", w.d()},
          {"symmetric_point", w.symmetric_point()},
          {"tail_coefficient", w.tail_coefficient()},
          {"area_check", w.total_area()},
          {"first_integral_spread", w.first_integral_spread()},
          {"tolerance", w.tolerance()},
          {"x_max", w.x_max()},
          {"splice_mismatch", w.splice_mismatch()}};
}

inline void write_wedge(const WedgeProfile& w, const fs::path& csv) {
  std::vector<std::vector<double>> rows;
  for (const auto& s : w.samples()) rows.push_back({s.x, s.w, s.wprime});
  write_text(csv, csv_text({"x", "w", "wprime"}, rows));
  write_json(wedge_sidecar(csv), wedge_summary(w));
}

inline WedgeProfile read_wedge(const fs::path& csv) {
  const auto t = read_csv(csv);
  require_header(t, {"x", "w", "wprime"}, csv);
  const auto side = read_json(wedge_sidecar(csv));
  std::vector<WedgeSample> samples;
  for (const auto& r : t.rows) samples.push_back({r[0], r[1], r[2]});
  try {
    return WedgeProfile(std::move(samples), side.at("symmetric_point").get<double>(),
                        side.at("tolerance").get<double>());
  } catch (const Json::exception& e) {
    throw FormatError(wedge_sidecar(csv).string() + ": " + e.what());
  } catch (const PreconditionError& e) {
    throw FormatError(csv.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports

inline Json to_json(const EstimateReport& r) {
  Json j = {{"name", r.name}};
  j["threshold_time"] = r.threshold_time ? Json(*r.threshold_time) : Json(nullptr);
  j["pass"] = r.pass;
  j["slack"] = r.slack;
  if (const auto w = r.worst())
    j["worst"] = {{"t", w->t}, {"x", w->arg_x}, {"violation", w->max_violation}};
  else
    j["worst"] = nullptr;
  if (r.shift != 0) j["shift"] = r.shift;
  if (r.refinement_level != 0) j["refinement_level"] = r.refinement_level;
  Json per = Json::array();
  for (const auto& c : r.per_snapshot) {
    Json e = {{"t", c.t}, {"applicable", c.applicable}};
    if (c.applicable) e["max_violation"] = c.max_violation, e["x"] = c.arg_x;
    per.push_back(e);
  }
  j["per_snapshot"] = per;
  if (!r.sub_checks.empty()) {
    Json subs = Json::array();
    for (const auto& s : r.sub_checks) subs.push_back(to_json(s));
    j["sub_checks"] = subs;
  }
  return j;
}

inline EstimateReport report_from_json(const Json& j) {
  EstimateReport r;
  r.name = j.at("name").get<std::string>();
  if (!j.at("threshold_time").is_null()) r.threshold_time = j.at("threshold_time").get<double>();
  r.pass = j.at("pass").get<bool>();
  r.slack = j.at("slack").get<double>();
  r.shift = j.value("shift", 0.0);
  r.refinement_level = j.value("refinement_level", 0);
  for (const auto& e : j.at("per_snapshot")) {
    SnapshotCheck c;
    c.t = e.at("t").get<double>();
    c.applicable = e.at("applicable").get<bool>();
    if (c.applicable) c.max_violation = e.at("max_violation").get<double>(), c.arg_x = e.at("x").get<double>();
    r.per_snapshot.push_back(c);
  }
  if (j.contains("sub_checks"))
    for (const auto& s : j.at("sub_checks")) r.sub_checks.push_back(report_from_json(s));
  return r;
}

inline Json to_json(const std::vector<EstimateReport>& reports) {
  bool pass = true;
  Json arr = Json::array();
  for (const auto& r : reports) pass = pass && r.pass, arr.push_back(to_json(r));
  return {{"pass", pass}, {"reports", arr}};
}

inline std::vector<EstimateReport> reports_from_json(const Json& j) {
  std::vector<EstimateReport> out;
  try {
    for (const auto& r : j.at("reports")) out.push_back(report_from_json(r));
  } catch (const Json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
  return out;
}

inline Json to_json(const ExperimentReport& r) {
  Json params = Json::object();
  for (const auto& [k, v] : r.parameters) params[k] = v;
  Json tables = Json::array();
  for (const auto& t : r.tables)
    tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows}, {"csv", csv_text(t.columns, t.rows)}});
  Json concl = Json::object();
  for (const auto& [k, v] : r.conclusions) concl[k] = v;
  return {{"name", r.name}, {"parameters", params}, {"tables", tables}, {"conclusions", concl}, {"pass", r.pass()}};
}

// ---------------------------------------------------------------------------
// Plot exports

enum class ExportKind { snapshots, wedge_overlay, estimate_margins };

inline ExportKind parse_export_kind(const std::string& s) {
  if (s == "snapshots") return ExportKind::snapshots;
  if (s == "wedge-overlay") return ExportKind::wedge_overlay;
  if (s == "estimate-margins") return ExportKind::estimate_margins;
  throw PreconditionError("unknown export kind '" + s + "'");
}

/// t,x,y rows; with a wedge, also the barrier W(|x| - x_shift, t) where it applies.
inline std::string export_trace(const FlowTrace& tr, ExportKind kind, const WedgeProfile* w = nullptr,
                                double x_shift = 0) {
  require(kind != ExportKind::estimate_margins, "export: estimate-margins needs a report");
  const bool overlay = kind == ExportKind::wedge_overlay;
  require(!overlay || w != nullptr, "export: wedge-overlay needs a wedge profile");
  std::vector<std::vector<double>> rows;
  for (const auto& s : tr.snapshots)
    for (std::size_t i = 0; i < s.f.size(); ++i) {
      const double x = s.f.grid.x(i);
      std::vector<double> row{s.t, x, s.f[i]};
      if (overlay) {
        const double u = std::abs(x) - x_shift;
        row.push_back(s.t > 0 && u > 0 ? scaled_wedge(*w, u, s.t) : std::nan(""));
      }
      rows.push_back(std::move(row));
    }
  if (overlay) return csv_text({"t", "x", "y", "wedge_bound"}, rows);
  return csv_text({"t", "x", "y"}, rows);
}

/// estimate,t,margin with margin = -violation, for applicable snapshots.
inline std::string export_margins(const std::vector<EstimateReport>& reports) {
  std::string s = "estimate,t,margin\n";
  auto add = [&](const EstimateReport& r, auto&& self) -> void {
    for (const auto& c : r.per_snapshot)
      if (c.applicable) s += r.name + "," + format_double(c.t) + "," + format_double(-c.max_violation) + "\n";
    for (const auto& sub : r.sub_checks) self(sub, self);
  };
  for (const auto& r : reports) add(r, add);
  return s;
}

}  // namespace csf
