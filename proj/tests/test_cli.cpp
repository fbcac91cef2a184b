#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "csf/cli.hpp"

using namespace csf;

namespace {

namespace fs = std::filesystem;

RunConfig parse(const std::string& line, const char* root = nullptr) {
  std::istringstream in(line);
  std::vector<std::string> args;
  for (std::string a; in >> a;) args.push_back(a);
  return parse_cli(args, root);
}

std::string usage_message(const std::string& line) {
  try {
    parse(line);
  } catch (const UsageError& e) {
    return e.what();
  }
  return {};
}

struct Run {
  int code;
  std::string out, err;
};

Run entry(std::vector<std::string> args) {
  args.insert(args.begin(), "csf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("csf_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Short witch-hat pipeline; the same command is documented in the README.
const char* kWitchHatArgs =
    "experiment witch-hat --n 2,4 --times 0.2,0.5,1 --L 4 --cells 10 --slack 0.01";

}  // namespace

TEST(Parse, WedgeTolerance) {
  const auto cfg = parse("wedge --tol 1e-10");
  EXPECT_EQ(cfg.command, "wedge");
  const auto& w = std::get<WedgeConfig>(cfg.params);
  EXPECT_EQ(w.tol, 1e-10);
  EXPECT_EQ(w.x_max, 8.0);
  EXPECT_EQ(w.out, "wedge.csv");
}

TEST(Parse, NegativeSpacingNamesFlag) {
  const auto msg = usage_message("flow --init a.json --h -0.01");
  EXPECT_NE(msg.find("--h"), std::string::npos) << msg;
}

TEST(Parse, ErrorsNameTheOffendingFlag) {
  EXPECT_NE(usage_message("flow --init a.json --safety 1.0").find("--safety"), std::string::npos);
  EXPECT_NE(usage_message("flow --init a.json --safety 0").find("--safety"), std::string::npos);
  EXPECT_NE(usage_message("flow --init a.json --bogus 3").find("--bogus"), std::string::npos);
  EXPECT_NE(usage_message("flow --init a.json --boundary periodic").find("--boundary"), std::string::npos);
  EXPECT_NE(usage_message("verify --trace t --estimates ,").find("--estimates"), std::string::npos);
  EXPECT_NE(usage_message("export --trace t --kind wedge-overlay").find("--wedge"), std::string::npos);
  EXPECT_FALSE(usage_message("flow").empty());
  EXPECT_FALSE(usage_message("").empty());
  EXPECT_FALSE(usage_message("frobnicate").empty());
}

TEST(Parse, SafetyInsideUnitInterval) {
  const auto cfg = parse("flow --init a.json --safety 0.95 --h 0.02 --t-end 0.5 --boundary neumann");
  const auto& f = std::get<FlowConfig>(cfg.params);
  EXPECT_EQ(f.safety, 0.95);
  EXPECT_EQ(f.h, 0.02);
  EXPECT_EQ(f.t_end, 0.5);
  EXPECT_EQ(f.boundary, "neumann");
}

TEST(Parse, ListsAndOptionalFields) {
  const auto cfg = parse("--jobs 3 experiment witch-hat --n 10,20 --times 0.1,0.5");
  EXPECT_EQ(cfg.command, "experiment witch-hat");
  EXPECT_EQ(cfg.jobs, 3);
  const auto& wh = std::get<WitchHatConfig>(cfg.params);
  EXPECT_EQ(wh.n, (std::vector<int>{10, 20}));
  EXPECT_EQ(wh.times, (std::vector<double>{0.1, 0.5}));

  const auto v = std::get<VerifyConfig>(parse("verify --trace t --estimates harnack,lp --slack 0").params);
  EXPECT_EQ(v.estimates, (std::vector<std::string>{"harnack", "lp"}));
  ASSERT_TRUE(v.slack.has_value());
  EXPECT_EQ(*v.slack, 0.0);
  EXPECT_FALSE(v.A0.has_value());
  EXPECT_FALSE(v.x_shift.has_value());
}

TEST(Parse, DataDirSetsDefaultOutputs) {
  const auto cfg = parse("experiment l1 --init d.json", "/data/root");
  EXPECT_EQ(fs::path(std::get<L1Config>(cfg.params).out), fs::path("/data/root") / "l1_report.json");
  const auto explicit_out = parse("experiment l1 --init d.json --out mine.json", "/data/root");
  EXPECT_EQ(std::get<L1Config>(explicit_out.params).out, "mine.json");
}

TEST(Parse, HelpIsNotAnError) {
  const auto cfg = parse("--help");
  EXPECT_EQ(cfg.command, "help");
  EXPECT_NE(std::get<HelpRequest>(cfg.params).text.find("wedge"), std::string::npos);
}

TEST(Config, JsonRoundTripForEveryCommand) {
  const std::vector<std::string> lines{
      "wedge --tol 1e-10 --xmax 9.5",
      "flow --init a.json --L 3 --h 0.003 --t-end 0.7 --snap 0.1 --safety 0.3 --boundary neumann --out tr",
      "analyze --trace tr --quantity harnack --p 3.5",
      "verify --trace tr --estimates harnack,wedge_barrier --slack 0.001 --A0 0.999 --x-shift 0.1 --refine 2",
      "verify --trace tr",
      "--jobs 4 experiment witch-hat --n 10,20,40 --times 0.1,0.2 --snap 0.01",
      "experiment l1 --init d.json --radii 0.1,0.025 --t-probe 0.01 --h 0.0025",
      "experiment lp --p 1.5,2 --n 10 --t-end 0.4",
      "export --report r.json --kind estimate-margins",
      "export --trace tr --kind wedge-overlay --wedge w.csv --x-shift 0.1",
  };
  for (const auto& l : lines) {
    const auto cfg = parse(l);
    const auto j = to_json(cfg);
    const auto back = config_from_json(Json::parse(j.dump()));
    EXPECT_EQ(back.command, cfg.command) << l;
    EXPECT_EQ(back.jobs, cfg.jobs) << l;
    EXPECT_EQ(to_json(back).dump(), j.dump()) << l;
  }
}

TEST(Config, DecimalValuesSurviveExactly) {
  auto cfg = parse("flow --init a.json");
  auto& f = std::get<FlowConfig>(cfg.params);
  f.h = 1.0 / 3.0;
  f.t_end = 0.1 + 0.2;
  const auto back = config_from_json(Json::parse(to_json(cfg).dump()));
  EXPECT_EQ(std::get<FlowConfig>(back.params).h, f.h);
  EXPECT_EQ(std::get<FlowConfig>(back.params).t_end, f.t_end);
}

TEST(ExitCodes, UsageFormatAndPass) {
  EXPECT_EQ(entry({"flow", "--init", "a.json", "--h", "-0.01"}).code, 2);
  EXPECT_EQ(entry({"nonsense"}).code, 2);
  const auto missing = entry({"analyze", "--trace", "/nonexistent/trace"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("meta.json"), std::string::npos);
  EXPECT_EQ(entry({"--help"}).code, 0);
}

TEST(ExitCodes, FlowVerifyExport) {
  const auto dir = scratch("flow");
  write_json(dir / "init.json", Json{{"type", "witch_hat"}, {"n", 4}});
  const auto trace = (dir / "trace").string();
  auto r = entry({"flow", "--init", (dir / "init.json").string(), "--L", "2", "--h", "0.02", "--t-end", "0.4",
                  "--snap", "0.05", "--out", trace});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_trace(trace).snapshots.size(), 9u);

  r = entry({"verify", "--trace", trace, "--estimates", "harnack,delayed_gradient", "--report",
             (dir / "rep.json").string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("PASS harnack"), std::string::npos);

  // Understating the initial area shrinks the height bound below the actual solution.
  r = entry({"verify", "--trace", trace, "--estimates", "delayed_height", "--slack", "0", "--A0", "1e-3", "--report",
             (dir / "bad.json").string()});
  EXPECT_EQ(r.code, 1) << r.out << r.err;

  r = entry({"export", "--report", (dir / "rep.json").string(), "--kind", "estimate-margins", "--out",
             (dir / "m.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_text(dir / "m.csv").substr(0, 18), "estimate,t,margin\n");

  r = entry({"analyze", "--trace", trace, "--quantity", "norms", "--out", (dir / "n.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto norms_csv = read_csv(dir / "n.csv");
  EXPECT_EQ(norms_csv.header, (std::vector<std::string>{"t", "l1", "sup", "lip", "lp"}));
  EXPECT_EQ(norms_csv.rows.size(), 9u);
  fs::remove_all(dir);
}

TEST(Golden, WitchHatReportIsReproducible) {
  const auto dir = scratch("golden");
  auto run_once = [&](const std::string& name, int jobs) {
    const auto out = dir / name;
    const std::string cmd = std::string(CSF_BINARY) + " --jobs " + std::to_string(jobs) + " " + kWitchHatArgs +
                            " --out " + out.string() + " > /dev/null";
    EXPECT_EQ(std::system(cmd.c_str()), 0) << cmd;
    return read_text(out);
  };
  const auto a = run_once("a.json", 1);
  const auto b = run_once("b.json", 3);
  EXPECT_EQ(a, b);
  const auto golden = fs::path(CSF_TEST_DATA) / "witch_hat_small.json";
  ASSERT_TRUE(fs::exists(golden)) << golden;
  EXPECT_EQ(a, read_text(golden));
  fs::remove_all(dir);
}
