#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mixedopt/cli/checks.hpp"
#include "mixedopt/cli/runners.hpp"
#include "mixedopt/cli/scenario.hpp"

using namespace mixedopt;
using namespace mixedopt::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = MIXEDOPT_SCENARIO_DIR;
const std::string kSimulate = MIXEDOPT_SIMULATE_BIN;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mixedopt_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

Csv read_csv(const fs::path& p) {
  std::ifstream in(p);
  Csv c;
  std::string line;
  std::getline(in, line);
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) c.header.push_back(cell);
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::vector<double> row;
    for (std::string cell; std::getline(ls, cell, ',');) row.push_back(std::stod(cell));
    c.rows.push_back(row);
  }
  return c;
}

struct Proc {
  int code;
  std::string out, err;
};

Proc sh(const std::string& args, const std::string& env = "") {
  const fs::path dir = fs::temp_directory_path();
  const fs::path o = dir / "mixedopt_cli_stdout.txt", e = dir / "mixedopt_cli_stderr.txt";
  const std::string cmd = env + " \"" + kSimulate + "\" " + args + " > \"" + o.string() + "\" 2> \"" + e.string() + "\"";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(o), slurp(e)};
}

json cat_panel(int n_grid = 41) {
  json j = json::parse(R"({
    "name": "cat_small", "kind": "cat-wigner",
    "params": {"chi": 0.01, "omega_p2": 0.49, "eps_re": 0.3, "r_e": "match", "theta_e": 0.0},
    "dims": {"n_a": 2, "n_b": 50}, "sign": "-", "time_samples": 21,
    "convergence": {"delta_n_b": 10, "tolerance": 1e-6}
  })");
  j["grid"] = {{"n_re", n_grid}, {"n_im", n_grid}};
  return j;
}

}  // namespace

TEST(ResolveParams, PlainFieldsAndDefaults) {
  const ModelParams p = resolve_params(json{{"chi", 0.02}, {"omega_p2", 0.3}, {"kappa_b", 0.1}});
  EXPECT_EQ(p.chi, 0.02);
  EXPECT_EQ(p.omega_p2, 0.3);
  EXPECT_EQ(p.kappa_b, 0.1);
  EXPECT_EQ(p.delta_b, 1.0);
  EXPECT_EQ(p.theta_p, kPi);
}

TEST(ResolveParams, SqueezingDriveAndBathShorthands) {
  const ModelParams p = resolve_params(json{{"r", 1.12}, {"r_e", "match"}});
  EXPECT_NEAR(stationary_r(p), 1.12, 1e-13);
  EXPECT_NEAR(p.r_e, 1.12, 1e-13);

  const ModelParams q = resolve_params(json{{"omega_p2", 0.49}, {"kappa_b", 0.5}, {"eps_re", 0.3}});
  EXPECT_NEAR(q.eps * std::cos(q.theta_d), 0.3, 1e-14);
  EXPECT_NEAR(q.theta_d, std::atan2(0.25, 0.02), 1e-14);

  const ModelParams d = resolve_params(json{{"r", 1.12}, {"delta_r", 0.3}});
  EXPECT_NEAR(d.r_e, 1.42, 1e-13);
}

TEST(ResolveParams, Rejections) {
  EXPECT_THROW(resolve_params(json{{"chii", 0.1}}), Error);
  EXPECT_THROW(resolve_params(json{{"eps", 0.1}, {"eps_re", 0.1}}), Error);
  EXPECT_THROW(resolve_params(json{{"r", 1.0}, {"omega_p2", 0.4}}), Error);
  EXPECT_THROW(resolve_params(json{{"chi", "big"}}), Error);
  EXPECT_THROW(resolve_params(json{{"r_e", "same"}}), Error);
  EXPECT_THROW(resolve_params(json{{"kappa_b", -1.0}}), Error);
  // overrides win over the base block
  EXPECT_EQ(resolve_params(json{{"chi", 0.1}}, json{{"chi", 0.2}}).chi, 0.2);
}

TEST(ParseScenario, Rejections) {
  EXPECT_THROW(parse_scenario(json{{"kind", "param-sweep"}}), Error);
  EXPECT_THROW(parse_scenario(json{{"name", "x"}, {"kind", "movie"}}), Error);
  EXPECT_THROW(parse_scenario(json{{"name", "a/b"}, {"kind", "param-sweep"}}), Error);
  EXPECT_THROW(parse_scenario(json{{"name", "x"}, {"kind", "cat-wigner"}, {"dims", {{"n_b", 1}}}}), Error);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), Error);
}

TEST(Presets, EveryFigureHasAPresetThatParses) {
  std::vector<std::string> names = {"fig2a", "fig2b", "fig2c", "fig2d", "fig2e", "fig2f", "fig3",
                                    "fig4a", "fig4b", "fig4c", "fig4d"};
  for (const char* f : {"fig5", "fig6"})
    for (char c = 'a'; c <= 'h'; ++c) names.push_back(std::string(f) + c);
  for (const auto& n : names) {
    const fs::path p = kScenarios / (n + ".json");
    ASSERT_TRUE(fs::exists(p)) << n;
    const Scenario s = load_scenario(p.string());
    EXPECT_EQ(s.name, n);
  }
}

TEST(Presets, OpenCatPanelsFollowTheDecayLadder) {
  const double kb[] = {0.0, 0.02, 0.1, 0.5};
  for (const char* f : {"fig5", "fig6"})
    for (int i = 0; i < 8; ++i) {
      const Scenario s = load_scenario((kScenarios / (std::string(f) + "abcdefgh"[i] + ".json")).string());
      const ModelParams p = resolve_params(s.params);
      EXPECT_EQ(p.kappa_b, kb[i % 4]);
      EXPECT_EQ(p.kappa_a, i % 4 == 0 ? 0.0 : 0.02);
      EXPECT_EQ(s.raw["sign"], i < 4 ? "+" : "-");
      EXPECT_EQ(s.n_a, 2);
      const DerivedParams d = effective_params(p);
      EXPECT_LT(std::abs(d.n_ss) + std::abs(d.m_ss), 1e-14);
    }
}

TEST(ParamSweep, SqueezingCurve) {
  const fs::path out = scratch("sweep_r");
  const Scenario s = load_scenario((kScenarios / "fig2a.json").string());
  const RunReport rep = run(s, out);
  const Csv c = read_csv(out / "fig2a.csv");
  ASSERT_EQ(c.header, (std::vector<std::string>{"Omega_p_over_Delta_b", "r"}));
  ASSERT_EQ(c.rows.size(), 500u);
  EXPECT_EQ(c.rows.front()[1], 0.0);
  for (std::size_t i = 1; i < c.rows.size(); ++i) EXPECT_GT(c.rows[i][1], c.rows[i - 1][1]);
  EXPECT_FALSE(rep.manifest["convergence"]["applicable"].get<bool>());

  json one = json::parse(R"({"name": "r049", "kind": "param-sweep",
    "axes": [{"param": "omega_p2", "values": [0.49]}], "columns": ["r"]})");
  run(parse_scenario(one), out);
  EXPECT_NEAR(read_csv(out / "r049.csv").rows[0][1], 1.14877996253, 1e-11);
}

TEST(ParamSweep, CouplingTrends) {
  const fs::path out = scratch("sweep_g");
  run(load_scenario((kScenarios / "fig3.json").string()), out);
  const Csv c = read_csv(out / "fig3.csv");
  const int g1 = c.col("g1_over_Delta_b"), g2 = c.col("g2_over_Delta_b"), g2p = c.col("g2p_over_omega_b");
  ASSERT_GE(g1, 0);
  ASSERT_GE(g2, 0);
  ASSERT_GE(g2p, 0);
  for (std::size_t i = 1; i < c.rows.size(); ++i) {
    EXPECT_GT(c.rows[i][g1], c.rows[i - 1][g1]);
    EXPECT_GT(c.rows[i][g2], c.rows[i - 1][g2]);
    EXPECT_LT(c.rows[i][g2p], c.rows[i - 1][g2p]);
  }
}

TEST(ParamSweep, BathVanishesOnTheMatchedLine) {
  const fs::path out = scratch("sweep_bath");
  run(load_scenario((kScenarios / "fig2e.json").string()), out);
  run(load_scenario((kScenarios / "fig2f.json").string()), out);
  const Csv e = read_csv(out / "fig2e.csv");
  const Csv f = read_csv(out / "fig2f.csv");
  EXPECT_EQ(e.header, (std::vector<std::string>{"delta_r", "N_ss", "Re_M_ss", "Im_M_ss"}));
  EXPECT_EQ(f.header, (std::vector<std::string>{"theta_e_rad", "N_ss", "Re_M_ss", "Im_M_ss"}));
  const auto& mid_e = e.rows[e.rows.size() / 2];
  const auto& mid_f = f.rows[f.rows.size() / 2];
  EXPECT_NEAR(mid_e[0], 0.0, 1e-12);
  EXPECT_NEAR(mid_f[0], 0.0, 1e-12);
  for (int k = 1; k < 4; ++k) {
    EXPECT_LT(std::abs(mid_e[k]), 1e-12);
    EXPECT_LT(std::abs(mid_f[k]), 1e-12);
  }
}

TEST(Manifest, DerivedDumpMatchesFreshEvaluation) {
  const fs::path out = scratch("manifest");
  const Scenario s = parse_scenario(cat_panel(11));
  const RunReport rep = run(s, out);
  const json m = json::parse(slurp(rep.manifest_path));
  const DerivedParams d = effective_params(resolve_params(s.params));
  const json fresh = to_json(d);
  for (auto it = fresh.begin(); it != fresh.end(); ++it)
    EXPECT_NEAR(m["parameters"]["derived"][it.key()].get<double>(), it.value().get<double>(), 1e-14) << it.key();
  for (const char* key : {"artifact_version", "scenario", "parameters", "hygiene", "integrator", "convergence",
                          "wall_clock_seconds", "results", "files"})
    EXPECT_TRUE(m.contains(key)) << key;
  EXPECT_EQ(m["scenario"], s.raw);
  EXPECT_TRUE(m["convergence"]["converged"].get<bool>());
  EXPECT_EQ(m["convergence"]["n_b_rerun"], 60);
  EXPECT_FALSE(m["degraded"].get<bool>());
}

TEST(WignerScenario, ClosedPanelMatchesAnalyticComponent) {
  const fs::path out = scratch("wigner");
  const RunReport rep = run(parse_scenario(cat_panel()), out);
  const json& r = rep.manifest["results"];
  EXPECT_GT(r["analytic"]["fidelity"].get<double>(), 1.0 - 1e-6);
  EXPECT_NEAR(r["probability"].get<double>(), r["analytic"]["probability"].get<double>(), 1e-6);
  EXPECT_LT(r["W_min"].get<double>(), -0.1);
  const Csv c = read_csv(out / "cat_small.csv");
  EXPECT_EQ(c.header, (std::vector<std::string>{"re_zeta", "im_zeta", "W"}));
  EXPECT_EQ(c.rows.size(), 41u * 41u);
  const json& h = rep.manifest["hygiene"];
  EXPECT_LT(h["max_trace_deviation"].get<double>(), 1e-8);
  EXPECT_LT(h["max_hermiticity_deviation"].get<double>(), 1e-8);
  EXPECT_GE(h["min_eigenvalue"].get<double>(), -1e-6);
}

TEST(WignerScenario, InsufficientCutoffIsReported) {
  json j = cat_panel(5);
  j["dims"]["n_b"] = 14;
  try {
    run(parse_scenario(j), scratch("cutoff"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CutoffInsufficient);
  }
}

TEST(FidelityScenario, OpenCurveStartsAtOneAndStaysBounded) {
  const fs::path out = scratch("fo");
  json j = json::parse(R"({"name": "fo", "kind": "fidelity-open",
    "params": {"omega_p2": 0.49, "kappa_a": 0.02, "kappa_b": 0.02, "r_e": "match", "chi": 0.05, "eps_re": 0.01},
    "dims": {"n_a": 2, "n_b": 40}, "initial": {"type": "fock-coherent", "n_a": 1, "beta": [0.1, 0.0]},
    "time": {"t_max": 40.0, "points": 41}, "convergence": {"delta_n_b": 6, "tolerance": 1e-4}})");
  run(parse_scenario(j), out);
  const Csv c = read_csv(out / "fo.csv");
  EXPECT_EQ(c.header, (std::vector<std::string>{"t_over_Delta_b", "F_o"}));
  EXPECT_NEAR(c.rows[0][1], 1.0, 1e-9);
  for (const auto& row : c.rows) {
    EXPECT_GE(row[1], 0.0);
    EXPECT_LE(row[1], 1.0 + 1e-9);
  }
}

TEST(FidelityScenario, ClosedHeatmapIsThreadCountIndependent) {
  const fs::path dir = scratch("threads");
  json j = json::parse(R"({"name": "hm", "kind": "fidelity-closed", "params": {"omega_p2": 0.49},
    "dims": {"n_a": 2, "n_b": 30}, "initial": {"type": "superposition"},
    "heatmap": {"x": {"param": "chi", "min": 0.0, "max": 0.05, "points": 4},
                "y": {"param": "eps", "min": 0.0, "max": 0.05, "points": 3}}})");
  std::ofstream(dir / "hm.json") << j.dump();
  ASSERT_EQ(sh("run \"" + (dir / "hm.json").string() + "\" --out \"" + (dir / "t1").string() + "\"",
               "MIXEDOPT_THREADS=1")
                .code,
            0);
  ASSERT_EQ(sh("run \"" + (dir / "hm.json").string() + "\" --out \"" + (dir / "t3").string() + "\"",
               "MIXEDOPT_THREADS=3")
                .code,
            0);
  const std::string a = slurp(dir / "t1" / "hm.csv"), b = slurp(dir / "t3" / "hm.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), "chi_over_Delta_b,eps_over_Delta_b,t_c_times_Delta_b,F_c_at_t_c");
  const json m = json::parse(slurp(dir / "t3" / "hm.manifest.json"));
  EXPECT_EQ(m["effective"]["threads"], 3);
}

TEST(Binary, RunIsByteReproducible) {
  const fs::path dir = scratch("repro");
  const std::string scen = (kScenarios / "fig4a.json").string();
  ASSERT_EQ(sh("run \"" + scen + "\" --out \"" + (dir / "a").string() + "\" --nb 90").code, 0);
  ASSERT_EQ(sh("run \"" + scen + "\" --out \"" + (dir / "b").string() + "\" --nb 90").code, 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / e.path().filename())) << e.path();
  }
  EXPECT_EQ(files, 4);
  const json m = json::parse(slurp(dir / "a" / "fig4a.manifest.json"));
  EXPECT_EQ(m["effective"]["n_b"], 90);
}

TEST(Binary, Derive) {
  const Proc p = sh("derive \"" + (kScenarios / "fig5a.json").string() + "\"");
  EXPECT_EQ(p.code, 0);
  EXPECT_NE(p.out.find("g1/omega_b"), std::string::npos);
  EXPECT_NE(p.out.find("2.37767"), std::string::npos);
  EXPECT_NE(p.out.find("0.125"), std::string::npos);
}

TEST(Binary, CheckSuites) {
  const Proc ok = sh("check params");
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.out.find("PASS"), std::string::npos);
  EXPECT_EQ(ok.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(sh("check spectrum").code, 0);
  EXPECT_EQ(sh("check closed-limit").code, 0);

  const Proc bad = sh("check nonsense");
  EXPECT_NE(bad.code, 0);
  const json err = json::parse(bad.err);
  EXPECT_EQ(err["error"], "unknown-suite");
}

TEST(Binary, ErrorsAreMachineReadable) {
  const Proc missing = sh("run /nonexistent.json --out /tmp/x");
  EXPECT_NE(missing.code, 0);
  EXPECT_EQ(json::parse(missing.err)["error"], "invalid-input");

  const fs::path dir = scratch("errors");
  json j = cat_panel(5);
  j["dims"]["n_b"] = 14;
  std::ofstream(dir / "small.json") << j.dump();
  const Proc cutoff = sh("run \"" + (dir / "small.json").string() + "\" --out \"" + dir.string() + "\"");
  EXPECT_NE(cutoff.code, 0);
  EXPECT_EQ(json::parse(cutoff.err)["error"], "cutoff-insufficient");

  EXPECT_NE(sh("run").code, 0);
  EXPECT_NE(sh("").code, 0);
}
