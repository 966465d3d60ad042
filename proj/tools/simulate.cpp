// simulate: scenario runner for the cross-Kerr simulator.
//
//   simulate run <scenario.json> --out <dir> [--nb <int>] [--tol <float>]
//   simulate derive <scenario.json>
//   simulate check <suite>
//
// Errors go to stderr as one JSON object {"error": <kind>, "message": ...}.
// Exit codes: 0 success, 1 a check failed, 2 error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mixedopt/cli/checks.hpp"
#include "mixedopt/cli/runners.hpp"
#include "mixedopt/cli/scenario.hpp"

namespace {

using namespace mixedopt;
using namespace mixedopt::cli;

int report_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
  return 2;
}

void print_row(const char* name, double value) { std::printf("  %-22s %.12g\n", name, value); }

void print_derive(const std::string& heading, const ModelParams& p) {
  const DerivedParams d = effective_params(p);
  std::printf("%s\n", heading.c_str());
  print_row("chi", p.chi);
  print_row("eps", p.eps);
  print_row("theta_d", p.theta_d);
  print_row("omega_p2", p.omega_p2);
  print_row("kappa_a", p.kappa_a);
  print_row("kappa_b", p.kappa_b);
  print_row("n_th", p.n_th);
  print_row("r_e", p.r_e);
  print_row("theta_e", p.theta_e);
  print_row("r", d.r);
  print_row("alpha_ss", d.alpha_ss);
  print_row("theta_d_required", d.theta_d_required);
  print_row("omega_a_eff", d.omega_a_eff);
  print_row("omega_a_eff_prime", d.omega_a_eff_prime);
  print_row("omega_b_eff", d.omega_b_eff);
  print_row("g1", d.g1);
  print_row("g2", d.g2);
  print_row("g2p", d.g2p);
  print_row("N_ss", d.n_ss);
  print_row("Re M_ss", d.m_ss.real());
  print_row("Im M_ss", d.m_ss.imag());
  if (d.omega_b_eff > 0.0) {
    const AnalyticParams a = analytic_params(d);
    print_row("g1/omega_b", d.g1 / d.omega_b_eff);
    print_row("g2/omega_b", d.g2 / d.omega_b_eff);
    print_row("g2p/omega_b", d.g2p / d.omega_b_eff);
    print_row("eta1", a.eta1);
    print_row("beta1", a.beta1);
    print_row("varpi1", a.varpi1);
    print_row("t_c", a.t_c(0));
    print_row("t_s", a.t_s(0));
  }
}

int cmd_derive(const std::string& path) {
  const Scenario s = load_scenario(path);
  if (s.kind == "convergence") {
    json target = s.raw.at("target");
    if (!target.contains("name")) target["name"] = s.name;
    const Scenario inner = parse_scenario(target);
    print_derive(s.name + " (target)", resolve_params(inner.params));
    return 0;
  }
  if (s.raw.contains("curves")) {
    for (const auto& c : s.raw["curves"])
      print_derive(s.name + " [" + c.value("label", std::string()) + "]",
                   resolve_params(s.params, c.value("params", json::object())));
    return 0;
  }
  print_derive(s.name, resolve_params(s.params));
  return 0;
}

int cmd_run(const std::string& path, const std::string& out, std::optional<int> nb, std::optional<double> tol) {
  const Scenario s = load_scenario(path);
  RunOptions opt;
  opt.n_b = nb;
  opt.tol = tol;
  const RunReport rep = run(s, out, opt);
  for (const auto& f : rep.files) std::printf("wrote %s\n", f.string().c_str());
  std::printf("wrote %s\n", rep.manifest_path.string().c_str());
  for (const auto& w : rep.output.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (rep.output.hygiene.degraded) std::fprintf(stderr, "warning: propagation diagnostics outside limits (degraded)\n");
  return 0;
}

int cmd_check(const std::string& suite) {
  const auto results = run_suite(suite);
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%s %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated-Fock simulator for the driven cross-Kerr two-mode system"};
  app.require_subcommand(1);

  std::string scenario, out_dir, suite;
  std::optional<int> nb;
  std::optional<double> tol;

  auto* run = app.add_subcommand("run", "Run a scenario and write CSV files plus a JSON manifest");
  run->add_option("scenario", scenario, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--nb", nb, "Override the mode-b cutoff");
  run->add_option("--tol", tol, "Integrator relative tolerance");

  auto* derive = app.add_subcommand("derive", "Print derived parameters of a scenario");
  derive->add_option("scenario", scenario, "Scenario JSON file")->required();

  auto* check = app.add_subcommand("check", "Run an oracle suite");
  std::string names;
  for (const auto& n : suite_names()) names += (names.empty() ? "" : ", ") + n;
  check->add_option("suite", suite, "One of: " + names)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("usage", e.what());
  }

  try {
    if (*run) return cmd_run(scenario, out_dir, nb, tol);
    if (*derive) return cmd_derive(scenario);
    return cmd_check(suite);
  } catch (const Error& e) {
    return report_error(std::string(to_string(e.kind())), e.what());
  } catch (const json::exception& e) {
    return report_error("invalid-input", e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
}
