// Acceptance suite: one PASS/FAIL line per primary criterion, details indented
// below it. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "mixedopt/cli/checks.hpp"
#include "mixedopt/cli/runners.hpp"
#include "mixedopt/cli/scenario.hpp"

using namespace mixedopt;
using namespace mixedopt::cli;

namespace {

const std::filesystem::path kScenarios = MIXEDOPT_SCENARIO_DIR;

struct Criterion {
  std::string name;
  bool passed = true;
  std::vector<std::string> lines;

  void add(const CheckResult& r) {
    passed = passed && r.passed;
    lines.push_back(std::string(r.passed ? "ok   " : "FAIL ") + r.name + ": " + r.detail);
  }
  void add(const std::vector<CheckResult>& rs) {
    for (const auto& r : rs) add(r);
  }
  void note(const std::string& s) { lines.push_back(s); }
};

Scenario preset(const std::string& name) { return load_scenario((kScenarios / (name + ".json")).string()); }

std::string f6(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6f", x);
  return b;
}

std::string g3(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", x);
  return b;
}

/// Hygiene of every scenario run made by this binary, for the hygiene criterion.
struct HygieneLog {
  std::vector<std::pair<std::string, Hygiene>> runs;
  void add(const std::string& name, const Hygiene& h) { runs.emplace_back(name, h); }
} hygiene_log;

KindOutput run_preset(const std::string& name) {
  const Scenario s = preset(name);
  KindOutput out = run_kind(s, s.n_b);
  hygiene_log.add(name, out.hygiene);
  return out;
}

template <class Fn>
Criterion guarded(const std::string& name, Fn&& fn) {
  Criterion c;
  c.name = name;
  const auto start = std::chrono::steady_clock::now();
  try {
    fn(c);
  } catch (const std::exception& e) {
    c.passed = false;
    c.note(std::string("exception: ") + e.what());
  }
  c.note("elapsed " + g3(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()) + " s");
  return c;
}

}  // namespace

int main() {
  std::vector<Criterion> results;

  results.push_back(guarded("Parameter reproduction", [](Criterion& c) { c.add(check_params()); }));
  results.push_back(guarded("Bath suppression", [](Criterion& c) { c.add(check_bath(100)); }));

  results.push_back(guarded("Closed-system fidelity", [](Criterion& c) {
    const KindOutput o = run_preset("fig4a");
    for (const auto& curve : o.details["curves"]) {
      const std::string label = curve["label"];
      const double f = curve["min_F_c"];
      const bool required = label != "chi0.01_eps0.5";
      const bool ok = f > 0.96;
      if (required) c.passed = c.passed && ok;
      c.note(std::string(ok ? "ok   " : (required ? "FAIL " : "info ")) + label + ": min F_c over [0, 2 t_c] = " +
             f6(f) + (required ? "" : " (reported only)"));
    }
  }));

  results.push_back(guarded("Unitary-equivalence oracle", [](Criterion& c) { c.add(check_spectrum()); }));
  results.push_back(guarded("Analytic-vs-numeric oracle", [](Criterion& c) { c.add(check_analytic(80)); }));
  results.push_back(guarded("Cat-state structure", [](Criterion& c) { c.add(check_cat(60)); }));

  results.push_back(guarded("Open-system degradation trend", [](Criterion& c) {
    const double kb[] = {0.0, 0.02, 0.1, 0.5};
    for (const char* fig : {"fig5", "fig6"})
      for (int row = 0; row < 2; ++row) {
        std::vector<double> depth;
        std::string line;
        for (int col = 0; col < 4; ++col) {
          const std::string name = std::string(fig) + "abcdefgh"[row * 4 + col];
          const KindOutput o = run_preset(name);
          depth.push_back(o.details["fringe_depth"].get<double>());
          line += " " + name + "(kappa_b=" + g3(kb[col]) + ")=" + f6(depth.back());
        }
        bool mono = true;
        for (int k = 1; k < 4; ++k) mono = mono && depth[k] <= depth[k - 1];
        c.passed = c.passed && mono;
        c.note(std::string(mono ? "ok   " : "FAIL ") + "|min W|:" + line);
      }
  }));

  results.push_back(guarded("Propagation hygiene", [](Criterion& c) {
    run_preset("fig4d");
    for (const auto& [name, h] : hygiene_log.runs) {
      const bool ok = !h.degraded;
      c.passed = c.passed && ok;
      c.note(std::string(ok ? "ok   " : "FAIL ") + name + ": trace " + g3(h.max_trace_deviation) + ", hermiticity " +
             g3(h.max_hermiticity_deviation) + ", min eigenvalue " +
             (std::isfinite(h.min_eigenvalue) ? g3(h.min_eigenvalue) : std::string("n/a")) + ", norm " +
             g3(h.max_norm_deviation) + " (" + std::to_string(h.samples) + " samples)");
    }
    c.add(check_closed_limit(40));
    c.add(check_trace(40));
  }));

  results.push_back(guarded("Flow fixed point", [](Criterion& c) {
    c.add(check_flow());
    const KindOutput o = run_preset("flow_kappa002");
    const bool ok = o.details["converged"].get<bool>();
    c.add(CheckResult{"flow_kappa002 preset", ok,
                      "terminal alpha error " + g3(o.details["terminal_alpha_error"].get<double>())});
  }));

  bool all = true;
  for (const auto& r : results) {
    std::printf("%s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str());
    for (const auto& l : r.lines) std::printf("    %s\n", l.c_str());
    all = all && r.passed;
  }
  std::printf("%s: %zu criteria\n", all ? "ALL PASS" : "SOME FAILED", results.size());
  return all ? 0 : 1;
}
