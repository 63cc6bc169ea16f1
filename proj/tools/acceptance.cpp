// Runs every acceptance criterion with default parameters and prints one
// PASS/FAIL line per criterion.  A criterion passes when its checks pass and
// its wall-clock time is within the bound.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "nodallab/harness.hpp"

namespace {

using nodallab::PartResult;

struct Gate {
  std::string id;
  std::string what;
  double seconds_bound;
  std::function<PartResult()> run;
};

PartResult experiment(const std::string& id) { return nodallab::run_experiment(id).part; }

PartResult select(const PartResult& from, const std::vector<std::string>& names) {
  PartResult out;
  out.metrics = from.metrics;
  for (const auto& c : from.criteria)
    for (const auto& n : names)
      if (c.name == n) out.criteria.push_back(c);
  return out;
}

std::string first_failure(const PartResult& p) {
  for (const auto& c : p.criteria)
    if (!c.pass) return c.name + ": " + c.detail;
  return "";
}

}  // namespace

int main() {
  const auto e6 = nodallab::find_experiment("E6").defaults;
  const std::vector<Gate> gates{
      {"A1", "Clifford relations, n = 1..4", 1.0, [] { return nodallab::check_clifford_relations(4); }},
      {"A2", "operator identities on T^2, T^3", 30.0,
       [&] { return nodallab::check_operator_identities(e6, nodallab::kDefaultSeed); }},
      {"A3", "z^2 - 1 zeros discrete, 2 components near +-1", 10.0, [] { return experiment("E1"); }},
      {"A4", "T^2 mixed eigenform: 4 components, discrete, dim < 0.3", 20.0, [] { return experiment("E2"); }},
      {"A5", "T^3 mixed eigenform: 4 circles, dim in [0.8, 1.2]", 120.0, [] { return experiment("E3"); }},
      {"A6", "codimension-1 zero sets: dim in [1.8, 2.2]", 60.0,
       [] {
         PartResult a = experiment("E4");
         const PartResult b = experiment("E5");
         for (const auto& c : b.criteria) a.criteria.push_back(c);
         return a;
       }},
      {"A7", "singular set and crossing angles of cos x1 cos x2", 20.0, [] { return experiment("E7"); }},
      {"A8", "Courant bound and m n domain counts", 10.0, [] { return experiment("E8"); }},
      {"A9", "symbolic suite", 120.0, [] { return experiment("E9"); }},
      {"A10", "harmonic spinors on T^2 are constant with empty zero set", 5.0,
       [&] {
         return select(nodallab::check_harmonic_spinor_kernel(e6["kernel_resolution"].get<int>(), nodallab::kDefaultSeed),
                       {"harmonic_spinor_kernel"});
       }},
  };

  int failed = 0;
  for (const auto& gate : gates) {
    const auto start = std::chrono::steady_clock::now();
    PartResult result;
    std::string error;
    try {
      result = gate.run();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool checks = error.empty() && !result.criteria.empty() && result.pass();
    const bool in_time = seconds < gate.seconds_bound;
    const bool pass = checks && in_time;
    failed += !pass;
    std::string note;
    if (!error.empty()) note = "error: " + error;
    else if (!checks) note = first_failure(result);
    else if (!in_time) note = "over time bound";
    std::printf("%-4s %s  %-58s %7.2f s (< %.0f s)%s%s\n", gate.id.c_str(), pass ? "PASS" : "FAIL", gate.what.c_str(),
                seconds, gate.seconds_bound, note.empty() ? "" : "  ", note.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(gates.size()) - failed, gates.size());
  return failed ? 1 : 0;
}
