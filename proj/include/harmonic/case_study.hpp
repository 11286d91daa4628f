#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "harmonic/scenario.hpp"

namespace harmonic {

/// Two-state example: square, triangle and phase-shifted sawtooth entries plus
/// a trigonometric polynomial, single input.
json example_system_json();
LtpSystem example_system();
/// The system with the sufficient design (alpha = 1), m = 4..10 and the
/// three-segment tracking schedule.
json example_scenario_json();

struct CounterExampleReport {
  HarmonicSylvesterSolution solution;
  InvertibilityCertificate certificate;
  GramianReport observability;
  EscapeReport escape;
};

/// G = [1 1], Lambda = diag(-5, -7): Sylvester solve, certificate of P,
/// observability heuristic of (G, Lambda) and the escape probe from P(0)^{-1}.
CounterExampleReport run_counter_example(const LtpSystem& system, int m, double step);

struct CaseStudyOptions {
  std::string out_dir = "case_study";
  /// Poles of the second tracking design (default diag(-10, -12)).
  std::optional<MatrixXcd> lambda;
  bool counter_example_only = false;
  int floquet_steps = 20000;
  std::vector<int> m_list{4, 6, 8, 10};
  int reference_m = 12;
  int m = 10;
  double step = 1e-4;
  std::uint64_t seed = 0;
};

/// Runs every stage, writes CSV/JSON artifacts under out_dir and returns the
/// summary (also written as summary.json). A failing stage throws with the
/// stage name in the message.
json run_case_study(const CaseStudyOptions& options);

}  // namespace harmonic
