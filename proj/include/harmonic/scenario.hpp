#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "harmonic/io.hpp"

namespace harmonic {

struct DesignChoice {
  enum class Kind { Sufficient, Direct };
  Kind kind = Kind::Sufficient;
  double alpha = 1.0;
  /// Direct design only.
  std::optional<PeriodicMatrixFunction> G;
  std::optional<MatrixXcd> Lambda;
};

struct SegmentSpec {
  double t_start = 0.0;
  /// Exactly one of the two, or neither for a zero reference.
  std::optional<PeriodicMatrixFunction> u_ref;
  std::optional<PeriodicMatrixFunction> x_d;
};

struct SimulationSpec {
  std::optional<VectorXd> x0;
  double t_end = 3.0;
  double step = 1e-4;
  int stride = 10;
  std::vector<SegmentSpec> segments;
};

/// Validated scenario. Schema:
///   {"system": {A, B}, "design"?: {"kind": "sufficient", "alpha"} |
///    {"kind": "direct", "G": signal, "Lambda": matrix | "lambda": "diag(..)"},
///    "m"?: [orders], "floquet_steps"?, "seed"?, "simulation"?: {"x0", "t_end",
///    "step", "stride", "segments": [{"t_start", "u_ref"? | "x_d"?}]}}
/// Unknown fields anywhere are rejected before any computation.
struct ScenarioConfig {
  LtpSystem system;
  DesignChoice design;
  std::vector<int> m_list{10};
  int floquet_steps = 20000;
  std::uint64_t seed = 0;
  SimulationSpec simulation;
  json raw;
};

ScenarioConfig parse_scenario(const json& j);

/// Accepts either a full scenario or a bare {A, B} system description.
ScenarioConfig parse_scenario_or_system(const json& j);

/// Per-segment harmonic equilibria at truncation order m.
std::vector<TrackingSegment> build_segments(const ScenarioConfig& config, int m);

/// Deterministic initial state of dimension n from `seed` (entries in [-1, 1]).
VectorXd seeded_state(Eigen::Index n, std::uint64_t seed);

}  // namespace harmonic
