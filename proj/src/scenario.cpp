#include "harmonic/scenario.hpp"

#include <random>
#include <set>

namespace harmonic {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw SchemaError(where + ": unknown field '" + it.key() + "'");
  }
}

double positive(const json& j, const std::string& key, const std::string& where) {
  if (!j.at(key).is_number() || !(j.at(key).get<double>() > 0.0)) {
    throw SchemaError(where + ": '" + key + "' must be a positive number");
  }
  return j.at(key).get<double>();
}

DesignChoice parse_design(const json& j) {
  reject_unknown(j, {"kind", "alpha", "G", "Lambda", "lambda"}, "design");
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw SchemaError("design: missing string field 'kind'");
  }
  DesignChoice d;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "sufficient") {
    reject_unknown(j, {"kind", "alpha"}, "design (sufficient)");
    d.kind = DesignChoice::Kind::Sufficient;
    if (j.contains("alpha")) {
      if (!j.at("alpha").is_number()) throw SchemaError("design: 'alpha' must be a number");
      d.alpha = j.at("alpha").get<double>();
    }
  } else if (kind == "direct") {
    reject_unknown(j, {"kind", "G", "Lambda", "lambda"}, "design (direct)");
    d.kind = DesignChoice::Kind::Direct;
    if (!j.contains("G")) throw SchemaError("design (direct): missing field 'G'");
    d.G = signal_from_json(j.at("G"));
    if (j.contains("Lambda") == j.contains("lambda")) {
      throw SchemaError("design (direct): give exactly one of 'Lambda' and 'lambda'");
    }
    d.Lambda = j.contains("Lambda") ? matrix_from_json(j.at("Lambda"))
                                    : parse_lambda_spec(j.at("lambda").get<std::string>());
  } else {
    throw SchemaError("design: unknown kind '" + kind + "'");
  }
  return d;
}

SimulationSpec parse_simulation(const json& j, Eigen::Index n) {
  reject_unknown(j, {"x0", "t_end", "step", "stride", "segments"}, "simulation");
  SimulationSpec s;
  if (j.contains("x0")) {
    const json& x = j.at("x0");
    if (!x.is_array() || static_cast<Eigen::Index>(x.size()) != n) {
      throw SchemaError("simulation: 'x0' must be an array of " + std::to_string(n) + " numbers");
    }
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!x[i].is_number()) throw SchemaError("simulation: 'x0' entries must be numbers");
      v(i) = x[i].get<double>();
    }
    s.x0 = v;
  }
  if (j.contains("t_end")) s.t_end = positive(j, "t_end", "simulation");
  if (j.contains("step")) s.step = positive(j, "step", "simulation");
  if (j.contains("stride")) {
    if (!j.at("stride").is_number_integer() || j.at("stride").get<int>() < 1) {
      throw SchemaError("simulation: 'stride' must be a positive integer");
    }
    s.stride = j.at("stride").get<int>();
  }
  if (j.contains("segments")) {
    if (!j.at("segments").is_array()) throw SchemaError("simulation: 'segments' must be an array");
    double last = -std::numeric_limits<double>::infinity();
    for (const auto& seg : j.at("segments")) {
      reject_unknown(seg, {"t_start", "u_ref", "x_d"}, "segment");
      if (!seg.contains("t_start") || !seg.at("t_start").is_number()) {
        throw SchemaError("segment: missing number 't_start'");
      }
      SegmentSpec spec;
      spec.t_start = seg.at("t_start").get<double>();
      if (!(spec.t_start > last)) throw SchemaError("segment: start times must ascend");
      last = spec.t_start;
      if (seg.contains("u_ref") && seg.contains("x_d")) {
        throw SchemaError("segment: give at most one of 'u_ref' and 'x_d'");
      }
      if (seg.contains("u_ref")) spec.u_ref = signal_from_json(seg.at("u_ref"));
      if (seg.contains("x_d")) spec.x_d = signal_from_json(seg.at("x_d"));
      s.segments.push_back(std::move(spec));
    }
  }
  return s;
}

}  // namespace

ScenarioConfig parse_scenario(const json& j) {
  reject_unknown(j, {"system", "design", "m", "floquet_steps", "seed", "simulation"}, "scenario");
  if (!j.contains("system")) throw SchemaError("scenario: missing field 'system'");
  ScenarioConfig c;
  c.raw = j;
  c.system = system_from_json(j.at("system"));
  if (j.contains("design")) c.design = parse_design(j.at("design"));
  if (j.contains("m")) {
    const json& m = j.at("m");
    if (!m.is_array() || m.empty()) throw SchemaError("scenario: 'm' must be a non-empty array");
    c.m_list.clear();
    for (const auto& v : m) {
      if (!v.is_number_integer() || v.get<int>() < 0) {
        throw SchemaError("scenario: 'm' entries must be non-negative integers");
      }
      c.m_list.push_back(v.get<int>());
    }
    if (!std::is_sorted(c.m_list.begin(), c.m_list.end())) {
      throw SchemaError("scenario: 'm' must be ascending");
    }
  }
  if (j.contains("floquet_steps")) {
    if (!j.at("floquet_steps").is_number_integer() || j.at("floquet_steps").get<int>() < 2) {
      throw SchemaError("scenario: 'floquet_steps' must be an integer >= 2");
    }
    c.floquet_steps = j.at("floquet_steps").get<int>();
  }
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw SchemaError("scenario: 'seed' must be a non-negative integer");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("simulation")) c.simulation = parse_simulation(j.at("simulation"), c.system.A.rows());
  for (const auto& seg : c.simulation.segments) {
    if (seg.u_ref && (seg.u_ref->rows() != c.system.B.cols() || seg.u_ref->cols() != 1)) {
      throw SchemaError("segment: 'u_ref' must be an (inputs x 1) signal");
    }
    if (seg.x_d && (seg.x_d->rows() != c.system.A.rows() || seg.x_d->cols() != 1)) {
      throw SchemaError("segment: 'x_d' must be an (states x 1) signal");
    }
  }
  return c;
}

ScenarioConfig parse_scenario_or_system(const json& j) {
  if (j.is_object() && j.contains("A") && !j.contains("system")) {
    return parse_scenario(json{{"system", j}});
  }
  return parse_scenario(j);
}

std::vector<TrackingSegment> build_segments(const ScenarioConfig& config, int m) {
  const auto& A = config.system.A;
  const auto& B = config.system.B;
  std::vector<TrackingSegment> out;
  std::vector<SegmentSpec> specs = config.simulation.segments;
  if (specs.empty()) specs.push_back(SegmentSpec{});
  for (const auto& spec : specs) {
    TrackingSegment seg;
    seg.t_start = spec.t_start;
    if (spec.x_d) {
      seg.equilibrium = nearest_equilibrium(A, B, phasor_vector(*spec.x_d, m), m);
    } else {
      const VectorXcd U = spec.u_ref ? phasor_vector(*spec.u_ref, m)
                                     : VectorXcd::Zero(B.cols() * (2 * m + 1)).eval();
      seg.equilibrium = harmonic_equilibrium(A, B, U, m);
    }
    out.push_back(std::move(seg));
  }
  return out;
}

VectorXd seeded_state(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  VectorXd x(n);
  // Top 53 bits of each draw, mapped to [-1, 1].
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  }
  return x;
}

}  // namespace harmonic
