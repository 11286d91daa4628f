#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "harmonic/design.hpp"
#include "harmonic/simulation.hpp"

namespace harmonic {

using nlohmann::json;

/// Raised for JSON that does not follow the expected schema.
class SchemaError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Phasors of closed-form series are materialized to this order unless the
/// description sets "table_order".
inline constexpr int kDefaultTableOrder = 64;

/// {"rows", "cols", "T", "table_order"?, "terms": [...]} where every term is
/// {"kind", "row", "col", ...}:
///   const    {value}
///   cos, sin {amplitude, harmonic}
///   square, triangle {amplitude}
///   sawtooth {amplitude, phase}
/// Unknown keys are rejected.
PeriodicMatrixFunction signal_from_json(const json& j);

struct LtpSystem {
  PeriodicMatrixFunction A;
  PeriodicMatrixFunction B;
  /// The description both were built from, kept for round trips.
  json description;
};

/// {"A": signal, "B": signal}; the two must share the period.
LtpSystem system_from_json(const json& j);

json complex_to_json(cplx z);
cplx complex_from_json(const json& j);
/// Array of rows of {"re", "im"}.
json matrix_to_json(const MatrixXcd& M);
MatrixXcd matrix_from_json(const json& j);
json vector_to_json(const VectorXcd& v);
VectorXcd vector_from_json(const json& j);
/// [{"k": k, "value": matrix}] for |k| <= order.
json phasors_to_json(const PeriodicMatrixFunction& f, int order);
std::vector<MatrixXcd> phasor_table_from_json(const json& j);

json certificate_to_json(const InvertibilityCertificate& c);
InvertibilityCertificate certificate_from_json(const json& j);

/// {T, m, Lambda, K_phasors, P_phasors, G_phasors, certificate, max_imag_residue,
///  system?}. The system description is embedded when given so the file can be
/// simulated on its own.
json gain_to_json(const GainSchedule& gain, const json& system = nullptr);
/// Rebuilds P and G exactly from their phasors and K from them.
GainSchedule gain_from_json(const json& j);

json floquet_to_json(const FloquetFactorization& F);
json sylvester_to_json(const HarmonicSylvesterSolution& sol);
json equilibrium_to_json(const HarmonicEquilibrium& eq);

/// Parses "diag(a, b, ...)" with real or complex entries ("1-2j").
MatrixXcd parse_lambda_spec(const std::string& spec);
/// Parses "4,6,8" into ascending orders.
std::vector<int> parse_order_list(const std::string& list);

/// t, x1..xn, u1..up, then e1..en and z1_re, z1_im, ... when present.
void write_trace_csv(std::ostream& out, const SimulationResult& r);
/// t, then re/im of every entry, one row per sample of [t0, t1).
void write_function_csv(std::ostream& out, const PeriodicMatrixFunction& f, double t0,
                        double t1, int samples, const std::string& prefix);
/// k, then |phasor(k)_ij| for every entry.
void write_phasor_magnitude_csv(std::ostream& out, const PeriodicMatrixFunction& f, int order,
                                const std::string& prefix);

/// Writes `text` to `path`, creating parent directories.
void write_file(const std::string& path, const std::string& text);
json read_json_file(const std::string& path);

}  // namespace harmonic
