#include "harmonic/io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace harmonic {

namespace {

void require_keys(const json& j, const std::set<std::string>& required,
                  const std::set<std::string>& optional, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  for (const auto& key : required) {
    if (!j.contains(key)) throw SchemaError(where + ": missing field '" + key + "'");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!required.count(it.key()) && !optional.count(it.key())) {
      throw SchemaError(where + ": unknown field '" + it.key() + "'");
    }
  }
}

double number(const json& j, const std::string& key, const std::string& where) {
  if (!j.at(key).is_number()) throw SchemaError(where + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

int integer(const json& j, const std::string& key, const std::string& where) {
  if (!j.at(key).is_number_integer()) {
    throw SchemaError(where + ": '" + key + "' must be an integer");
  }
  return j.at(key).get<int>();
}

struct Term {
  Eigen::Index row;
  Eigen::Index col;
  PeriodicMatrixFunction f;
};

Term parse_term(const json& t, double T, int order, Eigen::Index rows, Eigen::Index cols,
                std::size_t index) {
  const std::string where = "term " + std::to_string(index);
  if (!t.is_object() || !t.contains("kind") || !t.at("kind").is_string()) {
    throw SchemaError(where + ": missing string field 'kind'");
  }
  const std::string kind = t.at("kind").get<std::string>();
  const std::set<std::string> pos{"kind", "row", "col"};
  const auto with = [&pos](std::initializer_list<std::string> extra) {
    auto s = pos;
    s.insert(extra);
    return s;
  };
  Term out{0, 0, {}};
  if (kind == "const") {
    require_keys(t, with({"value"}), {}, where);
    out.f = PeriodicMatrixFunction::constant(MatrixXcd::Constant(1, 1, number(t, "value", where)),
                                             T);
  } else if (kind == "cos" || kind == "sin") {
    require_keys(t, with({"amplitude", "harmonic"}), {}, where);
    const int h = integer(t, "harmonic", where);
    if (h < 1) throw SchemaError(where + ": 'harmonic' must be >= 1");
    const double a = number(t, "amplitude", where);
    out.f = waveform_trig_polynomial(0.0, {{h, kind == "cos" ? a : 0.0, kind == "sin" ? a : 0.0}},
                                     T);
  } else if (kind == "square") {
    require_keys(t, with({"amplitude"}), {}, where);
    out.f = waveform_square(0.0, number(t, "amplitude", where), order, T);
  } else if (kind == "triangle") {
    require_keys(t, with({"amplitude"}), {}, where);
    out.f = waveform_triangle(0.0, number(t, "amplitude", where), order, T);
  } else if (kind == "sawtooth") {
    require_keys(t, with({"amplitude", "phase"}), {}, where);
    out.f = waveform_sawtooth(0.0, number(t, "amplitude", where), number(t, "phase", where),
                              order, T);
  } else {
    throw SchemaError(where + ": unknown kind '" + kind + "'");
  }
  out.row = integer(t, "row", where);
  out.col = integer(t, "col", where);
  if (out.row < 0 || out.row >= rows || out.col < 0 || out.col >= cols) {
    throw SchemaError(where + ": (row, col) outside the matrix");
  }
  return out;
}

}  // namespace

PeriodicMatrixFunction signal_from_json(const json& j) {
  require_keys(j, {"rows", "cols", "T", "terms"}, {"table_order"}, "signal");
  const Eigen::Index rows = integer(j, "rows", "signal");
  const Eigen::Index cols = integer(j, "cols", "signal");
  const double T = number(j, "T", "signal");
  const int order = j.contains("table_order") ? integer(j, "table_order", "signal")
                                              : kDefaultTableOrder;
  if (rows < 1 || cols < 1) throw SchemaError("signal: rows and cols must be positive");
  if (!(T > 0.0)) throw SchemaError("signal: T must be positive");
  if (order < 1) throw SchemaError("signal: table_order must be positive");
  if (!j.at("terms").is_array()) throw SchemaError("signal: 'terms' must be an array");

  std::vector<Term> terms;
  for (std::size_t i = 0; i < j.at("terms").size(); ++i) {
    terms.push_back(parse_term(j.at("terms")[i], T, order, rows, cols, i));
  }

  bool bandlimited = true;
  int table_order = 0;
  std::set<double> bps;
  for (const auto& t : terms) {
    bandlimited = bandlimited && t.f.bandlimited();
    table_order = std::max(table_order, t.f.table_order());
    bps.insert(t.f.breakpoints().begin(), t.f.breakpoints().end());
  }
  const auto phasor = [terms, rows, cols](int k) -> MatrixXcd {
    MatrixXcd out = MatrixXcd::Zero(rows, cols);
    for (const auto& t : terms) {
      if (!t.f.bandlimited() || std::abs(k) <= t.f.table_order()) {
        out(t.row, t.col) += t.f.phasor(k)(0, 0);
      }
    }
    return out;
  };
  if (bandlimited) {
    std::vector<MatrixXcd> table;
    for (int k = -table_order; k <= table_order; ++k) table.push_back(phasor(k));
    return PeriodicMatrixFunction::from_table(std::move(table), T);
  }
  const auto exact = [terms, rows, cols](double t) -> MatrixXcd {
    MatrixXcd out = MatrixXcd::Zero(rows, cols);
    for (const auto& term : terms) out(term.row, term.col) += term.f.evaluate(t)(0, 0);
    return out;
  };
  return PeriodicMatrixFunction::from_formula(rows, cols, T, phasor, exact, table_order,
                                              std::vector<double>(bps.begin(), bps.end()));
}

LtpSystem system_from_json(const json& j) {
  require_keys(j, {"A", "B"}, {}, "system");
  LtpSystem out;
  out.A = signal_from_json(j.at("A"));
  out.B = signal_from_json(j.at("B"));
  if (out.A.rows() != out.A.cols()) throw SchemaError("system: A must be square");
  if (out.B.rows() != out.A.rows()) throw SchemaError("system: B must have as many rows as A");
  if (out.A.period() != out.B.period()) throw SchemaError("system: A and B periods differ");
  out.description = j;
  return out;
}

json complex_to_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  require_keys(j, {"re", "im"}, {}, "complex");
  return {number(j, "re", "complex"), number(j, "im", "complex")};
}

json matrix_to_json(const MatrixXcd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(complex_to_json(M(i, c)));
    rows.push_back(row);
  }
  return rows;
}

MatrixXcd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw SchemaError("matrix: expected a non-empty array of rows");
  }
  MatrixXcd M(j.size(), j[0].size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != j[0].size()) throw SchemaError("matrix: ragged rows");
    for (std::size_t c = 0; c < j[i].size(); ++c) M(i, c) = complex_from_json(j[i][c]);
  }
  return M;
}

json vector_to_json(const VectorXcd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

VectorXcd vector_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("vector: expected an array");
  VectorXcd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = complex_from_json(j[i]);
  return v;
}

json phasors_to_json(const PeriodicMatrixFunction& f, int order) {
  json out = json::array();
  for (int k = -order; k <= order; ++k) {
    out.push_back(json{{"k", k}, {"value", matrix_to_json(f.phasor(k))}});
  }
  return out;
}

std::vector<MatrixXcd> phasor_table_from_json(const json& j) {
  if (!j.is_array() || j.size() % 2 == 0) {
    throw SchemaError("phasors: expected an odd-length array");
  }
  const int order = static_cast<int>(j.size() / 2);
  std::vector<MatrixXcd> table(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    require_keys(j[i], {"k", "value"}, {}, "phasor entry");
    const int k = integer(j[i], "k", "phasor entry");
    if (k != static_cast<int>(i) - order) throw SchemaError("phasors: k out of sequence");
    table[i] = matrix_from_json(j[i].at("value"));
  }
  return table;
}

json certificate_to_json(const InvertibilityCertificate& c) {
  return json{{"invertible", c.invertible},       {"min_abs_det", c.min_abs_det},
              {"argmin_t", c.argmin_t},           {"max_abs_det", c.max_abs_det},
              {"threshold", c.threshold},         {"det_sign_changes", c.det_sign_changes},
              {"det_real", c.det_real},           {"grid", c.grid},
              {"status", c.invertible ? "pass" : "fail"}};
}

InvertibilityCertificate certificate_from_json(const json& j) {
  require_keys(j,
               {"invertible", "min_abs_det", "argmin_t", "max_abs_det", "threshold",
                "det_sign_changes", "det_real", "grid"},
               {"status"}, "certificate");
  InvertibilityCertificate c;
  c.invertible = j.at("invertible").get<bool>();
  c.min_abs_det = number(j, "min_abs_det", "certificate");
  c.argmin_t = number(j, "argmin_t", "certificate");
  c.max_abs_det = number(j, "max_abs_det", "certificate");
  c.threshold = number(j, "threshold", "certificate");
  c.det_sign_changes = integer(j, "det_sign_changes", "certificate");
  c.det_real = j.at("det_real").get<bool>();
  c.grid = integer(j, "grid", "certificate");
  return c;
}

json gain_to_json(const GainSchedule& gain, const json& system) {
  json out{{"T", gain.P.period()},
           {"m", gain.m},
           {"Lambda", matrix_to_json(gain.Lambda)},
           {"K_phasors", phasors_to_json(gain.K, 2 * gain.m)},
           {"P_phasors", phasors_to_json(gain.P, gain.m)},
           {"G_phasors", phasors_to_json(gain.G, gain.G.table_order())},
           {"certificate", certificate_to_json(gain.certificate)},
           {"max_imag_residue", gain.max_imag_residue}};
  if (!system.is_null()) out["system"] = system;
  return out;
}

GainSchedule gain_from_json(const json& j) {
  require_keys(j, {"T", "m", "Lambda", "P_phasors", "G_phasors", "certificate"},
               {"K_phasors", "max_imag_residue", "system", "simulation"}, "gain");
  const double T = number(j, "T", "gain");
  const int m = integer(j, "m", "gain");
  const auto P = PeriodicMatrixFunction::from_table(phasor_table_from_json(j.at("P_phasors")), T);
  const auto G = PeriodicMatrixFunction::from_table(phasor_table_from_json(j.at("G_phasors")), T);
  if (P.table_order() != m) throw SchemaError("gain: P_phasors must have |k| <= m");
  if (G.cols() != P.rows()) throw SchemaError("gain: G and P shapes disagree");
  const MatrixXcd Lambda = matrix_from_json(j.at("Lambda"));
  return make_gain(P, G, Lambda, m, certificate_from_json(j.at("certificate")));
}

json floquet_to_json(const FloquetFactorization& F) {
  json exps = json::array();
  for (const cplx e : F.exponents) exps.push_back(complex_to_json(e));
  const int order = std::min(F.V.table_order(), 16);
  return json{{"T", F.period},
              {"exponents", exps},
              {"J", matrix_to_json(F.J)},
              {"W", matrix_to_json(F.W)},
              {"monodromy", matrix_to_json(F.monodromy.cast<cplx>())},
              {"halving_delta", F.halving_delta},
              {"monodromy_converged", F.monodromy_converged},
              {"periodicity_defect", F.periodicity_defect},
              {"similarity_defect", F.similarity_defect},
              {"V_phasors", phasors_to_json(F.V, order)}};
}

json sylvester_to_json(const HarmonicSylvesterSolution& sol) {
  json res{{"algebraic", sol.residuals.algebraic},
           {"phasor_equation", sol.residuals.phasor_equation}};
  if (sol.residuals.differential) res["differential"] = *sol.residuals.differential;
  return json{{"m", sol.m},
              {"T", sol.period},
              {"Lambda", matrix_to_json(sol.Lambda)},
              {"residuals", res},
              {"phasors", phasors_to_json(sol.P, sol.m)}};
}

json equilibrium_to_json(const HarmonicEquilibrium& eq) {
  return json{{"m", eq.m},
              {"X_ref", vector_to_json(eq.X_ref)},
              {"U_ref", vector_to_json(eq.U_ref)},
              {"residual", eq.residual},
              {"smallest_singular_value", eq.smallest_singular_value},
              {"distance", eq.distance},
              {"rank_deficient", eq.rank_deficient}};
}

namespace {

cplx parse_complex(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
  if (s.empty()) throw ConfigError("lambda spec: empty entry");
  const auto to_double = [](const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      throw ConfigError("lambda spec: cannot parse '" + text + "'");
    }
    if (used != text.size()) throw ConfigError("lambda spec: cannot parse '" + text + "'");
    return v;
  };
  const char last = s.back();
  if (last != 'j' && last != 'i') return {to_double(s), 0.0};
  s.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t i = s.size(); i-- > 1;) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  const auto imag_of = [&](const std::string& text) {
    if (text.empty() || text == "+") return 1.0;
    if (text == "-") return -1.0;
    return to_double(text);
  };
  if (split == std::string::npos) return {0.0, imag_of(s)};
  return {to_double(s.substr(0, split)), imag_of(s.substr(split))};
}

}  // namespace

MatrixXcd parse_lambda_spec(const std::string& spec) {
  std::string s = spec;
  s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
  if (s.rfind("diag(", 0) != 0 || s.back() != ')') {
    throw ConfigError("lambda spec must look like diag(a,b,...): '" + spec + "'");
  }
  const std::string body = s.substr(5, s.size() - 6);
  std::vector<cplx> entries;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) entries.push_back(parse_complex(item));
  if (entries.empty()) throw ConfigError("lambda spec: no entries");
  MatrixXcd L = MatrixXcd::Zero(entries.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) L(i, i) = entries[i];
  return L;
}

std::vector<int> parse_order_list(const std::string& list) {
  std::vector<int> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("order list: cannot parse '" + item + "'");
    }
    if (used != item.size() || v < 0) throw ConfigError("order list: bad entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("order list is empty");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void write_trace_csv(std::ostream& out, const SimulationResult& r) {
  out << std::setprecision(17);
  const auto n = r.x.empty() ? 0 : r.x.front().size();
  const auto p = r.u.empty() ? 0 : r.u.front().size();
  const bool has_e = !r.e.empty();
  const bool has_z = !r.z.empty();
  out << 't';
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i + 1;
  for (Eigen::Index i = 0; i < p; ++i) out << ",u" << i + 1;
  if (has_e) {
    for (Eigen::Index i = 0; i < n; ++i) out << ",e" << i + 1;
  }
  if (has_z) {
    for (Eigen::Index i = 0; i < n; ++i) out << ",z" << i + 1 << "_re,z" << i + 1 << "_im";
  }
  out << '\n';
  for (std::size_t s = 0; s < r.t.size(); ++s) {
    out << r.t[s];
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << r.x[s](i);
    for (Eigen::Index i = 0; i < p; ++i) out << ',' << r.u[s](i);
    if (has_e) {
      for (Eigen::Index i = 0; i < n; ++i) out << ',' << r.e[s](i);
    }
    if (has_z) {
      for (Eigen::Index i = 0; i < n; ++i) out << ',' << r.z[s](i).real() << ',' << r.z[s](i).imag();
    }
    out << '\n';
  }
}

void write_function_csv(std::ostream& out, const PeriodicMatrixFunction& f, double t0,
                        double t1, int samples, const std::string& prefix) {
  out << std::setprecision(17) << 't';
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (Eigen::Index j = 0; j < f.cols(); ++j) {
      out << ',' << prefix << i + 1 << j + 1 << "_re," << prefix << i + 1 << j + 1 << "_im";
    }
  }
  out << '\n';
  for (int s = 0; s < samples; ++s) {
    const double t = t0 + (t1 - t0) * s / samples;
    const MatrixXcd v = f.evaluate(t);
    out << t;
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      for (Eigen::Index j = 0; j < f.cols(); ++j) out << ',' << v(i, j).real() << ',' << v(i, j).imag();
    }
    out << '\n';
  }
}

void write_phasor_magnitude_csv(std::ostream& out, const PeriodicMatrixFunction& f, int order,
                                const std::string& prefix) {
  out << std::setprecision(17) << 'k';
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (Eigen::Index j = 0; j < f.cols(); ++j) out << ',' << prefix << i + 1 << j + 1;
  }
  out << '\n';
  for (int k = -order; k <= order; ++k) {
    const MatrixXcd p = f.phasor(k);
    out << k;
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      for (Eigen::Index j = 0; j < f.cols(); ++j) out << ',' << std::abs(p(i, j));
    }
    out << '\n';
  }
}

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace harmonic
