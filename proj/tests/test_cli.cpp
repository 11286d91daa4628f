#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "harmonic/case_study.hpp"

using namespace harmonic;
namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("harmonic_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(HARMONIC_CLI) + " " + args + " > " +
                          (scratch() / "stdout.txt").string() + " 2> " +
                          (scratch() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string write_config(const std::string& name, const json& j) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << j.dump(2);
  return p.string();
}

json term(const std::string& kind, int row, int col, json fields) {
  fields["kind"] = kind;
  fields["row"] = row;
  fields["col"] = col;
  return fields;
}

// Small direct-design scenario on a smooth two-state system.
json small_scenario() {
  json A{{"rows", 2}, {"cols", 2}, {"T", 1.0},
         {"terms", json::array({term("const", 0, 1, {{"value", 1.0}}),
                                term("const", 1, 0, {{"value", -2.0}}),
                                term("cos", 1, 0, {{"amplitude", 0.5}, {"harmonic", 1}}),
                                term("const", 1, 1, {{"value", 0.3}})})}};
  json B{{"rows", 2}, {"cols", 1}, {"T", 1.0},
         {"terms", json::array({term("const", 1, 0, {{"value", 1.0}}),
                                term("sin", 0, 0, {{"amplitude", 0.2}, {"harmonic", 1}})})}};
  json G{{"rows", 1}, {"cols", 2}, {"T", 1.0},
         {"terms", json::array({term("const", 0, 0, {{"value", 1.0}}),
                                term("const", 0, 1, {{"value", 1.0}})})}};
  return json{{"system", {{"A", A}, {"B", B}}},
              {"design", {{"kind", "direct"}, {"G", G}, {"lambda", "diag(-3,-4)"}}},
              {"m", {6}},
              {"simulation", {{"x0", {1.0, -0.5}}, {"t_end", 2.0}, {"step", 1e-3}, {"stride", 5}}}};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help and usage errors") {
    CHECK(run("--help") == 0);
    CHECK(run("") == 2);
    CHECK(run("nonsense") == 2);
    CHECK(run("lift --bogus") == 2);
  }

  TEST_CASE("configuration errors exit with 2") {
    const auto out = (scratch() / "cfg_err").string();
    CHECK(run("lift --out " + out) == 2);
    CHECK(run("lift --config " + (scratch() / "missing.json").string() + " --out " + out) == 2);
    json bad = small_scenario();
    bad["unexpected"] = true;
    CHECK(run("lift --config " + write_config("bad.json", bad) + " --out " + out) == 2);
    CHECK(slurp(scratch() / "stderr.txt").find("config error [lift]") != std::string::npos);
    const auto cfg = write_config("small.json", small_scenario());
    CHECK(run("design --config " + cfg + " --lambda 'diag(1' --out " + out) == 2);
  }

  TEST_CASE("lift at m = 0 on a constant system is A") {
    json sys{{"A", {{"rows", 2}, {"cols", 2}, {"T", 1.0},
                    {"terms", json::array({term("const", 0, 0, {{"value", 1.5}}),
                                           term("const", 1, 0, {{"value", -2.0}})})}}},
             {"B", {{"rows", 2}, {"cols", 1}, {"T", 1.0},
                    {"terms", json::array({term("const", 1, 0, {{"value", 1.0}})})}}}};
    const auto out = scratch() / "lift0";
    REQUIRE(run("lift --m 0 --config " + write_config("const.json", sys) + " --out " + out.string()) == 0);
    const std::string csv = slurp(out / "lift_A.csv");
    std::istringstream in(csv);
    std::string row0, row1;
    std::getline(in, row0);
    std::getline(in, row1);
    CHECK(row0 == "1.5,0,0,0");
    CHECK(row1 == "-2,0,0,0");
  }

  TEST_CASE("design output feeds simulate, byte-identical on rerun") {
    const auto cfg = write_config("small.json", small_scenario());
    const auto d = scratch() / "design";
    REQUIRE(run("design --config " + cfg + " --out " + d.string()) == 0);
    const json gain = json::parse(slurp(d / "gain.json"));
    CHECK(gain.at("certificate").at("status") == "pass");
    const auto s1 = scratch() / "sim1";
    const auto s2 = scratch() / "sim2";
    REQUIRE(run("simulate --config " + (d / "gain.json").string() + " --out " + s1.string()) == 0);
    REQUIRE(run("simulate --config " + (d / "gain.json").string() + " --out " + s2.string()) == 0);
    CHECK(slurp(s1 / "trace.csv") == slurp(s2 / "trace.csv"));
    CHECK(slurp(s1 / "simulation.json") == slurp(s2 / "simulation.json"));
    const json sim = json::parse(slurp(s1 / "simulation.json"));
    CHECK(sim.at("z_deviation_relative_to_x0").get<double>() < 1e-3);
    CHECK_FALSE(sim.at("escaped").get<bool>());
  }

  TEST_CASE("seeded simulate is deterministic") {
    const auto cfg = write_config("small.json", small_scenario());
    const auto d = scratch() / "design_seed";
    REQUIRE(run("design --config " + cfg + " --out " + d.string()) == 0);
    const auto a = scratch() / "seed_a";
    const auto b = scratch() / "seed_b";
    const auto c = scratch() / "seed_c";
    const std::string g = (d / "gain.json").string();
    REQUIRE(run("simulate --seed 7 --steps 500 --config " + g + " --out " + a.string()) == 0);
    REQUIRE(run("simulate --seed 7 --steps 500 --config " + g + " --out " + b.string()) == 0);
    REQUIRE(run("simulate --seed 8 --steps 500 --config " + g + " --out " + c.string()) == 0);
    CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
    CHECK(slurp(a / "trace.csv") != slurp(c / "trace.csv"));
  }

  TEST_CASE("uncertifiable design exits with 3 and names the stage") {
    json cfg = example_scenario_json();
    cfg["design"] = {{"kind", "direct"},
                     {"G", {{"rows", 1}, {"cols", 2}, {"T", 1.0},
                            {"terms", json::array({term("const", 0, 0, {{"value", 1.0}}),
                                                   term("const", 0, 1, {{"value", 1.0}})})}}},
                     {"lambda", "diag(-5,-7)"}};
    const auto out = scratch() / "ce_design";
    CHECK(run("design --m 10 --config " + write_config("ce.json", cfg) + " --out " + out.string()) == 3);
    CHECK(slurp(scratch() / "stderr.txt").find("numerical failure [design]") != std::string::npos);
    const json cert = json::parse(slurp(out / "certificate.json"));
    CHECK(cert.at("status") == "fail");
  }

  TEST_CASE("sylvester at m = 10 matches the m = 10 column of the sweep") {
    const auto cfg = write_config("example.json", example_scenario_json());
    const auto a = scratch() / "syl_single";
    const auto b = scratch() / "syl_sweep";
    REQUIRE(run("sylvester --steps 4000 --m 10 --config " + cfg + " --out " + a.string()) == 0);
    REQUIRE(run("sylvester --steps 4000 --m 4,6,8,10 --config " + cfg + " --out " + b.string()) == 0);
    CHECK(slurp(a / "sylvester_m10_magnitudes.csv") == slurp(b / "sylvester_m10_magnitudes.csv"));
    const json sweep = json::parse(slurp(b / "sweep.json"));
    CHECK(sweep.at("rows").size() == 4);
  }

  TEST_CASE("design --alpha 1 on the example certifies") {
    const auto cfg = write_config("example.json", example_scenario_json());
    const auto out = scratch() / "alpha";
    REQUIRE(run("design --alpha 1 --m 10 --config " + cfg + " --out " + out.string()) == 0);
    const json gain = json::parse(slurp(out / "gain.json"));
    CHECK(gain.at("certificate").at("status") == "pass");
    CHECK(gain.at("max_imag_residue").get<double>() < 1e-8);
    CHECK(gain.contains("simulation"));
  }

  TEST_CASE("floquet and equilibrium outputs are deterministic") {
    const auto cfg = write_config("example.json", example_scenario_json());
    const auto a = scratch() / "fl_a";
    const auto b = scratch() / "fl_b";
    REQUIRE(run("floquet --steps 2000 --config " + cfg + " --out " + a.string()) == 0);
    REQUIRE(run("floquet --steps 2000 --config " + cfg + " --out " + b.string()) == 0);
    CHECK(slurp(a / "floquet.json") == slurp(b / "floquet.json"));
    CHECK(slurp(a / "V.csv") == slurp(b / "V.csv"));
    REQUIRE(run("equilibrium --config " + cfg + " --out " + a.string()) == 0);
    const json eq = json::parse(slurp(a / "equilibria.json"));
    CHECK(eq.size() == 3);
    CHECK(fs::exists(a / "x_ref_2.csv"));
  }

  TEST_CASE("phasors subcommand") {
    const auto cfg = write_config("example.json", example_scenario_json());
    const auto out = scratch() / "phasors";
    REQUIRE(run("phasors --m 5 --config " + cfg + " --out " + out.string()) == 0);
    const json j = json::parse(slurp(out / "phasors.json"));
    CHECK(j.at("order") == 5);
    CHECK(j.at("A").size() == 11);
  }

  TEST_CASE("case study counter-example mode") {
    const auto out = scratch() / "ce";
    REQUIRE(run("run_paper_case_study --counter-example --out " + out.string()) == 0);
    CHECK(slurp(scratch() / "stdout.txt").find("NotInvertible") != std::string::npos);
    const json s = json::parse(slurp(out / "summary.json"));
    CHECK(s.at("status") == "NotInvertible");
    CHECK(s.at("counter_example").at("escape_time").get<double>() < 1.0);
  }

  TEST_CASE("full case study writes every artifact") {
    const auto out = scratch() / "full";
    REQUIRE(run("run_paper_case_study --lambda 'diag(-10,-12)' --out " + out.string()) == 0);
    for (const char* f : {"floquet.json", "floquet_V.csv", "tracking_sufficient.csv", "P_phasors_m4.csv",
                          "P_phasors_m10.csv", "counter_example_P.csv", "K_m10.csv",
                          "tracking_fast.csv", "P_trace_m8.csv", "summary.json"}) {
      CHECK_MESSAGE(fs::exists(out / f), f);
    }
    const json s = json::parse(slurp(out / "summary.json"));
    CHECK(s.at("tracking").contains("transient_improvement"));
    CHECK(s.at("tracking").at("transient_improvement").get<double>() > 1.0);
    CHECK(s.at("floquet_exponents").size() == 2);
  }
}
