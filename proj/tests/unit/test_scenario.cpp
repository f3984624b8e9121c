#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "magtrap/scenario.hpp"

using namespace magtrap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(MAGTRAP_TEST_TMP) / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    REQUIRE(it != header.end());
    const auto idx = static_cast<std::size_t>(it - header.begin());
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[idx]);
    return out;
  }
};

Table read_csv(const fs::path& p) {
  std::ifstream in(p);
  Table t;
  std::string line;
  std::getline(in, line);
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::vector<double> row;
    for (std::string cell; std::getline(ls, cell, ',');) row.push_back(std::stod(cell));
    t.rows.push_back(row);
  }
  return t;
}

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

std::string error_key(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ValidationError& e) {
    return e.key();
  }
  return "<none>";
}

Scenario small_quantum() {
  Scenario s = parse_scenario(
      "mode = quantum\n"
      "quantum.N = 40\n"
      "quantum.L = 8\n"
      "quantum.steps = 8\n"
      "output.dump_psi = true\n");
  return s;
}

}  // namespace

TEST_CASE("minimal quantum scenario gets the default run parameters") {
  const Scenario s = parse_scenario("mode = quantum\n");
  CHECK(s.mode == Mode::quantum);
  CHECK(s.quantum.N == 200);
  CHECK(s.quantum.L == 10.0);
  CHECK(s.quantum.dt == 0.01);
  CHECK(s.quantum.p_bar == 4.0);
  CHECK(s.quantum.a_bar == 1.0);
  CHECK(s.quantum.R_bar == 2.0);
  CHECK(s.field.B0 == 1.0);
}

TEST_CASE("trapped run parameters") {
  const Scenario s = parse_scenario("mode = quantum\nquantum.alpha = 40\nquantum.steps = 75\n");
  CHECK(s.quantum.alpha == 40.0);
  CHECK(s.quantum.steps == 75);
  CHECK(s.solver_config().alpha == 40.0);
  CHECK(s.solver_config().steps == 75);
}

TEST_CASE("validation errors name the key") {
  CHECK(error_key("mode = quantum\nquantum.dt = -0.01\n") == "quantum.dt");
  CHECK(error_key("mode = quantum\nquantum.bogus = 1\n") == "quantum.bogus");
  CHECK(error_key("mode = quantum\nmode = classical\n") == "mode");
  CHECK(error_key("quantum.N = 100\n") == "mode");
  CHECK(error_key("mode = classical\n") == "classical.v0");
  CHECK(error_key("mode = quantum\nquantum.N = many\n") == "quantum.N");
  CHECK(error_key("mode = quantum\nquantum.N = 4\n") == "quantum.N");
  CHECK(error_key("mode = quantum\nquantum.L = 1e400\n") == "quantum.L");
  CHECK(error_key("mode = sideways\n") == "mode");
  CHECK(error_key("mode = classical\nclassical.v0 = 0.1,,0.2\n") == "classical.v0");
  CHECK(error_key("mode = classical\nclassical.v0 = -0.1\n") == "classical.v0");
  CHECK(error_key("mode = quantum\noutput.dump_psi = maybe\n") == "output.dump_psi");
  CHECK(error_key("mode = quantum\nfield.m = 0\n") == "field.m");
  CHECK(error_key("mode = quantum\nquantum.steps = 1\n") == "quantum.steps");
  CHECK(error_key("mode = quantum\nquantum.alpha =\n") == "quantum.alpha");
  CHECK(error_key("mode = quantum\njust some words\n") == "line 2");

  try {
    parse_scenario("mode = quantum\nquantum.dt = -0.01\n");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).starts_with("quantum.dt:"));
  }
}

TEST_CASE("comments and whitespace") {
  const Scenario s = parse_scenario(
      "# trapped run\n"
      "\n"
      "  mode=compare   # inline\n"
      "classical.v0 = 0.1 , 0.2\n");
  CHECK(s.mode == Mode::compare);
  CHECK(s.classical.v0 == std::vector<double>{0.1, 0.2});
}

TEST_CASE("serialize then parse is the identity") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int trial = 0; trial < 300; ++trial) {
    Scenario s;
    s.mode = static_cast<Mode>(pick(rng));
    s.field_kind = u(rng) < 0.5 ? FieldKind::linear : FieldKind::uniform;
    s.field = {10.0 * (u(rng) - 0.5), 0.1 + 5.0 * u(rng), u(rng) < 0.5 ? -1.0 : 1.0, 0.1 + u(rng)};
    s.classical.v0.clear();
    const int n_v0 = 1 + pick(rng);
    for (int i = 0; i < n_v0; ++i) s.classical.v0.push_back(u(rng) / 3.0);
    s.classical.h = 1e-4 + 1e-2 * u(rng);
    s.classical.t_max = 1.0 + 100.0 * u(rng);
    s.quantum.N = 8 + static_cast<int>(400 * u(rng));
    s.quantum.L = 1.0 + 20.0 * u(rng);
    s.quantum.dt = 1e-3 + 0.1 * u(rng);
    s.output.stride = 1 + static_cast<std::size_t>(pick(rng));
    s.quantum.steps = 2 * s.output.stride + static_cast<std::size_t>(100 * u(rng));
    s.quantum.a_bar = 0.1 + u(rng);
    s.quantum.p_bar = 10.0 * (u(rng) - 0.5);
    s.quantum.alpha = 50.0 * u(rng);
    s.quantum.R_bar = 0.5 + 3.0 * u(rng);
    s.output.dir = "out/run_" + std::to_string(trial);
    s.output.dump_psi = u(rng) < 0.5;
    const std::string text = serialize_scenario(s);
    CAPTURE(text);
    CHECK(parse_scenario(text) == s);
  }
}

TEST_CASE("presets") {
  CHECK(preset_names() == std::vector<std::string>{"fig1", "fig2", "fig3", "fig4", "fig5"});
  CHECK(preset("fig1").mode == Mode::classical);
  CHECK(preset("fig2").quantum.alpha == 5.0);
  CHECK(preset("fig3").quantum.steps == 60);
  CHECK(preset("fig4").quantum.alpha == 40.0);
  CHECK(preset("fig5").quantum.steps == 75);
  CHECK_THROWS_AS(preset("fig6"), ValidationError);
  for (const auto& name : preset_names()) {
    CHECK(parse_scenario(serialize_scenario(preset(name))) == preset(name));
  }
}

TEST_CASE("fig1 preset writes three trajectories and bounding radii") {
  const fs::path dir = scratch("fig1");
  const nlohmann::json summary = run(preset("fig1"), RunOptions{dir, std::nullopt, true});
  const auto& runs = summary["classical"]["runs"];
  REQUIRE(runs.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(fs::exists(dir / ("trajectory_" + std::to_string(i) + ".csv")));
  CHECK(runs[0]["outcome"] == "trapped");
  CHECK(runs[1]["outcome"] == "trapped");
  CHECK(runs[2]["outcome"] == "escaped");
  CHECK(runs[0]["bounding_radius"].get<double>() == doctest::Approx(0.139445).epsilon(1e-5));
  CHECK(runs[2]["bounding_radius"].is_null());
  CHECK(summary["classical"]["escape_speed"].get<double>() == 0.125);

  // Summary fields from the CSV.
  for (int i = 0; i < 3; ++i) {
    const Table t = read_csv(dir / runs[i]["file"].get<std::string>());
    const auto x = t.column("x");
    const auto y = t.column("y");
    const auto speed = t.column("speed");
    double r = 0.0, dv = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      r = std::max(r, std::hypot(x[k], y[k]));
      dv = std::max(dv, std::abs(speed[k] - runs[i]["v0"].get<double>()));
    }
    CHECK(r == doctest::Approx(runs[i]["max_radius"].get<double>()).epsilon(1e-12));
    CHECK(dv == doctest::Approx(runs[i]["max_speed_error"].get<double>()).epsilon(1e-6).scale(1e-12));
  }
}

TEST_CASE("quantum run outputs and recomputable summary") {
  const fs::path dir = scratch("quantum");
  const nlohmann::json summary = run(small_quantum(), RunOptions{dir, std::nullopt, true});
  const auto& q = summary["quantum"];
  const Table obs = read_csv(dir / "observables.csv");
  CHECK(obs.header == std::vector<std::string>{"step", "t", "x", "y", "px", "py", "vx", "vy",
                                               "speed", "energy", "norm", "prob_in_R",
                                               "endpoint"});
  CHECK(obs.rows.size() == 9);
  CHECK(q["snapshots"] == 9);
  CHECK(spread(obs.column("norm")) == doctest::Approx(q["norm_drift"].get<double>()).scale(1e-15));
  CHECK(spread(obs.column("energy")) ==
        doctest::Approx(q["energy_drift"].get<double>()).scale(1e-15));
  CHECK(obs.column("prob_in_R")[0] == q["initial_prob_in_R"].get<double>());
  CHECK(obs.column("px")[0] == q["initial_momentum"][0].get<double>());

  bool crossed = false;
  for (std::size_t i = 0; i < obs.rows.size(); ++i) {
    crossed = crossed || std::hypot(obs.column("x")[i], obs.column("y")[i]) >= 2.0;
  }
  CHECK(crossed == q["escaped"].get<bool>());

  const Table forces = read_csv(dir / "forces.csv");
  CHECK(forces.rows.size() == 9);
  double lhs_ehr = 0.0;
  double lhs_cls = 0.0;
  int interior = 0;
  for (const auto& row : forces.rows) {
    if (row[8] == 0.0) continue;
    lhs_ehr += std::pow(row[2] - row[4], 2) + std::pow(row[3] - row[5], 2);
    lhs_cls += std::pow(row[2] - row[6], 2) + std::pow(row[3] - row[7], 2);
    ++interior;
  }
  CHECK(interior == q["force_fit"]["samples"].get<int>());
  CHECK(std::sqrt(lhs_ehr / interior) ==
        doctest::Approx(q["force_fit"]["rms_ehrenfest"].get<double>()).epsilon(1e-12));
  CHECK(std::sqrt(lhs_cls / interior) ==
        doctest::Approx(q["force_fit"]["rms_classicalish"].get<double>()).epsilon(1e-12));

  const Table psi = read_csv(dir / "psi_final.csv");
  CHECK(psi.rows.size() == 40 * 40);
  double norm = 0.0;
  for (const auto& row : psi.rows) norm += row[5] * row[5] + row[6] * row[6];
  const double d = 16.0 / 41.0;
  CHECK(norm * d * d == doctest::Approx(obs.column("norm").back()).epsilon(1e-12));

  CHECK(parse_scenario(slurp(dir / "scenario.txt")) == small_quantum());
}

TEST_CASE("runs are bitwise deterministic") {
  Scenario s = small_quantum();
  s.mode = Mode::compare;
  s.classical.v0 = {0.1, 0.3};
  s.classical.t_max = 20.0;
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  run(s, RunOptions{a, std::nullopt, true});
  run(s, RunOptions{b, std::nullopt, true});
  for (const char* f : {"observables.csv", "forces.csv", "psi_final.csv", "trajectory_0.csv",
                        "trajectory_1.csv", "summary.json"}) {
    CAPTURE(f);
    const std::string first = slurp(a / f);
    CHECK(!first.empty());
    CHECK(first == slurp(b / f));
  }
}

TEST_CASE("stride override thins the snapshots") {
  const fs::path dir = scratch("stride");
  const nlohmann::json summary = run(small_quantum(), RunOptions{dir, std::size_t{4}, true});
  CHECK(summary["quantum"]["snapshots"] == 3);
  CHECK_THROWS_AS(run(small_quantum(), RunOptions{dir, std::size_t{5}, true}), ValidationError);
}
