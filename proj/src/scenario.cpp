#include "magtrap/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "magtrap/classical.hpp"
#include "magtrap/observables.hpp"

namespace magtrap {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError(key, "expected a number, got '" + std::string(text) + "'");
  }
  if (!std::isfinite(value)) throw ValidationError(key, "value must be finite");
  return value;
}

long long parse_integer(const std::string& key, std::string_view text) {
  long long value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError(key, "expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

std::size_t parse_count(const std::string& key, std::string_view text) {
  const long long v = parse_integer(key, text);
  if (v < 0) throw ValidationError(key, "must be non-negative");
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, std::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ValidationError(key, "expected true or false, got '" + std::string(text) + "'");
}

std::vector<double> parse_list(const std::string& key, std::string_view text) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (item.empty()) throw ValidationError(key, "empty list element");
    out.push_back(parse_double(key, item));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
    if (trim(text).empty()) throw ValidationError(key, "trailing comma");
  }
  return out;
}

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::classical: return "classical";
    case Mode::quantum: return "quantum";
    case Mode::compare: return "compare";
  }
  return "";
}

const char* to_string(FieldKind kind) { return kind == FieldKind::linear ? "linear" : "uniform"; }

using Setter = std::function<void(Scenario&, const std::string&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"mode",
       [](Scenario& s, const std::string& k, std::string_view v) {
         if (v == "classical") s.mode = Mode::classical;
         else if (v == "quantum") s.mode = Mode::quantum;
         else if (v == "compare") s.mode = Mode::compare;
         else throw ValidationError(k, "expected classical, quantum or compare");
       }},
      {"field.kind",
       [](Scenario& s, const std::string& k, std::string_view v) {
         if (v == "linear") s.field_kind = FieldKind::linear;
         else if (v == "uniform") s.field_kind = FieldKind::uniform;
         else throw ValidationError(k, "expected linear or uniform");
       }},
      {"field.B0", [](Scenario& s, const std::string& k, std::string_view v) { s.field.B0 = parse_double(k, v); }},
      {"field.R", [](Scenario& s, const std::string& k, std::string_view v) { s.field.R = parse_double(k, v); }},
      {"field.q", [](Scenario& s, const std::string& k, std::string_view v) { s.field.q = parse_double(k, v); }},
      {"field.m", [](Scenario& s, const std::string& k, std::string_view v) { s.field.m = parse_double(k, v); }},
      {"classical.v0", [](Scenario& s, const std::string& k, std::string_view v) { s.classical.v0 = parse_list(k, v); }},
      {"classical.h", [](Scenario& s, const std::string& k, std::string_view v) { s.classical.h = parse_double(k, v); }},
      {"classical.t_max", [](Scenario& s, const std::string& k, std::string_view v) { s.classical.t_max = parse_double(k, v); }},
      {"quantum.N",
       [](Scenario& s, const std::string& k, std::string_view v) {
         const long long n = parse_integer(k, v);
         if (n < 8 || n > 4096) throw ValidationError(k, "must lie in [8, 4096]");
         s.quantum.N = static_cast<int>(n);
       }},
      {"quantum.L", [](Scenario& s, const std::string& k, std::string_view v) { s.quantum.L = parse_double(k, v); }},
      {"quantum.dt", [](Scenario& s, const std::string& k, std::string_view v) { s.quantum.dt = parse_double(k, v); }},
      {"quantum.steps", [](Scenario& s, const std::string& k, std::string_view v) { s.quantum.steps = parse_count(k, v); }},
      {"quantum.a_bar", [](Scenario& s, const std::string& k, std::string_view v) { s.quantum.a_bar = parse_double(k, v); }},
      {"quantum.p_bar", [](Scenario& s, const std::string& k, std::string_view v) { s.quantum.p_bar = parse_double(k, v); }},
      {"quantum.alpha", [](Scenario& s, const std::string& k, std::string_view v) { s.quantum.alpha = parse_double(k, v); }},
      {"quantum.R_bar", [](Scenario& s, const std::string& k, std::string_view v) { s.quantum.R_bar = parse_double(k, v); }},
      {"output.dir",
       [](Scenario& s, const std::string& k, std::string_view v) {
         if (v.empty()) throw ValidationError(k, "must not be empty");
         s.output.dir = std::string(v);
       }},
      {"output.stride", [](Scenario& s, const std::string& k, std::string_view v) { s.output.stride = parse_count(k, v); }},
      {"output.dump_psi", [](Scenario& s, const std::string& k, std::string_view v) { s.output.dump_psi = parse_bool(k, v); }},
  };
  return table;
}

void require(bool ok, const char* key, const std::string& message) {
  if (!ok) throw ValidationError(key, message);
}

// ---------------------------------------------------------------------------
// CSV output

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    bool first = true;
    for (auto h : header) {
      if (!first) out_ << ',';
      out_ << h;
      first = false;
    }
    out_ << '\n';
  }

  template <typename... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((write_cell(values, first)), ...);
    out_ << '\n';
  }

  ~CsvWriter() { out_.flush(); }

 private:
  void write_cell(double v, bool& first) { sep(first) << format_double(v); }
  void write_cell(std::size_t v, bool& first) { sep(first) << v; }
  void write_cell(int v, bool& first) { sep(first) << v; }
  void write_cell(bool v, bool& first) { sep(first) << (v ? 1 : 0); }

  std::ostream& sep(bool& first) {
    if (!first) out_ << ',';
    first = false;
    return out_;
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

std::unique_ptr<RadialField> classical_field(const Scenario& s) {
  if (s.field_kind == FieldKind::uniform) return std::make_unique<UniformField>(s.field);
  return std::make_unique<LinearFluxFreeField>(s.field);
}

std::unique_ptr<RadialField> quantum_field(const Scenario& s) {
  const FieldParams p{s.field.B0, s.quantum.R_bar, 1.0, 1.0};
  if (s.field_kind == FieldKind::uniform) return std::make_unique<UniformField>(p);
  return std::make_unique<LinearFluxFreeField>(p);
}

nlohmann::json run_classical(const Scenario& s, const std::filesystem::path& dir,
                             std::size_t stride, bool quiet) {
  const auto field = classical_field(s);
  nlohmann::json summary;
  summary["field_kind"] = to_string(s.field_kind);
  const double v_escape = escape_speed(*field);
  summary["escape_speed"] = std::isfinite(v_escape) ? nlohmann::json(v_escape) : nlohmann::json();
  summary["runs"] = nlohmann::json::array();

  for (std::size_t i = 0; i < s.classical.v0.size(); ++i) {
    const double v0 = s.classical.v0[i];
    if (!quiet) std::cerr << "classical: v0 = " << v0 << '\n';
    const TrajectoryResult result =
        integrate(*field, v0, s.classical.h, s.classical.t_max, IntegrateOptions{stride});

    const std::string file = "trajectory_" + std::to_string(i) + ".csv";
    double speed_drift = 0.0;
    double max_p_phi = 0.0;
    double max_radius = 0.0;
    {
      CsvWriter csv(dir / file, {"t", "x", "y", "vx", "vy", "speed", "p_phi"});
      for (const auto& p : result.samples) {
        const double p_phi = canonical_angular_momentum(*field, p.x, p.y, p.vx, p.vy);
        csv.row(p.t, p.x, p.y, p.vx, p.vy, p.speed(), p_phi);
        speed_drift = std::max(speed_drift, std::abs(p.speed() - v0));
        max_p_phi = std::max(max_p_phi, std::abs(p_phi));
        max_radius = std::max(max_radius, p.radius());
      }
    }

    nlohmann::json run;
    run["v0"] = v0;
    run["file"] = file;
    run["steps_taken"] = result.steps_taken;
    run["outcome"] = result.escaped() ? "escaped" : "trapped";
    run["max_radius"] = max_radius;
    run["max_speed_error"] = speed_drift;
    run["max_abs_p_phi"] = max_p_phi;
    if (field->region_radius() < std::numeric_limits<double>::infinity()) {
      const auto bound = bounding_radius(*field, v0);
      run["bounding_radius"] = bound ? nlohmann::json(*bound) : nlohmann::json();
    } else {
      run["bounding_radius"] = nlohmann::json();
    }
    if (const auto* esc = std::get_if<Escaped>(&result.outcome)) {
      run["exit_angle"] = esc->exit_angle;
      run["exit_time"] = esc->exit_state.t;
      run["exit_point"] = {esc->exit_state.x, esc->exit_state.y};
    } else {
      run["exit_angle"] = nlohmann::json();
    }
    summary["runs"].push_back(run);
  }
  return summary;
}

nlohmann::json run_quantum(const Scenario& s, const std::filesystem::path& dir, std::size_t stride,
                           bool dump_psi, bool quiet) {
  SolverConfig config = s.solver_config();
  config.stride = stride;
  const Grid grid(s.quantum.N, s.quantum.L);
  const auto field = quantum_field(s);
  if (!quiet) {
    std::cerr << "quantum: N = " << grid.n() << ", alpha = " << config.alpha << ", "
              << config.steps << " steps\n";
  }
  const EvolveResult evolved = evolve(config, grid, *field);
  const ObservableSeries series =
      compute_series(evolved.states, evolved.hamiltonian, *field, config.dt, config.R_bar);

  {
    CsvWriter csv(dir / "observables.csv",
                  {"step", "t", "x", "y", "px", "py", "vx", "vy", "speed", "energy", "norm",
                   "prob_in_R", "endpoint"});
    for (std::size_t i = 0; i < series.size(); ++i) {
      csv.row(series.step[i], series.t[i], series.x_exp[i].x(), series.x_exp[i].y(),
              series.p_exp[i].x(), series.p_exp[i].y(), series.v_exp[i].x(), series.v_exp[i].y(),
              series.speed[i], series.energy[i], series.norm[i], series.prob_in_R[i],
              static_cast<bool>(series.endpoint[i]));
    }
  }
  {
    CsvWriter csv(dir / "forces.csv", {"step", "t", "lhs_x", "lhs_y", "ehrenfest_x", "ehrenfest_y",
                                       "classicalish_x", "classicalish_y", "interior"});
    for (std::size_t i = 0; i < series.size(); ++i) {
      csv.row(series.step[i], series.t[i], series.f_lhs[i].x(), series.f_lhs[i].y(),
              series.f_ehrenfest[i].x(), series.f_ehrenfest[i].y(), series.f_classicalish[i].x(),
              series.f_classicalish[i].y(), !static_cast<bool>(series.endpoint[i]));
    }
  }
  if (dump_psi) {
    CsvWriter csv(dir / "psi_final.csv", {"g", "j", "k", "x", "y", "re", "im"});
    const WaveState& psi = evolved.states.back();
    for (int k = 1; k <= grid.n(); ++k) {
      for (int j = 1; j <= grid.n(); ++j) {
        const Complex a = psi.amps[static_cast<Eigen::Index>(grid.offset(j, k))];
        csv.row(grid.g(j, k), j, k, grid.coord(j), grid.coord(k), a.real(), a.imag());
      }
    }
  }

  auto spread = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
  };
  std::vector<double> interior_speed;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!series.endpoint[i]) interior_speed.push_back(series.speed[i]);
  }

  nlohmann::json summary;
  summary["field_kind"] = to_string(s.field_kind);
  summary["grid"] = {{"N", grid.n()}, {"L", grid.half_width()}, {"spacing", grid.spacing()}};
  summary["snapshots"] = series.size();
  summary["initial_momentum"] = {series.p_exp[0].x(), series.p_exp[0].y()};
  summary["initial_prob_in_R"] = series.prob_in_R[0];
  summary["norm_drift"] = spread(series.norm);
  summary["energy_drift"] = spread(series.energy);
  summary["energy_mean"] =
      std::accumulate(series.energy.begin(), series.energy.end(), 0.0) / series.size();
  if (!interior_speed.empty()) {
    const auto [lo, hi] = std::minmax_element(interior_speed.begin(), interior_speed.end());
    summary["speed"] = {
        {"min", *lo},
        {"max", *hi},
        {"mean", std::accumulate(interior_speed.begin(), interior_speed.end(), 0.0) /
                     interior_speed.size()}};
  }
  const std::ptrdiff_t exit = first_exit_index(series, config.R_bar);
  summary["escaped"] = exit > 0;
  if (exit > 0) {
    summary["exit_step"] = series.step[static_cast<std::size_t>(exit)];
    summary["exit_angle"] = exit_angle_quantum(series, config.R_bar);
  } else {
    summary["exit_step"] = nlohmann::json();
    summary["exit_angle"] = nlohmann::json();
  }
  const ForceFit fit = force_fit(series);
  summary["force_fit"] = {{"rms_ehrenfest", fit.rms_ehrenfest},
                          {"rms_classicalish", fit.rms_classicalish},
                          {"samples", fit.samples}};
  return summary;
}

}  // namespace

ValidationError::ValidationError(std::string key, const std::string& message)
    : std::runtime_error(key + ": " + message), key_(std::move(key)) {}

SolverConfig Scenario::solver_config() const {
  SolverConfig c;
  c.dt = quantum.dt;
  c.steps = quantum.steps;
  c.alpha = quantum.alpha;
  c.a_bar = quantum.a_bar;
  c.p_bar = quantum.p_bar;
  c.R_bar = quantum.R_bar;
  c.B0 = field.B0;
  c.stride = output.stride;
  return c;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ValidationError(key, "unknown key");
    if (!seen.insert(key).second) throw ValidationError(key, "duplicate key");
    if (value.empty()) throw ValidationError(key, "missing value");
    it->second(s, key, value);
  }

  if (!seen.contains("mode")) throw ValidationError("mode", "required key is missing");
  if (s.runs_classical() && !seen.contains("classical.v0")) {
    throw ValidationError("classical.v0", "required for mode " + std::string(to_string(s.mode)));
  }
  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("file", "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

void validate_scenario(const Scenario& s) {
  require(std::isfinite(s.field.B0), "field.B0", "must be finite");
  require(std::isfinite(s.field.q), "field.q", "must be finite");
  require(s.field.R > 0.0, "field.R", "must be positive");
  require(s.field.m > 0.0, "field.m", "must be positive");
  require(s.output.stride >= 1, "output.stride", "must be at least 1");
  require(!s.output.dir.empty(), "output.dir", "must not be empty");

  if (s.runs_classical()) {
    require(!s.classical.v0.empty(), "classical.v0", "needs at least one speed");
    for (double v : s.classical.v0) {
      require(v >= 0.0 && std::isfinite(v), "classical.v0", "speeds must be non-negative");
    }
    require(s.classical.h > 0.0, "classical.h", "must be positive");
    require(s.classical.t_max > 0.0, "classical.t_max", "must be positive");
    require(s.classical.t_max / s.classical.h <= 1e8, "classical.t_max",
            "t_max / h exceeds 1e8 steps");
  }
  if (s.runs_quantum()) {
    require(s.quantum.N >= 8, "quantum.N", "must be at least 8");
    require(s.quantum.L > 0.0, "quantum.L", "must be positive");
    require(s.quantum.dt > 0.0, "quantum.dt", "must be positive");
    require(s.quantum.a_bar > 0.0, "quantum.a_bar", "must be positive");
    require(s.quantum.alpha >= 0.0, "quantum.alpha", "must be non-negative");
    require(s.quantum.R_bar > 0.0, "quantum.R_bar", "must be positive");
    require(s.quantum.steps / s.output.stride >= 2, "quantum.steps",
            "needs at least 2 * output.stride steps for the derivative series");
  }
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "mode = " << to_string(s.mode) << '\n';
  out << "field.kind = " << to_string(s.field_kind) << '\n';
  out << "field.B0 = " << format_double(s.field.B0) << '\n';
  out << "field.R = " << format_double(s.field.R) << '\n';
  out << "field.q = " << format_double(s.field.q) << '\n';
  out << "field.m = " << format_double(s.field.m) << '\n';
  if (!s.classical.v0.empty()) {
    out << "classical.v0 = ";
    for (std::size_t i = 0; i < s.classical.v0.size(); ++i) {
      out << (i ? ", " : "") << format_double(s.classical.v0[i]);
    }
    out << '\n';
  }
  out << "classical.h = " << format_double(s.classical.h) << '\n';
  out << "classical.t_max = " << format_double(s.classical.t_max) << '\n';
  out << "quantum.N = " << s.quantum.N << '\n';
  out << "quantum.L = " << format_double(s.quantum.L) << '\n';
  out << "quantum.dt = " << format_double(s.quantum.dt) << '\n';
  out << "quantum.steps = " << s.quantum.steps << '\n';
  out << "quantum.a_bar = " << format_double(s.quantum.a_bar) << '\n';
  out << "quantum.p_bar = " << format_double(s.quantum.p_bar) << '\n';
  out << "quantum.alpha = " << format_double(s.quantum.alpha) << '\n';
  out << "quantum.R_bar = " << format_double(s.quantum.R_bar) << '\n';
  out << "output.dir = " << s.output.dir << '\n';
  out << "output.stride = " << s.output.stride << '\n';
  out << "output.dump_psi = " << (s.output.dump_psi ? "true" : "false") << '\n';
  return out.str();
}

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3", "fig4", "fig5"}; }

Scenario preset(std::string_view name) {
  Scenario s;
  s.output.dir = "out/" + std::string(name);
  if (name == "fig1") {
    // Two bound trajectories and one above the escape speed B0 R / 8.
    s.mode = Mode::classical;
    s.classical.v0 = {0.06, 0.1, 0.2};
    s.output.stride = 10;
  } else if (name == "fig2" || name == "fig3") {
    s.mode = Mode::quantum;
    s.quantum.alpha = 5.0;
    s.quantum.steps = 60;
  } else if (name == "fig4" || name == "fig5") {
    s.mode = Mode::quantum;
    s.quantum.alpha = 40.0;
    s.quantum.steps = 75;
  } else {
    throw ValidationError("preset", "unknown preset '" + std::string(name) + "' (fig1..fig5)");
  }
  validate_scenario(s);
  return s;
}

nlohmann::json run(const Scenario& scenario, const RunOptions& options) {
  Scenario s = scenario;
  if (options.stride) s.output.stride = *options.stride;
  validate_scenario(s);

  const std::filesystem::path dir =
      options.out_dir ? *options.out_dir : std::filesystem::path(s.output.dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream echo(dir / "scenario.txt", std::ios::binary);
    echo << serialize_scenario(s);
  }

  nlohmann::json summary;
  summary["mode"] = to_string(s.mode);
  if (s.runs_classical()) {
    summary["classical"] = run_classical(s, dir, s.output.stride, options.quiet);
  }
  if (s.runs_quantum()) {
    summary["quantum"] = run_quantum(s, dir, s.output.stride, s.output.dump_psi, options.quiet);
  }
  std::ofstream out(dir / "summary.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
  out << summary.dump(2) << '\n';
  return summary;
}

}  // namespace magtrap
