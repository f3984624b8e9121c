#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "magtrap/field_model.hpp"
#include "magtrap/quantum.hpp"

namespace magtrap {

/// Invalid scenario input. The message starts with the offending key path.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string key, const std::string& message);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class Mode { classical, quantum, compare };
enum class FieldKind { linear, uniform };

struct ClassicalParams {
  std::vector<double> v0;
  double h = 1e-3;
  double t_max = 200.0;

  bool operator==(const ClassicalParams&) const = default;
};

struct QuantumParams {
  int N = 200;
  double L = 10.0;
  double dt = 0.01;
  std::size_t steps = 60;
  double a_bar = 1.0;
  double p_bar = 4.0;
  double alpha = 5.0;
  double R_bar = 2.0;

  bool operator==(const QuantumParams&) const = default;
};

struct OutputParams {
  std::string dir = "out";
  std::size_t stride = 1;
  bool dump_psi = false;

  bool operator==(const OutputParams&) const = default;
};

struct Scenario {
  Mode mode = Mode::quantum;
  FieldKind field_kind = FieldKind::linear;
  /// B0 is shared by both engines; R, q, m are classical only.
  FieldParams field;
  ClassicalParams classical;
  QuantumParams quantum;
  OutputParams output;

  bool operator==(const Scenario&) const = default;

  bool runs_classical() const { return mode != Mode::quantum; }
  bool runs_quantum() const { return mode != Mode::classical; }
  SolverConfig solver_config() const;
};

/// Parses the flat `key = value` format (see README). Unknown keys, bad
/// values and missing required keys raise ValidationError.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Emits every key, so parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

/// Range and consistency checks; parse_scenario already calls this.
void validate_scenario(const Scenario& scenario);

/// Named reproductions of the five figures: fig1 .. fig5.
Scenario preset(std::string_view name);
std::vector<std::string> preset_names();

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::size_t> stride;
  bool quiet = true;
};

/// Executes the scenario and writes its CSV files plus summary.json into
/// the output directory. Returns the summary document.
/// Throws SolverError (or other std::runtime_error) on solver failure.
nlohmann::json run(const Scenario& scenario, const RunOptions& options = {});

std::string format_double(double value);

}  // namespace magtrap
