#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cmaccm/fading.hpp"
#include "cmaccm/types.hpp"

namespace cmaccm {

enum class Mode { ParallelGaussian, Fading };
enum class OutputFormat { Csv, Json, Both };

// Parsed scenario file. Budgets live in dB here and are converted to linear
// exactly once, at the command layer.
struct ScenarioConfig {
  Mode mode = Mode::ParallelGaussian;

  // parallel-gaussian
  std::vector<double> nu;
  std::vector<double> mu;

  // fading (budgets excluded; n_samples/seed mirrored below)
  RayleighSpec rayleigh;

  double p1_db = 0.0;
  double p2_db = 0.0;

  std::vector<double> gamma1_list;  // nonempty, sorted ascending, >= 0

  std::string out_path;  // empty: stdout
  OutputFormat format = OutputFormat::Both;
  std::uint64_t seed = 0;
  int n_samples = 20000;
};

struct ConfigError : std::runtime_error {
  ConfigError(int line_no, std::string field_name, const std::string& what)
      : std::runtime_error(what), line(line_no), field(std::move(field_name)) {}
  int line;           // 0 when not tied to a specific line
  std::string field;  // may be empty
};

// INI-style scenario text: [section] headers, key = value pairs, # comments.
// Lists are whitespace- or comma-separated. Unknown sections or keys,
// duplicate keys, malformed numbers and violated invariants all raise
// ConfigError with the offending line.
ScenarioConfig parse_scenario_text(std::string_view text);
ScenarioConfig parse_scenario_file(const std::string& path);

// The default gamma1 sweep used when a config omits [sweep].
std::vector<double> default_gamma1_sweep();

}  // namespace cmaccm
