#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fraktal/field_expr.hpp"
#include "fraktal/obstacle.hpp"

namespace fraktal {

inline constexpr const char* kVersion = "fraktal 0.1.0";

// Raw INI content: section -> ordered key/value pairs. '#' and ';' start
// comments, keys are case-sensitive, unknown keys are rejected at
// interpretation time.
using IniData = std::map<std::string, std::map<std::string, std::string>>;

IniData parse_ini(const std::string& text);
IniData load_ini_file(const std::string& path);

// A p value in a sweep list: finite or the infinity marker.
struct PValue {
  bool is_inf = false;
  double value = 0.0;
  std::string label() const;
};

struct ExperimentConfig {
  // [geometry]
  int level_min = 0, level_max = 0;  // equal for single-level runs
  double h = 0.0;                    // 0: default 3^-n / 4 per level
  int boundary_subdiv = 2;

  // [problem]
  double s = 0.8;
  std::vector<PValue> p_list;  // sorted ascending, finite values first
  std::string f_text = "0", b_text = "1", phi1_text = "-1", phi2_text = "1";
  std::string phi1_n_text, phi2_n_text;  // optional per-level obstacles
  double delta_override = -1.0;

  // [solver]
  double tol = 1e-6;
  int max_iters = 20000;
  bool accel = false;
  std::uint64_t seed = 0;
  InitKind init = InitKind::Midpoint;

  // [limit]
  double C1 = 0.5, C2 = 0.5;
  double limit_tol = 1e-8;
  int limit_max_iters = 400000;

  // [output]
  std::string out_dir = "out";
  bool emit_csv = true, emit_json = true;

  IniData echo;  // raw key/values, sufficient to re-run

  // Obstacle expressions used on the pre-fractal levels (phi*_n when given).
  const std::string& phi1_level_text() const { return phi1_n_text.empty() ? phi1_text : phi1_n_text; }
  const std::string& phi2_level_text() const { return phi2_n_text.empty() ? phi2_text : phi2_n_text; }
};

// Interprets raw INI data; throws ConfigError on unknown sections/keys, bad
// numbers, unparsable expressions, or an unsorted-after-normalization state.
ExperimentConfig interpret_config(const IniData& ini);
ExperimentConfig load_config(const std::string& path);

// Builds the per-level ProblemSpec from a config (finite p).
ProblemSpec make_problem_spec(const ExperimentConfig& cfg, int level, double p, int workers);

}  // namespace fraktal
