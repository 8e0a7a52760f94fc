#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "frwmax/config.hpp"
#include "frwmax/propagator.hpp"

namespace frwmax {

inline const std::vector<std::string> kTasks{"propagate",         "decay",
                                             "huygens",           "singular-limit",
                                             "cross-singularity", "oracle-compare",
                                             "identify-pde"};

struct BumpSpec {
  Vec3 center;
  double radius{};
  Vec3 amplitude;
};

/// Fully resolved run configuration. Task-specific fields are resolved for
/// every task so the JSON summary always embeds the same key set.
struct RunConfig {
  std::string task;
  Curvature curvature = Curvature::Flat;
  BumpSpec f;
  BumpSpec g;
  double tau0{};
  int order = kDefaultQuadratureOrder;
  std::uint64_t seed = 1;
  bool timing = false;
  std::string csv_path;
  std::string json_path;

  std::vector<double> taus;  // propagate
  double tau{};              // huygens, oracle-compare, identify-pde
  std::vector<Vec3> points;  // empty: task default
  double decay_tau_min{};
  double decay_tau_max{};
  int decay_count{};
  int decay_directions{};
  std::vector<double> decay_offsets;
  double decay_tolerance_tau{};
  double decay_tolerance_t{};
  int huygens_per_region{};
  double limit_tau_first{};
  int limit_levels{};
  double limit_threshold{};
  double cross_tau_first{};  // <= 0: half the geodesic support radius
  int cross_levels{};
  int grid_n{};
  int grid_scheme_order{};
  int grid_margin{};
  double grid_mass_shift{};
  std::string grid_dump;
  double oracle_tolerance{};

  /// Every resolved key with its effective value, for provenance.
  std::map<std::string, std::string> resolved;

  CauchyProblem problem() const;
};

/// Resolves defaults and validates every field against the preconditions of
/// the module that consumes it. All problems are collected into one
/// ConfigError.
RunConfig resolve_config(const std::string& task, const Config& config);

/// Runs the task, writes the CSV and JSON files and returns the exit status:
/// 0 success, 2 failed verification. Throws ConfigError or
/// std::invalid_argument on usage errors.
int run(const RunConfig& config, std::ostream& log);

/// `frwmax <task> --config <path> [--key value ...]`. Returns the exit status
/// (1 for usage or configuration errors).
int main_entry(int argc, char** argv);

}  // namespace frwmax
