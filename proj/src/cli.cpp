#include "frwmax/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "frwmax/analysis.hpp"
#include "frwmax/oracle.hpp"

namespace frwmax {
namespace {

using Json = nlohmann::ordered_json;

std::string format_vec3(const Vec3& v) {
  return format_double(v.x) + "," + format_double(v.y) + "," + format_double(v.z);
}

std::string format_points(const std::vector<Vec3>& pts) {
  if (pts.empty()) return "default";
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) out += ";";
    out += format_vec3(pts[i]);
  }
  return out;
}

std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

Json vec_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}

  Csv& row() {
    rows_.emplace_back();
    return *this;
  }
  Csv& add(double v) {
    rows_.back().push_back(format_double(v));
    return *this;
  }
  Csv& add(const Vec3& v) { return add(v.x).add(v.y).add(v.z); }
  Csv& add(const std::string& s) {
    rows_.back().push_back(s);
    return *this;
  }
  Csv& blank(int count = 1) {
    for (int i = 0; i < count; ++i) rows_.back().emplace_back();
    return *this;
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write CSV '" + path + "'");
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
      out << "\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

VectorField bump_field(Curvature curvature, const BumpSpec& spec) {
  if (spec.amplitude == Vec3{}) return VectorField::zero(curvature);
  return make_bump({spec.center, curvature}, spec.radius, spec.amplitude);
}

std::vector<SpatialPoint> to_points(const RunConfig& cfg) {
  std::vector<SpatialPoint> out;
  for (const auto& p : cfg.points) out.push_back({p, cfg.curvature});
  return out;
}

// Support ball of the configured data, or a unit ball at the f centre for zero data.
GeodesicBall support_or_default(const CauchyProblem& problem, const RunConfig& cfg) {
  const VectorField data = problem.f + problem.g;
  if (!data.is_zero()) return *data.geodesic_support();
  return geodesic_ball_of({cfg.f.center, cfg.curvature}, cfg.f.radius);
}

}  // namespace

CauchyProblem RunConfig::problem() const {
  return CauchyProblem{curvature, bump_field(curvature, f), bump_field(curvature, g), tau0};
}

RunConfig resolve_config(const std::string& task, const Config& cfg) {
  std::vector<std::string> errors;
  RunConfig rc;
  rc.task = task;
  if (std::find(kTasks.begin(), kTasks.end(), task) == kTasks.end()) {
    errors.push_back("task: unknown task '" + task + "'");
  }
  auto& res = rc.resolved;
  auto guarded = [&errors](auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      errors.emplace_back(e.what());
    }
  };
  auto num = [&](const std::string& key, double fallback) {
    double v = fallback;
    guarded([&] { v = cfg.get_double(key, fallback); });
    res[key] = format_double(v);
    return v;
  };
  auto integer = [&](const std::string& key, long fallback) {
    long v = fallback;
    guarded([&] { v = cfg.get_int(key, fallback); });
    res[key] = std::to_string(v);
    return v;
  };
  auto vec = [&](const std::string& key, const Vec3& fallback) {
    Vec3 v = fallback;
    guarded([&] { v = cfg.get_vec3(key, fallback); });
    res[key] = format_vec3(v);
    return v;
  };
  auto list = [&](const std::string& key, const std::vector<double>& fallback) {
    std::vector<double> v = fallback;
    guarded([&] { v = cfg.get_doubles(key, fallback); });
    res[key] = format_list(v);
    return v;
  };
  auto text = [&](const std::string& key, const std::string& fallback) {
    const std::string v = cfg.get_string(key, fallback);
    res[key] = v;
    return v;
  };
  auto require = [&errors](bool ok, const std::string& message) {
    if (!ok) errors.push_back(message);
  };

  const std::string curvature_name = text("curvature", "flat");
  guarded([&] { rc.curvature = curvature_from_string(curvature_name); });
  res["curvature"] = std::string(to_string(rc.curvature));
  const bool flat = rc.curvature == Curvature::Flat;

  const Vec3 default_center = flat ? Vec3{0.0, 0.0, 0.0} : Vec3{0.0, 0.0, 1.0};
  const double default_radius = flat ? 1.0 : 0.3;
  rc.f = {vec("f.center", default_center), num("f.radius", default_radius),
          vec("f.amplitude", {1.0, 0.5, -0.25})};
  rc.g = {vec("g.center", default_center), num("g.radius", default_radius),
          vec("g.amplitude", {0.5, -0.25, 0.1})};
  for (const auto* spec : {&rc.f, &rc.g}) {
    const std::string name = spec == &rc.f ? "f" : "g";
    require(spec->radius > 0.0, name + ".radius: must be > 0");
    require(flat || spec->center.z - spec->radius > 0.0,
            name + ".center/" + name + ".radius: hyperbolic support must satisfy z - R > 0");
  }
  rc.tau0 = num("tau0", 0.0);
  require(rc.tau0 >= 0.0, "tau0: must be >= 0");
  rc.order = static_cast<int>(integer("order", kDefaultQuadratureOrder));
  require(rc.order >= kMinQuadratureOrder && rc.order <= 1024,
          "order: must be in [" + std::to_string(kMinQuadratureOrder) + ", 1024]");
  const long seed = integer("seed", 1);
  require(seed >= 0, "seed: must be >= 0");
  rc.seed = static_cast<std::uint64_t>(std::max(0L, seed));
  guarded([&] { rc.timing = cfg.get_bool("timing", false); });
  res["timing"] = rc.timing ? "on" : "off";
  rc.csv_path = text("csv", task + ".csv");
  rc.json_path = text("json", task + ".json");

  // Task parameters. Defaults that depend on the support are filled in at run time.
  rc.taus = list("tau", {});
  rc.tau = rc.taus.empty() ? std::nan("") : rc.taus.front();
  guarded([&] { rc.points = cfg.get_points("points", {}); });
  res["points"] = format_points(rc.points);
  rc.decay_tau_min = num("decay.tau_min", flat ? 20.0 : 8.0);
  rc.decay_tau_max = num("decay.tau_max", flat ? 200.0 : 20.0);
  rc.decay_count = static_cast<int>(integer("decay.count", flat ? 12 : 13));
  rc.decay_directions = static_cast<int>(integer("decay.directions", 24));
  rc.decay_offsets = list("decay.offsets", {-0.5, 0.0, 0.5});
  rc.decay_tolerance_tau = num("decay.tolerance_tau", 0.05);
  rc.decay_tolerance_t = num("decay.tolerance_t", flat ? 0.05 : 0.1);
  rc.huygens_per_region = static_cast<int>(integer("huygens.per_region", 8));
  rc.limit_tau_first = num("limit.tau_first", 0.2);
  rc.limit_levels = static_cast<int>(integer("limit.levels", 7));
  rc.limit_threshold = num("limit.threshold", 1e-3);
  rc.cross_tau_first = num("cross.tau_first", 0.0);
  rc.cross_levels = static_cast<int>(integer("cross.levels", 10));
  rc.grid_n = static_cast<int>(integer("grid.n", 128));
  rc.grid_scheme_order = static_cast<int>(integer("grid.scheme_order", 4));
  rc.grid_margin = static_cast<int>(integer("grid.margin", 4));
  // Hyperbolic comparisons default to the operator the formula was found to solve.
  rc.grid_mass_shift = num("grid.mass_shift", flat ? 0.0 : 1.0);
  rc.grid_dump = text("grid.dump", "");
  rc.oracle_tolerance = num("oracle.tolerance", 1e-3);

  for (const auto& key : cfg.unused_keys()) errors.push_back(key + ": unknown key");
  for (const auto& p : rc.points) {
    require(SpatialPoint{p, rc.curvature}.valid(), "points: hyperbolic points need z > 0");
  }

  // Support radius for the task preconditions; unavailable if the bumps are invalid.
  double r_geo = -1.0;
  if (errors.empty()) {
    guarded([&] {
      const CauchyProblem problem = rc.problem();
      const VectorField data = problem.f + problem.g;
      if (!data.is_zero()) r_geo = data.geodesic_support()->radius;
    });
  }

  if (task == "propagate") {
    if (rc.taus.empty()) rc.taus = {rc.tau0 + 1.0};
    res["tau"] = format_list(rc.taus);
    for (double t : rc.taus) {
      require(t > rc.tau0, "tau: must be greater than tau0 (tau = " + format_double(t) +
                               ", tau0 = " + format_double(rc.tau0) + ")");
    }
  } else if (task == "decay") {
    require(rc.decay_count >= 5, "decay.count: need at least 5 tau values");
    require(rc.decay_tau_min > 0.0 && rc.decay_tau_max > rc.decay_tau_min,
            "decay.tau_min/decay.tau_max: need 0 < tau_min < tau_max");
    require(rc.decay_directions >= 1, "decay.directions: must be >= 1");
    require(r_geo > 0.0, "f.amplitude/g.amplitude: decay needs non-zero data");
    if (r_geo > 0.0) {
      const double guard = 5.0 * (r_geo + rc.tau0);
      require(rc.decay_tau_min >= guard, "decay.tau_min: must be >= 5 (R_geo + tau0) = " +
                                             format_double(guard));
    }
  } else if (task == "huygens") {
    if (std::isnan(rc.tau)) rc.tau = rc.tau0 + 10.0 * std::max(r_geo, 0.0);
    res["tau"] = format_double(rc.tau);
    require(rc.huygens_per_region >= 1, "huygens.per_region: must be >= 1");
    require(r_geo > 0.0, "f.amplitude/g.amplitude: huygens needs non-zero data");
    require(r_geo <= 0.0 || rc.tau - rc.tau0 > 2.0 * r_geo,
            "tau: tau - tau0 must exceed 2 R_geo = " + format_double(2.0 * r_geo));
  } else if (task == "singular-limit" || task == "cross-singularity") {
    require(rc.tau0 == 0.0, "tau0: must be 0 for " + task);
    if (task == "singular-limit") {
      require(rc.limit_tau_first > 0.0, "limit.tau_first: must be > 0");
      require(rc.limit_levels >= 2, "limit.levels: must be >= 2");
    } else {
      if (rc.cross_tau_first <= 0.0) rc.cross_tau_first = 0.5 * (r_geo > 0.0 ? r_geo : 1.0);
      res["cross.tau_first"] = format_double(rc.cross_tau_first);
      require(rc.cross_levels >= 2, "cross.levels: must be >= 2");
    }
  } else if (task == "oracle-compare" || task == "identify-pde") {
    if (std::isnan(rc.tau)) rc.tau = rc.tau0 + (task == "identify-pde" ? 1.5 : 2.0);
    res["tau"] = format_double(rc.tau);
    require(rc.tau > rc.tau0, "tau: must be greater than tau0");
    require(rc.grid_n >= 16 && rc.grid_n <= (task == "identify-pde" ? 160 : 512),
            "grid.n: must be in [16, " + std::string(task == "identify-pde" ? "160" : "512") +
                "]");
    require(rc.grid_scheme_order == 2 || rc.grid_scheme_order == 4,
            "grid.scheme_order: must be 2 or 4");
    require(rc.grid_margin >= 0, "grid.margin: must be >= 0");
    require(rc.oracle_tolerance > 0.0, "oracle.tolerance: must be > 0");
  }

  if (!errors.empty()) {
    std::string message = "invalid configuration:";
    for (const auto& e : errors) message += "\n  " + e;
    throw ConfigError(message);
  }
  return rc;
}

namespace {

struct TaskResult {
  Json metrics = Json::object();
  bool pass = true;
};

TaskResult run_propagate(const RunConfig& cfg, const CauchyProblem& problem) {
  std::vector<SpatialPoint> xs = to_points(cfg);
  if (xs.empty()) xs.push_back(support_or_default(problem, cfg).center);
  std::vector<SpacetimePoint> pts;
  for (double t : cfg.taus) {
    for (const auto& x : xs) pts.push_back({t, x});
  }
  SolveOptions opts;
  opts.order = cfg.order;
  const auto samples = solve_batch(problem, pts, opts);
  Csv csv({"tau", "x", "y", "z", "A1", "A2", "A3", "A_tau1", "A_tau2", "A_tau3", "order"});
  double max_a = 0.0;
  for (const auto& s : samples) {
    csv.row().add(s.point.tau).add(s.point.x.coords).add(s.A).add(s.A_tau).add(
        std::to_string(s.quadrature_order));
    max_a = std::max(max_a, max_abs(s.A));
  }
  csv.write(cfg.csv_path);
  TaskResult r;
  r.metrics["samples"] = samples.size();
  r.metrics["max_abs_A"] = max_a;
  return r;
}

TaskResult run_decay(const RunConfig& cfg, const CauchyProblem& problem) {
  const bool flat = cfg.curvature == Curvature::Flat;
  const auto grid = geometric_grid(cfg.decay_tau_min, cfg.decay_tau_max, cfg.decay_count);
  ShellProbeSpec probes;
  probes.directions = cfg.decay_directions;
  probes.offsets = cfg.decay_offsets;
  probes.seed = cfg.seed;
  SolveOptions opts;
  opts.order = cfg.order;
  const DecayModel model_tau = flat ? DecayModel::PowerLaw : DecayModel::Exponential;
  const DecayFit in_tau = fit_decay(problem, grid, probes, model_tau, DecayVariable::ConformalTau, opts);
  const DecayFit in_t =
      refit_decay(in_tau, cfg.curvature, DecayModel::PowerLaw, DecayVariable::CosmologicalT);
  const double expected_tau = -1.0;
  const double expected_t = flat ? -1.0 / 3.0 : -1.0;
  Csv csv({"tau", "t", "max_abs_A", "used"});
  for (std::size_t i = 0; i < in_tau.points.size(); ++i) {
    const auto& p = in_tau.points[i];
    csv.row().add(p.tau).add(in_t.points[i].abscissa).add(p.max_abs).add(p.used ? "1" : "0");
  }
  csv.write(cfg.csv_path);
  TaskResult r;
  const bool pass_tau = std::fabs(in_tau.estimate - expected_tau) <= cfg.decay_tolerance_tau;
  const bool pass_t = std::fabs(in_t.estimate - expected_t) <= cfg.decay_tolerance_t;
  r.metrics["model_tau"] = std::string(to_string(model_tau));
  r.metrics["estimate_tau"] = in_tau.estimate;
  r.metrics["stderr_tau"] = in_tau.stderr_;
  r.metrics["expected_tau"] = expected_tau;
  r.metrics["pass_tau"] = pass_tau;
  r.metrics["model_t"] = std::string(to_string(DecayModel::PowerLaw));
  r.metrics["estimate_t"] = in_t.estimate;
  r.metrics["stderr_t"] = in_t.stderr_;
  r.metrics["expected_t"] = expected_t;
  r.metrics["pass_t"] = pass_t;
  r.metrics["tau_min"] = in_tau.tau_min;
  r.metrics["tau_max"] = in_tau.tau_max;
  r.metrics["samples"] = in_tau.samples;
  r.pass = pass_tau && pass_t;
  return r;
}

TaskResult run_huygens(const RunConfig& cfg, const CauchyProblem& problem) {
  std::vector<SpatialPoint> probes = to_points(cfg);
  if (probes.empty()) probes = huygens_probes(problem, cfg.tau, cfg.huygens_per_region, cfg.seed);
  SolveOptions opts;
  opts.order = cfg.order;
  const SupportMap map = huygens_map(problem, cfg.tau, probes, opts);
  Csv csv({"x", "y", "z", "distance", "region", "magnitude"});
  int counts[3] = {0, 0, 0};
  for (const auto& p : map.probes) {
    csv.row().add(p.point.coords).add(p.distance).add(std::string(to_string(p.region))).add(
        p.magnitude);
    ++counts[static_cast<int>(p.region)];
  }
  csv.write(cfg.csv_path);
  TaskResult r;
  const bool nonvacuous = map.max_on_shell >= kHuygensOnShellFactor * map.c_data;
  r.metrics["tau"] = map.tau;
  r.metrics["r_geo"] = map.r_geo;
  r.metrics["c_data"] = map.c_data;
  r.metrics["inside_probes"] = counts[0];
  r.metrics["shell_probes"] = counts[1];
  r.metrics["outside_probes"] = counts[2];
  r.metrics["max_off_shell"] = map.max_off_shell;
  r.metrics["max_on_shell"] = map.max_on_shell;
  r.metrics["off_shell_vanishes"] = map.off_shell_vanishes;
  r.metrics["on_shell_nonvacuous"] = nonvacuous;
  r.pass = map.off_shell_vanishes && nonvacuous;
  return r;
}

std::vector<SpatialPoint> default_limit_points(const CauchyProblem& problem, const RunConfig& cfg) {
  const GeodesicBall ball = support_or_default(problem, cfg);
  std::vector<SpatialPoint> out{ball.center};
  const auto dirs = seeded_directions(4, cfg.seed);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    out.push_back(exponential_map(ball.center, dirs[i], (i % 2 ? 0.6 : 0.3) * ball.radius));
  }
  return out;
}

TaskResult run_singular_limit(const RunConfig& cfg, const CauchyProblem& problem) {
  std::vector<SpatialPoint> xs = to_points(cfg);
  if (xs.empty()) xs = default_limit_points(problem, cfg);
  SolveOptions opts;
  opts.order = cfg.order;
  const auto taus = halving_sequence(cfg.limit_tau_first, cfg.limit_levels);
  const SingularLimitReport rep = singular_limit_report(problem, xs, taus, opts);
  Csv csv({"tau", "error_A", "error_A_tau"});
  for (const auto& row : rep.rows) csv.row().add(row.tau).add(row.error_A).add(row.error_A_tau);
  csv.write(cfg.csv_path);
  TaskResult r;
  const bool below = rep.final_error_A < cfg.limit_threshold &&
                     rep.final_error_A_tau < cfg.limit_threshold;
  r.metrics["points"] = xs.size();
  r.metrics["final_error_A"] = rep.final_error_A;
  r.metrics["final_error_A_tau"] = rep.final_error_A_tau;
  r.metrics["monotone"] = rep.monotone;
  r.metrics["monotone_tail"] = rep.monotone_tail;
  r.metrics["ratio_tail"] = rep.ratio_tail;
  r.metrics["below_threshold"] = below;
  r.pass = rep.monotone && rep.ratio_tail && below;
  return r;
}

TaskResult run_cross(const RunConfig& cfg, const CauchyProblem& problem) {
  const auto pts = to_points(cfg);
  const SpatialPoint x = pts.empty() ? support_or_default(problem, cfg).center : pts.front();
  SolveOptions opts;
  opts.order = cfg.order;
  const auto grid = symmetric_halving_grid(cfg.cross_tau_first, cfg.cross_levels);
  const CrossSingularityTrace trace = cross_singularity_trace(problem, x, grid, opts);
  Csv csv({"tau", "A1", "A2", "A3", "spliced", "jump", "to_limit", "bound"});
  for (const auto& row : trace.rows) {
    csv.row().add(row.tau).add(row.A).add(row.spliced ? "1" : "0");
    const auto it = std::find_if(trace.jumps.begin(), trace.jumps.end(),
                                 [&](const JumpRow& j) { return j.tau == row.tau; });
    if (it == trace.jumps.end()) {
      csv.blank(3);
    } else {
      csv.add(it->jump).add(it->to_limit).add(it->bound);
    }
  }
  csv.write(cfg.csv_path);
  TaskResult r;
  r.metrics["x"] = vec_json(x.coords);
  r.metrics["max_ratio"] = trace.max_ratio;
  r.metrics["smallest_jump"] = trace.jumps.empty() ? 0.0 : trace.jumps.back().jump;
  r.metrics["jump_ratio_ok"] = trace.jump_ratio_ok;
  r.metrics["within_modulus"] = trace.within_modulus;
  r.pass = trace.jump_ratio_ok && trace.within_modulus;
  return r;
}

OracleOptions oracle_options(const RunConfig& cfg) {
  OracleOptions o;
  o.n = cfg.grid_n;
  o.scheme_order = cfg.grid_scheme_order;
  o.margin_cells = cfg.grid_margin;
  o.quadrature_order = cfg.order;
  o.dump_path = cfg.grid_dump;
  return o;
}

std::vector<SpatialPoint> oracle_points(const RunConfig& cfg, const CauchyProblem& problem) {
  std::vector<SpatialPoint> xs = to_points(cfg);
  if (xs.empty()) xs = oracle_probes(support_or_default(problem, cfg), cfg.tau - cfg.tau0);
  return xs;
}

Json grid_json(const GridSpec& g) {
  Json j;
  j["n"] = g.n;
  j["lo"] = vec_json(g.lo);
  j["dx"] = g.dx;
  j["dt"] = g.dt;
  j["scheme_order"] = g.scheme_order;
  j["mass_shift"] = g.mass_shift;
  return j;
}

TaskResult run_oracle_compare(const RunConfig& cfg, const CauchyProblem& problem) {
  const auto xs = oracle_points(cfg, problem);
  const OracleComparison cmp =
      compare_with_oracle(problem, xs, cfg.tau, cfg.grid_mass_shift, oracle_options(cfg));
  Csv csv({"x", "y", "z", "formula1", "formula2", "formula3", "oracle1", "oracle2", "oracle3",
           "abs_diff"});
  for (const auto& p : cmp.probes) {
    csv.row().add(p.point.coords).add(p.formula).add(p.oracle).add(max_abs(p.formula - p.oracle));
  }
  csv.write(cfg.csv_path);
  TaskResult r;
  r.metrics["relative_linf"] = cmp.relative_linf;
  r.metrics["max_abs_diff"] = cmp.max_abs_diff;
  r.metrics["max_abs_formula"] = cmp.max_abs_formula;
  r.metrics["energy_drift"] = cmp.energy_drift;
  r.metrics["max_amplitude"] = cmp.max_amplitude;
  r.metrics["tolerance"] = cfg.oracle_tolerance;
  r.metrics["grid"] = grid_json(cmp.grid);
  r.pass = cmp.relative_linf <= cfg.oracle_tolerance;
  return r;
}

TaskResult run_identify(const RunConfig& cfg, const CauchyProblem& problem) {
  const auto xs = oracle_points(cfg, problem);
  const PdeReport rep = identify_hyperbolic_pde(problem, xs, cfg.tau, oracle_options(cfg));
  Csv csv({"x", "y", "z", "formula1", "formula2", "formula3", "mass0_1", "mass0_2", "mass0_3",
           "mass1_1", "mass1_2", "mass1_3"});
  for (std::size_t i = 0; i < rep.mass0.probes.size(); ++i) {
    const auto& p = rep.mass0.probes[i];
    csv.row().add(p.point.coords).add(p.formula).add(p.oracle).add(rep.mass1.probes[i].oracle);
  }
  csv.write(cfg.csv_path);
  TaskResult r;
  r.metrics["distance_mass0"] = rep.distance_mass0;
  r.metrics["distance_mass1"] = rep.distance_mass1;
  r.metrics["verdict"] = rep.verdict;
  r.metrics["matching_mass_shift"] = rep.matching_mass_shift;
  r.metrics["match_tolerance"] = kPdeMatchTolerance;
  r.metrics["reject_threshold"] = kPdeRejectThreshold;
  r.metrics["grid"] = grid_json(rep.mass0.grid);
  r.pass = rep.verdict != "inconclusive";
  return r;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const CauchyProblem problem = cfg.problem();
  TaskResult result;
  if (cfg.task == "propagate") {
    result = run_propagate(cfg, problem);
  } else if (cfg.task == "decay") {
    result = run_decay(cfg, problem);
  } else if (cfg.task == "huygens") {
    result = run_huygens(cfg, problem);
  } else if (cfg.task == "singular-limit") {
    result = run_singular_limit(cfg, problem);
  } else if (cfg.task == "cross-singularity") {
    result = run_cross(cfg, problem);
  } else if (cfg.task == "oracle-compare") {
    result = run_oracle_compare(cfg, problem);
  } else if (cfg.task == "identify-pde") {
    result = run_identify(cfg, problem);
  } else {
    throw ConfigError("task: unknown task '" + cfg.task + "'");
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json summary;
  summary["task"] = cfg.task;
  Json config = Json::object();
  for (const auto& [key, value] : cfg.resolved) config[key] = value;
  summary["config"] = config;
  summary["metrics"] = result.metrics;
  summary["pass"] = result.pass;
  summary["wall_time_s"] = cfg.timing ? elapsed : 0.0;
  std::ofstream out(cfg.json_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write JSON '" + cfg.json_path + "'");
  out << summary.dump(2) << "\n";
  out.close();

  log << cfg.task << ": " << (result.pass ? "pass" : "FAIL") << " (csv " << cfg.csv_path
      << ", json " << cfg.json_path << ", " << elapsed << " s)\n";
  return result.pass ? 0 : 2;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Spherical-means propagators for the wave equation on flat and hyperbolic FRW "
               "space-times"};
  std::string task;
  std::string config_path;
  app.add_option("task", task, "propagate | decay | huygens | singular-limit | "
                               "cross-singularity | oracle-compare | identify-pde")
      ->required();
  app.add_option("--config", config_path, "key = value configuration file");
  app.allow_extras();
  app.footer("Any config key can be overridden with --key value or --key=value.\n"
             "FRWMAX_THREADS caps the worker count (0 or unset: hardware concurrency).");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    Config cfg = config_path.empty() ? Config{} : Config::load(config_path);
    const auto extras = app.remaining();
    for (std::size_t i = 0; i < extras.size(); ++i) {
      const std::string& arg = extras[i];
      if (arg.rfind("--", 0) != 0 || arg.size() < 3) {
        throw ConfigError("unexpected argument '" + arg + "' (overrides are --key value)");
      }
      const auto eq = arg.find('=');
      if (eq != std::string::npos) {
        cfg.set(arg.substr(2, eq - 2), arg.substr(eq + 1));
      } else {
        if (i + 1 >= extras.size()) throw ConfigError(arg.substr(2) + ": missing value");
        cfg.set(arg.substr(2), extras[++i]);
      }
    }
    const RunConfig rc = resolve_config(task, cfg);
    return run(rc, std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "frwmax: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "frwmax: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace frwmax
