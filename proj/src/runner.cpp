#include "hocp/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "hocp/experiments.hpp"

namespace hocp {

namespace fs = std::filesystem;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw config_error(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw config_error(where + ": unknown key '" + key + "'");
  }
}

std::string path_of(const std::string& where, const char* key) {
  return where.empty() ? std::string(key) : where + "." + key;
}

double get_double(const json& j, const char* key, double def, const std::string& where) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number()) throw config_error(path_of(where, key) + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw config_error(path_of(where, key) + " must be finite");
  return d;
}

int get_int(const json& j, const char* key, int def, const std::string& where) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw config_error(path_of(where, key) + " must be an integer");
  return v.get<int>();
}

std::uint64_t get_u64(const json& j, const char* key, std::uint64_t def, const std::string& where) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
    throw config_error(path_of(where, key) + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

bool get_bool(const json& j, const char* key, bool def, const std::string& where) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw config_error(path_of(where, key) + " must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& def, const std::string& where) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_string()) throw config_error(path_of(where, key) + " must be a string");
  return v.get<std::string>();
}

std::vector<double> get_doubles(const json& v, const std::string& where) {
  if (!v.is_array()) throw config_error(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) throw config_error(where + " must hold finite numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

int problem_dim(const ProblemSpec& p) {
  if (p.name == "fig1") return 1;
  if (p.name == "halfhalf") return 8;
  return p.n;
}

int problem_max_order(const std::string& name) {
  if (name == "maxeig" || name == "halfhalf") return 2;
  return 6;
}

std::string resolve_path(const std::string& file, const std::string& base_dir) {
  if (file.empty()) return file;
  const fs::path p(file);
  return p.is_absolute() ? file : (fs::path(base_dir) / p).string();
}

ProblemSpec parse_problem(const json& j, const std::string& base_dir) {
  check_keys(j, {"name", "n", "m", "seed", "instance_file"}, "problem");
  ProblemSpec p;
  p.name = get_string(j, "name", "", "problem");
  static const std::set<std::string> known{"maxroot", "fig1", "sumabs", "maxeig", "halfhalf"};
  if (!known.count(p.name))
    throw config_error("problem.name: unknown problem '" + p.name + "' (see list-problems)");
  p.n = get_int(j, "n", p.name == "sumabs" ? 10 : 1, "problem");
  p.m = get_int(j, "m", p.name == "sumabs" ? 8 : 0, "problem");
  p.seed = get_u64(j, "seed", 0, "problem");
  p.instance_file = resolve_path(get_string(j, "instance_file", "", "problem"), base_dir);
  if (!p.instance_file.empty()) {
    if (p.name != "sumabs" && p.name != "maxeig")
      throw config_error("problem.instance_file is only meaningful for sumabs and maxeig");
    const json inst = read_json_file(p.instance_file);
    if (!inst.is_object() || !inst.contains("n") || !inst.contains("m") || !inst.contains("seed"))
      throw config_error("instance file '" + p.instance_file + "' lacks seed/n/m");
    if (inst.value("problem", p.name) != p.name)
      throw config_error("instance file '" + p.instance_file + "' is not a " + p.name + " instance");
    p.n = inst.at("n").get<int>();
    p.m = inst.at("m").get<int>();
    p.seed = inst.at("seed").get<std::uint64_t>();
  }
  if (p.n < 1) throw config_error("problem.n must be at least 1");
  if (p.name == "sumabs" && p.m < 1) throw config_error("problem.m must be at least 1 for sumabs");
  if (p.name == "sumabs" && p.m > 20) throw config_error("problem.m > 20 gives more than 2^20 selection functions");
  if (p.name == "maxeig" && p.m < 1) throw config_error("problem.m must be at least 1 for maxeig");
  return p;
}

std::vector<double> parse_start(const json& v, int n) {
  std::vector<double> x;
  if (v.is_number()) {
    x.assign(static_cast<std::size_t>(n), v.get<double>());
  } else if (v.is_array()) {
    x = get_doubles(v, "x1");
  } else if (v.is_object()) {
    check_keys(v, {"fill", "linspace"}, "x1");
    if (v.contains("fill") == v.contains("linspace")) throw config_error("x1 needs exactly one of fill or linspace");
    if (v.contains("fill")) {
      x.assign(static_cast<std::size_t>(n), get_double(v, "fill", 0, "x1"));
    } else {
      const auto ab = get_doubles(v.at("linspace"), "x1.linspace");
      if (ab.size() != 2) throw config_error("x1.linspace must be [first, last]");
      for (int i = 0; i < n; ++i) x.push_back(n == 1 ? ab[0] : ab[0] + (ab[1] - ab[0]) * i / (n - 1));
    }
  } else {
    throw config_error("x1 must be a number, an array or {fill|linspace}");
  }
  if (static_cast<int>(x.size()) != n)
    throw config_error("x1 has " + std::to_string(x.size()) + " entries, problem dimension is " + std::to_string(n));
  for (double v2 : x)
    if (!std::isfinite(v2)) throw config_error("x1 must be finite");
  return x;
}

SolverStrategy effective_strategy(SolverStrategy s, int n, int q, Norm norm) {
  if (s != SolverStrategy::Auto) return s;
  if (n == 1) return SolverStrategy::Exact1D;
  if (q <= 1 && norm == Norm::Max) return SolverStrategy::LP;
  return SolverStrategy::Smoothed;
}

template <class Scalar>
Scalar from_config(double v) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return v;
  } else {
    // Shortest decimal text, so 0.1 in a config means one tenth.
    return Scalar(format_scalar(v));
  }
}

template <class Scalar>
Vec<Scalar> start_point(const RunConfig& cfg) {
  Vec<Scalar> x(static_cast<Eigen::Index>(cfg.x1.size()));
  for (std::size_t i = 0; i < cfg.x1.size(); ++i) x[static_cast<Eigen::Index>(i)] = from_config<Scalar>(cfg.x1[i]);
  return x;
}

template <class Scalar>
EpsSchedule<Scalar> schedule_of(const RunConfig& cfg) {
  EpsSchedule<Scalar> s;
  s.eps1 = from_config<Scalar>(cfg.eps1);
  s.kappa = from_config<Scalar>(cfg.kappa);
  s.sigma = from_config<Scalar>(cfg.sigma);
  s.q = cfg.q;
  s.p = cfg.p;
  return s;
}

LocalOptions local_options(const RunConfig& cfg) {
  LocalOptions o;
  o.strategy = cfg.solver;
  o.solver = cfg.solver_options;
  o.init = cfg.init;
  o.limits = cfg.limits;
  o.norm = cfg.norm;
  o.stop_on_active_trust_region = cfg.stop_on_active_trust_region;
  o.abort_on_degraded = cfg.abort_on_degraded;
  o.max_iter = cfg.max_iter;
  o.seed = cfg.seed;
  return o;
}

ProblemPtr<double> make_problem(const ProblemSpec& p) {
  if (p.name == "maxroot") return problem_maxroot(p.n);
  if (p.name == "fig1") return problem_fig1();
  if (p.name == "halfhalf") return problem_halfhalf();
  if (p.name == "sumabs")
    return problem_sumabs(p.instance_file.empty() ? generate_sumabs_instance(p.seed, p.n, p.m)
                                                  : sumabs_from_json(read_json_file(p.instance_file)));
  return problem_maxeig(p.instance_file.empty() ? generate_maxeig_instance(p.seed, p.n, p.m)
                                                : maxeig_from_json(read_json_file(p.instance_file)));
}

ProblemPtr<bigfloat> make_problem_big(const ProblemSpec& p) {
  if (p.name == "maxroot") return std::make_shared<MaxRootProblem<bigfloat>>(p.n);
  return std::make_shared<Fig1Problem<bigfloat>>();
}

json report_to_json(const RateReport& r) {
  json j;
  j["j0"] = r.j0;
  j["violations"] = r.violations;
  j["log_distances"] = r.log_distances;
  j["order_slope"] = r.order_slope ? json(*r.order_slope) : json(nullptr);
  j["tail_order_slope"] = r.tail_order_slope ? json(*r.tail_order_slope) : json(nullptr);
  j["loglog_slope"] = r.loglog_slope ? json(*r.loglog_slope) : json(nullptr);
  j["schedule_log_q"] = r.schedule_log_q;
  j["step_ratios"] = r.step_ratios;
  return j;
}

template <class Scalar>
json point_json(const Vec<Scalar>& x) {
  json a = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if constexpr (std::is_same_v<Scalar, double>) a.push_back(x[i]);
    else a.push_back(format_scalar(x[i]));
  }
  return a;
}

template <class Scalar>
json scalar_json(const Scalar& v) {
  if constexpr (std::is_same_v<Scalar, double>) return std::isfinite(v) ? json(v) : json(nullptr);
  else return format_scalar(v);
}

/// Summary fields shared by local runs and the local phase of global runs.
template <class Scalar>
void describe_local(json& s, const Problem<Scalar>& problem, const LocalRunResult<Scalar>& r,
                    const EpsSchedule<Scalar>& sched, Norm norm) {
  s["iterations"] = r.trace.size();
  s["total_oracle_calls"] = r.total_oracle_calls;
  s["total_objective_evals"] = r.total_objective_evals;
  s["final_f"] = scalar_json(r.final_value());
  s["final_eps"] = scalar_json(r.final_eps);
  s["final_point"] = point_json(r.final_point());
  const auto fd = distance_to_minimizer(problem, r.final_point(), norm);
  s["final_dist"] = fd ? scalar_json(*fd) : json(nullptr);
  s["degraded_solves"] = r.degraded_solves;
  s["max_inner_hits"] = r.max_inner_hits;
  s["stagnations"] = r.stagnations;
  s["max_inner_iterations"] = r.max_inner_iterations;
  if (r.q_below_p) s["warnings"].push_back("q < p: the superlinear guarantee does not apply");

  std::vector<Scalar> dists;
  for (const auto& row : r.trace)
    if (row.dist) dists.push_back(*row.dist);
  int j0 = 1;
  if (dists.size() == r.trace.size() && !dists.empty()) {
    try {
      const RateReport rep = estimate_r_order(dists, sched);
      s["rate_report"] = report_to_json(rep);
      j0 = rep.j0;
    } catch (const precondition_error& e) {
      s["rate_report"] = nullptr;
      s["rate_report_note"] = e.what();
    }
  } else {
    s["rate_report"] = nullptr;
    s["rate_report_note"] = "minimizer unknown";
  }
  if (r.termination == Termination::EpsThreshold && !r.trace.empty()) {
    const CauchyReport c = cauchy_envelope(r, sched, norm, j0);
    s["cauchy"] = {{"constant", c.constant}, {"j0", c.j0}, {"max_ratio", c.max_ratio},
                   {"violations", c.violations}, {"ok", c.ok}};
  }
}

template <class Scalar>
RunOutcome execute_typed(const RunConfig& cfg, const Problem<Scalar>& problem) {
  RunOutcome out;
  json& s = out.summary;
  s["warnings"] = json::array();
  const EpsSchedule<Scalar> sched = schedule_of<Scalar>(cfg);
  Scalar thr = from_config<Scalar>(cfg.eps_thr);
  if constexpr (!std::is_same_v<Scalar, double>)
    if (!cfg.eps_thr_text.empty()) thr = Scalar(cfg.eps_thr_text);
  const Vec<Scalar> x1 = start_point<Scalar>(cfg);
  const LocalOptions lo = local_options(cfg);
  std::ostringstream csv;

  if (cfg.method == "local") {
    const auto r = run_local(problem, x1, sched, thr, lo);
    s["status"] = to_string(r.termination);
    out.exit_code = exit_code_for(r.termination);
    describe_local(s, problem, r, sched, cfg.norm);
    write_trace_csv(csv, r.trace);
  } else {
    const auto g = run_global(problem, x1, cfg.global, sched, thr, lo);
    s["status"] = to_string(g.termination);
    out.exit_code = exit_code_for(g.termination);
    s["outer_iterations"] = g.outer_iterations;
    s["lambda_history"] = g.lambda_history;
    json att = json::array();
    for (const auto& a : g.attempts)
      att.push_back({{"outer", a.outer},
                     {"delta", a.delta},
                     {"termination", to_string(a.termination)},
                     {"iterations", a.iterations},
                     {"successful", a.successful},
                     {"adopted", a.adopted}});
    s["attempts"] = att;
    if (g.local) {
      EpsSchedule<Scalar> ls = sched;
      ls.eps1 = Scalar(g.attempts.back().delta);
      json local;
      local["status"] = to_string(g.local->termination);
      describe_local(local, problem, *g.local, ls, cfg.norm);
      s["local"] = local;
      write_trace_csv(csv, g.local->trace);
    } else {
      write_trace_csv(csv, std::vector<TraceRow<Scalar>>{});
    }
    s["total_oracle_calls"] = g.total_oracle_calls;
    s["total_objective_evals"] = g.total_objective_evals;
    s["final_f"] = scalar_json(g.f);
    s["final_point"] = point_json(g.x);
    const auto fd = distance_to_minimizer(problem, g.x, cfg.norm);
    s["final_dist"] = fd ? scalar_json(*fd) : json(nullptr);
  }
  out.csv = csv.str();
  return out;
}

RunOutcome execute_model(const RunConfig& cfg, const Problem<double>& problem) {
  RunOutcome out;
  const auto rows = model_export(problem, cfg.model.centers, cfg.q, cfg.model.lo, cfg.model.hi, cfg.model.points);
  std::ostringstream csv;
  csv << "z,model,f,active_cut\n";
  for (const auto& r : rows)
    csv << format_scalar(r.z) << ',' << format_scalar(r.model) << ',' << format_scalar(r.f) << ',' << r.active_cut
        << '\n';
  out.csv = csv.str();
  const TrustRegion<double> tr(VecD::Constant(1, 0.5 * (cfg.model.lo + cfg.model.hi)),
                               0.5 * (cfg.model.hi - cfg.model.lo));
  Bundle<double> w(tr);
  for (double c : cfg.model.centers) w.add(Cut<double>(problem.oracle(VecD::Constant(1, c), cfg.q)));
  out.summary["status"] = "Exported";
  out.summary["samples"] = rows.size();
  out.summary["bundle"] = bundle_to_json(w);
  out.exit_code = 0;
  return out;
}

RunOutcome execute_remainder(const RunConfig& cfg, const Problem<double>& problem) {
  RunOutcome out;
  const double c = std::isnan(cfg.remainder.center) ? fig1_kink() : cfg.remainder.center;
  VecD x = VecD::Constant(problem.dim(), c);
  if (!cfg.x1.empty() && !std::isnan(cfg.remainder.center)) x = VecD::Map(cfg.x1.data(), problem.dim());
  const auto sweep = remainder_sweep(problem, x, cfg.remainder.q_values, cfg.remainder.eps_values,
                                     cfg.remainder.grid_points, cfg.remainder.samples, cfg.seed);
  std::ostringstream csv;
  csv << "q,eps,probe\n";
  for (const auto& p : sweep.points)
    csv << p.q << ',' << format_scalar(p.eps) << ',' << format_scalar(p.probe) << '\n';
  out.csv = csv.str();
  json slopes = json::object();
  for (const auto& [q, sl] : sweep.slope) slopes[std::to_string(q)] = sl;
  out.summary["status"] = "Measured";
  out.summary["center"] = point_json(x);
  out.summary["slopes"] = slopes;
  out.exit_code = 0;
  return out;
}

}  // namespace

int exit_code_for(Termination t) {
  return t == Termination::EpsThreshold || t == Termination::Converged ? 0 : 2;
}

RunConfig parse_run_config(const json& j, const std::string& base_dir) {
  check_keys(j, {"problem", "method", "q", "p", "sigma", "kappa", "eps1", "eps_thr", "max_iter", "x1", "solver",
                 "solver_options", "init", "random_count", "norm", "stop_on_active_trust_region",
                 "abort_on_degraded", "max_inner", "noise_floor", "scalar", "bits", "seed", "global", "model",
                 "remainder", "output", "description"},
             "config");
  RunConfig c;
  c.raw = j;
  if (!j.contains("problem")) throw config_error("config: missing 'problem'");
  c.problem = parse_problem(j.at("problem"), base_dir);
  c.method = get_string(j, "method", "local", "");
  static const std::set<std::string> methods{"local", "global", "model", "remainder"};
  if (!methods.count(c.method)) throw config_error("method must be local, global, model or remainder");
  c.q = get_int(j, "q", 1, "");
  c.p = get_int(j, "p", 1, "");
  c.sigma = get_double(j, "sigma", 0.5, "");
  c.kappa = get_double(j, "kappa", 0.75, "");
  c.eps1 = get_double(j, "eps1", 0.5, "");
  if (j.contains("eps_thr") && j.at("eps_thr").is_string()) {
    // Decimal text for thresholds below the binary64 range (bigfloat only).
    c.eps_thr_text = j.at("eps_thr").get<std::string>();
    static const std::regex decimal(R"(\d*\.?\d+([eE][-+]?\d+)?)");
    if (!std::regex_match(c.eps_thr_text, decimal)) throw config_error("eps_thr must be a number or a decimal string");
    if (c.eps_thr_text.find_first_of("123456789") >= c.eps_thr_text.find_first_of("eE"))
      throw config_error("eps_thr must be positive");
    c.eps_thr = std::max(std::strtod(c.eps_thr_text.c_str(), nullptr), std::numeric_limits<double>::denorm_min());
  } else {
    c.eps_thr = get_double(j, "eps_thr", 1e-6, "");
  }
  c.max_iter = get_int(j, "max_iter", 200, "");
  c.seed = get_u64(j, "seed", 0, "");
  c.output = get_string(j, "output", "", "");
  if (c.output.empty()) throw config_error("config: 'output' (path prefix) is required");

  const int n = problem_dim(c.problem);
  const int max_q = problem_max_order(c.problem.name);
  if (c.q < 1 || c.q > max_q)
    throw config_error("q must lie in [1, " + std::to_string(max_q) + "] for " + c.problem.name);
  if (c.p < 1) throw config_error("p must be at least 1");
  if (!(c.sigma > 0 && c.sigma < 1)) throw config_error("sigma must lie in (0,1)");
  if (!(c.kappa > 0 && c.kappa < 1)) throw config_error("kappa must lie in (0,1)");
  if (!((c.q + c.sigma) / c.p > 1)) throw config_error("(q + sigma) / p must exceed 1");
  if (!(c.eps1 > 0)) throw config_error("eps1 must be positive");
  if (!(c.eps_thr > 0)) throw config_error("eps_thr must be positive");
  if (c.max_iter < 1) throw config_error("max_iter must be at least 1");

  const std::string norm = get_string(j, "norm", "euclidean", "");
  if (norm == "euclidean") c.norm = Norm::Euclidean;
  else if (norm == "max") c.norm = Norm::Max;
  else throw config_error("norm must be euclidean or max");
  c.solver = parse_solver_strategy(get_string(j, "solver", "auto", ""));
  c.init.strategy = parse_init_strategy(get_string(j, "init", "singleton", ""));
  c.init.random_count = get_int(j, "random_count", 1, "");
  if (c.init.random_count < 1) throw config_error("random_count must be at least 1");
  c.stop_on_active_trust_region = get_bool(j, "stop_on_active_trust_region", false, "");
  c.abort_on_degraded = get_bool(j, "abort_on_degraded", false, "");
  c.limits.max_inner = get_int(j, "max_inner", 0, "");
  c.limits.noise_floor = get_double(j, "noise_floor", 64, "");
  if (c.limits.noise_floor < 0) throw config_error("noise_floor must be non-negative");

  if (j.contains("solver_options")) {
    const json& so = j.at("solver_options");
    const std::string w = "solver_options";
    check_keys(so, {"tol", "root_tol", "tol_bnd", "tol_act", "n_rand", "max_stages", "homotopy_factor", "max_newton"},
               w);
    auto& o = c.solver_options;
    o.tol = get_double(so, "tol", o.tol, w);
    o.root_tol = get_double(so, "root_tol", o.root_tol, w);
    o.tol_bnd = get_double(so, "tol_bnd", o.tol_bnd, w);
    o.tol_act = get_double(so, "tol_act", o.tol_act, w);
    o.n_rand = get_int(so, "n_rand", o.n_rand, w);
    o.max_stages = get_int(so, "max_stages", o.max_stages, w);
    o.homotopy_factor = get_double(so, "homotopy_factor", o.homotopy_factor, w);
    o.max_newton = get_int(so, "max_newton", o.max_newton, w);
    if (!(o.tol > 0) || o.root_tol < 0 || o.tol_bnd < 0 || o.tol_act < 0)
      throw config_error("solver_options: tolerances must be non-negative (tol positive)");
    if (o.max_stages < 1 || !(o.homotopy_factor > 1) || o.max_newton < 1)
      throw config_error("solver_options: max_stages, max_newton >= 1 and homotopy_factor > 1 required");
  }

  c.scalar = get_string(j, "scalar", "binary64", "");
  if (c.scalar != "binary64" && c.scalar != "bigfloat") throw config_error("scalar must be binary64 or bigfloat");
  const int bits = get_int(j, "bits", 512, "");
  if (bits < 53 || bits > 1 << 20) throw config_error("bits must lie in [53, 2^20]");
  c.bits = static_cast<unsigned>(bits);
  if (!c.eps_thr_text.empty() && c.scalar != "bigfloat")
    throw config_error("a decimal-string eps_thr needs scalar bigfloat");

  if (c.method == "local" || c.method == "global") {
    if (!j.contains("x1")) throw config_error("config: missing 'x1'");
    c.x1 = parse_start(j.at("x1"), n);
    const SolverStrategy s = effective_strategy(c.solver, n, c.q, c.norm);
    if (s == SolverStrategy::Exact1D && n != 1) throw config_error("solver exact1d needs a one-dimensional problem");
    if (s == SolverStrategy::LP && c.q != 1) throw config_error("solver lp needs q = 1");
    if (s == SolverStrategy::LP && c.norm != Norm::Max) throw config_error("solver lp needs norm = max");
    if (s == SolverStrategy::Smoothed && c.norm != Norm::Euclidean)
      throw config_error("solver smoothed needs norm = euclidean");
    if (c.scalar == "bigfloat") {
      if (c.problem.name != "maxroot" && c.problem.name != "fig1")
        throw config_error("scalar bigfloat is available for maxroot and fig1 only");
      if (s != SolverStrategy::Exact1D) throw config_error("scalar bigfloat needs the exact1d solver");
    }
  } else if (c.scalar == "bigfloat") {
    throw config_error("scalar bigfloat is available for local and global runs only");
  }

  if (c.method == "global") {
    const json g = j.value("global", json::object());
    const std::string w = "global";
    check_keys(g, {"delta1", "delta_shrink", "tau1", "tau_shrink", "max_outer", "max_descent_steps", "local_budget"},
               w);
    auto& gc = c.global;
    gc.delta1 = get_double(g, "delta1", gc.delta1, w);
    gc.delta_shrink = get_double(g, "delta_shrink", gc.delta_shrink, w);
    gc.tau1 = get_double(g, "tau1", gc.tau1, w);
    gc.tau_shrink = get_double(g, "tau_shrink", gc.tau_shrink, w);
    gc.max_outer = get_int(g, "max_outer", gc.max_outer, w);
    gc.max_descent_steps = get_int(g, "max_descent_steps", gc.max_descent_steps, w);
    gc.local_budget = get_int(g, "local_budget", gc.local_budget, w);
    gc.p = c.p;
    try {
      gc.validate();
    } catch (const precondition_error& e) {
      throw config_error(e.what());
    }
  } else if (j.contains("global")) {
    throw config_error("'global' is only used with method global");
  }

  if (c.method == "model") {
    if (n != 1) throw config_error("method model needs a one-dimensional problem");
    if (!j.contains("model")) throw config_error("method model needs a 'model' section");
    const json& m = j.at("model");
    check_keys(m, {"centers", "lo", "hi", "points"}, "model");
    if (!m.contains("centers")) throw config_error("model.centers is required");
    c.model.centers = get_doubles(m.at("centers"), "model.centers");
    c.model.lo = get_double(m, "lo", c.model.lo, "model");
    c.model.hi = get_double(m, "hi", c.model.hi, "model");
    c.model.points = get_int(m, "points", c.model.points, "model");
    if (c.model.centers.empty()) throw config_error("model.centers must not be empty");
    if (!(c.model.hi > c.model.lo) || c.model.points < 2) throw config_error("model: need hi > lo and points >= 2");
    for (double z : c.model.centers)
      if (z < c.model.lo || z > c.model.hi) throw config_error("model.centers must lie in [lo, hi]");
    for (std::size_t a = 0; a < c.model.centers.size(); ++a)
      for (std::size_t b = a + 1; b < c.model.centers.size(); ++b)
        if (c.model.centers[a] == c.model.centers[b]) throw config_error("model.centers must be distinct");
  }

  if (c.method == "remainder") {
    const json r = j.value("remainder", json::object());
    const std::string w = "remainder";
    check_keys(r, {"q_values", "eps_values", "center", "grid_points", "samples"}, w);
    if (r.contains("q_values")) {
      c.remainder.q_values.clear();
      for (double v : get_doubles(r.at("q_values"), "remainder.q_values")) {
        if (v != std::floor(v) || v < 1 || v > max_q)
          throw config_error("remainder.q_values must be integers in [1, " + std::to_string(max_q) + "]");
        c.remainder.q_values.push_back(static_cast<int>(v));
      }
    }
    if (r.contains("eps_values")) c.remainder.eps_values = get_doubles(r.at("eps_values"), "remainder.eps_values");
    if (r.contains("center")) {
      if (r.at("center").is_string() && r.at("center").get<std::string>() == "kink") {
        if (c.problem.name != "fig1") throw config_error("remainder.center 'kink' needs problem fig1");
      } else {
        c.remainder.center = get_double(r, "center", 0, w);
      }
    } else if (c.problem.name != "fig1") {
      throw config_error("remainder.center is required unless the problem is fig1");
    }
    c.remainder.grid_points = get_int(r, "grid_points", c.remainder.grid_points, w);
    c.remainder.samples = get_int(r, "samples", c.remainder.samples, w);
    if (c.remainder.q_values.empty() || c.remainder.eps_values.size() < 2)
      throw config_error("remainder: need q_values and two or more eps_values");
    for (double e : c.remainder.eps_values)
      if (!(e > 0)) throw config_error("remainder.eps_values must be positive");
    if (c.remainder.grid_points < 2 || c.remainder.samples < 1)
      throw config_error("remainder: grid_points >= 2 and samples >= 1 required");
    if (std::pow(static_cast<double>(c.remainder.grid_points), n) > 1e5)
      throw config_error("remainder: grid_points^n exceeds 1e5 cuts");
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  const json j = read_json_file(path);
  const fs::path parent = fs::path(path).parent_path();
  return parse_run_config(j, parent.empty() ? "." : parent.string());
}

RunOutcome execute_run(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutcome out;
  if (cfg.method == "model" || cfg.method == "remainder") {
    const auto problem = make_problem(cfg.problem);
    out = cfg.method == "model" ? execute_model(cfg, *problem) : execute_remainder(cfg, *problem);
  } else if (cfg.scalar == "bigfloat") {
    set_bigfloat_bits(cfg.bits);
    const auto problem = make_problem_big(cfg.problem);
    out = execute_typed<bigfloat>(cfg, *problem);
  } else {
    const auto problem = make_problem(cfg.problem);
    out = execute_typed<double>(cfg, *problem);
  }
  out.summary["method"] = cfg.method;
  out.summary["problem"] = cfg.problem.name;
  out.summary["scalar"] = cfg.scalar == "bigfloat" ? "bigfloat(" + std::to_string(cfg.bits) + ")" : "binary64";
  out.summary["exit_code"] = out.exit_code;
  out.summary["config"] = cfg.raw;
  out.summary["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void write_outcome(const RunConfig& cfg, const RunOutcome& out) {
  const fs::path prefix(cfg.output);
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  write_text_file(cfg.output + ".csv", out.csv);
  write_text_file(cfg.output + ".json", out.summary.dump(2) + "\n");
}

json apply_overrides(json base, const json& overrides) {
  if (!overrides.is_object()) throw config_error("grid point must be a JSON object");
  for (const auto& [path, value] : overrides.items()) {
    json* node = &base;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    if (parts.empty()) throw config_error("empty override path");
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->is_object()) throw config_error("override path '" + path + "' crosses a non-object");
      node = &(*node)[parts[i]];
      if (node->is_null()) *node = json::object();
    }
    if (!node->is_object()) throw config_error("override path '" + path + "' crosses a non-object");
    (*node)[parts.back()] = value;
  }
  return base;
}

std::vector<json> expand_grid(const json& grid) {
  if (!grid.is_object()) throw config_error("grid must be a JSON object");
  std::vector<json> points;
  if (grid.contains("points")) {
    if (grid.size() != 1) throw config_error("grid: 'points' cannot be combined with axes");
    if (!grid.at("points").is_array()) throw config_error("grid.points must be an array");
    for (const auto& p : grid.at("points")) {
      if (!p.is_object()) throw config_error("grid.points entries must be objects");
      points.push_back(p);
    }
  } else {
    points.push_back(json::object());
    for (const auto& [key, values] : grid.items()) {
      if (!values.is_array() || values.empty()) throw config_error("grid axis '" + key + "' must be a nonempty array");
      std::vector<json> next;
      for (const auto& p : points)
        for (const auto& v : values) {
          json q = p;
          q[key] = v;
          next.push_back(q);
        }
      points = std::move(next);
    }
    if (grid.empty()) points.clear();
  }
  if (points.empty()) throw config_error("grid is empty");
  return points;
}

std::string grid_label(const json& point) {
  std::string label;
  for (const auto& [key, value] : point.items()) {
    if (!label.empty()) label += '_';
    std::string v = value.is_string() ? value.get<std::string>() : value.dump();
    for (char& ch : v)
      if (ch == '/' || ch == ' ' || ch == '"' || ch == ',' || ch == '[' || ch == ']' || ch == '{' || ch == '}' ||
          ch == ':')
        ch = '-';
    label += key + "=" + v;
  }
  return label;
}

int thread_cap() {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HOCP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) cap = static_cast<int>(std::min<long>(v, 1024));
  }
  return std::max(cap, 1);
}

SweepOutcome run_sweep(const json& base, const json& grid, const std::string& base_dir, int threads) {
  const auto points = expand_grid(grid);
  const std::string prefix = base.value("output", std::string());
  if (prefix.empty()) throw config_error("template: 'output' (path prefix) is required");

  // Validate everything before running anything.
  std::vector<RunConfig> configs;
  std::set<unsigned> bits;
  std::set<std::string> outputs;
  for (const auto& p : points) {
    json cj = apply_overrides(base, p);
    cj["output"] = prefix + "_" + grid_label(p);
    configs.push_back(parse_run_config(cj, base_dir));
    if (configs.back().scalar == "bigfloat") bits.insert(configs.back().bits);
    if (!outputs.insert(configs.back().output).second) throw config_error("grid produces duplicate point labels");
  }
  // The bigfloat precision is a process-wide setting.
  if (bits.size() > 1) threads = 1;
  if (bits.size() == 1) set_bigfloat_bits(*bits.begin());

  SweepOutcome out;
  out.points.resize(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      SweepPointResult& r = out.points[i];
      r.label = grid_label(points[i]);
      try {
        const RunOutcome o = execute_run(configs[i]);
        write_outcome(configs[i], o);
        r.exit_code = o.exit_code;
        r.summary = o.summary;
      } catch (const std::exception& e) {
        r.exit_code = 2;
        r.error = e.what();
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(points.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  json table = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& r = out.points[i];
    json row{{"label", r.label}, {"overrides", points[i]}, {"exit_code", r.exit_code}, {"output", configs[i].output}};
    if (!r.error.empty()) row["error"] = r.error;
    if (r.summary.contains("status")) row["status"] = r.summary["status"];
    for (const char* key : {"iterations", "total_oracle_calls", "final_dist", "slopes"})
      if (r.summary.contains(key)) row[key] = r.summary[key];
    if (r.summary.contains("rate_report") && r.summary["rate_report"].is_object())
      row["j0"] = r.summary["rate_report"]["j0"];
    table.push_back(row);
    if (r.exit_code != 0) out.exit_code = 2;
  }
  out.summary = {{"points", table}, {"threads", nthreads}, {"exit_code", out.exit_code}};
  const fs::path pp(prefix);
  if (pp.has_parent_path()) fs::create_directories(pp.parent_path());
  write_text_file(prefix + "_sweep.json", out.summary.dump(2) + "\n");
  return out;
}

json list_problems() {
  json a = json::array();
  a.push_back({{"name", "maxroot"}, {"dim", "n"}, {"max_q", 6}, {"minimizer", "0"}, {"bigfloat", true},
               {"about", "max_i sqrt(|x_i| + 1/4) - 1/2"}});
  a.push_back({{"name", "fig1"}, {"dim", 1}, {"max_q", 6}, {"minimizer", "none recorded"}, {"bigfloat", true},
               {"about", "three-branch one-dimensional demo function"}});
  a.push_back({{"name", "sumabs"}, {"dim", "n"}, {"max_q", 6}, {"minimizer", "0"}, {"bigfloat", false},
               {"about", "sum_i |g_i^T x + x^T H_i x / 2 + c_i |x|^4 / 24| with random data (seed, n, m)"}});
  a.push_back({{"name", "maxeig"}, {"dim", "n"}, {"max_q", 2}, {"minimizer", "stored reference point"},
               {"bigfloat", false}, {"about", "largest eigenvalue of A_0 + sum_i x_i A_i (seed, n, m)"}});
  a.push_back({{"name", "halfhalf"}, {"dim", 8}, {"max_q", 2}, {"minimizer", "0"}, {"bigfloat", false},
               {"about", "sqrt(x^T A x) + x^T B x"}});
  return a;
}

}  // namespace hocp
