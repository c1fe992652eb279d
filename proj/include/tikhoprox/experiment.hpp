#pragma once

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tikhoprox/analysis.hpp"
#include "tikhoprox/csv.hpp"
#include "tikhoprox/dynamics.hpp"
#include "tikhoprox/problems.hpp"
#include "tikhoprox/schedule.hpp"
#include "tikhoprox/solver.hpp"
#include "tikhoprox/svg.hpp"

namespace tikhoprox {

// Flat key=value experiment specs with [section] headers. Grammar (see the
// README for the full description):
//   [problem]    id = l1box_quad | logbarrier_quad | quad_nd, plus parameters
//   [algorithm]  id = tikhoprox | laszlo | ppa, plus parameters
//   [system]     id = flow | tral | trae | trisal | trisae | trisg | trish
//   [run]        horizon and initial state
// '#' and ';' start comments; keys may not repeat within a section.

struct SpecError : ConfigError {
  int line, col;
  SpecError(const std::string& msg, int line_, int col_)
      : ConfigError("line " + std::to_string(line_) + ", column " +
                    std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
};

struct SpecEntry {
  std::string key, value;
  int line = 0;
};

struct SpecSection {
  std::string name;
  std::vector<SpecEntry> entries;
  int line = 0;

  const SpecEntry* find(const std::string& key) const {
    for (const auto& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  }
  std::string get(const std::string& key) const {
    const SpecEntry* e = find(key);
    if (!e)
      throw ConfigError("missing key '" + key + "' in [" + name + "]");
    return e->value;
  }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    const SpecEntry* e = find(key);
    return e ? e->value : fallback;
  }
  double get_num(const std::string& key) const { return parse_double(get(key)); }
  double get_num_or(const std::string& key, double fallback) const {
    const SpecEntry* e = find(key);
    return e ? parse_double(e->value) : fallback;
  }
  // Errors on keys outside the allowed set; catches typos at parse level.
  void restrict_keys(const std::vector<std::string>& allowed) const {
    for (const auto& e : entries) {
      bool ok = false;
      for (const auto& a : allowed)
        if (e.key == a) ok = true;
      if (!ok)
        throw SpecError("unknown key '" + e.key + "' in [" + name + "]",
                        e.line, 1);
    }
  }
};

struct SpecFile {
  std::string name;  // file stem; names the outputs
  std::vector<SpecSection> sections;

  const SpecSection* find(const std::string& name_) const {
    for (const auto& s : sections)
      if (s.name == name_) return &s;
    return nullptr;
  }
};

inline SpecFile parse_spec(std::istream& in, const std::string& name) {
  SpecFile file;
  file.name = name;
  std::string raw;
  int lineno = 0;
  SpecSection* cur = nullptr;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto pos = line.find_first_of("#;"); pos != std::string::npos)
      line.erase(pos);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);

    if (line.front() == '[') {
      if (line.back() != ']')
        throw SpecError("section header is missing ']'", lineno,
                        int(b) + int(line.size()));
      std::string sec = line.substr(1, line.size() - 2);
      if (sec.empty()) throw SpecError("empty section name", lineno, int(b) + 1);
      if (file.find(sec))
        throw SpecError("duplicate section [" + sec + "]", lineno, int(b) + 1);
      file.sections.push_back({sec, {}, lineno});
      cur = &file.sections.back();
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SpecError("expected key = value", lineno, int(b) + 1);
    if (!cur)
      throw SpecError("key = value before any [section]", lineno, int(b) + 1);
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto ke = key.find_last_not_of(" \t");
    key = ke == std::string::npos ? "" : key.substr(0, ke + 1);
    auto vb = val.find_first_not_of(" \t");
    val = vb == std::string::npos ? "" : val.substr(vb);
    if (key.empty()) throw SpecError("empty key", lineno, int(b) + 1);
    if (cur->find(key))
      throw SpecError("duplicate key '" + key + "' in [" + cur->name + "]",
                      lineno, int(b) + 1);
    cur->entries.push_back({key, val, lineno});
  }
  return file;
}

inline SpecFile parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file '" + path + "'");
  return parse_spec(in, std::filesystem::path(path).stem().string());
}

inline Vec parse_vec(const std::string& s) {
  std::vector<double> vals;
  std::istringstream items(s);
  std::string item;
  while (std::getline(items, item, ',')) {
    // "1.5, -1" is the natural way to write a vector; trim per item
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    vals.push_back(
        parse_double(b == std::string::npos ? "" : item.substr(b, e - b + 1)));
  }
  Vec v(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
  return v;
}

// ---- registries ----

struct BuiltProblem {
  ProxProblem problem;
  std::string desc;  // canonical, defaults resolved; used for compare identity
};

inline BuiltProblem build_problem(const SpecSection& sec) {
  std::string id = sec.get("id");
  std::ostringstream desc;
  if (id == "l1box_quad") {
    sec.restrict_keys({"id", "a", "v0"});
    double a = sec.get_num_or("a", 2.0);
    double v0 = sec.get_num_or("v0", 3.0);
    desc << "l1box_quad(a=" << a << ",v0=" << v0 << ")";
    return {abs_box_quad_problem(a, v0), desc.str()};
  }
  if (id == "logbarrier_quad") {
    sec.restrict_keys({"id"});
    return {log_barrier_quad_problem(), "logbarrier_quad"};
  }
  if (id == "quad_nd") {
    sec.restrict_keys({"id", "n", "condition"});
    int n = int(sec.get_num_or("n", 10));
    double cond = sec.get_num_or("condition", 100.0);
    desc << "quad_nd(n=" << n << ",condition=" << cond << ")";
    return {quad_nd_problem(n, cond), desc.str()};
  }
  throw ConfigError("unknown problem id '" + id + "'");
}

struct ExperimentSpec {
  std::string name;
  SpecSection problem;
  SpecSection driver;  // [algorithm] or [system]
  SpecSection run;     // may be empty
  bool is_system = false;
};

inline ExperimentSpec load_experiment(const SpecFile& file) {
  ExperimentSpec spec;
  spec.name = file.name;
  const SpecSection* prob = file.find("problem");
  if (!prob) throw ConfigError("spec '" + file.name + "' has no [problem]");
  spec.problem = *prob;
  const SpecSection* algo = file.find("algorithm");
  const SpecSection* sys = file.find("system");
  if (!!algo == !!sys)
    throw ConfigError("spec '" + file.name +
                      "' needs exactly one of [algorithm] or [system]");
  spec.driver = algo ? *algo : *sys;
  spec.is_system = sys != nullptr;
  if (const SpecSection* run = file.find("run")) spec.run = *run;
  spec.run.name = "run";
  for (const auto& s : file.sections)
    if (s.name != "problem" && s.name != "algorithm" && s.name != "system" &&
        s.name != "run")
      throw SpecError("unknown section [" + s.name + "]", s.line, 1);
  return spec;
}

inline RunTrace run_algorithm_spec(const ProxProblem& p,
                                   const ExperimentSpec& spec) {
  const SpecSection& a = spec.driver;
  const SpecSection& r = spec.run;
  r.restrict_keys({"max_iter", "x0", "x1", "stop_tol", "k0", "seed"});
  std::int64_t max_iter = std::int64_t(r.get_num_or("max_iter", 1000));
  std::string id = a.get("id");
  if (id == "tikhoprox") {
    a.restrict_keys({"id", "d", "schedule", "rho", "lambda_energy"});
    SolverConfig cfg;
    cfg.d = a.get_num_or("d", 0.5);
    cfg.schedule = parse_schedule(a.get("schedule"));
    cfg.rho = a.get_num_or("rho", 0.0);
    std::string lam = a.get_or("lambda_energy", "auto");
    cfg.lambda_energy = lam == "auto" ? 0.0 : parse_double(lam);
    cfg.max_iter = max_iter;
    cfg.k0 = std::int64_t(r.get_num_or("k0", 0));
    cfg.stop_tol = r.get_num_or("stop_tol", 0.0);
    if (const SpecEntry* e = r.find("x0")) cfg.x0 = parse_vec(e->value);
    return run_tikhonov_prox(p, cfg);
  }
  if (id == "laszlo") {
    a.restrict_keys({"id", "alpha", "q", "p", "c", "lambda", "delta"});
    LaszloParams par;
    par.alpha = a.get_num_or("alpha", 2.0);
    par.q = a.get_num_or("q", 0.8);
    par.p = a.get_num_or("p", 2.0);
    par.c = a.get_num_or("c", 5.0);
    par.lambda = a.get_num_or("lambda", 5.0);
    par.delta = a.get_num_or("delta", 2.0);
    Vec x0 = r.find("x0") ? parse_vec(r.get("x0")) : default_x0(p);
    Vec x1 = r.find("x1") ? parse_vec(r.get("x1")) : x0;
    return run_laszlo(p, par, x0, x1, max_iter);
  }
  if (id == "ppa") {
    a.restrict_keys({"id", "lam"});
    double lam = a.get_num_or("lam", 1.0);
    Vec x0 = r.find("x0") ? parse_vec(r.get("x0")) : default_x0(p);
    return run_vanilla_ppa(p, lam, x0, max_iter);
  }
  throw ConfigError("unknown algorithm id '" + id + "'");
}

inline Trajectory run_system_spec(const ProxProblem& p,
                                  const ExperimentSpec& spec,
                                  OdeSystem* sys_out = nullptr) {
  const SpecSection& s = spec.driver;
  const SpecSection& r = spec.run;
  r.restrict_keys({"t0", "t_end", "dt", "x0", "v0", "seed"});
  std::string id = s.get("id");
  OdeSystem sys;
  if (id == "flow") {
    s.restrict_keys({"id", "c", "schedule"});
    sys = first_order_flow(p, s.get_num_or("c", 5.0),
                           parse_schedule(s.get("schedule")));
  } else {
    s.restrict_keys({"id"});
    sys = named_system(id, p);
  }
  double sched_t0 = sys.constant_beta_one ? 2.0 : sys.schedule.t0;
  double t0 = r.get_num_or("t0", sched_t0);
  double t_end = r.get_num_or("t_end", 20.0);
  double dt = r.get_num_or("dt", 1e-3);
  Vec x0 = r.find("x0") ? parse_vec(r.get("x0"))
                        : p.clamp_inside(Vec::Zero(p.dim), 1e-3);
  std::optional<Vec> v0;
  if (r.find("v0")) v0 = parse_vec(r.get("v0"));
  Trajectory traj = integrate(sys, x0, v0, t0, t_end, dt);
  if (!sys.second_order)
    continuous_energy(p, traj, sys.c, sys.schedule);
  if (sys_out) *sys_out = sys;
  return traj;
}

// ---- run / compare drivers ----

struct RunOutput {
  std::string trace_path;
  std::string summary_path;
  double final_gap = kNaN;
  double final_dist = kNaN;
  double wall_time_s = 0.0;
};

namespace detail {

inline std::string vec_to_string(const Vec& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace detail

inline RunOutput cmd_run(const ExperimentSpec& spec, const std::string& out_dir,
                         std::ostream& log, bool quiet = false) {
  BuiltProblem built = build_problem(spec.problem);
  const ProxProblem& p = built.problem;
  std::filesystem::create_directories(out_dir);
  auto path = [&](const std::string& suffix) {
    return (std::filesystem::path(out_dir) / (spec.name + suffix)).string();
  };
  RunOutput out;
  out.trace_path = path("_trace.csv");
  out.summary_path = path("_summary.txt");
  std::ostringstream sum;
  sum << "spec = " << spec.name << "\n" << "problem = " << built.desc << "\n";

  if (!spec.is_system) {
    RunTrace trace = run_algorithm_spec(p, spec);
    std::string gap_ref = "fmin";
    if (!p.fmin) {
      // No reference optimum: rebase gaps against the best value seen in
      // this batch (flagged here so nobody mistakes it for a true gap).
      gap_ref = "best_seen";
      double fbest = kInf;
      for (const auto& rec : trace.records) fbest = std::min(fbest, rec.f_val);
      fbest = std::min(fbest, p.value(trace.final_x));
      for (auto& rec : trace.records) rec.gap = rec.f_val - fbest;
    }
    write_trace_csv(out.trace_path, trace, p.xstar);
    out.final_gap = p.fmin ? (p.xstar ? p.value_difference(trace.final_x, *p.xstar)
                                      : p.value(trace.final_x) - *p.fmin)
                           : kNaN;
    out.final_dist = p.xstar ? (trace.final_x - *p.xstar).norm() : kNaN;
    out.wall_time_s = trace.wall_time_s;
    sum << "algorithm = " << trace.algorithm << "\n";
    if (!trace.params_desc.empty()) sum << "params = " << trace.params_desc << "\n";
    if (trace.algorithm == "tikhoprox") {
      sum << "schedule = " << schedule_id(trace.config.schedule) << "\n"
          << "d = " << format_double(trace.config.d) << "\n"
          << "lambda_energy = " << format_double(trace.lambda_used) << "\n";
    }
    sum << "iterations = " << trace.records.size() << "\n"
        << "terminated_by = " << to_string(trace.terminated_by) << "\n"
        << "final_x = " << detail::vec_to_string(trace.final_x) << "\n"
        << "final_gap = " << format_double(out.final_gap) << "\n"
        << "final_dist_xstar = " << format_double(out.final_dist) << "\n"
        << "gap_reference = " << gap_ref << "\n"
        << "wall_time_s = " << format_double(trace.wall_time_s) << "\n";
  } else {
    auto t_start = std::chrono::steady_clock::now();
    Trajectory traj = run_system_spec(p, spec);
    out.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    out.trace_path = path("_trajectory.csv");
    write_trajectory_csv(out.trace_path, traj);
    const Vec& xe = traj.x.back();
    out.final_gap = traj.gap.empty() ? kNaN : traj.gap.back();
    out.final_dist = p.xstar ? (xe - *p.xstar).norm() : kNaN;
    sum << "system = " << spec.driver.get("id") << "\n"
        << "samples = " << traj.t.size() << "\n"
        << "final_t = " << format_double(traj.t.back()) << "\n"
        << "truncated = " << (traj.truncated ? "yes" : "no") << "\n";
    if (traj.truncated)
      sum << "truncated_at = " << format_double(traj.truncated_at) << "\n"
          << "note = " << traj.note << "\n";
    sum << "substeps = " << traj.substeps << "\n"
        << "snap_steps = " << traj.snap_steps << "\n"
        << "final_x = " << detail::vec_to_string(xe) << "\n"
        << "final_gap = " << format_double(out.final_gap) << "\n"
        << "final_dist_xstar = " << format_double(out.final_dist) << "\n"
        << "wall_time_s = " << format_double(out.wall_time_s) << "\n";
  }
  std::ofstream sf(out.summary_path, std::ios::binary);
  if (!sf) throw ConfigError("cannot open '" + out.summary_path + "'");
  sf << sum.str();
  if (!quiet) log << sum.str();
  return out;
}

// Runs two or more algorithm specs on the same problem, aligns their gap
// series by iteration count, and writes a combined CSV plus a log-log SVG
// overlay. Members run concurrently; outputs are assembled in spec order.
inline void cmd_compare(const std::vector<ExperimentSpec>& specs,
                        const std::string& out_dir, std::ostream& log,
                        bool quiet = false) {
  if (specs.size() < 2)
    throw ConfigError("compare needs at least two spec files");
  std::vector<BuiltProblem> built;
  for (const auto& s : specs) {
    if (s.is_system)
      throw ConfigError("compare handles algorithm specs, not systems");
    built.push_back(build_problem(s.problem));
    if (built.back().desc != built.front().desc)
      throw ConfigError("compare specs disagree on the problem: '" +
                        built.front().desc + "' vs '" + built.back().desc +
                        "'");
  }
  std::vector<std::future<RunTrace>> futures;
  for (std::size_t i = 0; i < specs.size(); ++i)
    futures.push_back(std::async(std::launch::async, [&, i] {
      return run_algorithm_spec(built[i].problem, specs[i]);
    }));
  std::vector<RunTrace> traces;
  for (auto& f : futures) traces.push_back(f.get());

  const ProxProblem& p = built.front().problem;
  if (!p.fmin) {
    double fbest = kInf;
    for (const auto& tr : traces) {
      for (const auto& rec : tr.records) fbest = std::min(fbest, rec.f_val);
      fbest = std::min(fbest, p.value(tr.final_x));
    }
    for (auto& tr : traces)
      for (auto& rec : tr.records) rec.gap = rec.f_val - fbest;
  }

  std::filesystem::create_directories(out_dir);
  std::string csv_path =
      (std::filesystem::path(out_dir) / "compare.csv").string();
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw ConfigError("cannot open '" + csv_path + "'");
  csv << "iter";
  for (const auto& s : specs) csv << ",k_" << s.name << ",gap_" << s.name;
  csv << "\n";
  std::size_t rows = 0;
  for (const auto& tr : traces) rows = std::max(rows, tr.records.size());
  for (std::size_t i = 0; i < rows; ++i) {
    csv << format_int(std::int64_t(i));
    for (const auto& tr : traces) {
      if (i < tr.records.size())
        csv << ',' << format_int(tr.records[i].k) << ','
            << format_double(tr.records[i].gap);
      else
        csv << ",nan,nan";
    }
    csv << "\n";
  }
  csv.close();

  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    PlotSeries ps;
    ps.name = specs[i].name;
    for (const auto& rec : traces[i].records) {
      ps.x.push_back(double(rec.k));
      ps.y.push_back(rec.gap);
    }
    series.push_back(std::move(ps));
  }
  std::string svg_path =
      (std::filesystem::path(out_dir) / "compare.svg").string();
  write_loglog_svg(svg_path, "objective gap on " + built.front().desc, "k",
                   "gap", series);

  std::string sum_path =
      (std::filesystem::path(out_dir) / "compare_summary.txt").string();
  std::ofstream sf(sum_path, std::ios::binary);
  std::ostringstream sum;
  sum << "problem = " << built.front().desc << "\n"
      << "gap_reference = " << (p.fmin ? "fmin" : "best_seen") << "\n";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& tr = traces[i];
    double fg = tr.records.empty() ? kNaN : tr.records.back().gap;
    sum << specs[i].name << ".algorithm = " << tr.algorithm << "\n"
        << specs[i].name << ".final_gap = " << format_double(fg) << "\n";
    if (p.xstar)
      sum << specs[i].name << ".final_dist_xstar = "
          << format_double((tr.final_x - *p.xstar).norm()) << "\n";
    sum << specs[i].name << ".wall_time_s = " << format_double(tr.wall_time_s)
        << "\n";
  }
  sf << sum.str();
  if (!quiet) log << sum.str();
}

// ---- schedule hypothesis driver ----

struct ScheduleCheckResult {
  HypothesisReport continuous;
  HypothesisReport discrete;
  bool pass = false;
};

inline ScheduleCheckResult cmd_check_schedule(const std::string& schedule_str,
                                              double c, double mu,
                                              double horizon,
                                              std::ostream& log,
                                              bool quiet = false) {
  BetaSchedule s = parse_schedule(schedule_str);
  if (!(horizon > s.t0 + 2.0))
    throw ConfigError("check-schedule horizon must exceed the schedule start");
  double t_hi = horizon;
  if (s.kind == BetaSchedule::Kind::Table)
    t_hi = std::min(t_hi, s.t0 + double(s.table.size() - 1));
  double t_lo = std::max(s.t0, t_hi / 10.0);
  std::vector<double> grid;
  const int n_grid = 1000;
  for (int i = 0; i < n_grid; ++i)
    grid.push_back(t_lo * std::pow(t_hi / t_lo, double(i) / double(n_grid - 1)));

  ScheduleCheckResult res;
  res.continuous = check_h_beta(s, c, mu, grid);
  res.discrete = check_h_beta_k(s, std::int64_t(t_hi));
  res.pass = res.continuous.continuous_ok() && res.discrete.discrete_ok();
  if (!quiet) {
    log << "== continuous hypotheses ==\n"
        << to_text(res.continuous) << "== discrete hypotheses ==\n"
        << to_text(res.discrete)
        << "result = " << (res.pass ? "pass" : "fail") << "\n";
  }
  return res;
}

// ---- rate claim driver ----

struct RateClaim {
  std::string series;   // y column
  std::string x;        // x column, or "exp" for y ~ exp(-rho k)
  double exponent = 0;  // power, or rho for the exp model
  double tail_fraction = 0.5;
  double slope_tol = 0.2;
  double band_max = 10.0;
};

// "series:x:exponent[:tail[:slope_tol[:band_max]]]"
inline RateClaim parse_rate_claim(const std::string& text) {
  std::vector<std::string> parts;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ':')) parts.push_back(item);
  if (parts.size() < 3 || parts.size() > 6)
    throw ConfigError("claim '" + text +
                      "' is not series:x:exponent[:tail[:tol[:band]]]");
  RateClaim c;
  c.series = parts[0];
  c.x = parts[1];
  c.exponent = parse_double(parts[2]);
  if (parts.size() > 3) c.tail_fraction = parse_double(parts[3]);
  if (parts.size() > 4) c.slope_tol = parse_double(parts[4]);
  if (parts.size() > 5) c.band_max = parse_double(parts[5]);
  return c;
}

inline std::vector<RateReport> cmd_rates(const std::string& csv_path,
                                         const std::vector<RateClaim>& claims,
                                         std::ostream& log,
                                         bool quiet = false) {
  CsvTable table = read_csv(csv_path);
  std::vector<std::string> missing;
  for (const auto& c : claims) {
    if (table.column_index(c.series) < 0) missing.push_back(c.series);
    if (c.x != "exp" && table.column_index(c.x) < 0) missing.push_back(c.x);
    if (c.x == "exp" && table.column_index("k") < 0) missing.push_back("k");
  }
  if (!missing.empty()) {
    std::string joined;
    for (const auto& m : missing) joined += (joined.empty() ? "" : ", ") + m;
    throw ConfigError("trace is missing column(s): " + joined);
  }
  std::vector<RateReport> reports;
  for (const auto& c : claims) {
    std::vector<double> ys = table.column(c.series);
    if (c.x == "exp") {
      reports.push_back(assess_exp_rate(c.series, table.column("k"), ys,
                                        c.exponent, c.tail_fraction,
                                        c.slope_tol, c.band_max));
    } else {
      std::string model = c.x == "beta_k" ? "vs_beta" : "vs_poly";
      reports.push_back(assess_power_rate(c.series, model, table.column(c.x),
                                          ys, c.exponent, c.tail_fraction,
                                          c.slope_tol, c.band_max));
    }
    if (!quiet) log << reports.back().to_text() << "\n";
  }
  return reports;
}

}  // namespace tikhoprox
