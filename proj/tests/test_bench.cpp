#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tikhoprox/experiment.hpp"

using namespace tikhoprox;
using Catch::Approx;

namespace {

SpecFile parse_text(const std::string& text, const std::string& name = "spec") {
  std::istringstream in(text);
  return parse_spec(in, name);
}

int thrown_line(const std::string& text) {
  try {
    parse_text(text);
  } catch (const SpecError& e) {
    return e.line;
  }
  return -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

const char* kTikhoSpec =
    "# box problem under the slow schedule\n"
    "[problem]\n"
    "id = l1box_quad\n"
    "a = 2\n"
    "v0 = 3\n"
    "\n"
    "[algorithm]\n"
    "id = tikhoprox\n"
    "d = 0.5\n"
    "schedule = polylog:m=3,q=3\n"
    "\n"
    "[run]\n"
    "max_iter = 60\n"
    "x0 = 1.5,-1\n";

}  // namespace

TEST_CASE("spec parsing: sections, comments, trimming") {
  SpecFile file = parse_text(
      "; leading comment\n"
      "[problem]\n"
      "id = l1box_quad   # trailing comment\n"
      "a=2\n"
      "\n"
      "[run]\n"
      "  max_iter =  50\n");
  REQUIRE(file.sections.size() == 2);
  const SpecSection* prob = file.find("problem");
  REQUIRE(prob != nullptr);
  REQUIRE(prob->get("id") == "l1box_quad");
  REQUIRE(prob->get("a") == "2");
  REQUIRE(prob->entries[0].line == 3);
  REQUIRE(file.find("run")->get("max_iter") == "50");
  REQUIRE(file.find("nosuch") == nullptr);
  REQUIRE_THROWS_AS(prob->get("missing"), ConfigError);
  REQUIRE(prob->get_or("missing", "7") == "7");
}

TEST_CASE("spec parsing: errors carry line numbers") {
  REQUIRE(thrown_line("[problem]\nid = x\nid = y\n") == 3);    // duplicate key
  REQUIRE(thrown_line("a = 1\n") == 1);                        // key before section
  REQUIRE(thrown_line("[problem]\njust words\n") == 2);        // no '='
  REQUIRE(thrown_line("[problem\nid = x\n") == 1);             // missing ']'
  REQUIRE(thrown_line("[problem]\n[problem]\n") == 2);         // duplicate section
  REQUIRE(thrown_line("[problem]\n = 3\n") == 2);              // empty key
  try {
    parse_text("[problem]\nid = x\nid = y\n");
  } catch (const SpecError& e) {
    REQUIRE(e.col >= 1);
    REQUIRE(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("experiment structure validation") {
  REQUIRE_THROWS_AS(load_experiment(parse_text("[algorithm]\nid = ppa\n")),
                    ConfigError);  // no [problem]
  REQUIRE_THROWS_AS(
      load_experiment(parse_text("[problem]\nid = l1box_quad\n")),
      ConfigError);  // neither [algorithm] nor [system]
  REQUIRE_THROWS_AS(
      load_experiment(parse_text("[problem]\nid = l1box_quad\n[algorithm]\nid "
                                 "= ppa\n[system]\nid = tral\n")),
      ConfigError);  // both
  REQUIRE_THROWS_AS(
      load_experiment(parse_text(
          "[problem]\nid = l1box_quad\n[algorithm]\nid = ppa\n[junk]\na = 1\n")),
      SpecError);  // unknown section
}

TEST_CASE("problem registry resolves ids, defaults and typos") {
  BuiltProblem box =
      build_problem(*parse_text("[problem]\nid = l1box_quad\n").find("problem"));
  REQUIRE(box.desc == "l1box_quad(a=2,v0=3)");
  REQUIRE(box.problem.dim == 2);

  BuiltProblem quad = build_problem(
      *parse_text("[problem]\nid = quad_nd\nn = 6\ncondition = 40\n")
           .find("problem"));
  REQUIRE(quad.problem.dim == 6);
  REQUIRE(*quad.problem.lipschitz_grad == 40.0);

  try {
    build_problem(*parse_text("[problem]\nid = frobnicator\n").find("problem"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    REQUIRE(std::string(e.what()).find("frobnicator") != std::string::npos);
  }
  REQUIRE_THROWS_AS(
      build_problem(
          *parse_text("[problem]\nid = l1box_quad\naa = 1\n").find("problem")),
      SpecError);
}

TEST_CASE("algorithm specs drive the same iteration as direct calls") {
  ExperimentSpec spec = load_experiment(parse_text(kTikhoSpec));
  BuiltProblem built = build_problem(spec.problem);
  RunTrace via_spec = run_algorithm_spec(built.problem, spec);

  SolverConfig cfg;
  cfg.d = 0.5;
  cfg.schedule = parse_schedule("polylog:m=3,q=3");
  cfg.max_iter = 60;
  cfg.x0 = Vec(2);
  cfg.x0 << 1.5, -1.0;
  RunTrace direct = run_tikhonov_prox(abs_box_quad_problem(2.0, 3.0), cfg);

  REQUIRE(via_spec.records.size() == direct.records.size());
  REQUIRE((via_spec.final_x - direct.final_x).norm() == 0.0);  // bit-identical
  REQUIRE(via_spec.records[10].beta == direct.records[10].beta);

  REQUIRE_THROWS_AS(
      run_algorithm_spec(built.problem,
                         load_experiment(parse_text(
                             "[problem]\nid = l1box_quad\n[algorithm]\nid = "
                             "warp\n"))),
      ConfigError);
}

TEST_CASE("run driver writes trace, summary, and is deterministic") {
  std::filesystem::remove_all("tb_run_a");
  std::filesystem::remove_all("tb_run_b");
  write_file("tb_spec.ini", kTikhoSpec);
  ExperimentSpec spec = load_experiment(parse_spec_file("tb_spec.ini"));
  std::ostringstream log;
  RunOutput a = cmd_run(spec, "tb_run_a", log);
  RunOutput b = cmd_run(spec, "tb_run_b", log, /*quiet=*/true);

  std::string csv = slurp(a.trace_path);
  REQUIRE(csv.rfind("k,beta_k,f_val,gap,dist_xstar,dist_y,step,subgrad_res,E_k",
                    0) == 0);
  REQUIRE(csv == slurp(b.trace_path));  // byte-identical reruns

  std::string summary = slurp(a.summary_path);
  REQUIRE(summary.find("problem = l1box_quad(a=2,v0=3)") != std::string::npos);
  REQUIRE(summary.find("terminated_by = max_iter") != std::string::npos);
  REQUIRE(summary.find("gap_reference = fmin") != std::string::npos);
  REQUIRE(summary.find("wall_time_s = ") != std::string::npos);
  REQUIRE(log.str().find("terminated_by") != std::string::npos);

  CsvTable table = read_csv(a.trace_path);
  REQUIRE(table.rows.size() == 60);
  REQUIRE(table.column("k").front() == 2.0);
  // dist_xstar column is computed at write time against the known solution
  std::vector<double> dist = table.column("dist_xstar");
  REQUIRE(dist.front() == Approx(std::hypot(1.5, 4.0)).epsilon(1e-12));
}

TEST_CASE("run driver handles system specs") {
  write_file("tb_flow.ini",
             "[problem]\nid = logbarrier_quad\n"
             "[system]\nid = flow\nc = 5\nschedule = polylog:m=2,q=2,scale=2\n"
             "[run]\nt0 = 2\nt_end = 6\ndt = 0.01\nx0 = 0,0\n");
  ExperimentSpec spec = load_experiment(parse_spec_file("tb_flow.ini"));
  std::ostringstream log;
  RunOutput out = cmd_run(spec, "tb_run_sys", log, true);
  REQUIRE(out.trace_path.find("_trajectory.csv") != std::string::npos);
  CsvTable table = read_csv(out.trace_path);
  REQUIRE(table.column_index("t") == 0);
  REQUIRE(table.column_index("x0") == 1);
  REQUIRE(table.column_index("E") >= 0);
  REQUIRE(table.rows.size() == 401);
  REQUIRE(table.column("t").back() == 6.0);
  std::string summary = slurp(out.summary_path);
  REQUIRE(summary.find("system = flow") != std::string::npos);
  REQUIRE(summary.find("truncated = no") != std::string::npos);
}

TEST_CASE("compare driver aligns runs and overlays them") {
  write_file("tb_cmp_a.ini", kTikhoSpec);
  write_file("tb_cmp_b.ini",
             "[problem]\nid = l1box_quad\n"
             "[algorithm]\nid = ppa\nlam = 1\n"
             "[run]\nmax_iter = 40\nx0 = 1.5,-1\n");
  std::vector<ExperimentSpec> specs = {
      load_experiment(parse_spec_file("tb_cmp_a.ini")),
      load_experiment(parse_spec_file("tb_cmp_b.ini"))};
  std::ostringstream log;
  cmd_compare(specs, "tb_cmp_out", log, true);

  std::string csv = slurp("tb_cmp_out/compare.csv");
  REQUIRE(csv.rfind("iter,k_tb_cmp_a,gap_tb_cmp_a,k_tb_cmp_b,gap_tb_cmp_b", 0) ==
          0);
  CsvTable table = read_csv("tb_cmp_out/compare.csv");
  REQUIRE(table.rows.size() == 60);           // longer member wins
  REQUIRE(std::isnan(table.column("k_tb_cmp_b").back()));  // shorter one padded

  std::string svg = slurp("tb_cmp_out/compare.svg");
  REQUIRE(svg.rfind("<?xml", 0) == 0);
  std::size_t polylines = 0;
  for (std::size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos;
       ++pos)
    ++polylines;
  REQUIRE(polylines == 2);

  cmd_compare(specs, "tb_cmp_out2", log, true);
  REQUIRE(csv == slurp("tb_cmp_out2/compare.csv"));  // deterministic

  // mismatched problems refuse to compare
  write_file("tb_cmp_c.ini",
             "[problem]\nid = l1box_quad\nv0 = 4\n"
             "[algorithm]\nid = ppa\n");
  std::vector<ExperimentSpec> bad = {
      specs[0], load_experiment(parse_spec_file("tb_cmp_c.ini"))};
  REQUIRE_THROWS_AS(cmd_compare(bad, "tb_cmp_out3", log, true), ConfigError);
  REQUIRE_THROWS_AS(cmd_compare({specs[0]}, "tb_cmp_out3", log, true),
                    ConfigError);
}

TEST_CASE("doubles survive the CSV round trip bit-for-bit") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int i = 0; i < 2000; ++i) {
    double v = std::ldexp(mant(rng), expo(rng));
    std::string s = format_double(v);
    REQUIRE(parse_double(s) == v);
  }
  REQUIRE(format_double(kNaN) == "nan");
  REQUIRE(std::isnan(parse_double("nan")));
  REQUIRE(format_double(kInf) == "inf");
  REQUIRE(parse_double("inf") == kInf);
  REQUIRE(parse_double("-inf") == -kInf);
  REQUIRE_THROWS_AS(parse_double("1.5x"), ConfigError);
  REQUIRE_THROWS_AS(parse_double(""), ConfigError);
  REQUIRE_THROWS_AS(parse_double("12,5"), ConfigError);
}

TEST_CASE("csv reader rejects ragged rows") {
  std::istringstream in("a,b\n1,2\n3\n");
  REQUIRE_THROWS_AS(read_csv(in), ConfigError);
}

TEST_CASE("svg overlay escapes names and skips unplottable points") {
  PlotSeries s1{"a<b&c", {1.0, 10.0, 100.0}, {1.0, 0.1, 0.01}};
  PlotSeries s2{"flat", {1.0, 10.0, 100.0}, {-1.0, 0.0, kNaN}};
  std::ostringstream out;
  write_loglog_svg(out, "demo", "k", "gap", {s1, s2});
  std::string svg = out.str();
  REQUIRE(svg.find("a&lt;b&amp;c") != std::string::npos);
  REQUIRE(svg.find("a<b&c") == std::string::npos);
  REQUIRE(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("schedule check driver prints both sections and gates the result") {
  std::ostringstream log;
  ScheduleCheckResult good =
      cmd_check_schedule("polylog:m=3,q=3", 3.0, 1.0, 1e13, log);
  REQUIRE(good.pass);
  REQUIRE(log.str().find("== continuous hypotheses ==") != std::string::npos);
  REQUIRE(log.str().find("== discrete hypotheses ==") != std::string::npos);
  REQUIRE(log.str().find("result = pass") != std::string::npos);

  {
    std::ofstream out("tb_flat_table.txt");
    for (int i = 0; i < 60; ++i) out << "5.0\n";
  }
  std::ostringstream log2;
  ScheduleCheckResult flat =
      cmd_check_schedule("table:tb_flat_table.txt", 3.0, 1.0, 1e13, log2);
  REQUIRE_FALSE(flat.pass);
  REQUIRE(log2.str().find("result = fail") != std::string::npos);

  std::ostringstream quiet_log;
  cmd_check_schedule("polylog:m=3,q=3", 3.0, 1.0, 1e6, quiet_log, true);
  REQUIRE(quiet_log.str().empty());

  REQUIRE_THROWS_AS(cmd_check_schedule("polylog:m=3,q=3", 3.0, 1.0, 3.0, log),
                    ConfigError);
  REQUIRE_THROWS_AS(cmd_check_schedule("warp:m=1", 3.0, 1.0, 1e6, log),
                    ConfigError);
}

TEST_CASE("rate driver reads traces and names missing columns") {
  {
    std::ofstream out("tb_rates.csv", std::ios::binary);
    out << "k,beta_k,gap\n";
    for (int k = 2; k < 102; ++k) {
      double beta = double(k) * double(k);
      out << k << "," << format_double(beta) << ","
          << format_double(10.0 / beta) << "\n";
    }
  }
  std::ostringstream log;
  std::vector<RateReport> reports =
      cmd_rates("tb_rates.csv", {parse_rate_claim("gap:beta_k:-1")}, log);
  REQUIRE(reports.size() == 1);
  REQUIRE(reports[0].verdict == "pass");
  REQUIRE(log.str().find("verdict = pass") != std::string::npos);

  try {
    cmd_rates("tb_rates.csv", {parse_rate_claim("zap:beta_k:-1")}, log, true);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    REQUIRE(std::string(e.what()).find("zap") != std::string::npos);
  }

  REQUIRE_THROWS_AS(parse_rate_claim("gap:beta_k"), ConfigError);
  REQUIRE_THROWS_AS(parse_rate_claim("gap:beta_k:a:b:c:d:e"), ConfigError);
  RateClaim full = parse_rate_claim("gap:beta_k:-1:0.4:0.1:5");
  REQUIRE(full.tail_fraction == 0.4);
  REQUIRE(full.slope_tol == 0.1);
  REQUIRE(full.band_max == 5.0);

  {
    std::ofstream out("tb_rates_exp.csv", std::ios::binary);
    out << "k,E_k\n";
    for (int k = 1; k <= 80; ++k)
      out << k << "," << format_double(3.0 * std::exp(-0.5 * k)) << "\n";
  }
  std::vector<RateReport> exp_reports = cmd_rates(
      "tb_rates_exp.csv", {parse_rate_claim("E_k:exp:0.5")}, log, true);
  REQUIRE(exp_reports[0].verdict == "pass");
  REQUIRE(exp_reports[0].model == "vs_exp");
}

TEST_CASE("vectors parse from comma lists") {
  Vec v = parse_vec("1.5,-1");
  REQUIRE(v.size() == 2);
  REQUIRE(v[0] == 1.5);
  REQUIRE(v[1] == -1.0);
  Vec w = parse_vec(" 1.5, -1\t");  // spaces around items are fine
  REQUIRE(w[0] == 1.5);
  REQUIRE(w[1] == -1.0);
  REQUIRE_THROWS_AS(parse_vec("1.5,oops"), ConfigError);
  REQUIRE_THROWS_AS(parse_vec("1.5, ,2"), ConfigError);
}
