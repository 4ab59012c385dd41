#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <stdexcept>
#include <string>

#include "bfstar/canm.hpp"
#include "bfstar/config.hpp"
#include "bfstar/grid.hpp"
#include "bfstar/io.hpp"

using namespace bfstar;
using Catch::Approx;

namespace {

RunConfig parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

int error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_config(in);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("full configuration round-trip", "[config]") {
  const RunConfig cfg = parse_text(
      "# reference run\n"
      "[physics]\n"
      "sigma_c = 0.8\n"
      "mu_c = 1.0\n"
      "lambda = 0.01\n"
      "gamma = 1.0\n"
      "b = 1.0\n"
      "\n"
      "[numerics]\n"
      "n = 512\n"
      "x_inf = 32\n"
      "grading = condensed\n"
      "grading_strength = 0.25\n"
      "eps = 1e-10\n"
      "max_iter = 60\n"
      "tau_min = 1e-3\n"
      "\n"
      "[guess]\n"
      "nu_center = -1.2\n"
      "phi_center = -0.04\n"
      "r_s = 1.1\n"
      "omega = 0.85\n"
      "\n"
      "[sweep]\n"
      "parameter = sigma_c\n"
      "start = 0.1\n"
      "stop = 0.9\n"
      "step = 0.05\n"
      "\n"
      "[output]\n"
      "directory = out\n"
      "emit_plots = true\n"
      "keep_profiles = off\n");

  CHECK(cfg.params.sigma_c == 0.8);
  CHECK(cfg.params.lambda == 0.01);
  CHECK(cfg.numerics.n == 512);
  CHECK(cfg.numerics.x_inf == 32.0);
  CHECK(cfg.numerics.grading == Grading::condensed);
  CHECK(cfg.numerics.grading_strength == 0.25);
  CHECK(cfg.numerics.max_iter == 60);
  CHECK(cfg.guess.nu_center == -1.2);
  CHECK(cfg.guess.omega == 0.85);
  REQUIRE(cfg.sweep.has_value());
  CHECK(cfg.sweep->parameter == "sigma_c");
  CHECK(cfg.sweep->step == 0.05);
  CHECK(cfg.output.directory == "out");
  CHECK(cfg.output.emit_plots);
  CHECK_FALSE(cfg.output.keep_profiles);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("defaults survive an empty configuration", "[config]") {
  const RunConfig cfg = parse_text("");
  CHECK(cfg.params.sigma_c == 0.8);
  CHECK(cfg.numerics.n == 512);
  CHECK(cfg.numerics.x_inf == 32.0);
  CHECK(cfg.numerics.grading == Grading::uniform);
  CHECK_FALSE(cfg.sweep.has_value());
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("rejected lines are reported with their number", "[config]") {
  CHECK(error_line("[physics]\nsigma_c = 0.8\nsigma_c = oops\n") == 3);
  CHECK(error_line("[physics]\nunknown_key = 1\n") == 2);
  CHECK(error_line("[nonsense]\n") == 1);
  CHECK(error_line("[numerics]\nn = 12.5\n") == 2);
  CHECK(error_line("[numerics]\n\n\nno equals sign here\n") == 4);
  CHECK(error_line("[numerics]\ngrading = diagonal\n") == 2);
  CHECK(error_line("[output]\nemit_plots = maybe\n") == 2);
  CHECK(error_line("[physics\n") == 1);
  CHECK(error_line("[physics]\n= 0.5\n") == 2);
  CHECK(error_line("[physics]\nsigma_c =\n") == 2);
}

TEST_CASE("comments and whitespace are ignored", "[config]") {
  const RunConfig cfg = parse_text(
      "  [numerics]  \n"
      "   n = 128   # fine enough\n"
      "# a full-line comment\n"
      "\tx_inf\t=\t16\n");
  CHECK(cfg.numerics.n == 128);
  CHECK(cfg.numerics.x_inf == 16.0);
}

TEST_CASE("top-level keys default to the physics section", "[config]") {
  const RunConfig cfg = parse_text("sigma_c = 0.33\n");
  CHECK(cfg.params.sigma_c == 0.33);
}

TEST_CASE("validation catches unusable settings", "[config]") {
  RunConfig cfg = parse_text("[numerics]\nn = 2\n");
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = parse_text("[numerics]\nx_inf = 0.5\n");
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = parse_text("[numerics]\ntau_min = 2\n");
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = parse_text("[sweep]\nparameter = sigma_c\nstart = 0.1\nstop = 0.9\nstep = 0\n");
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = parse_text("[sweep]\nparameter = sigma_c\nstart = 0.9\nstop = 0.1\nstep = 0.05\n");
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = parse_text("[sweep]\nparameter = radius\nstart = 0.1\nstop = 0.9\nstep = 0.05\n");
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = parse_text("[physics]\nmu_c = -1\n");
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("missing configuration files are reported", "[config]") {
  try {
    load_config("/nonexistent/path/run.cfg");
    FAIL("load_config should have thrown");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 0);
  }
}

TEST_CASE("physical parameters are addressable by name", "[config]") {
  PhysicalParams p{0.1, 0.2, 0.3, 0.4, 0.5};
  CHECK(param_by_name(p, "sigma_c") == &p.sigma_c);
  CHECK(param_by_name(p, "mu_c") == &p.mu_c);
  CHECK(param_by_name(p, "lambda") == &p.lambda);
  CHECK(param_by_name(p, "gamma") == &p.gamma);
  CHECK(param_by_name(p, "b") == &p.b);
  CHECK(param_by_name(p, "radius") == nullptr);
  *param_by_name(p, "gamma") = 7.0;
  CHECK(p.gamma == 7.0);
}

TEST_CASE("profile writer emits a deterministic table", "[io]") {
  const Grid grid = build_grid(8, 2.0);
  const PhysicalParams params{0.8, 1.0, 0.01, 1.0, 1.0};
  FieldState state = default_initial_guess(params, grid);
  state.pair = SpectralPair{1.16, 0.8};
  SolveReport report;
  report.converged = true;
  report.iterations = 5;
  RunConfig cfg;
  cfg.params = params;

  std::ostringstream a, b;
  write_profile(a, state, report, cfg);
  write_profile(b, state, report, cfg);
  CHECK(a.str() == b.str());

  const std::string text = a.str();
  CHECK(text.find("# r_s = 1.16000000000e+00") != std::string::npos);
  CHECK(text.find("# iterations = 5") != std::string::npos);
  CHECK(text.find("# converged = true") != std::string::npos);
  CHECK(text.find("# columns: x nu phi sigma mu exp_lambda") != std::string::npos);

  // One row per node plus the commented header.
  int rows = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line[0] != '#') ++rows;
  }
  CHECK(rows == grid.node_count());
}

TEST_CASE("solve report writer lists per-iteration telemetry", "[io]") {
  SolveReport report;
  report.converged = true;
  report.iterations = 2;
  report.termination_reason = "residual below threshold";
  report.residual_history = {1e-2, 1e-8};
  report.tau_history = {0.5, 1.0};
  report.eigen_history = {{1.1, 0.9}, {1.2, 0.85}};

  std::ostringstream out;
  write_report(out, report);
  const std::string text = out.str();
  CHECK(text.find("converged: true") != std::string::npos);
  CHECK(text.find("iterations: 2") != std::string::npos);
  CHECK(text.find("termination: residual below threshold") != std::string::npos);
  CHECK(text.find("1 1.00000000000e-02 5.00000000000e-01") != std::string::npos);
  CHECK(text.find("2 1.00000000000e-08 1.00000000000e+00") != std::string::npos);
}

TEST_CASE("sweep summary keeps failed points as comments", "[io]") {
  std::vector<SweepRow> rows(3);
  rows[0].param = 0.1;
  rows[0].r_s = 3.0;
  rows[0].converged = true;
  rows[0].iterations = 20;
  rows[1].param = 0.15;
  rows[1].converged = false;
  rows[1].note = "iteration limit reached";
  rows[2].param = 0.2;
  rows[2].r_s = 2.5;
  rows[2].converged = true;
  rows[2].iterations = 9;

  std::ostringstream out;
  write_sweep_summary(out, "sigma_c", rows);
  const std::string text = out.str();
  CHECK(text.find("# failed at sigma_c = 1.50000000000e-01: iteration limit reached") !=
        std::string::npos);

  int data_rows = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line[0] != '#') ++data_rows;
  }
  CHECK(data_rows == 2);
}

TEST_CASE("asymptotic frequency rescales by the central lapse", "[io]") {
  const Grid grid = build_grid(8, 2.0);
  FieldState state(grid);
  state.y.value(0)[0] = -1.0;
  state.pair = SpectralPair{1.0, 0.8};
  CHECK(asymptotic_frequency(state) == Approx(0.8 * std::exp(0.5)).epsilon(1e-14));
}

TEST_CASE("plot scripts reference their data files", "[io]") {
  std::ostringstream p, s;
  write_profile_plot_script(p, "profile.dat");
  write_sweep_plot_script(s, "sweep.dat", "sigma_c");
  CHECK(p.str().find("'profile.dat' using 1:2") != std::string::npos);
  CHECK(s.str().find("'sweep.dat' using 1:2") != std::string::npos);
  CHECK(s.str().find("sigma_c") != std::string::npos);
}
