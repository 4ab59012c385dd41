// Command-line driver: single solves, continuation sweeps, and built-in
// verification studies for the mixed boson-fermion star solver.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <bfstar/bfstar.hpp>

namespace fs = std::filesystem;

namespace {

using namespace bfstar;

constexpr int kExitConverged = 0;
constexpr int kExitNoConvergence = 2;
constexpr int kExitBadConfig = 3;
constexpr int kExitIo = 4;

struct CliOverrides {
  std::string config_path;
  std::optional<double> sigma_c, mu_c, lambda, gamma, b;
  std::optional<int> n, max_iter;
  std::optional<double> x_inf, eps, tau_min;
  std::optional<std::string> grading;
  std::optional<std::string> sweep_spec;
  std::optional<std::string> out_dir;
  std::optional<double> guess_nu, guess_phi, guess_rs, guess_omega;
  bool emit_plots = false;
  bool keep_profiles = false;
  bool parallel = false;
};

void add_common_options(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path,
                  "configuration file ([physics]/[numerics]/[guess]/[sweep]/[output])");
  cmd->add_option("--sigma-c", o.sigma_c, "central boson amplitude sigma_c");
  cmd->add_option("--mu-c", o.mu_c, "central Fermi momentum mu_c");
  cmd->add_option("--lambda", o.lambda, "boson quartic self-coupling");
  cmd->add_option("--gamma", o.gamma, "dilaton-to-boson mass ratio");
  cmd->add_option("--b", o.b, "fermionic energy-density scale");
  cmd->add_option("--n", o.n, "subinterval count of the mesh");
  cmd->add_option("--x-inf", o.x_inf, "truncation radius (actual infinity)");
  cmd->add_option("--grading", o.grading, "mesh grading: uniform or condensed[:strength]");
  cmd->add_option("--eps", o.eps, "termination threshold on the residual");
  cmd->add_option("--max-iter", o.max_iter, "outer iteration budget");
  cmd->add_option("--tau-min", o.tau_min, "damping clamp");
  cmd->add_option("--guess-nu-center", o.guess_nu, "initial-guess center value of nu");
  cmd->add_option("--guess-phi-center", o.guess_phi, "initial-guess center value of phi");
  cmd->add_option("--guess-r-s", o.guess_rs, "initial radius seed");
  cmd->add_option("--guess-omega", o.guess_omega, "initial frequency seed");
  cmd->add_option("--out", o.out_dir, "output directory (default: $BFSTAR_OUT or '.')");
  cmd->add_flag("--emit-plots", o.emit_plots, "also write gnuplot scripts");
}

SweepConfig parse_sweep_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(spec);
  while (std::getline(in, item, ':')) parts.push_back(item);
  if (parts.size() != 4)
    throw std::invalid_argument("--sweep expects param:start:stop:step, got '" + spec + "'");
  SweepConfig sw;
  sw.parameter = parts[0];
  try {
    sw.start = std::stod(parts[1]);
    sw.stop = std::stod(parts[2]);
    sw.step = std::stod(parts[3]);
  } catch (const std::exception&) {
    throw std::invalid_argument("--sweep range values must be numbers, got '" + spec + "'");
  }
  return sw;
}

RunConfig build_config(const CliOverrides& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg = load_config(o.config_path);
  if (o.sigma_c) cfg.params.sigma_c = *o.sigma_c;
  if (o.mu_c) cfg.params.mu_c = *o.mu_c;
  if (o.lambda) cfg.params.lambda = *o.lambda;
  if (o.gamma) cfg.params.gamma = *o.gamma;
  if (o.b) cfg.params.b = *o.b;
  if (o.n) cfg.numerics.n = *o.n;
  if (o.x_inf) cfg.numerics.x_inf = *o.x_inf;
  if (o.eps) cfg.numerics.eps = *o.eps;
  if (o.max_iter) cfg.numerics.max_iter = *o.max_iter;
  if (o.tau_min) cfg.numerics.tau_min = *o.tau_min;
  if (o.grading) {
    const std::string& g = *o.grading;
    const size_t colon = g.find(':');
    const std::string kind = g.substr(0, colon);
    if (kind == "uniform") {
      cfg.numerics.grading = Grading::uniform;
    } else if (kind == "condensed") {
      cfg.numerics.grading = Grading::condensed;
    } else {
      throw std::invalid_argument("--grading must be uniform or condensed[:strength]");
    }
    if (colon != std::string::npos) {
      try {
        cfg.numerics.grading_strength = std::stod(g.substr(colon + 1));
      } catch (const std::exception&) {
        throw std::invalid_argument("--grading strength must be a number, got '" + g + "'");
      }
    }
  }
  if (o.guess_nu) cfg.guess.nu_center = *o.guess_nu;
  if (o.guess_phi) cfg.guess.phi_center = *o.guess_phi;
  if (o.guess_rs) cfg.guess.r_s = *o.guess_rs;
  if (o.guess_omega) cfg.guess.omega = *o.guess_omega;
  if (o.sweep_spec) cfg.sweep = parse_sweep_spec(*o.sweep_spec);
  if (o.out_dir) cfg.output.directory = *o.out_dir;
  if (o.emit_plots) cfg.output.emit_plots = true;
  if (o.keep_profiles) cfg.output.keep_profiles = true;
  cfg.validate();
  return cfg;
}

fs::path resolve_outdir(const RunConfig& cfg) {
  if (!cfg.output.directory.empty()) return cfg.output.directory;
  if (const char* env = std::getenv("BFSTAR_OUT"); env != nullptr && *env != '\0') return env;
  return ".";
}

int prepare_outdir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory " << dir << ": " << ec.message() << "\n";
    return kExitIo;
  }
  return kExitConverged;
}

Grid make_mesh(const NumericsConfig& nm) {
  return build_grid(nm.n, nm.x_inf, nm.grading, nm.grading_strength);
}

SolveOptions solver_options(const NumericsConfig& nm) {
  SolveOptions opt;
  opt.eps = nm.eps;
  opt.max_iter = nm.max_iter;
  opt.tau_min = nm.tau_min;
  return opt;
}

struct Outcome {
  FieldState state;
  SolveReport report;
};

Outcome run_cold(const RunConfig& cfg, const PhysicalParams& params, const Grid& grid) {
  FieldState init = default_initial_guess(params, grid, cfg.guess);
  auto result = solve(init, solver_options(cfg.numerics));
  return {std::move(result.first), std::move(result.second)};
}

void print_state_summary(const Outcome& out) {
  const FieldState& st = out.state;
  std::cout << "converged: " << (out.report.converged ? "true" : "false") << " ("
            << out.report.iterations << " iterations, " << out.report.termination_reason
            << ")\n";
  std::cout << "r_s       = " << detail::fmt(st.pair.r_s) << "\n";
  std::cout << "omega     = " << detail::fmt(st.pair.omega) << "\n";
  std::cout << "nu(0)     = " << detail::fmt(st.y.value(0)[0]) << "\n";
  std::cout << "omega_hat = " << detail::fmt(asymptotic_frequency(st)) << "\n";
}

int cmd_solve(const RunConfig& cfg) {
  const fs::path outdir = resolve_outdir(cfg);
  if (int rc = prepare_outdir(outdir); rc != kExitConverged) return rc;

  const Grid grid = make_mesh(cfg.numerics);
  const Outcome out = run_cold(cfg, cfg.params, grid);

  std::ofstream pf(outdir / "profile.dat");
  if (!pf) throw IoError("cannot open " + (outdir / "profile.dat").string());
  write_profile(pf, out.state, out.report, cfg);
  std::ofstream rf(outdir / "report.txt");
  if (!rf) throw IoError("cannot open " + (outdir / "report.txt").string());
  write_report(rf, out.report);
  if (cfg.output.emit_plots) {
    std::ofstream gf(outdir / "profile.gp");
    if (!gf) throw IoError("cannot open " + (outdir / "profile.gp").string());
    write_profile_plot_script(gf, "profile.dat");
  }

  print_state_summary(out);
  std::cout << "wrote " << (outdir / "profile.dat").string() << ", "
            << (outdir / "report.txt").string() << "\n";
  return out.report.converged ? kExitConverged : kExitNoConvergence;
}

std::vector<double> sweep_targets(const SweepConfig& sw) {
  std::vector<double> targets;
  const double dir = sw.step > 0.0 ? 1.0 : -1.0;
  const double tol = 1e-9 * std::max({1.0, std::fabs(sw.start), std::fabs(sw.stop)});
  for (int k = 0;; ++k) {
    const double v = sw.start + k * sw.step;
    if (dir * (v - sw.stop) > tol) break;
    targets.push_back(v);
  }
  return targets;
}

void write_point_profile(const fs::path& outdir, const RunConfig& cfg, const SweepConfig& sw,
                         size_t index, double value, const Outcome& out) {
  RunConfig point_cfg = cfg;
  *param_by_name(point_cfg.params, sw.parameter) = value;
  std::ostringstream name;
  name << "profile_" << std::setw(3) << std::setfill('0') << index << ".dat";
  std::ofstream f(outdir / name.str());
  if (!f) throw IoError("cannot open " + (outdir / name.str()).string());
  write_profile(f, out.state, out.report, point_cfg);
}

int cmd_sweep(const RunConfig& cfg, bool parallel) {
  const fs::path outdir = resolve_outdir(cfg);
  if (int rc = prepare_outdir(outdir); rc != kExitConverged) return rc;

  const Grid grid = make_mesh(cfg.numerics);
  const SweepConfig& sw = *cfg.sweep;
  const std::vector<double> targets = sweep_targets(sw);

  std::vector<SweepRow> rows;
  rows.reserve(targets.size());
  int failures = 0;
  bool aborted = false;

  if (parallel) {
    // Opt-in independent mode: every point cold-started, order-free.
    std::vector<std::future<Outcome>> futures;
    futures.reserve(targets.size());
    for (double target : targets) {
      futures.push_back(std::async(std::launch::async, [&cfg, &grid, &sw, target] {
        PhysicalParams p = cfg.params;
        *param_by_name(p, sw.parameter) = target;
        return run_cold(cfg, p, grid);
      }));
    }
    for (size_t i = 0; i < futures.size(); ++i) {
      const Outcome out = futures[i].get();
      rows.push_back(make_sweep_row(targets[i], out.state, out.report));
      if (out.report.converged) {
        if (cfg.output.keep_profiles) write_point_profile(outdir, cfg, sw, i, targets[i], out);
      } else {
        ++failures;
      }
    }
  } else {
    // Default continuation chain: warm-start each point from the previous
    // solution; on failure, walk toward the target through midpoints.
    std::optional<FieldState> prev;
    double prev_value = 0.0;
    int consecutive = 0;
    const auto attempt = [&](double value, const std::optional<FieldState>& base) -> Outcome {
      PhysicalParams p = cfg.params;
      *param_by_name(p, sw.parameter) = value;
      if (base) {
        auto result = solve(warm_restart(*base, p), solver_options(cfg.numerics));
        return {std::move(result.first), std::move(result.second)};
      }
      return run_cold(cfg, p, grid);
    };

    for (size_t i = 0; i < targets.size(); ++i) {
      const double target = targets[i];
      Outcome out = attempt(target, prev);
      if (!out.report.converged && prev) {
        double reached = prev_value;
        for (int tries = 0; tries < 6 && !out.report.converged; ++tries) {
          const double mid = 0.5 * (reached + target);
          if (std::fabs(target - reached) < 1e-6 * std::max(1.0, std::fabs(target))) break;
          Outcome midpoint = attempt(mid, prev);
          if (!midpoint.report.converged) break;
          prev = std::move(midpoint.state);
          reached = mid;
          prev_value = mid;
          out = attempt(target, prev);
        }
      }
      if (out.report.converged) {
        rows.push_back(make_sweep_row(target, out.state, out.report));
        if (cfg.output.keep_profiles) write_point_profile(outdir, cfg, sw, i, target, out);
        prev = std::move(out.state);
        prev_value = target;
        consecutive = 0;
      } else {
        rows.push_back(make_sweep_row(target, out.state, out.report));
        ++failures;
        if (++consecutive >= 3) {
          aborted = true;
          std::cerr << "aborting sweep: " << consecutive << " consecutive failed points\n";
          break;
        }
      }
    }
  }

  std::ofstream sf(outdir / "sweep.dat");
  if (!sf) throw IoError("cannot open " + (outdir / "sweep.dat").string());
  write_sweep_summary(sf, sw.parameter, rows);
  if (cfg.output.emit_plots) {
    std::ofstream gf(outdir / "sweep.gp");
    if (!gf) throw IoError("cannot open " + (outdir / "sweep.gp").string());
    write_sweep_plot_script(gf, "sweep.dat", sw.parameter);
  }

  std::cout << "sweep over " << sw.parameter << ": " << rows.size() << " of " << targets.size()
            << " points attempted, " << (rows.size() - static_cast<size_t>(failures))
            << " converged\n";
  std::cout << "wrote " << (outdir / "sweep.dat").string() << "\n";
  return (failures == 0 && !aborted) ? kExitConverged : kExitNoConvergence;
}

struct Check {
  std::string text;
  bool ok = false;
};

int cmd_verify(const RunConfig& cfg) {
  const fs::path outdir = resolve_outdir(cfg);
  if (int rc = prepare_outdir(outdir); rc != kExitConverged) return rc;

  std::vector<Check> checks;
  std::ostringstream line;
  const auto push = [&checks, &line](bool ok) {
    checks.push_back({line.str(), ok});
    line.str("");
  };

  // Analytic Jacobian blocks against central differences at generic points.
  {
    double worst = 0.0;
    const SpectralPair pair{1.2, 0.85};
    const struct {
      double x, mu;
      FieldVector fv;
    } samples[] = {
        {0.25, 2.0, {{-0.9, -0.05, 0.7}, {0.4, 0.03, -0.3}}},
        {0.7, 0.8, {{-0.5, -0.04, 0.3}, {0.3, 0.02, -0.25}}},
        {1.5, 0.0, {{-0.3, -0.01, 0.05}, {0.1, 0.005, -0.04}}},
    };
    for (const auto& s : samples)
      worst = std::max(worst, frechet_fd_audit(s.x, s.fv, s.mu, pair, cfg.params));
    line << "jacobian audit: max relative error " << std::scientific << std::setprecision(2)
         << worst << " (threshold 1e-6)";
    push(worst < 1e-6);
  }

  // Mesh-refinement orders on nested surface-condensed meshes.  The
  // condensation is pinned here regardless of the configured grading: on
  // uniform meshes the fermionic density's limited smoothness at the surface
  // hides the clean discretization order this check is after.
  std::optional<FieldState> base_state;
  {
    const char* names[5] = {"nu(1)", "phi(1)", "sigma(1)", "r_s", "omega"};
    std::array<double, 5> obs[3];
    bool solved = true;
    for (int level = 0; level < 3 && solved; ++level) {
      NumericsConfig nm = cfg.numerics;
      nm.n = 128 << level;
      nm.grading = Grading::condensed;
      nm.grading_strength = 0.25;
      const Grid grid = make_mesh(nm);
      Outcome out = run_cold(cfg, cfg.params, grid);
      solved = out.report.converged;
      obs[level] = mesh_observables(out.state);
      if (level == 0 && solved) base_state = std::move(out.state);
    }
    line << "mesh orders (surface-condensed, n = 128, 256, 512): ";
    bool ok = solved;
    if (!solved) {
      line << "a refinement solve did not converge";
    } else {
      for (int k = 0; k < 5; ++k) {
        const auto p = runge_order({obs[0][k], obs[1][k], obs[2][k]});
        line << names[k] << " ";
        if (p) {
          line << std::fixed << std::setprecision(2) << *p;
          ok = ok && *p >= 3.5 && *p <= 4.5;
        } else {
          line << "undefined";
          ok = false;
        }
        line << (k + 1 < 5 ? ", " : "");
      }
      line << " (band [3.5, 4.5])";
    }
    push(ok);
  }

  // Far-field decay under doubling of the truncation radius, with the mesh
  // refined in proportion so the resolution stays fixed.
  {
    std::vector<FarFieldEntry> entries;
    double phi1[3] = {0, 0, 0}, sg1[3] = {0, 0, 0};
    bool solved = true;
    for (int level = 0; level < 3 && solved; ++level) {
      NumericsConfig nm = cfg.numerics;
      nm.n = cfg.numerics.n << level;
      nm.x_inf = cfg.numerics.x_inf * static_cast<double>(1 << level);
      const Grid grid = make_mesh(nm);
      Outcome out = run_cold(cfg, cfg.params, grid);
      solved = out.report.converged;
      entries.push_back(farfield_entry(out.state));
      const auto obs = mesh_observables(out.state);
      phi1[level] = obs[1];
      sg1[level] = obs[2];
    }
    bool ok = solved;
    if (!solved) {
      line << "far-field: a doubling solve did not converge";
      push(false);
    } else {
      const FarFieldReport ff = farfield_decay(entries);
      line << "far-field decay ratios (x_inf = " << cfg.numerics.x_inf << " doubling): ";
      for (size_t k = 0; k < ff.ratios.size(); ++k) {
        line << std::fixed << std::setprecision(3) << ff.ratios[k]
             << (k + 1 < ff.ratios.size() ? ", " : "");
        ok = ok && ff.ratios[k] >= 3.8 && ff.ratios[k] <= 4.3;
      }
      line << " (band [3.8, 4.3])";
      push(ok);

      double drift = 0.0;
      for (int level = 1; level < 3; ++level) {
        drift = std::max(drift, std::fabs(phi1[level] - phi1[0]) / std::fabs(phi1[0]));
        drift = std::max(drift, std::fabs(sg1[level] - sg1[0]) / std::fabs(sg1[0]));
      }
      line << "surface drift under x_inf doubling: max relative change " << std::scientific
           << std::setprecision(2) << drift << " (threshold 1e-4)";
      push(drift < 1e-4);
    }
  }

  // First-integral consistency of the base converged state.
  {
    if (base_state) {
      const double r = first_integral_residual(*base_state);
      line << "first-integral residual: " << std::scientific << std::setprecision(2) << r
           << " (threshold 1e-10)";
      push(r <= 1e-10);
    } else {
      line << "first-integral residual: base solve did not converge";
      push(false);
    }
  }

  bool all_ok = true;
  std::ostringstream report;
  for (const Check& c : checks) {
    report << (c.ok ? "PASS" : "FAIL") << "  " << c.text << "\n";
    all_ok = all_ok && c.ok;
  }
  report << "verdict: " << (all_ok ? "PASS" : "FAIL") << "\n";

  std::cout << report.str();
  std::ofstream vf(outdir / "verify.txt");
  if (!vf) throw IoError("cannot open " + (outdir / "verify.txt").string());
  vf << report.str();
  if (!vf) throw IoError("failed writing verify.txt");
  return all_ok ? kExitConverged : kExitNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"static mixed boson-fermion stars in scalar-tensor gravity with a massive "
               "dilaton: spline-collocation eigenvalue solver"};
  app.require_subcommand(1);
  CliOverrides o;

  CLI::App* c_solve =
      app.add_subcommand("solve", "solve one configuration and write its radial profile");
  add_common_options(c_solve, o);
  CLI::App* c_sweep =
      app.add_subcommand("sweep", "continuation sweep over one physical parameter");
  add_common_options(c_sweep, o);
  c_sweep->add_option("--sweep", o.sweep_spec,
                      "sweep range param:start:stop:step (e.g. sigma_c:0.1:0.9:0.05)");
  c_sweep->add_flag("--keep-profiles", o.keep_profiles, "write a profile per sweep point");
  c_sweep->add_flag("--parallel", o.parallel,
                    "cold-start all points and run them concurrently");
  CLI::App* c_verify =
      app.add_subcommand("verify", "run the built-in verification studies and report pass/fail");
  add_common_options(c_verify, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitConverged : kExitBadConfig;
  }

  RunConfig cfg;
  try {
    cfg = build_config(o);
    if (c_sweep->parsed() && !cfg.sweep)
      throw std::invalid_argument(
          "sweep requested without a range (--sweep or a [sweep] config section)");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadConfig;
  }

  try {
    if (c_solve->parsed()) return cmd_solve(cfg);
    if (c_sweep->parsed()) return cmd_sweep(cfg, o.parallel);
    return cmd_verify(cfg);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  }
}
