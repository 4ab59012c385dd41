// Acceptance gate: one PASS/FAIL line per criterion, sub-check details
// indented below each line.  The process exit code equals the number of
// failed criteria, so the harness can gate on it directly.

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bfstar/bfstar.hpp"

using namespace bfstar;

namespace {

// Reference physical configuration used by criteria 1-4, 6 and 7.
const PhysicalParams kRefParams{0.8, 1.0, 0.01, 1.0, 1.0};
constexpr double kRefXInf = 32.0;
constexpr int kRefN = 512;

// Frozen reference observables for that configuration on a fine uniform
// mesh: nu(1), phi(1), sigma(1), R_s, Omega.
constexpr std::array<double, 5> kRefObservables{-1.0059342, -0.0471120, 0.4777491, 1.1608875,
                                                0.8006672};
constexpr std::array<const char*, 5> kObservableNames{"nu(1)", "phi(1)", "sigma(1)", "r_s",
                                                      "omega"};
constexpr double kObservableTol = 2e-3;   // criterion 1
constexpr double kOrderLo = 3.5;          // criterion 2 and 6e order band
constexpr double kOrderHi = 4.5;
constexpr double kRatioLo = 3.8;          // criterion 3 decay-ratio band
constexpr double kRatioHi = 4.3;
constexpr double kSurfaceDriftTol = 1e-4; // criterion 3 surface sensitivity
constexpr int kColdIterBudget = 20;       // criterion 4
constexpr double kShootTol = 1e-3;        // criterion 7

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct CheckList {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "    ok:   " : "    FAIL: ") + what);
  }
  void info(const std::string& what) { notes.push_back("    note: " + what); }
};

// Converged reference solution shared across criteria.
std::optional<FieldState> g_ref_state;
std::optional<SolveReport> g_ref_report;

bool ensure_reference(CheckList& c) {
  if (g_ref_state) return true;
  c.require(false, "reference solve unavailable (criterion 1 did not converge)");
  return false;
}

void criterion1(CheckList& c) {
  const Grid grid = build_grid(kRefN, kRefXInf);
  auto [state, report] = solve(default_initial_guess(kRefParams, grid));
  c.require(report.converged,
            "solver converged in " + std::to_string(report.iterations) + " iterations");
  if (!report.converged) return;

  const auto obs = mesh_observables(state);
  for (int j = 0; j < 5; ++j) {
    const double err = std::fabs(obs[static_cast<size_t>(j)] - kRefObservables[static_cast<size_t>(j)]);
    c.require(err <= kObservableTol,
              std::string(kObservableNames[static_cast<size_t>(j)]) + " = " +
                  num(obs[static_cast<size_t>(j)]) + " (reference " +
                  num(kRefObservables[static_cast<size_t>(j)]) + ", |error| = " + num(err) +
                  ", tolerance " + num(kObservableTol) + ")");
  }
  g_ref_state = std::move(state);
  g_ref_report = std::move(report);
}

void criterion2(CheckList& c) {
  // Nested surface-condensed meshes; the condensation restores the full
  // approximation order that the weak surface singularity of the fermionic
  // density otherwise degrades.
  std::array<std::array<double, 5>, 3> levels{};
  const int ns[3] = {128, 256, 512};
  for (int m = 0; m < 3; ++m) {
    const Grid grid = build_grid(ns[m], kRefXInf, Grading::condensed, 0.25);
    const auto [state, report] = solve(default_initial_guess(kRefParams, grid));
    c.require(report.converged, "n = " + std::to_string(ns[m]) + " converged in " +
                                    std::to_string(report.iterations) + " iterations");
    if (!report.converged) return;
    levels[static_cast<size_t>(m)] = mesh_observables(state);
  }
  for (int j = 0; j < 5; ++j) {
    const RungeTriple t{levels[0][static_cast<size_t>(j)], levels[1][static_cast<size_t>(j)],
                        levels[2][static_cast<size_t>(j)]};
    const auto p = runge_order(t);
    if (!p) {
      c.require(false, std::string(kObservableNames[static_cast<size_t>(j)]) +
                           ": non-monotone mesh triple, no order");
      continue;
    }
    c.require(*p >= kOrderLo && *p <= kOrderHi,
              std::string(kObservableNames[static_cast<size_t>(j)]) + " order = " + num(*p) +
                  " (band [" + num(kOrderLo) + ", " + num(kOrderHi) + "])");
  }
}

void criterion3(CheckList& c) {
  if (!ensure_reference(c)) return;

  // Domain-doubling ladder at fixed resolution h = 1/16, warm-started by
  // continuation from the previous domain.
  std::vector<FarFieldEntry> entries{farfield_entry(*g_ref_state)};
  std::vector<double> phi1{mesh_observables(*g_ref_state)[1]};
  std::vector<double> sg1{mesh_observables(*g_ref_state)[2]};

  SolveOptions opts;
  opts.max_iter = 60;
  FieldState prev = *g_ref_state;
  for (double x_inf : {64.0, 128.0, 256.0}) {
    const Grid grid = build_grid(static_cast<int>(16.0 * x_inf), x_inf);
    const auto [state, report] = solve(regrid_state(prev, grid), opts);
    c.require(report.converged, "x_inf = " + num(x_inf) + " converged in " +
                                    std::to_string(report.iterations) + " iterations");
    if (!report.converged) return;
    entries.push_back(farfield_entry(state));
    const auto obs = mesh_observables(state);
    phi1.push_back(obs[1]);
    sg1.push_back(obs[2]);
    prev = state;
  }

  const FarFieldReport rep = farfield_decay(entries);
  for (size_t k = 0; k < rep.ratios.size(); ++k) {
    c.require(rep.ratios[k] >= kRatioLo && rep.ratios[k] <= kRatioHi,
              "nu'(" + num(entries[k].x_inf) + ") / nu'(" + num(entries[k + 1].x_inf) +
                  ") = " + num(rep.ratios[k]) + " (band [" + num(kRatioLo) + ", " +
                  num(kRatioHi) + "])");
  }
  for (size_t k = 1; k < phi1.size(); ++k) {
    const double dp = std::fabs(phi1[k] - phi1[k - 1]) / std::fabs(phi1[k - 1]);
    const double ds = std::fabs(sg1[k] - sg1[k - 1]) / std::fabs(sg1[k - 1]);
    c.require(dp < kSurfaceDriftTol && ds < kSurfaceDriftTol,
              "surface drift at doubling " + std::to_string(k) + ": phi(1) " + num(dp) +
                  ", sigma(1) " + num(ds) + " (tolerance " + num(kSurfaceDriftTol) + ")");
  }
}

void criterion4(CheckList& c) {
  if (!ensure_reference(c)) return;
  const int cold = g_ref_report->iterations;
  c.require(cold <= kColdIterBudget, "cold start: " + std::to_string(cold) +
                                         " iterations (budget " +
                                         std::to_string(kColdIterBudget) + ")");

  PhysicalParams shifted = kRefParams;
  shifted.sigma_c += 0.05;
  const auto [state, report] = solve(warm_restart(*g_ref_state, shifted));
  c.require(report.converged, "warm restart at sigma_c = " + num(shifted.sigma_c) +
                                  " converged in " + std::to_string(report.iterations) +
                                  " iterations");
  c.require(report.converged && report.iterations < cold,
            "warm iterations " + std::to_string(report.iterations) + " < cold iterations " +
                std::to_string(cold));
}

void criterion5(CheckList& c) {
  const Grid grid = build_grid(512, 16.0);
  PhysicalParams params{0.1, 0.5, 10.0, 10.0, 1.0};
  SolveOptions opts;
  opts.max_iter = 100;

  std::vector<double> radii, freqs;
  std::optional<FieldState> prev;
  FieldState last(grid);
  int solved = 0, total = 0;
  for (int i = 0; i <= 16; ++i, ++total) {
    params.sigma_c = 0.1 + 0.05 * i;
    const FieldState init =
        prev ? warm_restart(*prev, params) : default_initial_guess(params, grid);
    auto [state, report] = solve(init, opts);
    if (!report.converged) {
      c.require(false, "sigma_c = " + num(params.sigma_c) + " failed: " +
                           report.termination_reason);
      continue;
    }
    ++solved;
    radii.push_back(state.pair.r_s);
    freqs.push_back(asymptotic_frequency(state));
    prev = state;
    last = std::move(state);
  }
  c.require(solved == total,
            std::to_string(solved) + " of " + std::to_string(total) + " sweep points converged");
  if (radii.size() < 2) return;

  bool radius_decreasing = true, freq_increasing = true;
  for (size_t k = 1; k < radii.size(); ++k) {
    if (!(radii[k] < radii[k - 1])) radius_decreasing = false;
    if (!(freqs[k] > freqs[k - 1])) freq_increasing = false;
  }
  c.require(radius_decreasing, "star radius strictly decreasing: " + num(radii.front()) +
                                   " ... " + num(radii.back()));
  const double ratio = radii.front() / radii.back();
  c.require(ratio >= 5.0 && ratio <= 20.0,
            "radius compression r_s(first)/r_s(last) = " + num(ratio) + " (band [5, 20])");
  c.require(freq_increasing, "asymptotic frequency strictly increasing: " + num(freqs.front()) +
                                 " ... " + num(freqs.back()));

  // Qualitative profile structure at the final sweep point.
  const Grid& g = last.y.grid();
  const int n = g.intervals(), ns = g.n_star();
  bool nu_negative = true, nu_rising_tail = true, sigma_decreasing = true, mu_positive = true;
  for (int i = 0; i < n; ++i) {
    if (!(last.y.value(i)[0] < 0.0)) nu_negative = false;
    if (i >= ns && last.y.value(i + 1)[0] < last.y.value(i)[0] - 1e-12) nu_rising_tail = false;
    if (last.y.value(i + 1)[2] > last.y.value(i)[2] + 1e-12) sigma_decreasing = false;
  }
  for (int i = 1; i < ns; ++i) {
    if (!(last.mu[static_cast<size_t>(i)] > 0.0)) mu_positive = false;
  }
  c.require(nu_negative, "nu < 0 everywhere inside the domain");
  c.require(nu_rising_tail, "nu increases toward zero outside the star");
  c.require(sigma_decreasing && std::fabs(last.y.value(n)[2]) < 1e-6,
            "sigma decreases monotonically to " + num(last.y.value(n)[2]) +
                " at the outer boundary");
  c.require(mu_positive && last.mu[static_cast<size_t>(ns)] == 0.0,
            "mu positive inside the star and exactly zero at the surface");
}

void criterion6(CheckList& c) {
  // (a) vacuum fixed point
  {
    const FieldVector vac{};
    const SpectralPair pair{1.16, 0.8};
    bool ok = true;
    double worst_f = 0.0, worst_l = 0.0;
    for (double x : {1e-3, 0.5, 1.0, 7.0, 31.0}) {
      const PointEval pe = eval_plain(x, vac, 0.0, pair, kRefParams);
      for (int k = 0; k < 3; ++k) worst_f = std::max(worst_f, std::fabs(pe.F[k]));
      worst_l = std::max(worst_l, std::fabs(pe.exp_lambda - 1.0));
    }
    ok = worst_f < 1e-14 && worst_l < 1e-14;
    c.require(ok, "vacuum fixed point: max |F| = " + num(worst_f) + ", max |exp(lambda) - 1| = " +
                      num(worst_l));
  }

  // (b) stress trace identities
  {
    const FieldVector fv{{-0.6, -0.04, 0.5}, {0.3, 0.02, -0.25}};
    const SpectralPair pair{1.16, 0.8};
    double worst = 0.0;
    for (double mu : {0.0, 0.4, 1.2}) {
      const StressBundle s = stress_components(fv, mu, 1.1, pair, kRefParams);
      worst = std::max(worst, std::fabs(s.traceF - (s.tF0 + s.tF1 + 2.0 * s.tF2)) /
                                  (1e-12 + std::fabs(s.traceF)));
      worst = std::max(worst, std::fabs(s.traceB - (s.tB0 + s.tB1 + 2.0 * s.tB2)) /
                                  (1e-12 + std::fabs(s.traceB)));
    }
    c.require(worst < 1e-12, "trace identities: max relative defect = " + num(worst));
  }

  // (c) analytic derivatives against finite-difference oracles
  {
    double worst = 0.0;
    for (double mu : {0.2, 0.9, 2.0}) {
      const FermiState st = fermi_state(mu);
      const double h = 1e-6;
      const double fd = (fermi_state(mu + h).f - fermi_state(mu - h).f) / (2.0 * h);
      worst = std::max(worst, std::fabs(st.fp - fd) / std::fabs(fd));
      worst = std::max(worst, std::fabs(st.f + st.g - st.f_plus_g) / st.f_plus_g);
    }
    const CouplingModel& model = default_model();
    for (double phi : {-0.3, -0.02}) {
      const double h = 1e-6;
      const double fd_v = (model.V(phi + h) - model.V(phi - h)) / (2.0 * h);
      worst = std::max(worst, std::fabs(model.Vp(phi) - fd_v) / (1e-12 + std::fabs(fd_v)));
    }
    for (double s2 : {0.1, 0.5}) {
      const double h = 1e-7;
      const double fd_w =
          (boson_potential(s2 + h, 0.01)[0] - boson_potential(s2 - h, 0.01)[0]) / (2.0 * h);
      worst = std::max(worst, std::fabs(boson_potential(s2, 0.01)[1] - fd_w) / std::fabs(fd_w));
    }
    const FieldVector fv{{-0.6, -0.04, 0.5}, {0.3, 0.02, -0.25}};
    const SpectralPair pair{1.16, 0.8};
    worst = std::max(worst, frechet_fd_audit(0.5, fv, 0.4, pair, kRefParams));
    worst = std::max(worst, frechet_fd_audit(1.5, fv, 0.0, pair, kRefParams));
    worst = std::max(worst, frechet_fd_audit(6.0, fv, 0.0, pair, kRefParams));
    c.require(worst < 1e-6, "derivative oracles: max relative error = " + num(worst));
  }

  // (d) Hermite interpolation conditions, bit-exact
  {
    const Grid grid = build_grid(16, 4.0, Grading::condensed, 0.25);
    SplineFunction s(grid);
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int i = 0; i < grid.node_count(); ++i) {
      for (int k = 0; k < 3; ++k) {
        s.value(i)[k] = dist(rng);
        s.moment(i)[k] = dist(rng);
      }
    }
    bool exact = true;
    for (int i = 0; i < grid.node_count(); ++i) {
      const SplineEval e = s.eval(grid.node(i));
      for (int k = 0; k < 3; ++k) {
        if (e.value[k] != s.value(i)[k] || e.d1[k] != s.moment(i)[k]) exact = false;
      }
    }
    c.require(exact, "Hermite interpolation conditions hold bit-exactly at all nodes");
  }

  // (e) manufactured linear problem at fourth order
  {
    const double X = 2.0;
    const auto z = [X](double x) { return (x * x - X * X) * (x * x * x + 1.0); };
    const auto zp = [X](double x) { return 5.0 * x * x * x * x + 2.0 * x - 3.0 * X * X * x * x; };
    const auto zpp = [X](double x) { return 20.0 * x * x * x + 2.0 - 6.0 * X * X * x; };
    const auto solve_once = [&](int n) {
      const Grid grid = build_grid(n, X);
      const SplineFunction background(grid);
      const PointCallback point = [&](int, double x, const SplineEval&) {
        PointLinearization lin;
        for (int k = 0; k < 3; ++k) lin.rhs_u[k] = -(x * zpp(x) + zp(x));
        return lin;
      };
      const LinearDirections dirs = solve_linearized(background, point, Vec3{}, Vec3{});
      double worst = 0.0;
      for (int i = 0; i < grid.node_count(); ++i) {
        worst = std::max(worst, std::fabs(dirs.u.value(i)[0] - z(grid.node(i))));
      }
      return worst;
    };
    const double e16 = solve_once(16), e32 = solve_once(32), e64 = solve_once(64);
    const double p1 = std::log2(e16 / e32), p2 = std::log2(e32 / e64);
    c.require(p1 >= kOrderLo && p1 <= kOrderHi && p2 >= kOrderLo && p2 <= kOrderHi,
              "manufactured problem orders = " + num(p1) + ", " + num(p2) + " (band [" +
                  num(kOrderLo) + ", " + num(kOrderHi) + "])");
  }

  // (f) one factorization, three right-hand sides
  if (ensure_reference(c)) {
    FactorizationStats::reset();
    linearized_step(*g_ref_state);
    const long nf = FactorizationStats::factor_count();
    const long nr = FactorizationStats::rhs_count();
    c.require(nf == 1 && nr == 3, "linearized step used " + std::to_string(nf) +
                                      " factorization(s) for " + std::to_string(nr) +
                                      " right-hand sides");
  }

  // (g) momentum update consistency with the first integral
  if (g_ref_state) {
    const double r = first_integral_residual(*g_ref_state);
    c.require(r <= 1e-12, "first-integral residual of the converged state = " + num(r));
  }

  // (h) contraction rate of the undamped iteration near the solution.
  // Superlinear (Newton-like) contraction demands that the per-step error
  // reduction factor shrink with the perturbation amplitude; a constant
  // factor means plain linear convergence.
  if (g_ref_state) {
    const FieldState& ref = *g_ref_state;
    std::vector<double> ratios;
    for (double amp : {1e-3, 5e-4, 2.5e-4}) {
      FieldState perturbed = ref;
      const Grid& grid = ref.y.grid();
      for (int i = 0; i < grid.node_count(); ++i) {
        const double bump = std::exp(-grid.node(i));
        for (int k = 0; k < 3; ++k) {
          perturbed.y.value(i)[k] += amp * bump;
          perturbed.y.moment(i)[k] -= amp * bump;
        }
      }
      perturbed.pair.r_s += amp;
      perturbed.pair.omega += amp;
      refresh_mu(perturbed);

      const double e0 = std::max(std::fabs(perturbed.pair.r_s - ref.pair.r_s),
                                 std::fabs(perturbed.pair.omega - ref.pair.omega));
      const LinearizedStep step = linearized_step(perturbed);
      FieldState next = euler_update(perturbed, step, 1.0);
      refresh_mu(next);
      const double e1 = std::max(std::fabs(next.pair.r_s - ref.pair.r_s),
                                 std::fabs(next.pair.omega - ref.pair.omega));
      ratios.push_back(e1 / e0);
    }
    c.info("error reduction factors at amplitudes 1e-3, 5e-4, 2.5e-4: " + num(ratios[0]) +
           ", " + num(ratios[1]) + ", " + num(ratios[2]));
    c.require(ratios[2] <= 0.5 * ratios[0],
              "reduction factor shrinks with amplitude (superlinear contraction)");
  }
}

void criterion7(CheckList& c) {
  if (!ensure_reference(c)) return;
  const Vec3 shot = shoot_surface_values(*g_ref_state);
  const Vec3& spline = g_ref_state->y.value(g_ref_state->y.grid().n_star());
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double d = std::fabs(shot[k] - spline[k]);
    worst = std::max(worst, d);
    c.info(std::string(kObservableNames[static_cast<size_t>(k)]) + ": shooting " + num(shot[k]) +
           " vs collocation " + num(spline[k]) + " (|diff| = " + num(d) + ")");
  }
  c.require(worst <= kShootTol, "max |difference| = " + num(worst) + " (tolerance " +
                                    num(kShootTol) + ")");
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* label;
    void (*fn)(CheckList&);
  };
  const Entry entries[] = {
      {1, "reference configuration observables", criterion1},
      {2, "mesh-convergence orders", criterion2},
      {3, "far-field decay law", criterion3},
      {4, "iteration economy", criterion4},
      {5, "continuation sweep monotonicity", criterion5},
      {6, "property suite", criterion6},
      {7, "independent shooting cross-check", criterion7},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    CheckList c;
    try {
      e.fn(c);
    } catch (const std::exception& ex) {
      c.require(false, std::string("unexpected exception: ") + ex.what());
    }
    std::printf("criterion %d (%s): %s\n", e.id, e.label, c.pass ? "PASS" : "FAIL");
    for (const std::string& note : c.notes) std::printf("%s\n", note.c_str());
    if (!c.pass) ++failures;
  }
  std::printf("%d of 7 criteria passed\n", 7 - failures);
  return failures;
}
