#pragma once

// Outer nonlinear iteration: the continuous analogue of Newton's method for
// the coupled field equations together with the two spectral unknowns
// (scaled star radius R_s, boson frequency Omega).
//
// One iteration:
//   1. linearize around the current spline state and solve the three
//      collocation BVPs u, v, w against one LU factorization;
//   2. close the 2x2 algebraic system for the spectral increments
//      (rho, omega) from the center-amplitude and surface conditions;
//   3. pick the damping factor tau by the Kalitkin-Ermakov rule
//      tau = delta(0) / (delta(0) + delta(1)), clamped and halved if the
//      trial state is worse or not evaluable;
//   4. Euler update  y += tau (u + rho v + omega w),  R_s += tau rho,
//      Omega += tau omega;  then refresh the Fermi momentum from the
//      first integral.
// Iterations stop when the composite residual drops below eps.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "collocation.hpp"
#include "grid.hpp"
#include "model.hpp"
#include "spline.hpp"

namespace bfstar {

// The 2x2 system tying (rho, omega) to the boundary/surface conditions has
// become numerically singular: no unique spectral update direction exists.
class DegenerateUpdate : public std::runtime_error {
 public:
  explicit DegenerateUpdate(double det)
      : std::runtime_error("spectral update system is degenerate (det = " + std::to_string(det) +
                           ")") {}
};

// Full unknown of the nonlinear problem: the three-field spline, the
// per-node Fermi momentum inside the star, and the spectral pair.
struct FieldState {
  SplineFunction y;        // (nu, phi, sigma)
  std::vector<double> mu;  // raw first-integral values at nodes (may dip
                           // below zero for unphysical iterates)
  SpectralPair pair{};
  PhysicalParams params{};
  const CouplingModel* model = &default_model();

  explicit FieldState(const Grid& grid)
      : y(grid), mu(static_cast<size_t>(grid.node_count()), 0.0) {}

  // Continuous Fermi momentum from the first integral, clamped to the
  // physical range; zero outside the star.
  double mu_at(double x, double nu_x, double phi_x) const {
    if (x > 1.0) return 0.0;
    const double a0 = model->A(y.value(0)[1]);
    const double ax = model->A(phi_x);
    const double ratio = a0 / ax;
    const double raw =
        (1.0 + params.mu_c) * ratio * ratio * std::exp(y.value(0)[0] - nu_x) - 1.0;
    return raw > 0.0 ? raw : 0.0;
  }
  double mu_at(double x) const {
    if (x > 1.0) return 0.0;
    const SplineEval e = y.eval(x);
    return mu_at(x, e.value[0], e.value[1]);
  }
};

// Node values of the Fermi momentum from the first integral of the matter
// equations.  The center value is pinned to mu_c and the surface node to
// zero; interior nodes keep the raw formula value so that unphysical
// iterates (negative momentum) remain visible to diagnostics.
inline std::vector<double> mu_update(const SplineFunction& y, const PhysicalParams& p,
                                     const CouplingModel& model = default_model()) {
  const Grid& grid = y.grid();
  std::vector<double> mu(static_cast<size_t>(grid.node_count()), 0.0);
  const int ns = grid.n_star();
  const double nu0 = y.value(0)[0];
  const double a0 = model.A(y.value(0)[1]);
  mu[0] = p.mu_c;
  for (int i = 1; i < ns; ++i) {
    const double ax = model.A(y.value(i)[1]);
    const double ratio = a0 / ax;
    mu[static_cast<size_t>(i)] =
        (1.0 + p.mu_c) * ratio * ratio * std::exp(nu0 - y.value(i)[0]) - 1.0;
  }
  // The surface condition mu(1) = 0 is enforced through the spectral pair,
  // not through this formula; the node is pinned so downstream consumers
  // never see a stale surface value.
  mu[static_cast<size_t>(ns)] = 0.0;
  return mu;
}

inline void refresh_mu(FieldState& state) {
  state.mu = mu_update(state.y, state.params, *state.model);
}

// Residual of the surface condition in first-integral form:
// ln(1 + mu_c) - [nu + 2 alpha phi] taken between the center and the surface.
inline double surface_condition_residual(const FieldState& state) {
  const int ns = state.y.grid().n_star();
  const double al = state.model->alpha(state.y.value(0)[1]);
  const Vec3& y0 = state.y.value(0);
  const Vec3& y1 = state.y.value(ns);
  return std::log(1.0 + state.params.mu_c) - (y1[0] - y0[0]) - 2.0 * al * (y1[1] - y0[1]);
}

// Residual of the central boson-amplitude condition sigma(0) = sigma_c.
inline double central_amplitude_residual(const FieldState& state) {
  return state.params.sigma_c - state.y.value(0)[2];
}

// Quadrature L2 norm of the strong residual x y'' + y' - F over all
// collocation points.  Interval weights keep the norm mesh-independent and
// stop roundoff in y'' on strongly graded meshes from dominating.
inline double collocation_residual(const FieldState& state) {
  const Grid& grid = state.y.grid();
  const double theta[2] = {kGauss1, kGauss2};
  double ss = 0.0;
  for (int i = 0; i < grid.intervals(); ++i) {
    const double h = grid.step(i);
    const double x0 = grid.node(i);
    for (int q = 0; q < 2; ++q) {
      const double x = x0 + theta[q] * h;
      const SplineEval e = state.y.eval_local(i, theta[q]);
      const FieldVector fv{e.value, e.d1};
      const double mu = state.mu_at(x, e.value[0], e.value[1]);
      const Vec3 F = rhs_F(x, fv, mu, state.pair, state.params, *state.model);
      double rr = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double r = x * e.d2[k] + e.d1[k] - F[k];
        rr += r * r;
      }
      ss += 0.5 * h * rr;
    }
  }
  return std::sqrt(ss);
}

// Composite residual driving the damping rule and the termination test:
// the collocation residual plus the squared defects of the two conditions
// that determine the spectral pair.
inline double total_residual(const FieldState& state) {
  const double df = collocation_residual(state);
  const double r_amp = central_amplitude_residual(state);
  const double r_surf = surface_condition_residual(state);
  return std::max({df, r_amp * r_amp, r_surf * r_surf});
}

// total_residual on a trial state: metric breakdown or non-finite values
// map to +infinity so the step controller backs off instead of aborting.
inline double trial_residual(const FieldState& state) {
  try {
    const double d = total_residual(state);
    return std::isfinite(d) ? d : std::numeric_limits<double>::infinity();
  } catch (const MetricBreakdown&) {
    return std::numeric_limits<double>::infinity();
  }
}

struct LinearizedStep {
  SplineFunction u;  // residual-correction direction
  SplineFunction v;  // radius direction
  SplineFunction w;  // frequency direction
  double rho = 0.0;    // radius increment at tau = 1
  double omega = 0.0;  // frequency increment at tau = 1
  double delta_f = 0.0;  // collocation residual norm of the current state
};

// Linearize around `state`, solve the three collocation BVPs on one
// factorization, and close the 2x2 system for (rho, omega).
inline LinearizedStep linearized_step(const FieldState& state) {
  const Grid& grid = state.y.grid();
  const int n = grid.intervals();

  double ss = 0.0;
  const PointCallback point = [&state, &grid, &ss](int i, double x, const SplineEval& e) {
    PointLinearization lin;
    const FieldVector fv{e.value, e.d1};
    const double mu = state.mu_at(x, e.value[0], e.value[1]);
    PointJacobian jac;
    const PointEval pe =
        eval_with_jacobian(x, fv, mu, state.pair, state.params, jac, *state.model);
    double rr = 0.0;
    for (int k = 0; k < 3; ++k) {
      lin.rhs_u[k] = x * e.d2[k] + e.d1[k] - pe.F[k];
      lin.rhs_v[k] = -jac.dF_dRs[k];
      lin.rhs_w[k] = -jac.dF_dOmega[k];
      rr += lin.rhs_u[k] * lin.rhs_u[k];
    }
    lin.Jy = jac.dF_dy;
    lin.Jyp = jac.dF_dyp;
    ss += 0.5 * grid.step(i) * rr;
    return lin;
  };

  const Vec3 left{-state.y.moment(0)[0], -state.y.moment(0)[1], -state.y.moment(0)[2]};
  const Vec3 right{-state.y.value(n)[0], -state.y.value(n)[1], -state.y.value(n)[2]};
  LinearDirections dirs = solve_linearized(state.y, point, left, right);

  // Close the spectral increments: row 1 linearizes the surface condition,
  // row 2 the center amplitude condition.
  const int ns = grid.n_star();
  const double al = state.model->alpha(state.y.value(0)[1]);
  const auto comb = [al](const Vec3& z) { return z[0] + 2.0 * al * z[1]; };
  const double a1 = comb(dirs.v.value(ns)) - comb(dirs.v.value(0));
  const double b1 = comb(dirs.w.value(ns)) - comb(dirs.w.value(0));
  const double c1 =
      surface_condition_residual(state) - (comb(dirs.u.value(ns)) - comb(dirs.u.value(0)));
  const double a2 = dirs.v.value(0)[2];
  const double b2 = dirs.w.value(0)[2];
  const double c2 = central_amplitude_residual(state) - dirs.u.value(0)[2];

  const double det = a1 * b2 - a2 * b1;
  const double scale = std::max({std::fabs(a1) * std::fabs(b2), std::fabs(a2) * std::fabs(b1),
                                 std::numeric_limits<double>::min()});
  if (!(std::fabs(det) > 1e-14 * scale)) throw DegenerateUpdate(det);

  LinearizedStep step{std::move(dirs.u), std::move(dirs.v), std::move(dirs.w)};
  step.rho = (c1 * b2 - c2 * b1) / det;
  step.omega = (a1 * c2 - a2 * c1) / det;
  step.delta_f = std::sqrt(ss);
  return step;
}

// Damped Euler update of the full unknown.  The mu array is left stale on
// purpose: residual evaluation uses the continuous first-integral formula,
// and accepted states are refreshed by the solver.
inline FieldState euler_update(const FieldState& state, const LinearizedStep& step, double tau) {
  FieldState out = state;
  const int nodes = state.y.grid().node_count();
  for (int i = 0; i < nodes; ++i) {
    for (int k = 0; k < 3; ++k) {
      out.y.value(i)[k] += tau * (step.u.value(i)[k] + step.rho * step.v.value(i)[k] +
                                  step.omega * step.w.value(i)[k]);
      out.y.moment(i)[k] += tau * (step.u.moment(i)[k] + step.rho * step.v.moment(i)[k] +
                                   step.omega * step.w.moment(i)[k]);
    }
  }
  out.pair.r_s += tau * step.rho;
  out.pair.omega += tau * step.omega;
  return out;
}

// Kalitkin-Ermakov damping: tau = delta(0) / (delta(0) + delta(1)), clamped
// into [tau_min, 1].  If the full trial step is not evaluable (metric
// breakdown), halve tau until it is.
inline double optimal_tau(const FieldState& state, const LinearizedStep& step, double delta0,
                          double tau_min = 1e-3) {
  const double delta1 = trial_residual(euler_update(state, step, 1.0));
  if (!std::isfinite(delta1)) {
    double tau = 0.5;
    while (tau > tau_min && !std::isfinite(trial_residual(euler_update(state, step, tau)))) {
      tau *= 0.5;
    }
    return std::max(tau, tau_min);
  }
  const double tau = (delta0 + delta1 > 0.0) ? delta0 / (delta0 + delta1) : 1.0;
  return std::clamp(tau, tau_min, 1.0);
}

struct SolveOptions {
  double eps = 1e-10;     // termination threshold on the composite residual
  int max_iter = 40;      // outer iteration budget
  double tau_min = 1e-3;  // damping clamp
  int max_halvings = 20;  // backoff budget per iteration
  int stall_limit = 10;   // consecutive non-improving steps before giving up
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;      // accepted delta per iteration
  std::vector<double> tau_history;           // accepted tau per iteration
  std::vector<SpectralPair> eigen_history;   // (R_s, Omega) per iteration
  bool converged = false;
  std::string termination_reason;
};

inline std::pair<FieldState, SolveReport> solve(const FieldState& initial,
                                                const SolveOptions& opts = {}) {
  FieldState state = initial;
  refresh_mu(state);
  SolveReport report;
  double best = std::numeric_limits<double>::infinity();
  int stall = 0;

  for (int it = 0; it < opts.max_iter; ++it) {
    const LinearizedStep step = linearized_step(state);
    const double delta0 = total_residual(state);
    if (delta0 < opts.eps) {
      report.converged = true;
      report.termination_reason = "residual below threshold";
      break;
    }

    double tau = optimal_tau(state, step, delta0, opts.tau_min);
    FieldState candidate = euler_update(state, step, tau);
    double delta = trial_residual(candidate);
    int halvings = 0;
    while (delta > delta0 && tau > opts.tau_min && halvings < opts.max_halvings) {
      tau *= 0.5;
      candidate = euler_update(state, step, tau);
      delta = trial_residual(candidate);
      ++halvings;
    }
    if (!std::isfinite(delta)) {
      report.iterations = it + 1;
      report.termination_reason = "diverged: trial states not evaluable at minimum step";
      break;
    }

    state = std::move(candidate);
    refresh_mu(state);
    report.iterations = it + 1;
    report.residual_history.push_back(delta);
    report.tau_history.push_back(tau);
    report.eigen_history.push_back(state.pair);

    if (delta < opts.eps) {
      report.converged = true;
      report.termination_reason = "residual below threshold";
      break;
    }
    if (delta >= best) {
      if (++stall >= opts.stall_limit) {
        report.termination_reason = "stalled: residual stopped decreasing above threshold";
        break;
      }
    } else {
      best = delta;
      stall = 0;
    }
  }

  if (report.termination_reason.empty()) {
    report.termination_reason = "iteration limit reached";
  }
  return {std::move(state), std::move(report)};
}

// Shape of the cold-start profile: Gaussian bumps with configurable center
// amplitudes and spectral seed.
struct GuessShape {
  double nu_center = -1.0;
  double phi_center = -0.05;
  double r_s = 1.0;
  double omega = 0.9;
};

inline FieldState default_initial_guess(const PhysicalParams& params, const Grid& grid,
                                        const GuessShape& shape = {},
                                        const CouplingModel& model = default_model()) {
  params.validate();
  FieldState state(grid);
  state.params = params;
  state.model = &model;
  state.pair = SpectralPair{shape.r_s, shape.omega};
  const double amp[3] = {shape.nu_center, shape.phi_center, params.sigma_c};
  for (int i = 0; i < grid.node_count(); ++i) {
    const double x = grid.node(i);
    const double e = std::exp(-x * x);
    for (int k = 0; k < 3; ++k) {
      state.y.value(i)[k] = amp[k] * e;
      state.y.moment(i)[k] = -2.0 * x * amp[k] * e;
    }
  }
  refresh_mu(state);
  return state;
}

// Continuation start: reuse a converged state for nearby parameters.  The
// boson amplitude is rescaled so the center condition sigma(0) = sigma_c
// holds exactly at the starting point; everything else carries over.
inline FieldState warm_restart(const FieldState& previous, const PhysicalParams& params) {
  params.validate();
  FieldState state = previous;
  state.params = params;
  const double prev_sigma = previous.params.sigma_c;
  if (prev_sigma > 0.0 && params.sigma_c != prev_sigma) {
    const double scale = params.sigma_c / prev_sigma;
    for (int i = 0; i < state.y.grid().node_count(); ++i) {
      state.y.value(i)[2] *= scale;
      state.y.moment(i)[2] *= scale;
    }
  }
  refresh_mu(state);
  return state;
}

// Domain continuation: transfer a converged state onto a new mesh, typically
// one with a larger truncation radius.  Inside the old domain the spline is
// re-interpolated; beyond it the fields are continued with their old outer
// boundary values and zero slope, which is a good start once the old domain
// already reaches the far-field regime.
inline FieldState regrid_state(const FieldState& previous, const Grid& grid) {
  FieldState state(grid);
  state.params = previous.params;
  state.model = previous.model;
  state.pair = previous.pair;
  const double x_old = previous.y.grid().x_inf();
  const SplineEval edge = previous.y.eval(x_old);
  for (int i = 0; i < grid.node_count(); ++i) {
    const double x = grid.node(i);
    if (x <= x_old) {
      const SplineEval e = previous.y.eval(x);
      state.y.value(i) = e.value;
      state.y.moment(i) = e.d1;
    } else {
      state.y.value(i) = edge.value;
      state.y.moment(i) = Vec3{};
    }
  }
  refresh_mu(state);
  return state;
}

}  // namespace bfstar
