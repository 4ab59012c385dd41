#pragma once

// Verification instruments: mesh-convergence order estimation (Runge rule),
// the far-field 1/X^2 decay of nu', first-integral consistency of the Fermi
// momentum, finite-difference audits of the analytic Jacobian blocks, and an
// independent Runge-Kutta reintegration of the converged profile.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "canm.hpp"
#include "grid.hpp"
#include "model.hpp"
#include "spline.hpp"

namespace bfstar {

// One scalar observable computed on nested meshes with steps h, h/2, h/4.
struct RungeTriple {
  double coarse = 0.0;
  double medium = 0.0;
  double fine = 0.0;
};

// Observed convergence order p = log2((coarse - medium) / (medium - fine)).
// Returns nullopt when the difference ratio is not positive (the triple is
// non-monotone and no order can be assigned).
inline std::optional<double> runge_order(const RungeTriple& t) {
  const double den = t.medium - t.fine;
  if (den == 0.0) return std::nullopt;
  const double ratio = (t.coarse - t.medium) / den;
  if (!(ratio > 0.0)) return std::nullopt;
  return std::log2(ratio);
}

// The five standard observables of a converged state used in mesh studies:
// nu(1), phi(1), sigma(1), R_s, Omega.
inline std::array<double, 5> mesh_observables(const FieldState& state) {
  const int ns = state.y.grid().n_star();
  const Vec3& ys = state.y.value(ns);
  return {ys[0], ys[1], ys[2], state.pair.r_s, state.pair.omega};
}

struct FarFieldEntry {
  double x_inf = 0.0;     // truncation radius of the run
  double nu_prime = 0.0;  // nu'(x_inf) from the last spline moment
};

struct FarFieldReport {
  std::vector<double> c_values;  // nu'(X) * X^2 per entry (the decay constant)
  std::vector<double> ratios;    // nu'(X_k) / nu'(X_{k+1}); ~4 for 1/X^2 decay
};

inline FarFieldEntry farfield_entry(const FieldState& state) {
  const Grid& grid = state.y.grid();
  return {grid.x_inf(), state.y.moment(grid.intervals())[0]};
}

inline FarFieldReport farfield_decay(const std::vector<FarFieldEntry>& entries) {
  FarFieldReport report;
  report.c_values.reserve(entries.size());
  for (const FarFieldEntry& e : entries) {
    report.c_values.push_back(e.nu_prime * e.x_inf * e.x_inf);
  }
  for (size_t k = 0; k + 1 < entries.size(); ++k) {
    report.ratios.push_back(entries[k].nu_prime / entries[k + 1].nu_prime);
  }
  return report;
}

// Largest defect of the algebraic first integral between the center and any
// interior star node:  |ln[(1+mu)A^2(phi) / ((1+mu_c)A^2(phi_0))] + nu - nu_0|.
// States produced by mu_update satisfy this to roundoff by construction;
// larger values flag an inconsistent or hand-perturbed mu array.
inline double first_integral_residual(const FieldState& state) {
  const Grid& grid = state.y.grid();
  const int ns = grid.n_star();
  const double nu0 = state.y.value(0)[0];
  const double a0 = state.model->A(state.y.value(0)[1]);
  const double base = (1.0 + state.params.mu_c) * a0 * a0;
  double worst = 0.0;
  for (int i = 1; i < ns; ++i) {
    const double ai = state.model->A(state.y.value(i)[1]);
    const double arg = (1.0 + state.mu[static_cast<size_t>(i)]) * ai * ai / base;
    if (!(arg > 0.0)) return std::numeric_limits<double>::infinity();
    const double r = std::fabs(std::log(arg) + state.y.value(i)[0] - nu0);
    if (r > worst) worst = r;
  }
  return worst;
}

// Central-difference audit of all four analytic derivative blocks at one
// phase-space point; returns the largest relative error found.
inline double frechet_fd_audit(double x, const FieldVector& fv, double mu,
                               const SpectralPair& pair, const PhysicalParams& params,
                               const CouplingModel& model = default_model()) {
  PointJacobian jac;
  eval_with_jacobian(x, fv, mu, pair, params, jac, model);
  const double h = 1e-6;
  double worst = 0.0;
  const auto rel = [&worst](double fd, double an) {
    const double e = std::fabs(fd - an) / (1e-12 + std::fabs(fd));
    if (e > worst) worst = e;
  };
  for (int j = 0; j < 3; ++j) {
    FieldVector plus = fv, minus = fv;
    plus.y[j] += h;
    minus.y[j] -= h;
    const Vec3 fp = rhs_F(x, plus, mu, pair, params, model);
    const Vec3 fm = rhs_F(x, minus, mu, pair, params, model);
    for (int k = 0; k < 3; ++k) rel((fp[k] - fm[k]) / (2.0 * h), jac.dF_dy[k][j]);

    plus = fv, minus = fv;
    plus.yp[j] += h;
    minus.yp[j] -= h;
    const Vec3 gp = rhs_F(x, plus, mu, pair, params, model);
    const Vec3 gm = rhs_F(x, minus, mu, pair, params, model);
    for (int k = 0; k < 3; ++k) rel((gp[k] - gm[k]) / (2.0 * h), jac.dF_dyp[k][j]);
  }
  {
    SpectralPair plus = pair, minus = pair;
    plus.r_s += h;
    minus.r_s -= h;
    const Vec3 fp = rhs_F(x, fv, mu, plus, params, model);
    const Vec3 fm = rhs_F(x, fv, mu, minus, params, model);
    for (int k = 0; k < 3; ++k) rel((fp[k] - fm[k]) / (2.0 * h), jac.dF_dRs[k]);
  }
  {
    SpectralPair plus = pair, minus = pair;
    plus.omega += h;
    minus.omega -= h;
    const Vec3 fp = rhs_F(x, fv, mu, plus, params, model);
    const Vec3 fm = rhs_F(x, fv, mu, minus, params, model);
    for (int k = 0; k < 3; ++k) rel((fp[k] - fm[k]) / (2.0 * h), jac.dF_dOmega[k]);
  }
  return worst;
}

// Independent cross-check of a converged state: reintegrate the field
// equations as an initial-value problem with classical fourth-order
// Runge-Kutta from a center series start, evaluating the Fermi momentum
// from the first integral along the way, and return (nu, phi, sigma) at
// the star surface x = 1.  Shares only the point evaluation with the
// collocation solver, none of the spline or Newton machinery.
inline Vec3 shoot_surface_values(const FieldState& state, double x_start = 1e-3,
                                 double step = 1e-4) {
  const PhysicalParams& params = state.params;
  const SpectralPair pair = state.pair;
  const CouplingModel& model = *state.model;
  const Vec3 y0 = state.y.value(0);
  const double nu0 = y0[0];
  const double a0 = model.A(y0[1]);

  const auto mu_of = [&](const Vec3& y) {
    const double ratio = a0 / model.A(y[1]);
    const double raw = (1.0 + params.mu_c) * ratio * ratio * std::exp(nu0 - y[0]) - 1.0;
    return raw > 0.0 ? raw : 0.0;
  };
  using Vec6 = std::array<double, 6>;
  const auto deriv = [&](double x, const Vec6& s) {
    const FieldVector fv{{s[0], s[1], s[2]}, {s[3], s[4], s[5]}};
    const Vec3 f = rhs_F(x, fv, mu_of(fv.y), pair, params, model);
    Vec6 ds;
    for (int k = 0; k < 3; ++k) {
      ds[k] = s[3 + k];
      ds[3 + k] = (f[k] - s[3 + k]) / x;
    }
    return ds;
  };

  // Center series y(x) = y(0) + S x^2 / 6 + O(x^4) with S = lim_{x->0} F/x,
  // obtained by probing F at a tiny abscissa with vanishing derivatives.
  const double x_probe = 1e-8;
  const Vec3 f_probe = rhs_F(x_probe, FieldVector{y0, {0.0, 0.0, 0.0}}, params.mu_c, pair,
                             params, model);
  Vec6 s;
  for (int k = 0; k < 3; ++k) {
    const double c2 = f_probe[k] / x_probe;
    s[k] = y0[k] + c2 * x_start * x_start / 6.0;
    s[3 + k] = c2 * x_start / 3.0;
  }

  double x = x_start;
  while (x < 1.0 - 1e-12) {
    const double h = std::min(step, 1.0 - x);
    const Vec6 k1 = deriv(x, s);
    Vec6 t;
    for (int i = 0; i < 6; ++i) t[i] = s[i] + 0.5 * h * k1[i];
    const Vec6 k2 = deriv(x + 0.5 * h, t);
    for (int i = 0; i < 6; ++i) t[i] = s[i] + 0.5 * h * k2[i];
    const Vec6 k3 = deriv(x + 0.5 * h, t);
    for (int i = 0; i < 6; ++i) t[i] = s[i] + h * k3[i];
    const Vec6 k4 = deriv(x + h, t);
    for (int i = 0; i < 6; ++i) {
      s[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    x += h;
  }
  return {s[0], s[1], s[2]};
}

}  // namespace bfstar
