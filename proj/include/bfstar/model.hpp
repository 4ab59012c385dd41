#pragma once

// Physics closures for static, spherically symmetric mixed boson-fermion
// stars in scalar-tensor gravity with a massive dilaton.
//
// Everything is expressed in the dimensionless radial coordinate x = r/R_s
// (so the fermionic surface sits at x = 1) with the unknown fields
// y = (nu, phi, sigma): metric potential, dilaton, and boson amplitude.
// The second-order field equations are used in the transformed residual form
//
//     x y'' + y' = F(x, y, y', mu; R_s, Omega),
//
// where F absorbs the metric closure exp(lambda) (solved algebraically from
// the radial Einstein constraint) and carries an overall factor x so that the
// center x = 0 is a regular point.  This header provides F, the metric
// closure, the stress components, and the four Frechet derivative blocks of F
// needed by the Newton linearization (with the fermionic density mu held
// fixed, as the outer iteration demands).

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bfstar {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline constexpr double kSqrt3 = 1.7320508075688772935;

// Thrown when the algebraic metric closure produces a nonpositive
// denominator, i.e. the current iterate is unphysical (the trial step is too
// long).  The Newton driver catches this and shrinks its damping factor.
class MetricBreakdown : public std::runtime_error {
 public:
  explicit MetricBreakdown(double x)
      : std::runtime_error("metric breakdown: nonpositive exp(lambda) denominator at x = " +
                           std::to_string(x)) {}
};

// The five governing dimensionless parameters.
struct PhysicalParams {
  double sigma_c = 0.0;  // central boson amplitude, > 0
  double mu_c = 0.0;     // central Fermi momentum, > 0
  double lambda = 0.0;   // boson quartic self-coupling, >= 0
  double gamma = 0.0;    // dilaton-to-boson mass ratio, >= 0
  double b = 1.0;        // fermionic energy-density scale, > 0

  void validate() const {
    auto bad = [](const char* what) { throw std::invalid_argument(std::string("invalid parameters: ") + what); };
    if (!(std::isfinite(sigma_c) && std::isfinite(mu_c) && std::isfinite(lambda) &&
          std::isfinite(gamma) && std::isfinite(b)))
      bad("all parameters must be finite");
    if (!(mu_c > 0.0)) bad("mu_c must be > 0 (a fermionic surface must exist)");
    if (!(sigma_c > 0.0)) bad("sigma_c must be > 0 (both matter components must be present)");
    if (lambda < 0.0) bad("lambda must be >= 0");
    if (gamma < 0.0) bad("gamma must be >= 0");
    if (!(b > 0.0)) bad("b must be > 0");
  }
};

// Field values and x-derivatives at one point.
struct FieldVector {
  Vec3 y{};   // (nu, phi, sigma)
  Vec3 yp{};  // d/dx of the above
};

// The two spectral unknowns determined alongside the fields.
struct SpectralPair {
  double r_s = 1.0;    // star radius in dimensionless radial units, > 0
  double omega = 0.9;  // boson frequency
};

// Gravitational model: the dilaton coupling A(phi) and potential V(phi).
// alpha = d ln A / d phi must be field-independent for the analytic Frechet
// blocks below to be exact; both shipped models satisfy this.
class CouplingModel {
 public:
  virtual ~CouplingModel() = default;
  virtual double A(double phi) const = 0;
  virtual double alpha(double phi) const = 0;  // d ln A / d phi (constant)
  virtual double V(double phi) const = 0;
  virtual double Vp(double phi) const = 0;   // dV/dphi
  virtual double Vpp(double phi) const = 0;  // d2V/dphi2
};

// Default model: A(phi) = exp(phi/sqrt3), V(phi) = (1 - 1/A)^2.
class ExpDilatonModel final : public CouplingModel {
 public:
  double A(double phi) const override { return std::exp(phi / kSqrt3); }
  double alpha(double) const override { return 1.0 / kSqrt3; }
  double V(double phi) const override {
    const double m = std::exp(-phi / kSqrt3);
    return (1.0 - m) * (1.0 - m);
  }
  double Vp(double phi) const override {
    const double m = std::exp(-phi / kSqrt3);
    return 2.0 / kSqrt3 * (1.0 - m) * m;
  }
  double Vpp(double phi) const override {
    const double m = std::exp(-phi / kSqrt3);
    return 2.0 / 3.0 * (2.0 * m * m - m);
  }
};

inline const CouplingModel& default_model() {
  static const ExpDilatonModel m;
  return m;
}

// Convenience accessors mirroring the default model.
inline double coupling_A(double phi) { return default_model().A(phi); }
inline double coupling_alpha(double phi) { return default_model().alpha(phi); }

// Dilaton potential of the default model: returns (V, dV/dphi).
inline std::array<double, 2> dilaton_potential(double phi) {
  return {default_model().V(phi), default_model().Vp(phi)};
}

// Boson potential W(s) with s = sigma^2:  W = -1/2 (s + 1/2 lambda s^2).
// Returns (W, dW/ds).
inline std::array<double, 2> boson_potential(double sigma_sq, double lambda) {
  return {-0.5 * (sigma_sq + 0.5 * lambda * sigma_sq * sigma_sq),
          -0.5 * (1.0 + lambda * sigma_sq)};
}

// Fermi-gas state functions of the dimensionless Fermi momentum mu >= 0,
// plus the closed forms of f' and f+g used by the density update (the ratio
// (g+f)/f' = 2(1+mu) stays regular as mu -> 0).
struct FermiState {
  double f = 0.0;
  double g = 0.0;
  double fp = 0.0;      // df/dmu
  double f_plus_g = 0.0;
};

inline FermiState fermi_state(double mu) {
  if (mu < 0.0) throw std::domain_error("fermi_state: negative Fermi momentum");
  FermiState st;
  if (mu == 0.0) return st;
  const double s = std::sqrt(mu + mu * mu);
  const double l = std::log(std::sqrt(mu) + std::sqrt(1.0 + mu));
  st.f = ((2.0 * mu - 3.0) * s + 3.0 * l) / 8.0;
  st.g = ((6.0 * mu + 3.0) * s - 3.0 * l) / 8.0;
  st.fp = mu * mu / (2.0 * s);
  st.f_plus_g = mu * s;
  return st;
}

// Mixed-components stress bundle at one point: fermionic perfect fluid
// (tF0 = energy density term, tF1 = tF2 = radial/tangential pressure term)
// and boson-field tensor, with both traces and the combination t1 that
// enters the metric potential equation.
struct StressBundle {
  double tF0 = 0.0, tF1 = 0.0, tF2 = 0.0;
  double tB0 = 0.0, tB1 = 0.0, tB2 = 0.0;
  double traceF = 0.0;  // tF0 + 3 tF1, computed from an independent closed form
  double traceB = 0.0;  // tB0 + tB1 + 2 tB2, ditto
  double t1 = 0.0;      // tF0 + tF1 + tB0 + tB1
};

inline StressBundle stress_components(const FieldVector& fv, double mu, double exp_lambda,
                                      const SpectralPair& pair, const PhysicalParams& p,
                                      const CouplingModel& model = default_model()) {
  if (!(exp_lambda > 0.0)) throw std::invalid_argument("stress_components: exp_lambda must be positive");
  const double A = model.A(fv.y[1]);
  const double A2 = A * A, A4 = A2 * A2;
  const double s2 = fv.y[2] * fv.y[2];
  const FermiState fg = fermi_state(mu);
  const auto W = boson_potential(s2, p.lambda);
  // Kinetic pieces of the boson field: temporal (frequency) and radial
  // (gradient, converted to x-derivatives through r = R_s x and exp(lambda)).
  const double kt = pair.omega * pair.omega * std::exp(-fv.y[0]) * A2 * s2;
  const double kr = A2 * fv.yp[2] * fv.yp[2] / (pair.r_s * pair.r_s * exp_lambda);

  StressBundle s;
  s.tF0 = p.b * A4 * fg.g;
  s.tF1 = -p.b * A4 * fg.f;
  s.tF2 = s.tF1;
  s.tB0 = 0.5 * (kt + kr) - A4 * W[0];
  s.tB1 = -0.5 * (kt + kr) - A4 * W[0];
  s.tB2 = -0.5 * (kt - kr) - A4 * W[0];
  // Traces from independent closed forms (the component identities
  // traceF = tF0 + 3 tF1 and traceB = tB0 + tB1 + 2 tB2 are test targets).
  s.traceF = p.b * A4 * (fg.g - 3.0 * fg.f);
  s.traceB = -kt + kr - 4.0 * A4 * W[0];
  s.t1 = s.tF0 + s.tF1 + s.tB0 + s.tB1;
  return s;
}

// Frechet derivative blocks of F at one point, with mu held fixed.
struct PointJacobian {
  Mat3 dF_dy{};    // [equation][field]
  Mat3 dF_dyp{};   // [equation][field derivative]
  Vec3 dF_dRs{};   // partial w.r.t. R_s at fixed x
  Vec3 dF_dOmega{};
};

struct PointEval {
  Vec3 F{};
  double exp_lambda = 1.0;
};

namespace detail {

// Core evaluation shared by rhs_F / metric_lambda / frechet_derivatives.
// Computes the source combinations C (per equation), D (the t1 + gamma^2 V
// coefficient of the y' terms), G (the closure source), the metric factor
// L = exp(lambda), and F = L B + E.  When jac != nullptr, also fills the
// analytic derivative blocks (validated against finite differences).
inline PointEval eval_point(double x, const FieldVector& fv, double mu, const SpectralPair& pair,
                            const PhysicalParams& prm, const CouplingModel& model,
                            PointJacobian* jac) {
  const double nu = fv.y[0], phi = fv.y[1], sig = fv.y[2];
  const double nup = fv.yp[0], phip = fv.yp[1], sigp = fv.yp[2];
  const double Rs = pair.r_s, Om = pair.omega;
  const double lam = prm.lambda, gam = prm.gamma, b = prm.b;
  const double al = model.alpha(phi);

  const double A = model.A(phi);
  const double A2 = A * A, A4 = A2 * A2;
  const double en = std::exp(-nu);
  const double s2 = sig * sig;
  const auto Wp2 = boson_potential(s2, lam);
  const double W = Wp2[0], Wp = Wp2[1], Wpp = -0.5 * lam;
  const double V = model.V(phi), Vp = model.Vp(phi), Vpp = model.Vpp(phi);
  const FermiState fg = fermi_state(mu);
  const double f = fg.f, g = fg.g;
  const double om2 = Om * Om, g2 = gam * gam;

  // Source terms of the three equations and of the metric closure.
  const double Cnu = b * A4 * (g + 3.0 * f) + 2.0 * om2 * A2 * en * s2 + 2.0 * A4 * W - g2 * V;
  const double Cph = 0.5 * al * (b * A4 * (g - 3.0 * f) - om2 * A2 * en * s2 - 4.0 * A4 * W) +
                     0.25 * g2 * Vp;
  const double Csg = -2.0 * A2 * Wp * sig - om2 * en * sig;
  const Vec3 C{Cnu, Cph, Csg};
  const double D = b * A4 * (g - f) - 2.0 * A4 * W + g2 * V;
  const double G = -b * A4 * f + 0.5 * g2 * V - 0.5 * om2 * A2 * en * s2 - A4 * W;

  // Metric closure exp(lambda) = P/Q.
  const double P = 1.0 + x * nup - x * x * phip * phip - 0.5 * A2 * x * x * sigp * sigp;
  const double Q = 1.0 - Rs * Rs * x * x * G;
  if (Q <= 0.0) throw MetricBreakdown(x);
  const double L = P / Q;

  const double Rs2x = Rs * Rs * x;
  const double half_Rs2x2D = 0.5 * Rs * Rs * x * x * D;
  const Vec3 B{-nup + Rs2x * Cnu + half_Rs2x2D * nup,
               -phip + Rs2x * Cph + half_Rs2x2D * phip,
               -sigp + Rs2x * Csg + half_Rs2x2D * sigp};
  // Terms outside the exp(lambda) factor: dilaton and boson gradient sources.
  const Vec3 E{0.0, 0.5 * al * x * A2 * sigp * sigp, -2.0 * x * al * phip * sigp};

  PointEval out;
  out.exp_lambda = L;
  for (int k = 0; k < 3; ++k) out.F[k] = L * B[k] + E[k];
  if (jac == nullptr) return out;

  // ---- analytic derivatives, mu frozen ----
  const Mat3 dC{{{-2.0 * om2 * A2 * en * s2,
                  4.0 * al * b * A4 * (g + 3.0 * f) + 4.0 * al * om2 * A2 * en * s2 +
                      8.0 * al * A4 * W - g2 * Vp,
                  4.0 * sig * (om2 * A2 * en + A4 * Wp)},
                 {0.5 * al * om2 * A2 * en * s2,
                  0.5 * al * (4.0 * al * b * A4 * (g - 3.0 * f) - 2.0 * al * om2 * A2 * en * s2 -
                              16.0 * al * A4 * W) +
                      0.25 * g2 * Vpp,
                  0.5 * al * (-2.0 * sig * om2 * A2 * en - 8.0 * sig * A4 * Wp)},
                 {om2 * en * sig, -4.0 * al * A2 * Wp * sig,
                  -2.0 * A2 * (Wp + 2.0 * s2 * Wpp) - om2 * en}}};
  const Vec3 dD{0.0, 4.0 * al * b * A4 * (g - f) - 8.0 * al * A4 * W + g2 * Vp,
                -4.0 * sig * A4 * Wp};
  const Vec3 dG{0.5 * om2 * A2 * en * s2,
                -4.0 * al * b * A4 * f + 0.5 * g2 * Vp - al * om2 * A2 * en * s2 - 4.0 * al * A4 * W,
                -om2 * A2 * en * sig - 2.0 * sig * A4 * Wp};

  const Vec3 dPdy{0.0, -al * A2 * x * x * sigp * sigp, 0.0};
  const Vec3 dPdyp{x, -2.0 * x * x * phip, -A2 * x * x * sigp};
  Vec3 dLdy, dLdyp;
  for (int j = 0; j < 3; ++j) {
    const double dQdy = -Rs * Rs * x * x * dG[j];
    dLdy[j] = (dPdy[j] - L * dQdy) / Q;
    dLdyp[j] = dPdyp[j] / Q;
  }

  Mat3 dEdy{}, dEdyp{};
  dEdy[1][1] = al * al * x * A2 * sigp * sigp;
  dEdyp[1][2] = al * x * A2 * sigp;
  dEdyp[2][1] = -2.0 * x * al * sigp;
  dEdyp[2][2] = -2.0 * x * al * phip;

  const Vec3 ypv{nup, phip, sigp};
  for (int k = 0; k < 3; ++k) {
    for (int j = 0; j < 3; ++j) {
      jac->dF_dy[k][j] =
          dLdy[j] * B[k] + L * (Rs2x * dC[k][j] + 0.5 * Rs * Rs * x * x * ypv[k] * dD[j]) +
          dEdy[k][j];
      jac->dF_dyp[k][j] = dLdyp[j] * B[k] + dEdyp[k][j];
      if (k == j) jac->dF_dyp[k][j] += L * (-1.0 + half_Rs2x2D);
    }
  }

  const double dGdOm = -Om * A2 * en * s2;
  const Vec3 dCdOm{4.0 * Om * A2 * en * s2, -al * Om * A2 * en * s2, -2.0 * Om * en * sig};
  const double dLdOm = (L / Q) * Rs * Rs * x * x * dGdOm;
  const double dLdRs = (L / Q) * 2.0 * Rs * x * x * G;
  for (int k = 0; k < 3; ++k) {
    jac->dF_dOmega[k] = dLdOm * B[k] + L * Rs2x * dCdOm[k];
    jac->dF_dRs[k] = dLdRs * B[k] + L * (2.0 * Rs * x * C[k] + Rs * x * x * D * ypv[k]);
  }
  return out;
}

}  // namespace detail

// Metric factor exp(lambda) from the algebraic closure of the radial
// Einstein constraint.  Throws MetricBreakdown on a nonpositive denominator.
inline double metric_lambda(double x, const FieldVector& fv, double mu, const SpectralPair& pair,
                            const PhysicalParams& p, const CouplingModel& model = default_model()) {
  return detail::eval_point(x, fv, mu, pair, p, model, nullptr).exp_lambda;
}

// Right-hand side F of the transformed system x y'' + y' = F.  The caller
// must pass mu = 0 for x > 1 (no fermionic matter outside the star).
inline Vec3 rhs_F(double x, const FieldVector& fv, double mu, const SpectralPair& pair,
                  const PhysicalParams& p, const CouplingModel& model = default_model()) {
  return detail::eval_point(x, fv, mu, pair, p, model, nullptr).F;
}

// All four derivative blocks of F with mu frozen; exp(lambda)'s dependence
// on the fields, their derivatives, R_s and Omega enters via the chain rule.
inline PointJacobian frechet_derivatives(double x, const FieldVector& fv, double mu,
                                         const SpectralPair& pair, const PhysicalParams& p,
                                         const CouplingModel& model = default_model()) {
  PointJacobian jac;
  detail::eval_point(x, fv, mu, pair, p, model, &jac);
  return jac;
}

// Combined evaluation used on the solver hot path.
inline PointEval eval_with_jacobian(double x, const FieldVector& fv, double mu,
                                    const SpectralPair& pair, const PhysicalParams& p,
                                    PointJacobian& jac,
                                    const CouplingModel& model = default_model()) {
  return detail::eval_point(x, fv, mu, pair, p, model, &jac);
}

inline PointEval eval_plain(double x, const FieldVector& fv, double mu, const SpectralPair& pair,
                            const PhysicalParams& p, const CouplingModel& model = default_model()) {
  return detail::eval_point(x, fv, mu, pair, p, model, nullptr);
}

}  // namespace bfstar
