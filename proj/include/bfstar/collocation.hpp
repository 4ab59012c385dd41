#pragma once

// Hermite-cubic collocation for the linearized field equations.
//
// The spline unknowns are nodal values and first derivatives (moments),
// ordered [values(3), moments(3)] per node.  Each Newton step needs three
// corrections sharing the same linear operator
//
//     x z'' + z' - Jy z - Jyp z' = r(x)
//
// collocated at the two Gauss points of every interval, plus derivative
// conditions at the center and value conditions at the outer boundary.
// The three right-hand sides (residual correction, radius direction,
// frequency direction) are solved against a single LU factorization.
//
// Assembled rows carry the negated operator (Jy z + Jyp z' - x z'' - z'),
// so a caller supplies r with matching sign; see PointLinearization.

#include <functional>
#include <vector>

#include "banded.hpp"
#include "grid.hpp"
#include "model.hpp"
#include "spline.hpp"

namespace bfstar {

// Local data of one collocation point: Jacobian blocks of the right-hand
// side F with respect to (y, y'), and the three row right-hand sides
//   rhs_u = x y'' + y' - F      (drives the residual to zero)
//   rhs_v = -dF/dR_s            (radius direction)
//   rhs_w = -dF/dOmega          (frequency direction)
struct PointLinearization {
  Mat3 Jy{};
  Mat3 Jyp{};
  Vec3 rhs_u{};
  Vec3 rhs_v{};
  Vec3 rhs_w{};
};

// Callback evaluating the linearization at collocation point x inside
// `interval`, given the current spline state (value, d1, d2) there.
using PointCallback =
    std::function<PointLinearization(int interval, double x, const SplineEval& state)>;

struct LinearDirections {
  SplineFunction u;  // correction satisfying u'(0) = left_rhs, u(X) = right_rhs
  SplineFunction v;  // homogeneous-BC response to a unit radius change
  SplineFunction w;  // homogeneous-BC response to a unit frequency change
};

namespace detail {

// Bandwidths of the collocation matrix under the value/moment ordering:
// a collocation row of interval i touches columns 6i .. 6i+11 only.
inline constexpr int kBandLower = 8;
inline constexpr int kBandUpper = 8;

}  // namespace detail

// Assemble the collocation matrix once, factor it, and back-substitute the
// three right-hand sides.  `left_rhs_u` feeds the center derivative rows of
// u and `right_rhs_u` its outer value rows; v and w use homogeneous rows.
inline LinearDirections solve_linearized(const SplineFunction& y, const PointCallback& point,
                                         const Vec3& left_rhs_u, const Vec3& right_rhs_u) {
  const Grid& grid = y.grid();
  const int n = grid.intervals();
  const int dim = 6 * (n + 1);
  BandedMatrix mat(dim, detail::kBandLower, detail::kBandUpper);
  std::vector<double> rhs(3 * static_cast<size_t>(dim), 0.0);

  // Center rows: z'(0) conditions act on the moments of node 0.
  for (int k = 0; k < 3; ++k) {
    mat.at(k, 3 + k) = 1.0;
    rhs[static_cast<size_t>(k)] = left_rhs_u[k];
  }

  const double theta[2] = {kGauss1, kGauss2};
  for (int i = 0; i < n; ++i) {
    const double h = grid.step(i);
    const double x0 = grid.node(i);
    for (int q = 0; q < 2; ++q) {
      const HermiteBasis basis = hermite_basis(theta[q], h);
      const double x = x0 + theta[q] * h;
      const SplineEval state = y.eval_local(i, theta[q]);
      const PointLinearization lin = point(i, x, state);
      for (int k = 0; k < 3; ++k) {
        const int row = 3 + 6 * i + 3 * q + k;
        // Basis b = 0..3 multiplies value(i), moment(i), value(i+1), moment(i+1).
        for (int b = 0; b < 4; ++b) {
          for (int nn = 0; nn < 3; ++nn) {
            double c = lin.Jyp[k][nn] * basis.d1[b] + lin.Jy[k][nn] * basis.val[b];
            if (k == nn) c += -x * basis.d2[b] - basis.d1[b];
            mat.at(row, 6 * i + 3 * b + nn) += c;
          }
        }
        rhs[static_cast<size_t>(row)] = lin.rhs_u[k];
        rhs[static_cast<size_t>(dim + row)] = lin.rhs_v[k];
        rhs[static_cast<size_t>(2 * dim + row)] = lin.rhs_w[k];
      }
    }
  }

  // Outer rows: z(X) conditions act on the values of node n.
  for (int k = 0; k < 3; ++k) {
    mat.at(dim - 3 + k, 6 * n + k) = 1.0;
    rhs[static_cast<size_t>(dim - 3 + k)] = right_rhs_u[k];
  }

  mat.equilibrate(rhs, 3);
  mat.factor();
  mat.solve(rhs, 3);

  LinearDirections out{SplineFunction(grid), SplineFunction(grid), SplineFunction(grid)};
  SplineFunction* dirs[3] = {&out.u, &out.v, &out.w};
  for (int m = 0; m < 3; ++m) {
    const size_t off = static_cast<size_t>(m) * static_cast<size_t>(dim);
    for (int i = 0; i <= n; ++i) {
      for (int k = 0; k < 3; ++k) {
        dirs[m]->value(i)[k] = rhs[off + static_cast<size_t>(6 * i + k)];
        dirs[m]->moment(i)[k] = rhs[off + static_cast<size_t>(6 * i + 3 + k)];
      }
    }
  }
  return out;
}

}  // namespace bfstar
