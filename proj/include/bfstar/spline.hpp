#pragma once

// C1 Hermite cubic splines over a Grid, parameterized by per-node values U_i
// and first moments (derivatives) M_i.  On interval i with relative
// coordinate theta = (x - x_i)/h_i the four basis functions are
//
//   psi1 = 1 - 3 theta^2 + 2 theta^3      (value at left node)
//   psi2 = h (theta - 2 theta^2 + theta^3)  (moment at left node)
//   psi3 = 3 theta^2 - 2 theta^3          (value at right node)
//   psi4 = h (theta^3 - theta^2)          (moment at right node)
//
// Collocating the residual at the two Gauss points per interval makes this
// the classical fourth-order scheme; the same representation supplies the
// second derivative of the current iterate for the Newton right-hand sides.

#include <algorithm>
#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bfstar/grid.hpp"
#include "bfstar/model.hpp"

namespace bfstar {

// The two Gauss points of two-point collocation, as offsets in theta.
inline constexpr double kGauss1 = 0.5 - 0.28867513459481288225;  // 1/2 - sqrt(3)/6
inline constexpr double kGauss2 = 0.5 + 0.28867513459481288225;  // 1/2 + sqrt(3)/6

struct HermiteBasis {
  std::array<double, 4> val;  // psi
  std::array<double, 4> d1;   // dpsi/dx
  std::array<double, 4> d2;   // d2psi/dx2
};

inline HermiteBasis hermite_basis(double theta, double h) {
  const double t = theta, t2 = t * t, t3 = t2 * t;
  HermiteBasis b;
  b.val = {1.0 - 3.0 * t2 + 2.0 * t3, h * (t - 2.0 * t2 + t3), 3.0 * t2 - 2.0 * t3,
           h * (t3 - t2)};
  b.d1 = {(-6.0 * t + 6.0 * t2) / h, 1.0 - 4.0 * t + 3.0 * t2, (6.0 * t - 6.0 * t2) / h,
          3.0 * t2 - 2.0 * t};
  b.d2 = {(-6.0 + 12.0 * t) / (h * h), (-4.0 + 6.0 * t) / h, (6.0 - 12.0 * t) / (h * h),
          (6.0 * t - 2.0) / h};
  return b;
}

struct SplineEval {
  Vec3 value{};
  Vec3 d1{};
  Vec3 d2{};
};

// Owns a copy of its grid, so splines are self-contained values that may
// outlive the mesh object they were built from.
class SplineFunction {
 public:
  explicit SplineFunction(Grid grid)
      : grid_(std::move(grid)),
        values_(static_cast<size_t>(grid_.node_count())),
        moments_(static_cast<size_t>(grid_.node_count())) {}

  const Grid& grid() const { return grid_; }
  Vec3& value(int i) { return values_[static_cast<size_t>(i)]; }
  Vec3& moment(int i) { return moments_[static_cast<size_t>(i)]; }
  const Vec3& value(int i) const { return values_[static_cast<size_t>(i)]; }
  const Vec3& moment(int i) const { return moments_[static_cast<size_t>(i)]; }

  // Evaluate on interval i at relative coordinate theta (hot path; no
  // interval search).
  SplineEval eval_local(int i, double theta) const {
    const double h = grid_.step(i);
    const HermiteBasis b = hermite_basis(theta, h);
    const Vec3& u0 = values_[static_cast<size_t>(i)];
    const Vec3& m0 = moments_[static_cast<size_t>(i)];
    const Vec3& u1 = values_[static_cast<size_t>(i) + 1];
    const Vec3& m1 = moments_[static_cast<size_t>(i) + 1];
    SplineEval e;
    for (int k = 0; k < 3; ++k) {
      e.value[k] = b.val[0] * u0[k] + b.val[1] * m0[k] + b.val[2] * u1[k] + b.val[3] * m1[k];
      e.d1[k] = b.d1[0] * u0[k] + b.d1[1] * m0[k] + b.d1[2] * u1[k] + b.d1[3] * m1[k];
      e.d2[k] = b.d2[0] * u0[k] + b.d2[1] * m0[k] + b.d2[2] * u1[k] + b.d2[3] * m1[k];
    }
    return e;
  }

  SplineEval eval(double x) const {
    const auto& xs = grid_.nodes();
    if (x < xs.front() || x > xs.back())
      throw std::out_of_range("SplineFunction::eval: x outside the grid domain");
    int i = static_cast<int>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    if (i >= grid_.intervals()) i = grid_.intervals() - 1;  // x == x_inf
    const double theta = (x - xs[static_cast<size_t>(i)]) / grid_.step(i);
    return eval_local(i, theta);
  }

 private:
  Grid grid_;
  std::vector<Vec3> values_;
  std::vector<Vec3> moments_;
};

inline SplineEval spline_eval(const SplineFunction& s, double x) { return s.eval(x); }

}  // namespace bfstar
