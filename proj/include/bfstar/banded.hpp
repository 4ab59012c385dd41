#pragma once

// Banded linear algebra for the almost-block-diagonal collocation systems.
// With per-node unknown ordering [values(3), moments(3)] every collocation
// row touches at most the twelve unknowns of its interval, giving bandwidths
// kl = ku = 8; the boundary rows fit inside the same band.  Storage is the
// LAPACK general-band layout (column-major, leading dimension 2 kl + ku + 1)
// factorized by dgbtrf and solved by dgbtrs, so several right-hand sides
// share one factorization.  Rows are equilibrated (scaled by their max
// magnitude) before factorization: strongly graded meshes otherwise mix
// 1/h^2-sized and O(1) rows badly enough to cost the Newton tail.

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <lapacke.h>

namespace bfstar {

class SingularSystem : public std::runtime_error {
 public:
  explicit SingularSystem(int pivot)
      : std::runtime_error("linear solve failed: zero pivot at row " + std::to_string(pivot)),
        pivot_(pivot) {}
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

// Instrumentation for the one-factorization / several-solves property.
struct FactorizationStats {
  static std::atomic<long>& factor_count() {
    static std::atomic<long> c{0};
    return c;
  }
  static std::atomic<long>& rhs_count() {
    static std::atomic<long> c{0};
    return c;
  }
  static void reset() {
    factor_count() = 0;
    rhs_count() = 0;
  }
};

class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
        ab_(static_cast<size_t>(ldab_) * static_cast<size_t>(n), 0.0) {}

  int size() const { return n_; }
  int kl() const { return kl_; }
  int ku() const { return ku_; }

  // Entry (i, j) of the full matrix; j must lie within the band of row i.
  double& at(int i, int j) {
    return ab_[static_cast<size_t>(j) * ldab_ + static_cast<size_t>(kl_ + ku_ + i - j)];
  }
  double at(int i, int j) const {
    return ab_[static_cast<size_t>(j) * ldab_ + static_cast<size_t>(kl_ + ku_ + i - j)];
  }
  bool in_band(int i, int j) const { return j - i <= ku_ && i - j <= kl_; }

  // Scale every row (and the right-hand sides, n x nrhs column-major) by the
  // inverse of its largest magnitude.
  void equilibrate(std::vector<double>& rhs, int nrhs) {
    std::vector<double> rmax(static_cast<size_t>(n_), 0.0);
    for (int j = 0; j < n_; ++j) {
      const int ilo = std::max(0, j - ku_), ihi = std::min(n_ - 1, j + kl_);
      for (int i = ilo; i <= ihi; ++i) {
        const double a = std::fabs(at(i, j));
        if (a > rmax[static_cast<size_t>(i)]) rmax[static_cast<size_t>(i)] = a;
      }
    }
    for (int i = 0; i < n_; ++i) {
      double s = rmax[static_cast<size_t>(i)];
      if (s == 0.0) continue;
      s = 1.0 / s;
      const int jlo = std::max(0, i - kl_), jhi = std::min(n_ - 1, i + ku_);
      for (int j = jlo; j <= jhi; ++j) at(i, j) *= s;
      for (int m = 0; m < nrhs; ++m) rhs[static_cast<size_t>(m) * n_ + i] *= s;
    }
  }

  // In-place LU factorization (the band storage already reserves the kl
  // extra fill rows demanded by partial pivoting).
  void factor() {
    ipiv_.resize(static_cast<size_t>(n_));
    const lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, ab_.data(), ldab_,
                                           ipiv_.data());
    ++FactorizationStats::factor_count();
    if (info > 0) throw SingularSystem(static_cast<int>(info));
    if (info < 0) throw std::logic_error("dgbtrf: bad argument " + std::to_string(-info));
    factored_ = true;
  }

  // Back-substitute nrhs right-hand sides (column-major, overwritten).
  void solve(std::vector<double>& rhs, int nrhs) const {
    if (!factored_) throw std::logic_error("BandedMatrix::solve before factor");
    const lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, nrhs, ab_.data(),
                                           ldab_, ipiv_.data(), rhs.data(), n_);
    FactorizationStats::rhs_count() += nrhs;
    if (info != 0) throw std::logic_error("dgbtrs: bad argument " + std::to_string(-info));
  }

 private:
  int n_, kl_, ku_, ldab_;
  std::vector<double> ab_;
  std::vector<lapack_int> ipiv_;
  bool factored_ = false;
};

}  // namespace bfstar
