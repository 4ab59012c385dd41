#pragma once

// Nonuniform mesh on [0, x_inf] with a node pinned bit-exactly at x = 1
// (the fermionic surface).  Two node distributions are provided:
//
//  * uniform   - equal spacing, adjusted so that x = 1 is a node: the
//                interval [0,1] receives round(n/x_inf) subintervals.
//  * condensed - smooth monotone power maps clustering nodes near x = 0 and
//                x = 1 (where the solution loses regularity at the star
//                surface) and stretching toward x_inf.  With strength c the
//                mapped density behaves like t^(1+c) at the cluster points;
//                c = 0 reduces to per-piece uniform spacing.
//
// Both modes nest under doubling of n (for even n), which the convergence-
// order studies rely on.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace bfstar {

enum class Grading { uniform, condensed };

class Grid {
 public:
  Grid(std::vector<double> nodes, int n_star, double x_inf)
      : nodes_(std::move(nodes)), n_star_(n_star), x_inf_(x_inf) {}

  int intervals() const { return static_cast<int>(nodes_.size()) - 1; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int n_star() const { return n_star_; }  // index of the node at x = 1
  double x_inf() const { return x_inf_; }
  double node(int i) const { return nodes_[static_cast<size_t>(i)]; }
  double step(int i) const { return nodes_[static_cast<size_t>(i) + 1] - nodes_[static_cast<size_t>(i)]; }
  const std::vector<double>& nodes() const { return nodes_; }

 private:
  std::vector<double> nodes_;
  int n_star_;
  double x_inf_;
};

inline Grid build_grid(int n, double x_inf, Grading grading = Grading::uniform,
                       double strength = 0.25) {
  if (!(x_inf > 1.0)) throw std::invalid_argument("build_grid: x_inf must exceed 1");
  if (n < 4) throw std::invalid_argument("build_grid: need at least 4 subintervals");
  if (strength < 0.0) throw std::invalid_argument("build_grid: grading strength must be >= 0");

  int n1;  // subintervals on [0, 1]
  if (grading == Grading::uniform) {
    n1 = static_cast<int>(std::lround(static_cast<double>(n) / x_inf));
    if (n1 < 1) n1 = 1;
    if (n1 > n - 1) n1 = n - 1;
  } else {
    n1 = n / 2;
  }
  const int n2 = n - n1;

  std::vector<double> xs;
  xs.reserve(static_cast<size_t>(n) + 1);
  if (grading == Grading::uniform) {
    for (int i = 0; i < n1; ++i) xs.push_back(static_cast<double>(i) / n1);
    xs.push_back(1.0);
    for (int j = 1; j < n2; ++j)
      xs.push_back(1.0 + (x_inf - 1.0) * static_cast<double>(j) / n2);
    xs.push_back(x_inf);
  } else {
    // Symmetric rational power map on [0,1]: t^p / (t^p + (1-t)^p) clusters
    // nodes at both endpoints with local density ~ t^p; the star interior
    // keeps a comparable share of nodes.
    const double p = 1.0 + strength;
    for (int i = 0; i < n1; ++i) {
      const double t = static_cast<double>(i) / n1;
      const double tp = std::pow(t, p), up = std::pow(1.0 - t, p);
      xs.push_back(tp / (tp + up));
    }
    xs.push_back(1.0);
    // Power map on [1, x_inf]: small steps just outside the surface, growing
    // toward the truncation radius.
    for (int j = 1; j < n2; ++j) {
      const double t = static_cast<double>(j) / n2;
      xs.push_back(1.0 + (x_inf - 1.0) * std::pow(t, p));
    }
    xs.push_back(x_inf);
  }

  for (size_t i = 0; i + 1 < xs.size(); ++i)
    if (!(xs[i] < xs[i + 1])) throw std::logic_error("build_grid: nodes not strictly increasing");
  return Grid(std::move(xs), n1, x_inf);
}

}  // namespace bfstar
