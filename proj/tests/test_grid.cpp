#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "bfstar/grid.hpp"

using namespace bfstar;
using Catch::Approx;

TEST_CASE("uniform grid places a node exactly at the fermionic surface", "[grid]") {
  const Grid g = build_grid(4, 2.0);
  REQUIRE(g.node_count() == 5);
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(1) == 0.5);
  CHECK(g.node(2) == 1.0);
  CHECK(g.node(3) == 1.5);
  CHECK(g.node(4) == 2.0);
  CHECK(g.n_star() == 2);
  CHECK(g.x_inf() == 2.0);
}

TEST_CASE("uniform grid on a wide domain keeps interior resolution", "[grid]") {
  // round(n / x_inf) subintervals land on [0, 1]; the surface node index
  // never collapses to the boundary.
  const Grid g = build_grid(256, 128.0);
  CHECK(g.n_star() == 2);
  CHECK(g.node(g.n_star()) == 1.0);
  CHECK(g.node(1) == 0.5);
  CHECK(g.node(g.intervals()) == 128.0);
  CHECK(g.intervals() == 256);
}

TEST_CASE("condensed grid is monotone with the surface node pinned", "[grid]") {
  const Grid g = build_grid(64, 32.0, Grading::condensed, 0.25);
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(g.n_star()) == 1.0);
  CHECK(g.node(g.intervals()) == 32.0);
  CHECK(g.n_star() == 32);
  for (int i = 0; i < g.intervals(); ++i) CHECK(g.step(i) > 0.0);

  // Condensation: steps shrink toward both the center and the surface on
  // [0, 1], and grow toward the truncation radius outside.
  CHECK(g.step(0) < g.step(g.n_star() / 2));
  CHECK(g.step(g.n_star() - 1) < g.step(g.n_star() / 2));
  CHECK(g.step(g.n_star()) < g.step(g.intervals() - 1));
}

TEST_CASE("steps sum to the domain length", "[grid]") {
  for (Grading grading : {Grading::uniform, Grading::condensed}) {
    const Grid g = build_grid(96, 24.0, grading, 0.25);
    double total = 0.0;
    for (int i = 0; i < g.intervals(); ++i) total += g.step(i);
    CHECK(total == Approx(24.0).epsilon(1e-13));
  }
}

TEST_CASE("grids nest under doubling", "[grid]") {
  for (Grading grading : {Grading::uniform, Grading::condensed}) {
    const Grid coarse = build_grid(32, 16.0, grading, 0.25);
    const Grid fine = build_grid(64, 16.0, grading, 0.25);
    for (int i = 0; i < coarse.node_count(); ++i) {
      CHECK(fine.node(2 * i) == Approx(coarse.node(i)).margin(1e-14));
    }
  }
}

TEST_CASE("grid construction rejects unusable arguments", "[grid]") {
  CHECK_THROWS_AS(build_grid(64, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(64, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(3, 8.0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(64, 8.0, Grading::condensed, -0.5), std::invalid_argument);
}
