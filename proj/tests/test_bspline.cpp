#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "qpulse/bspline.hpp"

using qpulse::BSplineBasis;

TEST_CASE("clamped endpoints", "[bspline]") {
  BSplineBasis basis(10, 100.0);
  CHECK(basis.evaluate(0, 0.0) == Catch::Approx(1.0).margin(1e-15));
  for (int d = 1; d < 10; ++d) CHECK(basis.evaluate(d, 0.0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(basis.evaluate(9, 100.0) == Catch::Approx(1.0).margin(1e-15));
  for (int d = 0; d < 9; ++d) CHECK(basis.evaluate(d, 100.0) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("interior values match the Cox-de Boor recursion", "[bspline]") {
  const double T = 100.0;
  BSplineBasis basis(10, T);

  // Hand-evaluated on the knot grid {0,0,0,1,...,7,8,8,8} * T/8: at t = T/2
  // only B4 and B5 are nonzero, both 1/2; at t = 0.3 T the triple is
  // (0.18, 0.74, 0.08) on B2..B4.
  CHECK(basis.evaluate(3, T / 2) == Catch::Approx(0.0).margin(1e-12));
  CHECK(basis.evaluate(4, T / 2) == Catch::Approx(0.5).margin(1e-12));
  CHECK(basis.evaluate(5, T / 2) == Catch::Approx(0.5).margin(1e-12));
  CHECK(basis.evaluate(2, 0.3 * T) == Catch::Approx(0.18).margin(1e-12));
  CHECK(basis.evaluate(3, 0.3 * T) == Catch::Approx(0.74).margin(1e-12));
  CHECK(basis.evaluate(4, 0.3 * T) == Catch::Approx(0.08).margin(1e-12));

  oracles::TestRng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    double t = rng.uniform(0.0, T);
    for (int d = 0; d < 10; ++d) {
      double want = oracles::cox_de_boor(d, t, 10, T);
      CHECK(basis.evaluate(d, t) == Catch::Approx(want).margin(1e-13));
    }
  }
}

TEST_CASE("other basis sizes agree with the recursion too", "[bspline]") {
  oracles::TestRng rng(22);
  for (int count : {3, 4, 7, 16}) {
    BSplineBasis basis(count, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      double t = rng.uniform(0.0, 1.0);
      for (int d = 0; d < count; ++d)
        CHECK(basis.evaluate(d, t) == Catch::Approx(oracles::cox_de_boor(d, t, count, 1.0)).margin(1e-13));
    }
  }
}

TEST_CASE("partition of unity and bounds on a dense grid", "[bspline]") {
  const double T = 100.0;
  BSplineBasis basis(10, T);
  std::vector<double> row(10);
  for (int i = 0; i <= 10000; ++i) {
    double t = T * static_cast<double>(i) / 10000.0;
    basis.evaluate_all(t, row);
    double sum = std::accumulate(row.begin(), row.end(), 0.0);
    REQUIRE(std::abs(sum - 1.0) <= 1e-12);
    for (double v : row) {
      REQUIRE(v >= -1e-15);
      REQUIRE(v <= 1.0 + 1e-15);
    }
  }
}

TEST_CASE("domain and index validation", "[bspline]") {
  BSplineBasis basis(10, 100.0);
  CHECK_THROWS_AS(basis.evaluate(0, -1e-9), std::invalid_argument);
  CHECK_THROWS_AS(basis.evaluate(0, 100.0 + 1e-9), std::invalid_argument);
  CHECK_THROWS_AS(basis.evaluate(-1, 50.0), std::invalid_argument);
  CHECK_THROWS_AS(basis.evaluate(10, 50.0), std::invalid_argument);
  CHECK_THROWS_AS(BSplineBasis(2, 100.0), std::invalid_argument);
}
