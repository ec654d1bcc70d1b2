#pragma once

// Independent reference implementations used only by tests. These
// deliberately avoid the code paths of the library proper so that agreement
// between the two is meaningful.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "qpulse/unitary.hpp"

namespace oracles {

// Plain Cox-de Boor recursion, one basis function at a time, on the clamped
// uniform quadratic knot vector over [0, end].
inline double cox_de_boor(int index, double t, int count, double end) {
  const int degree = 2;
  std::vector<double> knots(static_cast<std::size_t>(count + degree + 1));
  for (int i = 0; i < static_cast<int>(knots.size()); ++i) {
    if (i <= degree)
      knots[static_cast<std::size_t>(i)] = 0.0;
    else if (i >= count)
      knots[static_cast<std::size_t>(i)] = end;
    else
      knots[static_cast<std::size_t>(i)] = end * static_cast<double>(i - degree) / (count - degree);
  }

  std::function<double(int, int)> n = [&](int i, int r) -> double {
    if (r == 0) {
      // half-open spans, except the rightmost which closes at t = end
      bool last = knots[static_cast<std::size_t>(i + 1)] >= end;
      if (last) return knots[static_cast<std::size_t>(i)] <= t && t <= end &&
                       knots[static_cast<std::size_t>(i)] < knots[static_cast<std::size_t>(i + 1)]
                   ? 1.0
                   : 0.0;
      return knots[static_cast<std::size_t>(i)] <= t && t < knots[static_cast<std::size_t>(i + 1)] ? 1.0 : 0.0;
    }
    double left = 0.0, right = 0.0;
    double den1 = knots[static_cast<std::size_t>(i + r)] - knots[static_cast<std::size_t>(i)];
    double den2 = knots[static_cast<std::size_t>(i + r + 1)] - knots[static_cast<std::size_t>(i + 1)];
    if (den1 > 0.0) left = (t - knots[static_cast<std::size_t>(i)]) / den1 * n(i, r - 1);
    if (den2 > 0.0) right = (knots[static_cast<std::size_t>(i + r + 1)] - t) / den2 * n(i + 1, r - 1);
    return left + right;
  };
  return n(index, degree);
}

// Deterministic xorshift-free uniform doubles for test data.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

// Haar-ish random unitary: random rotation axis and angle plus a random
// global phase. Sufficient for invariance and range properties.
inline qpulse::Unitary2 random_unitary(TestRng& rng) {
  double theta = rng.uniform(0.0, 2.0 * M_PI);
  double phi = rng.uniform(0.0, 2.0 * M_PI);
  double z = rng.uniform(-1.0, 1.0);
  double azimuth = rng.uniform(0.0, 2.0 * M_PI);
  double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  double nx = r * std::cos(azimuth), ny = r * std::sin(azimuth), nz = z;

  double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  qpulse::complexd phase = std::polar(1.0, phi);
  // exp(-i theta/2 n.sigma) = c I - i s (n.sigma)
  qpulse::Unitary2 u{qpulse::complexd(c, -s * nz), qpulse::complexd(-s * ny, -s * nx),
                     qpulse::complexd(s * ny, -s * nx), qpulse::complexd(c, s * nz)};
  return u.scaled(phase);
}

// Central finite difference of a scalar function of a coefficient vector.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> point, std::size_t i, double step) {
  point[i] += step;
  double hi = f(point);
  point[i] -= 2.0 * step;
  double lo = f(point);
  return (hi - lo) / (2.0 * step);
}

}  // namespace oracles
