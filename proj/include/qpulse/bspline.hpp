#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace qpulse {

// Quadratic B-spline basis on a clamped uniform knot vector over [0, end]:
// triple knots at both ends, `count` basis functions, count - 2 spans.
// Clamping gives partition of unity on the whole interval and pins the first
// and last basis functions to 1 at the respective endpoints.
class BSplineBasis {
 public:
  static constexpr int kDegree = 2;

  BSplineBasis(int count, double end) : count_(count), end_(end) {
    if (count < kDegree + 1) throw std::invalid_argument("BSplineBasis: need at least 3 basis functions");
    if (!(end > 0.0) || !std::isfinite(end)) throw std::invalid_argument("BSplineBasis: end must be positive");
    knots_.resize(static_cast<std::size_t>(count) + kDegree + 1);
    int spans = count - kDegree;
    for (int i = 0; i < static_cast<int>(knots_.size()); ++i) {
      if (i <= kDegree)
        knots_[i] = 0.0;
      else if (i >= count)
        knots_[i] = end;
      else
        knots_[i] = end * static_cast<double>(i - kDegree) / spans;
    }
  }

  int count() const { return count_; }
  double domain_end() const { return end_; }

  // Value of the d-th basis function; 0 outside its three-span support.
  double evaluate(int index, double t) const {
    if (index < 0 || index >= count_)
      throw std::invalid_argument("BSplineBasis: basis index out of range");
    int span = find_span(t);
    std::array<double, kDegree + 1> n = nonzero_at(span, t);
    int first = span - kDegree;
    if (index < first || index > span) return 0.0;
    return n[static_cast<std::size_t>(index - first)];
  }

  // All `count` basis values at t; at most degree + 1 of them are nonzero.
  void evaluate_all(double t, std::span<double> out) const {
    if (out.size() != static_cast<std::size_t>(count_))
      throw std::invalid_argument("BSplineBasis: output span has wrong length");
    std::fill(out.begin(), out.end(), 0.0);
    int span = find_span(t);
    std::array<double, kDegree + 1> n = nonzero_at(span, t);
    for (int j = 0; j <= kDegree; ++j) out[static_cast<std::size_t>(span - kDegree + j)] = n[static_cast<std::size_t>(j)];
  }

  std::vector<double> evaluate_all(double t) const {
    std::vector<double> out(static_cast<std::size_t>(count_));
    evaluate_all(t, out);
    return out;
  }

 private:
  // Knot span k with u_k <= t < u_{k+1}; t = end maps into the last span.
  int find_span(double t) const {
    if (!(t >= 0.0) || !(t <= end_))
      throw std::invalid_argument("BSplineBasis: t outside [0, end]");
    int spans = count_ - kDegree;
    int k = kDegree + static_cast<int>(std::floor(t / end_ * spans));
    return std::clamp(k, kDegree, count_ - 1);
  }

  // Triangular recurrence (The NURBS Book, A2.2) for the degree + 1 basis
  // functions N_{span-degree..span} that are nonzero on the span.
  std::array<double, kDegree + 1> nonzero_at(int span, double t) const {
    std::array<double, kDegree + 1> n{};
    std::array<double, kDegree + 1> left{}, right{};
    n[0] = 1.0;
    for (int r = 1; r <= kDegree; ++r) {
      left[static_cast<std::size_t>(r)] = t - knots_[static_cast<std::size_t>(span + 1 - r)];
      right[static_cast<std::size_t>(r)] = knots_[static_cast<std::size_t>(span + r)] - t;
      double saved = 0.0;
      for (int j = 0; j < r; ++j) {
        double temp = n[static_cast<std::size_t>(j)] /
                      (right[static_cast<std::size_t>(j + 1)] + left[static_cast<std::size_t>(r - j)]);
        n[static_cast<std::size_t>(j)] = saved + right[static_cast<std::size_t>(j + 1)] * temp;
        saved = left[static_cast<std::size_t>(r - j)] * temp;
      }
      n[static_cast<std::size_t>(r)] = saved;
    }
    return n;
  }

  int count_;
  double end_;
  std::vector<double> knots_;
};

}  // namespace qpulse
