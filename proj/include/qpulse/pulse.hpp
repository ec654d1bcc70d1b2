#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qpulse/bspline.hpp"
#include "qpulse/unitary.hpp"

namespace qpulse {

// Control model: one resonant carrier in the rotating frame, so the drive
// reduces to the two quadratures H(t) = (p(t) sigma_x + q(t) sigma_y) / 2.
// Amplitudes are rad/ns and times ns, making integral(p dt) a rotation angle.
struct PulseConfig {
  double duration_ns = 100.0;
  int spline_count = 10;
  int carrier_count = 1;
  int time_steps = 1000;

  void validate() const {
    if (!(duration_ns > 0.0) || !std::isfinite(duration_ns))
      throw std::invalid_argument("PulseConfig: duration must be positive");
    if (spline_count < 3) throw std::invalid_argument("PulseConfig: spline_count must be >= 3");
    if (carrier_count != 1) throw std::invalid_argument("PulseConfig: only carrier_count = 1 is supported");
    if (time_steps < 10) throw std::invalid_argument("PulseConfig: time_steps must be >= 10");
  }

  int param_count() const { return 2 * spline_count * carrier_count; }
  BSplineBasis basis() const { return BSplineBasis(spline_count, duration_ns); }
};

// B-spline coefficients for the two quadratures; flattened layout is
// [p_0..p_{D-1}, q_0..q_{D-1}], the alpha vector.
struct PulseParams {
  std::vector<double> p_coeffs;  // sigma_x quadrature, rad/ns
  std::vector<double> q_coeffs;  // sigma_y quadrature, rad/ns

  static PulseParams zeros(int spline_count) {
    PulseParams a;
    a.p_coeffs.assign(static_cast<std::size_t>(spline_count), 0.0);
    a.q_coeffs.assign(static_cast<std::size_t>(spline_count), 0.0);
    return a;
  }

  // Constant x-quadrature envelope; with amplitude beta/T it realizes an
  // exact Rx(beta) thanks to partition of unity.
  static PulseParams constant_x(int spline_count, double amplitude) {
    PulseParams a = zeros(spline_count);
    for (double& v : a.p_coeffs) v = amplitude;
    return a;
  }

  static PulseParams from_flat(std::span<const double> flat) {
    if (flat.size() % 2 != 0) throw std::invalid_argument("PulseParams: flat vector must have even length");
    std::size_t d = flat.size() / 2;
    PulseParams a;
    a.p_coeffs.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(d));
    a.q_coeffs.assign(flat.begin() + static_cast<std::ptrdiff_t>(d), flat.end());
    return a;
  }

  std::vector<double> flat() const {
    std::vector<double> out(p_coeffs);
    out.insert(out.end(), q_coeffs.begin(), q_coeffs.end());
    return out;
  }

  std::size_t size() const { return p_coeffs.size() + q_coeffs.size(); }

  bool all_finite() const {
    for (double v : p_coeffs)
      if (!std::isfinite(v)) return false;
    for (double v : q_coeffs)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void validate_for(const PulseConfig& cfg) const {
    if (static_cast<int>(p_coeffs.size()) != cfg.spline_count ||
        static_cast<int>(q_coeffs.size()) != cfg.spline_count)
      throw std::invalid_argument("PulseParams: coefficient count does not match config");
    if (!all_finite()) throw std::invalid_argument("PulseParams: coefficients must be finite");
  }
};

struct QuadratureValues {
  double p, q;  // rad/ns
};

inline QuadratureValues envelope(const PulseParams& alpha, double t, const PulseConfig& cfg) {
  cfg.validate();
  alpha.validate_for(cfg);
  BSplineBasis basis = cfg.basis();
  std::vector<double> row = basis.evaluate_all(t);
  double p = 0.0, q = 0.0;
  for (int d = 0; d < cfg.spline_count; ++d) {
    p += alpha.p_coeffs[static_cast<std::size_t>(d)] * row[static_cast<std::size_t>(d)];
    q += alpha.q_coeffs[static_cast<std::size_t>(d)] * row[static_cast<std::size_t>(d)];
  }
  return {p, q};
}

namespace detail {

inline double sinc(double x) {
  if (std::abs(x) <= 1e-2) {
    double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

// (x cos x - sin x) / x^3, continuous at 0 with value -1/3.
inline double xcx_minus_sin_over_x3(double x) {
  if (std::abs(x) <= 1e-2) {
    double x2 = x * x;
    return -1.0 / 3.0 + x2 / 30.0 - x2 * x2 / 840.0;
  }
  return (x * std::cos(x) - std::sin(x)) / (x * x * x);
}

// Closed-form exp(-i H dt) for H = (p sigma_x + q sigma_y)/2.
inline Unitary2 step_unitary(double p, double q, double dt) {
  double h = 0.5 * std::hypot(p, q);
  double x = h * dt;
  double c = std::cos(x);
  double s = dt * sinc(x);  // sin(h dt)/h with the h -> 0 limit built in
  double w = 0.5 * s;
  return {complexd(c, 0.0), complexd(-w * q, -w * p), complexd(w * q, -w * p), complexd(c, 0.0)};
}

}  // namespace detail

struct FidelityGradient {
  double fidelity;
  std::vector<double> gradient;  // d fidelity / d alpha, flattened layout
};

// Propagation engine for one pulse configuration. The midpoint basis table
// is computed once at construction and immutable afterwards, so one instance
// can serve any number of threads.
class PulseSimulator {
 public:
  explicit PulseSimulator(const PulseConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    int n = cfg_.time_steps;
    int d = cfg_.spline_count;
    dt_ = cfg_.duration_ns / n;
    rows_.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(d));
    BSplineBasis basis = cfg_.basis();
    for (int k = 0; k < n; ++k) {
      basis.evaluate_all((k + 0.5) * dt_, row(k));
    }
  }

  const PulseConfig& config() const { return cfg_; }
  double dt() const { return dt_; }

  // Time-ordered product over uniform steps of the exact per-step
  // exponential, sampled at step midpoints. Second-order accurate and
  // unconditionally unitary.
  Unitary2 propagate(const PulseParams& alpha) const {
    alpha.validate_for(cfg_);
    std::vector<double> p, q;
    controls(alpha, p, q);
    Unitary2 u = Unitary2::identity();
    for (int k = 0; k < cfg_.time_steps; ++k)
      u = detail::step_unitary(p[static_cast<std::size_t>(k)], q[static_cast<std::size_t>(k)], dt_) * u;
    return u;
  }

  double fidelity(const PulseParams& alpha, const Unitary2& target) const {
    return gate_fidelity(target, propagate(alpha));
  }

  // Gradient of F(alpha) = gate_fidelity(target, propagate(alpha)) obtained
  // by differentiating the closed-form step exponential and accumulating
  // left/right partial products; exact for the chosen discretization.
  FidelityGradient fidelity_and_gradient(const PulseParams& alpha, const Unitary2& target) const {
    alpha.validate_for(cfg_);
    if (!target.is_unitary(kUnitaryArgTol))
      throw std::invalid_argument("fidelity_and_gradient: target must be unitary");

    int n = cfg_.time_steps;
    int d = cfg_.spline_count;
    std::vector<double> p, q;
    controls(alpha, p, q);

    std::vector<Unitary2> steps(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
      steps[static_cast<std::size_t>(k)] =
          detail::step_unitary(p[static_cast<std::size_t>(k)], q[static_cast<std::size_t>(k)], dt_);

    // suffix[k] = U_{n-1} ... U_k, suffix[n] = I
    std::vector<Unitary2> suffix(static_cast<std::size_t>(n) + 1);
    suffix[static_cast<std::size_t>(n)] = Unitary2::identity();
    for (int k = n - 1; k >= 0; --k)
      suffix[static_cast<std::size_t>(k)] =
          suffix[static_cast<std::size_t>(k + 1)] * steps[static_cast<std::size_t>(k)];

    Unitary2 g = target.adjoint();
    complexd z = (g * suffix[0]).trace();
    double fidelity = (kHilbertDim + std::norm(z)) / (kHilbertDim * (kHilbertDim + 1));

    std::vector<double> ep(static_cast<std::size_t>(n)), eq(static_cast<std::size_t>(n));
    Unitary2 prefix = Unitary2::identity();  // U_{k-1} ... U_0
    for (int k = 0; k < n; ++k) {
      Unitary2 a = prefix * (g * suffix[static_cast<std::size_t>(k + 1)]);
      double pk = p[static_cast<std::size_t>(k)];
      double qk = q[static_cast<std::size_t>(k)];
      double h = 0.5 * std::hypot(pk, qk);
      double x = h * dt_;
      double snc = detail::sinc(x);
      double s = dt_ * snc;
      double gg = detail::xcx_minus_sin_over_x3(x);

      complexd tr_a = a.trace();
      complexd tr_ah = 0.5 * (a.u01 * complexd(pk, qk) + a.u10 * complexd(pk, -qk));
      complexd tr_asx = 0.5 * (a.u01 + a.u10);
      complexd tr_asy = 0.5 * complexd(0.0, 1.0) * (a.u01 - a.u10);

      double dc_dp = -0.25 * pk * dt_ * dt_ * snc;
      double ds_dp = 0.25 * pk * dt_ * dt_ * dt_ * gg;
      double dc_dq = -0.25 * qk * dt_ * dt_ * snc;
      double ds_dq = 0.25 * qk * dt_ * dt_ * dt_ * gg;

      const complexd mi(0.0, -1.0);
      complexd dz_dp = dc_dp * tr_a + mi * (ds_dp * tr_ah + s * tr_asx);
      complexd dz_dq = dc_dq * tr_a + mi * (ds_dq * tr_ah + s * tr_asy);
      ep[static_cast<std::size_t>(k)] = (std::conj(z) * dz_dp).real() / 3.0;
      eq[static_cast<std::size_t>(k)] = (std::conj(z) * dz_dq).real() / 3.0;

      prefix = steps[static_cast<std::size_t>(k)] * prefix;
    }

    std::vector<double> grad(static_cast<std::size_t>(2 * d), 0.0);
    for (int k = 0; k < n; ++k) {
      const double* r = rows_.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(d);
      double epk = ep[static_cast<std::size_t>(k)];
      double eqk = eq[static_cast<std::size_t>(k)];
      for (int j = 0; j < d; ++j) {
        grad[static_cast<std::size_t>(j)] += epk * r[j];
        grad[static_cast<std::size_t>(d + j)] += eqk * r[j];
      }
    }
    return {fidelity, std::move(grad)};
  }

 private:
  std::span<double> row(int k) {
    return {rows_.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(cfg_.spline_count),
            static_cast<std::size_t>(cfg_.spline_count)};
  }

  void controls(const PulseParams& alpha, std::vector<double>& p, std::vector<double>& q) const {
    int n = cfg_.time_steps;
    int d = cfg_.spline_count;
    p.resize(static_cast<std::size_t>(n));
    q.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double* r = rows_.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(d);
      double pk = 0.0, qk = 0.0;
      for (int j = 0; j < d; ++j) {
        pk += alpha.p_coeffs[static_cast<std::size_t>(j)] * r[j];
        qk += alpha.q_coeffs[static_cast<std::size_t>(j)] * r[j];
      }
      p[static_cast<std::size_t>(k)] = pk;
      q[static_cast<std::size_t>(k)] = qk;
    }
  }

  PulseConfig cfg_;
  double dt_ = 0.0;
  std::vector<double> rows_;  // time_steps x spline_count midpoint basis values
};

inline Unitary2 propagate(const PulseParams& alpha, const PulseConfig& cfg) {
  return PulseSimulator(cfg).propagate(alpha);
}

inline FidelityGradient fidelity_and_gradient(const PulseParams& alpha, const Unitary2& target,
                                              const PulseConfig& cfg) {
  return PulseSimulator(cfg).fidelity_and_gradient(alpha, target);
}

inline std::vector<double> fidelity_gradient(const PulseParams& alpha, const Unitary2& target,
                                             const PulseConfig& cfg) {
  return PulseSimulator(cfg).fidelity_and_gradient(alpha, target).gradient;
}

struct TrajectorySample {
  double t;  // ns
  QubitState state;
};

// States at `samples` uniformly spaced times from 0 to T inclusive. The step
// count is rounded up to a multiple of samples - 1 so every sample lies on a
// step boundary; with the default divisible configs this reproduces
// propagate() exactly.
inline std::vector<TrajectorySample> propagate_trajectory(const PulseParams& alpha, const PulseConfig& cfg,
                                                          const QubitState& s0, int samples) {
  cfg.validate();
  alpha.validate_for(cfg);
  if (samples < 2) throw std::invalid_argument("propagate_trajectory: need at least 2 samples");
  if (!s0.is_normalized(kStateNormTol))
    throw std::invalid_argument("propagate_trajectory: initial state must be normalized");

  int segments = samples - 1;
  int stride = (cfg.time_steps + segments - 1) / segments;
  PulseConfig fine = cfg;
  fine.time_steps = stride * segments;

  BSplineBasis basis = fine.basis();
  double dt = fine.duration_ns / fine.time_steps;
  std::vector<double> r(static_cast<std::size_t>(fine.spline_count));
  std::vector<TrajectorySample> out;
  out.reserve(static_cast<std::size_t>(samples));
  QubitState s = s0;
  out.push_back({0.0, s});
  for (int k = 0; k < fine.time_steps; ++k) {
    basis.evaluate_all((k + 0.5) * dt, r);
    double p = 0.0, q = 0.0;
    for (int j = 0; j < fine.spline_count; ++j) {
      p += alpha.p_coeffs[static_cast<std::size_t>(j)] * r[static_cast<std::size_t>(j)];
      q += alpha.q_coeffs[static_cast<std::size_t>(j)] * r[static_cast<std::size_t>(j)];
    }
    s = apply(detail::step_unitary(p, q, dt), s);
    if ((k + 1) % stride == 0)
      out.push_back({cfg.duration_ns * static_cast<double>((k + 1) / stride) / segments, s});
  }
  return out;
}

}  // namespace qpulse
