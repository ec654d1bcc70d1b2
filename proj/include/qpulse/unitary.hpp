#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace qpulse {

using complexd = std::complex<double>;

// Hilbert-space dimension of a single qubit. The fidelity metric below is
// specific to M = 2 and does not generalize.
inline constexpr int kHilbertDim = 2;

// Producers (gate constructors, the propagator) guarantee unitarity to
// kUnitaryProducerTol; consumers validate at the looser kUnitaryArgTol.
inline constexpr double kUnitaryProducerTol = 1e-10;
inline constexpr double kUnitaryArgTol = 1e-8;
inline constexpr double kStateNormTol = 1e-8;

// 2x2 complex matrix, row-major: [[u00, u01], [u10, u11]].
struct Unitary2 {
  complexd u00, u01, u10, u11;

  static Unitary2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  Unitary2 adjoint() const {
    return {std::conj(u00), std::conj(u10), std::conj(u01), std::conj(u11)};
  }

  complexd trace() const { return u00 + u11; }
  complexd det() const { return u00 * u11 - u01 * u10; }

  Unitary2 operator*(const Unitary2& o) const {
    return {u00 * o.u00 + u01 * o.u10, u00 * o.u01 + u01 * o.u11,
            u10 * o.u00 + u11 * o.u10, u10 * o.u01 + u11 * o.u11};
  }

  Unitary2 scaled(complexd s) const { return {s * u00, s * u01, s * u10, s * u11}; }

  // max-entry norm of U†U - I
  double unitarity_defect() const {
    Unitary2 g = adjoint() * (*this);
    double d = std::abs(g.u00 - 1.0);
    d = std::max(d, std::abs(g.u11 - 1.0));
    d = std::max(d, std::abs(g.u01));
    d = std::max(d, std::abs(g.u10));
    return d;
  }

  bool is_unitary(double tol) const { return unitarity_defect() <= tol; }

  double max_entry_distance(const Unitary2& o) const {
    double d = std::abs(u00 - o.u00);
    d = std::max(d, std::abs(u01 - o.u01));
    d = std::max(d, std::abs(u10 - o.u10));
    d = std::max(d, std::abs(u11 - o.u11));
    return d;
  }
};

// exp(-i*beta*sigma_x/2): rotation of the Bloch sphere about x by beta.
inline Unitary2 rx_gate(double beta) {
  if (!std::isfinite(beta)) throw std::invalid_argument("rx_gate: beta must be finite");
  double c = std::cos(0.5 * beta);
  double s = std::sin(0.5 * beta);
  return {complexd(c, 0.0), complexd(0.0, -s), complexd(0.0, -s), complexd(c, 0.0)};
}

// Overlap metric between two gates: F = (M + |tr(U1† U2)|^2) / (M (M + 1)),
// M = 2. Ranges over [1/3, 1]; 1 means equal up to a global phase.
inline double gate_fidelity(const Unitary2& u1, const Unitary2& u2) {
  if (!u1.is_unitary(kUnitaryArgTol) || !u2.is_unitary(kUnitaryArgTol))
    throw std::invalid_argument("gate_fidelity: inputs must be unitary");
  Unitary2 u = u1.adjoint() * u2;
  double t2 = std::norm(u.trace());
  return (kHilbertDim + t2) / (kHilbertDim * (kHilbertDim + 1));
}

// Qubit state x|0> + y|1>.
struct QubitState {
  complexd x, y;

  static QubitState ground() { return {1.0, 0.0}; }

  double norm_sq() const { return std::norm(x) + std::norm(y); }
  bool is_normalized(double tol) const { return std::abs(norm_sq() - 1.0) <= tol; }
};

inline QubitState apply(const Unitary2& u, const QubitState& s) {
  return {u.u00 * s.x + u.u01 * s.y, u.u10 * s.x + u.u11 * s.y};
}

struct BlochVector {
  double x, y, z;
};

// (x, y, z) = (2 Re(x̄y), 2 Im(x̄y), |x|^2 - |y|^2); unit length for a
// normalized state.
inline BlochVector bloch_coords(const QubitState& s) {
  if (!s.is_normalized(kStateNormTol))
    throw std::invalid_argument("bloch_coords: state must be normalized");
  complexd cross = std::conj(s.x) * s.y;
  return {2.0 * cross.real(), 2.0 * cross.imag(), std::norm(s.x) - std::norm(s.y)};
}

}  // namespace qpulse
