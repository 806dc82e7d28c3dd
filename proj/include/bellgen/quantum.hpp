#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <string>

namespace bellgen {

using cx = std::complex<double>;
using Vec2c = Eigen::Vector2cd;
using Vec4c = Eigen::Vector4cd;
using Mat2c = Eigen::Matrix2cd;
using Mat4c = Eigen::Matrix4cd;

// Validation tolerances for physical-state types.
inline constexpr double kNormTol = 1e-12;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigenFloor = -1e-10;

enum class BellLabel { PhiPlus, PhiMinus, PsiPlus, PsiMinus };
enum class Qubit { A, B };

std::string to_string(BellLabel label);

// Two-qubit pure state in the dual-rail computational basis. Basis ordering
// is a fixed contract used by every module: index = 2*A + B, i.e.
// 0 -> |00>, 1 -> |01>, 2 -> |10>, 3 -> |11>, with qubit A encoded in rails
// (a, b) and qubit B in rails (c, d); rail a (resp. c) is logical |0>.
class TwoQubitKet {
 public:
  // Normalizes; throws degenerate_input_error if the norm is ~zero.
  explicit TwoQubitKet(const Vec4c& amplitudes);

  const Vec4c& amplitudes() const { return amp_; }
  cx amplitude(int index) const { return amp_(index); }

  cx overlap(const TwoQubitKet& other) const { return amp_.dot(other.amp_); }

 private:
  Vec4c amp_;
};

// Single-qubit pure state; unit norm enforced at construction.
class SingleQubitState {
 public:
  explicit SingleQubitState(const Vec2c& amplitudes);
  const Vec2c& amplitudes() const { return amp_; }
  cx overlap(const SingleQubitState& other) const { return amp_.dot(other.amp_); }

 private:
  Vec2c amp_;
};

// 4x4 Hermitian, positive-semidefinite, trace-one matrix. Construction
// validates all three invariants (Hermitian within 1e-10, eigenvalues
// >= -1e-10, trace 1 within 1e-10) and throws validation_error otherwise.
class DensityMatrix {
 public:
  static DensityMatrix from_matrix(const Mat4c& m);
  static DensityMatrix pure(const TwoQubitKet& psi);

  const Mat4c& matrix() const { return m_; }

 private:
  explicit DensityMatrix(const Mat4c& m) : m_(m) {}
  Mat4c m_;
};

// The four maximally entangled states, e.g. Phi+ = (|00> + |11>)/sqrt(2).
TwoQubitKet bell_state(BellLabel label);

// {|0>, |1>, |+>, |->, |i>, |-i>} in that order; the +/- pairs of the three
// Pauli operators, forming three mutually unbiased bases.
std::array<SingleQubitState, 6> pauli_eigenstates();

// <target|rho|target>: fidelity of rho to a pure target state.
double fidelity(const DensityMatrix& rho, const TwoQubitKet& target);

// Wootters concurrence C = max(0, l1 - l2 - l3 - l4), where l_i are the
// decreasing square roots of the eigenvalues of rho (sy x sy) rho* (sy x sy).
double concurrence(const DensityMatrix& rho);

// Reduced density matrix of the kept qubit.
Mat2c partial_trace(const DensityMatrix& rho, Qubit keep);

// S = -sum(l ln l) in nats, with 0 ln 0 = 0. Validates that rho2 is a
// Hermitian PSD trace-one 2x2 matrix; eigenvalues in [-1e-10, 0) are
// clipped to zero and the spectrum renormalized.
double von_neumann_entropy(const Mat2c& rho2);

}  // namespace bellgen
