#include "bellgen/quantum.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "bellgen/errors.hpp"

namespace bellgen {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void check_hermitian_trace_one(const Eigen::MatrixXcd& m, double herm_tol, double trace_tol) {
  const double herm_dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm_dev > herm_tol) {
    throw validation_error("density matrix is not Hermitian (max deviation " +
                           std::to_string(herm_dev) + ")");
  }
  const cx tr = m.trace();
  if (std::abs(tr - cx(1.0, 0.0)) > trace_tol) {
    throw validation_error("density matrix trace is not 1 (got " + std::to_string(tr.real()) +
                           (tr.imag() >= 0 ? "+" : "") + std::to_string(tr.imag()) + "i)");
  }
}

}  // namespace

std::string to_string(BellLabel label) {
  switch (label) {
    case BellLabel::PhiPlus:
      return "phi_plus";
    case BellLabel::PhiMinus:
      return "phi_minus";
    case BellLabel::PsiPlus:
      return "psi_plus";
    case BellLabel::PsiMinus:
      return "psi_minus";
  }
  return "?";
}

TwoQubitKet::TwoQubitKet(const Vec4c& amplitudes) : amp_(amplitudes) {
  const double n = amp_.norm();
  if (n < 1e-15) {
    throw degenerate_input_error("two-qubit state has zero norm");
  }
  amp_ /= n;
}

SingleQubitState::SingleQubitState(const Vec2c& amplitudes) : amp_(amplitudes) {
  const double n = amp_.norm();
  if (n < 1e-15) {
    throw degenerate_input_error("single-qubit state has zero norm");
  }
  amp_ /= n;
}

DensityMatrix DensityMatrix::from_matrix(const Mat4c& m) {
  check_hermitian_trace_one(m, kHermitianTol, kTraceTol);
  Eigen::SelfAdjointEigenSolver<Mat4c> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < kEigenFloor) {
    throw validation_error("density matrix has eigenvalue " +
                           std::to_string(es.eigenvalues().minCoeff()) + " below tolerance");
  }
  return DensityMatrix(Mat4c((m + m.adjoint()) / 2.0));
}

DensityMatrix DensityMatrix::pure(const TwoQubitKet& psi) {
  const Vec4c& a = psi.amplitudes();
  return DensityMatrix(Mat4c(a * a.adjoint()));
}

TwoQubitKet bell_state(BellLabel label) {
  Vec4c a = Vec4c::Zero();
  switch (label) {
    case BellLabel::PhiPlus:
      a(0) = kInvSqrt2;
      a(3) = kInvSqrt2;
      break;
    case BellLabel::PhiMinus:
      a(0) = kInvSqrt2;
      a(3) = -kInvSqrt2;
      break;
    case BellLabel::PsiPlus:
      a(1) = kInvSqrt2;
      a(2) = kInvSqrt2;
      break;
    case BellLabel::PsiMinus:
      a(1) = kInvSqrt2;
      a(2) = -kInvSqrt2;
      break;
  }
  return TwoQubitKet(a);
}

std::array<SingleQubitState, 6> pauli_eigenstates() {
  const cx i(0.0, 1.0);
  return {
      SingleQubitState(Vec2c(1.0, 0.0)),        // |0>
      SingleQubitState(Vec2c(0.0, 1.0)),        // |1>
      SingleQubitState(Vec2c(1.0, 1.0)),        // |+>
      SingleQubitState(Vec2c(1.0, -1.0)),       // |->
      SingleQubitState(Vec2c(cx(1.0), i)),      // |i>
      SingleQubitState(Vec2c(cx(1.0), -i)),     // |-i>
  };
}

double fidelity(const DensityMatrix& rho, const TwoQubitKet& target) {
  const Vec4c& t = target.amplitudes();
  const cx val = t.dot(rho.matrix() * t);
  return std::clamp(val.real(), 0.0, 1.0);
}

double concurrence(const DensityMatrix& rho) {
  // sy x sy in the computational basis: antidiagonal (-1, 1, 1, -1).
  Mat4c flip = Mat4c::Zero();
  flip(0, 3) = -1.0;
  flip(1, 2) = 1.0;
  flip(2, 1) = 1.0;
  flip(3, 0) = -1.0;

  const Mat4c spin_flipped = flip * rho.matrix().conjugate() * flip;
  const Mat4c m = rho.matrix() * spin_flipped;

  Eigen::ComplexEigenSolver<Mat4c> es(m, false);
  std::array<double, 4> roots{};
  for (int k = 0; k < 4; ++k) {
    roots[k] = std::sqrt(std::max(0.0, es.eigenvalues()(k).real()));
  }
  std::sort(roots.begin(), roots.end(), std::greater<double>());
  return std::max(0.0, roots[0] - roots[1] - roots[2] - roots[3]);
}

Mat2c partial_trace(const DensityMatrix& rho, Qubit keep) {
  const Mat4c& m = rho.matrix();
  Mat2c out = Mat2c::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (keep == Qubit::A) {
        out(i, j) = m(2 * i + 0, 2 * j + 0) + m(2 * i + 1, 2 * j + 1);
      } else {
        out(i, j) = m(0 + i, 0 + j) + m(2 + i, 2 + j);
      }
    }
  }
  return out;
}

double von_neumann_entropy(const Mat2c& rho2) {
  check_hermitian_trace_one(rho2, kHermitianTol, kTraceTol);
  Eigen::SelfAdjointEigenSolver<Mat2c> es(rho2, Eigen::EigenvaluesOnly);
  double l0 = es.eigenvalues()(0);
  double l1 = es.eigenvalues()(1);
  if (l0 < kEigenFloor || l1 < kEigenFloor) {
    throw validation_error("reduced density matrix has eigenvalue below tolerance");
  }
  l0 = std::max(0.0, l0);
  l1 = std::max(0.0, l1);
  const double total = l0 + l1;
  l0 /= total;
  l1 /= total;
  double s = 0.0;
  if (l0 > 0.0) s -= l0 * std::log(l0);
  if (l1 > 0.0) s -= l1 * std::log(l1);
  return s;
}

}  // namespace bellgen
