#include "bellgen/circuit.hpp"

#include <cmath>
#include <sstream>

#include "bellgen/errors.hpp"

namespace bellgen {

namespace {

constexpr double kPi = 3.14159265358979323846;

double reduce_2pi(double x) {
  double r = std::fmod(x, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  return r;
}

Mat4c kron2(const Mat2c& a, const Mat2c& b) {
  Mat4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

}  // namespace

void PhaseConfig::validate() const {
  for (double v : {phi1, theta1, theta2, phi2, phi3, theta3, phi4, theta4}) {
    if (!std::isfinite(v)) throw validation_error("phase configuration contains a non-finite value");
  }
}

void SourceParams::validate() const {
  if (!(eta_a >= 0.0) || !(eta_b >= 0.0) || !std::isfinite(eta_a) || !std::isfinite(eta_b)) {
    throw validation_error("source efficiencies must be finite and nonnegative");
  }
  if (!(pump_power >= 0.0) || !std::isfinite(pump_power)) {
    throw validation_error("pump power must be finite and nonnegative");
  }
}

std::string to_string(Pauli p) {
  switch (p) {
    case Pauli::X:
      return "X";
    case Pauli::Y:
      return "Y";
    case Pauli::Z:
      return "Z";
  }
  return "?";
}

std::optional<Pauli> parse_pauli(char c) {
  switch (c) {
    case 'X':
    case 'x':
      return Pauli::X;
    case 'Y':
    case 'y':
      return Pauli::Y;
    case 'Z':
    case 'z':
      return Pauli::Z;
    default:
      return std::nullopt;
  }
}

std::string to_string(TargetState t) {
  switch (t) {
    case TargetState::Ket00:
      return "00";
    case TargetState::Ket01:
      return "01";
    case TargetState::Ket10:
      return "10";
    case TargetState::Ket11:
      return "11";
    case TargetState::PsiPlus:
      return "psi_plus";
    case TargetState::PsiMinus:
      return "psi_minus";
    case TargetState::PhiPlus:
      return "phi_plus";
    case TargetState::PhiMinus:
      return "phi_minus";
  }
  return "?";
}

std::optional<TargetState> parse_target(const std::string& name) {
  if (name == "00") return TargetState::Ket00;
  if (name == "01") return TargetState::Ket01;
  if (name == "10") return TargetState::Ket10;
  if (name == "11") return TargetState::Ket11;
  if (name == "psi_plus" || name == "psi+") return TargetState::PsiPlus;
  if (name == "psi_minus" || name == "psi-") return TargetState::PsiMinus;
  if (name == "phi_plus" || name == "phi+") return TargetState::PhiPlus;
  if (name == "phi_minus" || name == "phi-") return TargetState::PhiMinus;
  return std::nullopt;
}

bool target_is_bell(TargetState t) {
  switch (t) {
    case TargetState::PsiPlus:
    case TargetState::PsiMinus:
    case TargetState::PhiPlus:
    case TargetState::PhiMinus:
      return true;
    default:
      return false;
  }
}

TwoQubitKet target_ket(TargetState t) {
  switch (t) {
    case TargetState::Ket00:
      return TwoQubitKet(Vec4c(1, 0, 0, 0));
    case TargetState::Ket01:
      return TwoQubitKet(Vec4c(0, 1, 0, 0));
    case TargetState::Ket10:
      return TwoQubitKet(Vec4c(0, 0, 1, 0));
    case TargetState::Ket11:
      return TwoQubitKet(Vec4c(0, 0, 0, 1));
    case TargetState::PsiPlus:
      return bell_state(BellLabel::PsiPlus);
    case TargetState::PsiMinus:
      return bell_state(BellLabel::PsiMinus);
    case TargetState::PhiPlus:
      return bell_state(BellLabel::PhiPlus);
    case TargetState::PhiMinus:
      return bell_state(BellLabel::PhiMinus);
  }
  throw validation_error("unknown target state");
}

std::pair<double, double> pump_split(double phi1, double p0) {
  if (!(p0 >= 0.0) || !std::isfinite(p0)) {
    throw validation_error("pump power must be finite and nonnegative");
  }
  const double s = std::sin(reduce_2pi(phi1) / 2.0);
  const double pa = p0 * s * s;
  return {pa, p0 - pa};
}

double balanced_phi1(double eta_a, double eta_b) {
  if (!(eta_a > 0.0)) throw validation_error("balanced phi1 requires eta_a > 0");
  return 2.0 * std::atan(eta_b / eta_a);
}

TwoQubitKet generate_state(const PhaseConfig& cfg, const SourceParams& src) {
  cfg.validate();
  src.validate();
  const auto [pa, pb] = pump_split(cfg.phi1, src.pump_power);
  const double ra = src.eta_a * std::sqrt(pa);
  const double rb = src.eta_b * std::sqrt(pb);
  if (ra >= kMaxSqueezing || rb >= kMaxSqueezing) {
    throw validation_error("squeezing parameter r >= 0.1; single-pair truncation invalid");
  }
  const cx phase = std::exp(cx(0.0, cfg.theta1 + 2.0 * cfg.theta2));
  const double s2 = std::sin(cfg.phi2 / 2.0);
  const double c2 = std::cos(cfg.phi2 / 2.0);
  Vec4c amp;
  amp << ra * phase * s2, ra * phase * c2, cx(rb * c2), cx(-rb * s2);
  if (amp.norm() < 1e-15) {
    throw degenerate_input_error("both source amplitudes vanish; no post-selected state");
  }
  return TwoQubitKet(amp);
}

double pair_emission_weight(const PhaseConfig& cfg, const SourceParams& src) {
  const auto [pa, pb] = pump_split(cfg.phi1, src.pump_power);
  const double ra = src.eta_a * std::sqrt(pa);
  const double rb = src.eta_b * std::sqrt(pb);
  return ra * ra + rb * rb;
}

std::array<cx, 4> bell_decompose(const TwoQubitKet& psi) {
  std::array<cx, 4> out;
  out[0] = bell_state(BellLabel::PhiPlus).overlap(psi);
  out[1] = bell_state(BellLabel::PhiMinus).overlap(psi);
  out[2] = bell_state(BellLabel::PsiPlus).overlap(psi);
  out[3] = bell_state(BellLabel::PsiMinus).overlap(psi);
  return out;
}

TwoQubitKet bell_recompose(const std::array<cx, 4>& coeffs) {
  Vec4c amp = coeffs[0] * bell_state(BellLabel::PhiPlus).amplitudes() +
              coeffs[1] * bell_state(BellLabel::PhiMinus).amplitudes() +
              coeffs[2] * bell_state(BellLabel::PsiPlus).amplitudes() +
              coeffs[3] * bell_state(BellLabel::PsiMinus).amplitudes();
  return TwoQubitKet(amp);
}

Mat2c directional_coupler() {
  Mat2c dc;
  const double r = 0.70710678118654752440;
  dc << cx(r, 0), cx(0, r), cx(0, r), cx(r, 0);
  return dc;
}

Mat2c mzi_transfer(double phi) {
  Mat2c inner = Mat2c::Zero();
  inner(0, 0) = std::exp(cx(0.0, phi));
  inner(1, 1) = 1.0;
  const Mat2c dc = directional_coupler();
  return dc * inner * dc;
}

Mat2c analysis_unitary(double phi, double theta) {
  Mat2c shift = Mat2c::Zero();
  shift(0, 0) = std::exp(cx(0.0, theta));
  shift(1, 1) = 1.0;
  return mzi_transfer(phi) * shift;
}

AnalysisPhases analysis_phases(Pauli p) {
  switch (p) {
    case Pauli::Z:
      return {kPi, 0.0};
    case Pauli::X:
      return {kPi / 2.0, 0.0};
    case Pauli::Y:
      return {kPi / 2.0, kPi / 2.0};
  }
  throw validation_error("unknown Pauli label");
}

ProjectionPhases projection_setting(Pauli pauli_a, Pauli pauli_b) {
  const AnalysisPhases a = analysis_phases(pauli_a);
  const AnalysisPhases b = analysis_phases(pauli_b);
  return {a.phi, a.theta, b.phi, b.theta};
}

Vec2c analysis_state(const AnalysisPhases& ap, int rail) {
  const Mat2c u = analysis_unitary(ap.phi, ap.theta);
  return u.adjoint().col(rail);
}

Mat4c projector_for(RailA rail_a, RailB rail_b, Pauli pauli_a, Pauli pauli_b) {
  const Vec2c ua = analysis_state(analysis_phases(pauli_a), rail_a == RailA::a ? 0 : 1);
  const Vec2c ub = analysis_state(analysis_phases(pauli_b), rail_b == RailB::c ? 0 : 1);
  const Mat2c pa = ua * ua.adjoint();
  const Mat2c pb = ub * ub.adjoint();
  return kron2(pa, pb);
}

Mat4c projector_from_phases(RailA rail_a, RailB rail_b, const ProjectionPhases& phases) {
  const Vec2c ua =
      analysis_state({phases.phi3, phases.theta3}, rail_a == RailA::a ? 0 : 1);
  const Vec2c ub =
      analysis_state({phases.phi4, phases.theta4}, rail_b == RailB::c ? 0 : 1);
  return kron2(ua * ua.adjoint(), ub * ub.adjoint());
}

PhaseConfig preset_phases(TargetState t, const SourceParams& src) {
  src.validate();
  PhaseConfig cfg;
  const ProjectionPhases zz = projection_setting(Pauli::Z, Pauli::Z);
  cfg.phi3 = zz.phi3;
  cfg.theta3 = zz.theta3;
  cfg.phi4 = zz.phi4;
  cfg.theta4 = zz.theta4;

  const double bal = balanced_phi1(src.eta_a, src.eta_b);
  switch (t) {
    case TargetState::Ket00:
      cfg.phi1 = kPi;
      cfg.phi2 = kPi;
      cfg.theta2 = kPi;
      break;
    case TargetState::Ket01:
      cfg.phi1 = kPi;
      cfg.phi2 = 0.0;
      cfg.theta2 = 0.0;
      break;
    case TargetState::Ket10:
      cfg.phi1 = 0.0;
      cfg.phi2 = 0.0;
      cfg.theta2 = kPi;
      break;
    case TargetState::Ket11:
      cfg.phi1 = 0.0;
      cfg.phi2 = kPi;
      cfg.theta2 = 0.0;
      break;
    case TargetState::PsiPlus:
      cfg.phi1 = bal;
      cfg.phi2 = 0.0;
      cfg.theta2 = 0.0;
      break;
    case TargetState::PsiMinus:
      cfg.phi1 = bal;
      cfg.phi2 = 0.0;
      cfg.theta2 = kPi / 2.0;
      break;
    case TargetState::PhiPlus:
      cfg.phi1 = bal;
      cfg.phi2 = kPi;
      cfg.theta2 = kPi / 2.0;
      break;
    case TargetState::PhiMinus:
      cfg.phi1 = bal;
      cfg.phi2 = kPi;
      cfg.theta2 = 0.0;
      break;
  }
  return cfg;
}

std::string explain_presets(const SourceParams& src) {
  std::ostringstream os;
  const double bal = balanced_phi1(src.eta_a, src.eta_b);
  os << "Preset phases are derived from the generated-state expression\n"
     << "  psi ~ r_A e^{i(theta1+2 theta2)} [sin(phi2/2)|00> + cos(phi2/2)|01>]\n"
     << "      + r_B [cos(phi2/2)|10> - sin(phi2/2)|11>],  r_k = eta_k sqrt(P_k)\n"
     << "with theta1 = 0 (any passive offset can be absorbed into theta2).\n"
     << "\n"
     << "Basis states select one source (phi1 = pi feeds A, phi1 = 0 feeds B)\n"
     << "and use phi2 to route the second qubit. Populating |00> or |11>\n"
     << "requires phi2 = pi: at phi2 = 0 the cross term cos(phi2/2) = 1 puts\n"
     << "all population on |01> or |10> instead. Hardware settings sheets that\n"
     << "list phi2 = 0 for the |00> and |11> targets are not consistent with\n"
     << "the state expression above; this tool always uses the derived value.\n"
     << "\n"
     << "Bell states need equal source amplitudes, eta_a sin(phi1/2) =\n"
     << "eta_b cos(phi1/2), i.e. phi1 = 2 atan(eta_b/eta_a) = " << bal << " rad\n"
     << "for the configured eta_a/eta_b = " << (src.eta_a / src.eta_b) << ".\n"
     << "phi2 then chooses the parity (0 -> Psi, pi -> Phi) and theta2 = pi/2\n"
     << "vs 0 toggles the +/- superposition via the e^{2 i theta2} factor.\n";
  return os.str();
}

}  // namespace bellgen
