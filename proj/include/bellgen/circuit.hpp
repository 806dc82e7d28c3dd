#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>

#include "bellgen/quantum.hpp"

namespace bellgen {

// All eight thermo-optically controlled phases, in radians. phi1 splits the
// pump between the two sources; theta1 is the passive path-length phase of
// the pump arms; theta2/phi2 reconfigure the generated state; phi3/theta3
// and phi4/theta4 set the analysis interferometers of qubits A and B.
struct PhaseConfig {
  double phi1 = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double phi2 = 0.0;
  double phi3 = 0.0;
  double theta3 = 0.0;
  double phi4 = 0.0;
  double theta4 = 0.0;

  void validate() const;  // all entries finite
};

// Pair-source parameters. eta_a/eta_b are SPDC amplitudes per sqrt(power
// unit); the squeezing parameter of source k is r_k = eta_k sqrt(P_k) and
// must stay below 0.1 for the single-pair truncation to hold.
struct SourceParams {
  double eta_a = 0.05196152422706632;  // 0.03 * sqrt(3)
  double eta_b = 0.03;
  double pump_power = 1.0;  // mW

  void validate() const;
};

inline constexpr double kMaxSqueezing = 0.1;

enum class Pauli { X, Y, Z };
enum class RailA { a, b };
enum class RailB { c, d };

std::string to_string(Pauli p);
std::optional<Pauli> parse_pauli(char c);

// Analysis phases of one qubit's projection stage (external shifter theta
// followed by an MZI with internal phase phi).
struct AnalysisPhases {
  double phi = 0.0;
  double theta = 0.0;
};

// Analysis phases for a joint Pauli-pair projection setting.
struct ProjectionPhases {
  double phi3 = 0.0;
  double theta3 = 0.0;
  double phi4 = 0.0;
  double theta4 = 0.0;
};

// Named preparation targets: four computational basis states and the four
// Bell states.
enum class TargetState {
  Ket00,
  Ket01,
  Ket10,
  Ket11,
  PsiPlus,
  PsiMinus,
  PhiPlus,
  PhiMinus,
};

std::string to_string(TargetState t);
std::optional<TargetState> parse_target(const std::string& name);
bool target_is_bell(TargetState t);
TwoQubitKet target_ket(TargetState t);

// Pump power routed to sources A and B by the input MZI:
// P_A = P0 sin^2(phi1/2), P_B = P0 cos^2(phi1/2).
std::pair<double, double> pump_split(double phi1, double p0);

// phi1 that equalizes the two source amplitudes: eta_a sin(phi1/2) =
// eta_b cos(phi1/2), i.e. phi1 = 2 atan(eta_b/eta_a).
double balanced_phi1(double eta_a, double eta_b);

// Normalized post-selected two-qubit state generated by the circuit:
//   psi  propto  r_A e^{i(theta1 + 2 theta2)} [sin(phi2/2)|00> + cos(phi2/2)|01>]
//              + r_B                          [cos(phi2/2)|10> - sin(phi2/2)|11>]
// with r_k = eta_k sqrt(P_k). Throws degenerate_input_error when both
// source amplitudes vanish and validation_error when r_k >= 0.1.
TwoQubitKet generate_state(const PhaseConfig& cfg, const SourceParams& src);

// Squared norm of the unnormalized generated state, r_A^2 + r_B^2; the
// relative pair-emission weight of a phase configuration.
double pair_emission_weight(const PhaseConfig& cfg, const SourceParams& src);

// Coefficients of psi in the Bell basis, ordered (Phi+, Phi-, Psi+, Psi-).
std::array<cx, 4> bell_decompose(const TwoQubitKet& psi);
TwoQubitKet bell_recompose(const std::array<cx, 4>& coeffs);

// Single-mode-pair transfer matrices. The directional-coupler convention is
// fixed project-wide: DC = (1/sqrt(2)) [[1, i], [i, 1]], and
// MZI(phi) = DC diag(e^{i phi}, 1) DC, giving |bar|^2 = sin^2(phi/2).
Mat2c directional_coupler();
Mat2c mzi_transfer(double phi);

// Full analysis unitary of one qubit: MZI(phi) after a phase theta on the
// logical-0 rail.
Mat2c analysis_unitary(double phi, double theta);

// Frozen per-Pauli analysis phases under the conventions above:
//   Z -> (phi=pi,   theta=0)     rails (a,b) detect (|0>, |1>)
//   X -> (phi=pi/2, theta=0)     rails (a,b) detect (|+>, |->)
//   Y -> (phi=pi/2, theta=pi/2)  rails (a,b) detect (|i>, |-i>)
AnalysisPhases analysis_phases(Pauli p);
ProjectionPhases projection_setting(Pauli pauli_a, Pauli pauli_b);

// Single-qubit state projected onto by a detector: u = U(phi,theta)^dag |rail>.
Vec2c analysis_state(const AnalysisPhases& ap, int rail);

// Rank-1 two-qubit projector for a detector pair under a Pauli-pair setting.
Mat4c projector_for(RailA rail_a, RailB rail_b, Pauli pauli_a, Pauli pauli_b);

// Same, but from explicit analysis phases (phi3, theta3, phi4, theta4).
Mat4c projector_from_phases(RailA rail_a, RailB rail_b, const ProjectionPhases& phases);

// Formula-derived preparation phases for a named target. Bell targets use
// the balanced pump angle for the given source parameters; analysis phases
// are initialized to the (Z, Z) setting. theta1 is taken as 0.
PhaseConfig preset_phases(TargetState t, const SourceParams& src);

// Multi-line derivation note for `--explain`: how each preset follows from
// the generated-state expression.
std::string explain_presets(const SourceParams& src);

}  // namespace bellgen
