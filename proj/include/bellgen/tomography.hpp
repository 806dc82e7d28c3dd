#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "bellgen/experiment.hpp"
#include "bellgen/quantum.hpp"

namespace bellgen {

// 16 real parameters of a lower-triangular complex matrix T with
// rho = T^dag T / Tr(T^dag T). Layout: [d00, d11, d22, d33,
// Re T10, Im T10, Re T20, Im T20, Re T21, Im T21,
// Re T30, Im T30, Re T31, Im T31, Re T32, Im T32].
struct TParams {
  std::array<double, 16> v{};

  Mat4c to_matrix() const;
};

// Valid density matrix for any nonzero parameter vector; throws
// degenerate_input_error when all parameters vanish.
DensityMatrix rho_from_t(const TParams& t);

// Lower-triangular factor of a density matrix (reverse Cholesky with a tiny
// diagonal ridge so rank-deficient inputs factor too).
TParams t_from_rho(const Mat4c& rho);

// Norm parameters are bounded to [1e-3, 1e3].
inline constexpr double kNormLower = 1e-3;
inline constexpr double kNormUpper = 1e3;

// Least-squares tomography objective. Expected counts are
//   C~_m = N_m p_m(rho) * S,   S = (sum_m C_m) / (sum_m N_m p_m),
// where p_m = Tr(rho Pi_m), N_m is the norm parameter of the detector pair
// of measurement m, and the scale S matches the modeled total to the
// observed total. Requires a complete 9-setting record set.
double likelihood(const TParams& t, const std::array<double, 4>& norms,
                  const std::vector<CoincidenceRecord>& records);

struct LinearInversionSeed {
  TParams t;
  std::array<double, 4> norms{1.0, 1.0, 1.0, 1.0};
  Mat4c rho;  // PSD-projected linear-inversion estimate
};

// Direct Pauli-expectation inversion of the counts, projected to the
// nearest PSD trace-one matrix, with a one-step refinement of the per-pair
// norm estimates. Always returns a usable optimizer seed.
LinearInversionSeed linear_inversion_seed(const std::vector<CoincidenceRecord>& records);

struct MleOptions {
  int n_starts = 8;        // identity-mixed seed, linear-inversion seed, random fills
  int max_iters = 2000;    // optimizer iterations per start
  double rel_tol = 1e-10;  // relative objective decrease
  std::uint64_t start_seed = 0xB511FE57A7E5EEDULL;  // random-start stream
  bool parallel = false;   // run starts via OpenMP (merge-deterministic)
  std::optional<TParams> warm_start;
  std::optional<std::array<double, 4>> warm_norms;
};

struct StartDiagnostic {
  int index = 0;
  double objective = 0.0;
  int iters = 0;
  bool converged = false;
};

struct MleFit {
  DensityMatrix rho;
  TParams t;
  std::array<double, 4> norms{};
  double objective = 0.0;
  int best_start = 0;
  std::vector<StartDiagnostic> starts;
};

// Minimizes the objective over the 16 T parameters plus the norms.
// The product of the four norms is gauge-fixed to its linear-inversion
// estimate (the overall scale is degenerate with S), leaving 19 free
// parameters. Deterministic multi-start; the best start wins, ties broken
// by lowest start index, identically in serial and parallel execution.
// Throws fit_error with per-start diagnostics when no start converges.
MleFit mle_reconstruct(const std::vector<CoincidenceRecord>& records, const MleOptions& options = {});

struct StateMetrics {
  double fidelity = 0.0;
  double concurrence = 0.0;
  double entropy_a = 0.0;
  double entropy_b = 0.0;
};

StateMetrics compute_metrics(const DensityMatrix& rho, const TwoQubitKet& target);

struct McOptions {
  int n_samples = 60;   // >= 50
  std::uint64_t seed = 1;
  int starts_per_sample = 3;  // warm start + linear inversion + random
  int max_iters = 2000;
  bool parallel = false;
};

struct McUncertainty {
  double std_fidelity = 0.0;
  double std_concurrence = 0.0;
  double std_entropy_a = 0.0;
  double std_entropy_b = 0.0;
  int n_samples = 0;
  int n_failures = 0;
};

// Poisson-resamples the observed counts, reruns the reconstruction per
// sample (warm-started at `fit`), and returns one standard deviation per
// metric. Deterministic given the seed; throws fit_error when more than 10%
// of the samples fail to reconstruct.
McUncertainty monte_carlo_uncertainty(const std::vector<CoincidenceRecord>& records,
                                      const MleFit& fit, const TwoQubitKet& target,
                                      const McOptions& options);

}  // namespace bellgen
