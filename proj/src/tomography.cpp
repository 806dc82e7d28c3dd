#include "bellgen/tomography.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bellgen/errors.hpp"
#include "bellgen/optim.hpp"
#include "bellgen/parallel.hpp"
#include "bellgen/rng.hpp"

namespace bellgen {

namespace {

constexpr double kLogNormLower = -6.907755278982137;  // ln 1e-3
constexpr double kLogNormUpper = 6.907755278982137;   // ln 1e3

Mat2c pauli_matrix(Pauli p) {
  Mat2c m = Mat2c::Zero();
  const cx i(0.0, 1.0);
  switch (p) {
    case Pauli::X:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case Pauli::Y:
      m(0, 1) = -i;
      m(1, 0) = i;
      break;
    case Pauli::Z:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
  }
  return m;
}

Mat4c kron2(const Mat2c& a, const Mat2c& b) {
  Mat4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

// Flattened measurement table: 36 projectors (stored transposed so that
// Tr(rho Pi) is an elementwise product), observed counts, and the detector
// pair index (a,c)=0 (a,d)=1 (b,c)=2 (b,d)=3 of each measurement.
struct MleContext {
  std::array<Mat4c, 36> proj_t;
  std::array<double, 36> counts;
  std::array<int, 36> pair;
  std::array<int, 36> setting;  // 0..8 in all_settings() order
  double total_counts = 0.0;
};

MleContext build_context(const std::vector<CoincidenceRecord>& records) {
  if (records.size() != 9) {
    throw validation_error("tomography needs exactly 9 setting records (36 counts)");
  }
  std::array<bool, 9> seen{};
  MleContext ctx;
  int m = 0;
  for (const auto& rec : records) {
    const PauliSetting setting = parse_setting_label(rec.setting_id);
    int setting_idx = -1;
    for (int k = 0; k < 9; ++k) {
      if (all_settings()[k].a == setting.a && all_settings()[k].b == setting.b) setting_idx = k;
    }
    if (setting_idx < 0 || seen[setting_idx]) {
      throw validation_error("records must cover each of the 9 Pauli settings exactly once");
    }
    seen[setting_idx] = true;
    if (!(rec.integration_s > 0.0)) throw validation_error("record integration time must be positive");
    const auto projectors = projectors_for_setting(setting);
    for (int i = 0; i < 4; ++i) {
      if (!(rec.counts[i] >= 0.0)) throw validation_error("record counts must be nonnegative");
      ctx.proj_t[m] = projectors[i].transpose();
      ctx.counts[m] = rec.counts[i];
      ctx.pair[m] = i;
      ctx.setting[m] = setting_idx;
      ctx.total_counts += rec.counts[i];
      ++m;
    }
  }
  return ctx;
}

Mat4c rho_from_t_matrix(const Mat4c& t) {
  const Mat4c raw = t.adjoint() * t;
  const double tr = raw.trace().real();
  return raw / std::max(tr, 1e-300);
}

double objective_ssr(const MleContext& ctx, const Mat4c& rho, const std::array<double, 4>& norms) {
  std::array<double, 36> probs;
  double norm_prob_sum = 0.0;
  for (int m = 0; m < 36; ++m) {
    probs[m] = std::max(0.0, rho.cwiseProduct(ctx.proj_t[m]).sum().real());
    norm_prob_sum += norms[ctx.pair[m]] * probs[m];
  }
  const double scale = ctx.total_counts / std::max(norm_prob_sum, 1e-300);
  double ssr = 0.0;
  for (int m = 0; m < 36; ++m) {
    const double r = ctx.counts[m] - norms[ctx.pair[m]] * probs[m] * scale;
    ssr += r * r;
  }
  return ssr;
}

// Optimization vector: x[0..15] = T parameters, x[16..18] = log norms of
// pairs (a,c), (a,d), (b,c); the (b,d) log norm is gauge-fixed so the sum of
// the four equals log_norm_product.
struct ParamMap {
  double log_norm_product = 0.0;

  void unpack(const Eigen::VectorXd& x, Mat4c& t, std::array<double, 4>& norms) const {
    TParams tp;
    for (int i = 0; i < 16; ++i) tp.v[static_cast<std::size_t>(i)] = x(i);
    t = tp.to_matrix();
    std::array<double, 4> logs{x(16), x(17), x(18),
                               log_norm_product - x(16) - x(17) - x(18)};
    for (int i = 0; i < 4; ++i) {
      norms[i] = std::exp(std::clamp(logs[i], kLogNormLower, kLogNormUpper));
    }
  }

  Eigen::VectorXd pack(const TParams& t, const std::array<double, 4>& norms) const {
    Eigen::VectorXd x(19);
    for (int i = 0; i < 16; ++i) x(i) = t.v[static_cast<std::size_t>(i)];
    x(16) = std::log(norms[0]);
    x(17) = std::log(norms[1]);
    x(18) = std::log(norms[2]);
    return x;
  }
};

void residuals_for(const MleContext& ctx, const ParamMap& map, const Eigen::VectorXd& x,
                   Eigen::VectorXd& out) {
  Mat4c t;
  std::array<double, 4> norms;
  map.unpack(x, t, norms);
  const Mat4c rho = rho_from_t_matrix(t);
  std::array<double, 36> probs;
  double norm_prob_sum = 0.0;
  for (int m = 0; m < 36; ++m) {
    probs[m] = std::max(0.0, rho.cwiseProduct(ctx.proj_t[m]).sum().real());
    norm_prob_sum += norms[ctx.pair[m]] * probs[m];
  }
  const double scale = ctx.total_counts / std::max(norm_prob_sum, 1e-300);
  for (int m = 0; m < 36; ++m) {
    out(m) = ctx.counts[m] - norms[ctx.pair[m]] * probs[m] * scale;
  }
}

Mat4c psd_project(const Mat4c& m) {
  const Mat4c herm = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Mat4c> es(herm);
  Eigen::Vector4d vals = es.eigenvalues().cwiseMax(0.0);
  const double tr = vals.sum();
  if (tr <= 0.0) return Mat4c::Identity() / 4.0;
  vals /= tr;
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

LinearInversionSeed linear_inversion(const MleContext& ctx) {
  const std::array<Pauli, 3> paulis{Pauli::X, Pauli::Y, Pauli::Z};
  std::array<double, 4> eff{1.0, 1.0, 1.0, 1.0};
  Mat4c rho = Mat4c::Identity() / 4.0;

  for (int pass = 0; pass < 2; ++pass) {
    // Efficiency-corrected per-setting sums and parity expectations.
    std::array<std::array<double, 4>, 9> corr{};
    std::array<double, 9> totals{};
    for (int m = 0; m < 36; ++m) {
      const double c = ctx.counts[m] / eff[ctx.pair[m]];
      corr[ctx.setting[m]][ctx.pair[m]] = c;
      totals[ctx.setting[m]] += c;
    }
    auto expectation = [&](int s, int sign_ac, int sign_ad, int sign_bc, int sign_bd) {
      if (totals[s] <= 0.0) return 0.0;
      return (sign_ac * corr[s][0] + sign_ad * corr[s][1] + sign_bc * corr[s][2] +
              sign_bd * corr[s][3]) /
             totals[s];
    };

    rho = Mat4c::Identity() / 4.0;
    for (int ia = 0; ia < 3; ++ia) {
      for (int ib = 0; ib < 3; ++ib) {
        const int s = 3 * ia + ib;  // all_settings() ordering
        const double e_joint = expectation(s, +1, -1, -1, +1);
        rho += 0.25 * e_joint * kron2(pauli_matrix(paulis[ia]), pauli_matrix(paulis[ib]));
      }
    }
    for (int ia = 0; ia < 3; ++ia) {
      double e_a = 0.0;
      for (int ib = 0; ib < 3; ++ib) e_a += expectation(3 * ia + ib, +1, +1, -1, -1) / 3.0;
      rho += 0.25 * e_a * kron2(pauli_matrix(paulis[ia]), Mat2c::Identity());
    }
    for (int ib = 0; ib < 3; ++ib) {
      double e_b = 0.0;
      for (int ia = 0; ia < 3; ++ia) e_b += expectation(3 * ia + ib, +1, -1, +1, -1) / 3.0;
      rho += 0.25 * e_b * kron2(Mat2c::Identity(), pauli_matrix(paulis[ib]));
    }
    rho = psd_project(rho);

    // Refine per-pair norms against the inverted state.
    std::array<double, 4> pair_probs{};
    std::array<double, 4> pair_counts{};
    double prob_total = 0.0;
    for (int m = 0; m < 36; ++m) {
      const double p = std::max(0.0, rho.cwiseProduct(ctx.proj_t[m]).sum().real());
      pair_probs[ctx.pair[m]] += p;
      pair_counts[ctx.pair[m]] += ctx.counts[m];
      prob_total += p;
    }
    const double rate_scale = ctx.total_counts / std::max(prob_total, 1e-300);
    for (int i = 0; i < 4; ++i) {
      if (pair_probs[i] > 1e-12 && pair_counts[i] > 0.0) {
        eff[i] = std::clamp(pair_counts[i] / (rate_scale * pair_probs[i]), kNormLower, kNormUpper);
      } else {
        eff[i] = 1.0;
      }
    }
  }

  LinearInversionSeed seed;
  seed.rho = rho;
  seed.norms = eff;
  seed.t = t_from_rho(rho);
  return seed;
}

}  // namespace

Mat4c TParams::to_matrix() const {
  Mat4c t = Mat4c::Zero();
  t(0, 0) = v[0];
  t(1, 1) = v[1];
  t(2, 2) = v[2];
  t(3, 3) = v[3];
  t(1, 0) = cx(v[4], v[5]);
  t(2, 0) = cx(v[6], v[7]);
  t(2, 1) = cx(v[8], v[9]);
  t(3, 0) = cx(v[10], v[11]);
  t(3, 1) = cx(v[12], v[13]);
  t(3, 2) = cx(v[14], v[15]);
  return t;
}

DensityMatrix rho_from_t(const TParams& t) {
  double sq = 0.0;
  for (double x : t.v) sq += x * x;
  if (sq < 1e-300) throw degenerate_input_error("all T parameters are zero");
  return DensityMatrix::from_matrix(rho_from_t_matrix(t.to_matrix()));
}

TParams t_from_rho(const Mat4c& rho) {
  // Ridge keeps the factorization defined for rank-deficient inputs.
  Mat4c r = (rho + rho.adjoint()) / 2.0;
  r = (r + 1e-12 * Mat4c::Identity()) / (1.0 + 4e-12);

  // rho = U U^dag with U upper triangular, via Cholesky in reversed index
  // order; then T = U^dag is the lower-triangular factor with T^dag T = rho.
  Mat4c rev;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) rev(i, j) = r(3 - i, 3 - j);
  const Eigen::LLT<Mat4c> llt(rev);
  const Mat4c c = llt.matrixL();
  Mat4c u;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) u(i, j) = c(3 - i, 3 - j);
  const Mat4c t = u.adjoint();

  TParams out;
  out.v = {t(0, 0).real(), t(1, 1).real(), t(2, 2).real(), t(3, 3).real(),
           t(1, 0).real(), t(1, 0).imag(), t(2, 0).real(), t(2, 0).imag(),
           t(2, 1).real(), t(2, 1).imag(), t(3, 0).real(), t(3, 0).imag(),
           t(3, 1).real(), t(3, 1).imag(), t(3, 2).real(), t(3, 2).imag()};
  return out;
}

double likelihood(const TParams& t, const std::array<double, 4>& norms,
                  const std::vector<CoincidenceRecord>& records) {
  for (double n : norms) {
    if (!(n > 0.0)) throw validation_error("norm parameters must be positive");
  }
  const MleContext ctx = build_context(records);
  return objective_ssr(ctx, rho_from_t_matrix(t.to_matrix()), norms);
}

LinearInversionSeed linear_inversion_seed(const std::vector<CoincidenceRecord>& records) {
  return linear_inversion(build_context(records));
}

MleFit mle_reconstruct(const std::vector<CoincidenceRecord>& records, const MleOptions& options) {
  if (options.n_starts < 1) throw validation_error("need at least one optimizer start");
  const MleContext ctx = build_context(records);
  const LinearInversionSeed lin = linear_inversion(ctx);

  ParamMap map;
  map.log_norm_product = 0.0;
  for (double n : lin.norms) map.log_norm_product += std::log(n);

  const ResidualFn fn = [&ctx, &map](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    residuals_for(ctx, map, x, out);
  };

  // Start list: optional warm start, identity-mixed seed, linear-inversion
  // seed, deterministic random fills.
  std::vector<Eigen::VectorXd> starts;
  if (options.warm_start) {
    starts.push_back(map.pack(*options.warm_start,
                              options.warm_norms ? *options.warm_norms : lin.norms));
  }
  TParams identity_seed;
  identity_seed.v[0] = identity_seed.v[1] = identity_seed.v[2] = identity_seed.v[3] = 0.5;
  starts.push_back(map.pack(identity_seed, lin.norms));
  starts.push_back(map.pack(lin.t, lin.norms));
  for (int k = static_cast<int>(starts.size()); k < options.n_starts; ++k) {
    Rng rng(derive_seed(options.start_seed, static_cast<std::uint64_t>(k)));
    TParams t;
    for (auto& p : t.v) p = 0.5 * rng.gaussian();
    std::array<double, 4> norms = lin.norms;
    Eigen::VectorXd x = map.pack(t, norms);
    for (int j = 16; j < 19; ++j) x(j) += 0.05 * rng.gaussian();
    starts.push_back(x);
  }
  starts.resize(static_cast<std::size_t>(options.n_starts), starts.back());

  LmOptions lm;
  lm.max_iters = options.max_iters;
  lm.rel_tol = options.rel_tol;
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(19, -1e300);
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(19, 1e300);
  for (int j = 16; j < 19; ++j) {
    lower(j) = kLogNormLower;
    upper(j) = kLogNormUpper;
  }
  lm.lower = lower;
  lm.upper = upper;

  std::vector<LmResult> results(starts.size());
  for_each_index(starts.size(), options.parallel,
                 [&](std::size_t i) { results[i] = levenberg_marquardt(fn, 36, starts[i], lm); });

  MleFit fit;
  fit.starts.reserve(results.size());
  int best = -1;
  for (int i = 0; i < static_cast<int>(results.size()); ++i) {
    fit.starts.push_back(
        {i, results[i].objective, results[i].iters, results[i].converged});
    if (!results[i].converged) continue;
    if (best < 0 || results[i].objective < results[best].objective) best = i;
  }
  if (best < 0) {
    std::ostringstream os;
    os << "tomography reconstruction failed: no start converged;";
    for (const auto& s : fit.starts) {
      os << " [start " << s.index << ": objective " << s.objective << ", iters " << s.iters << "]";
    }
    throw fit_error(os.str());
  }

  Mat4c t_best;
  std::array<double, 4> norms_best;
  map.unpack(results[best].x, t_best, norms_best);
  fit.rho = DensityMatrix::from_matrix(rho_from_t_matrix(t_best));
  TParams tp;
  for (int i = 0; i < 16; ++i) tp.v[static_cast<std::size_t>(i)] = results[best].x(i);
  fit.t = tp;
  fit.norms = norms_best;
  fit.objective = results[best].objective;
  fit.best_start = best;
  return fit;
}

StateMetrics compute_metrics(const DensityMatrix& rho, const TwoQubitKet& target) {
  StateMetrics m;
  m.fidelity = fidelity(rho, target);
  m.concurrence = concurrence(rho);
  m.entropy_a = von_neumann_entropy(partial_trace(rho, Qubit::A));
  m.entropy_b = von_neumann_entropy(partial_trace(rho, Qubit::B));
  return m;
}

McUncertainty monte_carlo_uncertainty(const std::vector<CoincidenceRecord>& records,
                                      const MleFit& fit, const TwoQubitKet& target,
                                      const McOptions& options) {
  if (options.n_samples < 50) {
    throw validation_error("Monte Carlo uncertainty needs at least 50 samples");
  }
  build_context(records);  // validate up front

  const std::size_t n = static_cast<std::size_t>(options.n_samples);
  std::vector<StateMetrics> metrics(n);
  std::vector<char> ok(n, 0);

  for_each_index(n, options.parallel, [&](std::size_t i) {
    Rng rng(derive_seed(options.seed, i));
    std::vector<CoincidenceRecord> resampled = records;
    for (auto& rec : resampled) {
      for (auto& c : rec.counts) c = static_cast<double>(rng.poisson(c));
    }
    MleOptions mo;
    mo.n_starts = options.starts_per_sample;
    mo.max_iters = options.max_iters;
    mo.warm_start = fit.t;
    mo.warm_norms = fit.norms;
    mo.start_seed = derive_seed(options.seed, 0x5A5A5A5AULL + i);
    try {
      const MleFit sample_fit = mle_reconstruct(resampled, mo);
      metrics[i] = compute_metrics(sample_fit.rho, target);
      ok[i] = 1;
    } catch (const fit_error&) {
      ok[i] = 0;
    }
  });

  McUncertainty out;
  out.n_samples = options.n_samples;
  std::vector<double> f, c, sa, sb;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ok[i]) {
      ++out.n_failures;
      continue;
    }
    f.push_back(metrics[i].fidelity);
    c.push_back(metrics[i].concurrence);
    sa.push_back(metrics[i].entropy_a);
    sb.push_back(metrics[i].entropy_b);
  }
  if (out.n_failures * 10 > options.n_samples) {
    throw fit_error("more than 10% of Monte Carlo resamples failed to reconstruct (" +
                    std::to_string(out.n_failures) + " of " + std::to_string(options.n_samples) +
                    ")");
  }
  auto sample_std = [](const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return std::sqrt(var / static_cast<double>(xs.size() - 1));
  };
  out.std_fidelity = sample_std(f);
  out.std_concurrence = sample_std(c);
  out.std_entropy_a = sample_std(sa);
  out.std_entropy_b = sample_std(sb);
  return out;
}

}  // namespace bellgen
