#pragma once

#include "replica_lab/finite_system.hpp"
#include "replica_lab/optimize.hpp"
#include "replica_lab/prior.hpp"
#include "replica_lab/scalar_channel.hpp"
#include "replica_lab/verification.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

namespace replica_lab {

/*!
 * A spiked instance plus the scalar side channel y_i = sqrt((1-t) r) x*_i + z_i.
 * At t = 1 the side channel carries no weight; at t = 0 the matrix channel does not.
 */
struct AugmentedInstance {
  SpikedInstance base;
  double t = 1.0;
  double r = 0.0;
  double s = 0.0;
  Eigen::VectorXd side_noise;
  Eigen::VectorXd side_obs;
};

AugmentedInstance augment(const SpikedInstance& base, double t, double r, double s, const Eigen::VectorXd& side_noise);

/*!
 * -H_t(x) = sum_{i<j} [sqrt(t lambda/n) W_ij x_i x_j + (t lambda/n) x_i x*_i x_j x*_j - (t lambda/2n) x_i^2 x_j^2]
 *         + sum_i [sqrt((1-t) r) z_i x_i + (1-t) s x_i x*_i - ((1-t) r/2) x_i^2]
 */
double h_t(const AugmentedInstance& aug, const Eigen::VectorXd& x);

/// The exponent of h_t in enumerable form. At t = 1 it equals spiked_model(base) bit for bit.
PairwiseModel interpolating_model(const AugmentedInstance& aug);

enum class SpikeMode {
  kResample,  // fresh spike per disorder draw
  kFixed,     // spike held fixed, only W and z drawn
};

struct OverlapWindow {
  double m;
  double eps;
};

struct PhiOptions {
  SpikeMode mode = SpikeMode::kResample;
  /// Required with SpikeMode::kFixed.
  const Eigen::VectorXd* spike = nullptr;
  std::optional<OverlapWindow> window;
  std::uint64_t budget = kDefaultBudget;
};

/*!
 * Per-draw samples of (1/n) log sum [1{R_{1,*} in window}] e^{-H_t} with
 * r = lambda q and s = lambda m. Draw d uses derive_seed(seed, d), drawing the
 * spike (resample mode), then W, then z, so samples at different t share
 * their disorder. Returns an empty vector when the window is empty.
 */
std::vector<double> phi_samples(const Prior& p, int n, double lambda, double q, double m, double t, int n_disorder,
                                std::uint64_t seed, const PhiOptions& options = {});

/// phi(t); the mean is -inf with zero samples when the window is empty.
McEstimate phi_of_t(const Prior& p, int n, double lambda, double q, double m, double t, int n_disorder,
                    std::uint64_t seed, const PhiOptions& options = {});

std::vector<double> default_t_grid();

/*!
 * Finite-difference slopes of phi between consecutive t-grid points (common
 * disorder across t, s = r = lambda q, spike resampled) against
 * -lambda q^2/4 - C/n with C = lambda K^4. Reports the tightest interval.
 */
VerificationReport guerra_slope_check(const Prior& p, int n, double lambda, double q,
                                      const std::vector<double>& t_grid, int n_disorder, std::uint64_t seed,
                                      std::uint64_t budget = kDefaultBudget);

/*!
 * Phi_eps(m, x*) <= inf_q F_hat(lambda, m, q, x*) + lambda eps^2/2, allowance
 * lambda K^4/n + 3 se. The spike is drawn from derive_seed(seed, 0) unless
 * given. An empty window gives a skipped report. The infimum is a scan of
 * `q_grid` refined by golden section around the best grid point; an empty
 * grid means 81 points on [0, saddle_q_max].
 */
VerificationReport fp_upper_check(const Prior& p, int n, double lambda, double m, double eps,
                                  const std::vector<double>& q_grid, int n_disorder, std::uint64_t seed,
                                  const Eigen::VectorXd* spike = nullptr,
                                  const ChannelEvaluator& ev = default_evaluator(),
                                  std::uint64_t budget = kDefaultBudget);

/// inf over q of F_hat at fixed (lambda, m, spike): grid scan plus golden refinement.
Optimum min_f_hat(const Prior& p, double lambda, double m, const Eigen::VectorXd& spike,
                  const std::vector<double>& q_grid, const ChannelEvaluator& ev = default_evaluator());

}  // namespace replica_lab
