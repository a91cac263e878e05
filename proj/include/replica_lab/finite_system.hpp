#pragma once

#include "replica_lab/prior.hpp"
#include "replica_lab/rng.hpp"
#include "replica_lab/scalar_channel.hpp"
#include "replica_lab/verification.hpp"

#include <Eigen/Core>
#include "json.hpp"

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace replica_lab {

inline constexpr std::uint64_t kDefaultBudget = 1ULL << 20;

class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(std::uint64_t required, std::uint64_t budget);
  std::uint64_t required() const { return required_; }
  std::uint64_t budget() const { return budget_; }

 private:
  std::uint64_t required_;
  std::uint64_t budget_;
};

/*!
 * One draw of Y = sqrt(lambda/n) x* x*^T + W with the diagonal omitted.
 * `noise` and `y` are stored as full symmetric matrices with zero diagonal.
 */
struct SpikedInstance {
  int n = 0;
  double lambda = 0.0;
  Eigen::VectorXd spike;
  Eigen::MatrixXd noise;
  Eigen::MatrixXd y;
  std::uint64_t seed = 0;

  /// {n, lambda, seed, prior}; the noise is regenerated from the seed.
  nlohmann::json envelope(const Prior& p) const;
};

/// Draws the spike and then the noise from `rng`, in that order.
SpikedInstance draw_instance(const Prior& p, int n, double lambda, Rng& rng, std::uint64_t seed_label);

SpikedInstance sample_instance(const Prior& p, int n, double lambda, std::uint64_t seed);

/// Instance with a fixed spike; only the noise comes from `rng`.
SpikedInstance draw_planted_instance(const Eigen::VectorXd& spike, double lambda, Rng& rng, std::uint64_t seed_label);

SpikedInstance planted_instance(const Eigen::VectorXd& spike, double lambda, std::uint64_t seed);

/// Rebuilds an instance from the JSON envelope.
SpikedInstance instance_from_envelope(const nlohmann::json& j);

/// -H(x) = sum_{i<j} sqrt(lambda/n) Y_ij x_i x_j - lambda/(2n) x_i^2 x_j^2.
double hamiltonian(const SpikedInstance& inst, const Eigen::VectorXd& x);

/*!
 * Exponent of a configuration weight:
 *   sum_{i<j} [coupling_ij x_i x_j - quartic x_i^2 x_j^2] + sum_i [field_i x_i - quadratic x_i^2].
 * `coupling` is symmetric with zero diagonal.
 */
struct PairwiseModel {
  Eigen::MatrixXd coupling;
  double quartic = 0.0;
  Eigen::VectorXd field;
  double quadratic = 0.0;

  int size() const { return static_cast<int>(coupling.rows()); }
  double energy(const Eigen::VectorXd& x) const;
};

/// Matrix-channel part at signal strength `snr`: sqrt(snr/n) W + (snr/n) x* x*^T, quartic snr/(2n).
PairwiseModel matrix_channel_model(const Eigen::MatrixXd& noise, const Eigen::VectorXd& spike, double snr);

/// The posterior exponent of an instance (equal to hamiltonian() up to rounding).
PairwiseModel spiked_model(const SpikedInstance& inst);

struct OverlapMass {
  double overlap;
  double log_mass;
};

struct EnumerationResult {
  double log_z = 0.0;
  /// Unnormalized log posterior mass per distinct overlap with the reference, ascending.
  std::vector<OverlapMass> overlap_law;
  std::uint64_t config_count = 0;
  /// Posterior means <x_i>; empty unless requested.
  Eigen::VectorXd site_means;
  /// Posterior second moments <x_i x_j>; empty unless requested.
  Eigen::MatrixXd pair_moments;

  double probability(std::size_t i) const { return std::exp(overlap_law[i].log_mass - log_z); }
  double mean_overlap() const;
  double mean_squared_overlap() const;
  /// log of the mass with overlap in the half-open window [lo, lo + width); -inf when empty.
  double log_window_mass(double lo, double width) const;
};

struct EnumerationOptions {
  const Eigen::VectorXd* reference = nullptr;
  bool site_means = false;
  bool pair_moments = false;
  std::uint64_t budget = kDefaultBudget;
};

/// (#atoms)^n, saturating at UINT64_MAX.
std::uint64_t configuration_count(const Prior& p, int n);

/*!
 * Exact log partition function of `model` under the product prior, by a
 * reflected mixed-radix Gray code: one site changes per step, so the
 * exponent updates in O(n) from maintained local fields. Fields are rebuilt
 * from scratch every 1024 steps to bound drift.
 */
EnumerationResult enumerate(const PairwiseModel& model, const Prior& p, const EnumerationOptions& options = {});

/// log Z of an instance with the overlap law against its spike.
EnumerationResult log_partition_exact(const SpikedInstance& inst, const Prior& p,
                                      std::uint64_t budget = kDefaultBudget);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int n_samples = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

/// Mean and sample-sd / sqrt(count), summed in index order.
McEstimate summarize(const std::vector<double>& samples, std::uint64_t seed);

double sample_variance(const std::vector<double>& samples);

/// F_N = (1/n) E log Z over n_disorder instances seeded by derive_seed(seed, k).
McEstimate free_entropy_mc(const Prior& p, int n, double lambda, int n_disorder, std::uint64_t seed,
                           std::uint64_t budget = kDefaultBudget);

/// Per-instance (1/n) log Z samples behind free_entropy_mc.
std::vector<double> free_entropy_samples(const Prior& p, int n, double lambda, int n_disorder, std::uint64_t seed,
                                         std::uint64_t budget = kDefaultBudget);

/*!
 * (log dP_lambda/dP_0 (Y) from the Gaussian density ratio by direct
 * enumeration, log Z from the Gray-code enumerator). Equal up to rounding.
 */
std::pair<double, double> kl_log_likelihood_ratio(const SpikedInstance& inst, const Prior& p,
                                                  std::uint64_t budget = kDefaultBudget);

struct FpEstimate {
  McEstimate estimate;
  bool empty_window = false;
};

/*!
 * Franz-Parisi potential (1/n) E_W log sum 1{R_{1,*} in [m, m+eps)} e^{-H},
 * spike held fixed and noise drawn per sample. An empty window yields mean
 * -inf with empty_window set.
 */
FpEstimate fp_potential(const Prior& p, int n, double lambda, double m, double eps, const Eigen::VectorXd& spike,
                        int n_disorder, std::uint64_t seed, std::uint64_t budget = kDefaultBudget);

/*!
 * |E<R_{1,2}> - E<R_{1,*}>| against 3 standard errors of the paired
 * difference, and the same for E<R_{1,2}^2> - E<R_{1,*}^2>. The second
 * identity is the informative one for sign-symmetric priors, where both
 * first moments vanish. Passes iff both hold.
 */
VerificationReport nishimori_check(const Prior& p, int n, double lambda, int n_disorder, std::uint64_t seed,
                                   std::uint64_t budget = kDefaultBudget);

/*!
 * Single-site Metropolis on the posterior with a fresh prior atom as the
 * proposal (prior weights cancel in the ratio). Records R_{1,*} once per
 * sweep after burn-in.
 */
std::vector<double> metropolis_sampler(const SpikedInstance& inst, const Prior& p, int n_sweeps, int burn_in,
                                       std::uint64_t seed);

/// Guerra bound: F_N >= F(lambda, q) - lambda K^4 / n - 3 se for every q in the grid.
VerificationReport guerra_lower_bound_check(const Prior& p, int n, double lambda, const std::vector<double>& q_grid,
                                            int n_disorder, std::uint64_t seed,
                                            const ChannelEvaluator& ev = default_evaluator());

/*!
 * Overlap discretization: F_N <= E_{x*} max_l Phi_eps(l eps, x*) + log(4K^2/eps)/sqrt(n) + 3 se,
 * with Phi_eps averaged over `n_noise` draws per spike and `n_spikes` spikes.
 */
VerificationReport laplace_discretization_check(const Prior& p, int n, double lambda, double eps, int n_spikes,
                                                int n_noise, std::uint64_t seed,
                                                std::uint64_t budget = kDefaultBudget);

/// Var((1/n) log Z) at n and 2n; the ratio must lie in [1.5, 3].
VerificationReport lipschitz_concentration_check(const Prior& p, int n, double lambda, int n_disorder,
                                                 std::uint64_t seed, std::uint64_t budget = kDefaultBudget);

/// Var over spikes of F_hat(lambda, m, q, x*) at n and 2n; the ratio must lie in [1.5, 3].
VerificationReport planted_concentration_check(const Prior& p, int n, double lambda, double m, double q,
                                               int n_spikes, std::uint64_t seed,
                                               const ChannelEvaluator& ev = default_evaluator());

}  // namespace replica_lab
