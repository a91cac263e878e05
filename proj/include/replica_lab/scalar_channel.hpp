#pragma once

#include "replica_lab/prior.hpp"
#include "replica_lab/quadrature.hpp"

#include <Eigen/Core>

#include <stdexcept>

namespace replica_lab {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultNodeCount = 61;

/*!
 * Quadrature state for Gaussian expectations E_z f(z), z ~ N(0,1).
 *
 * Holds a Gauss-Hermite rule for the standard normal law. Expectations of
 * log-sum-exp integrands log sum_k exp(a_k z + b_k) are evaluated on one of
 * two paths:
 *  - soft kinks (all slope jumps on the upper envelope <= kSoftKinkSlope):
 *    the Hermite rule applied directly, which converges spectrally;
 *  - sharp kinks: the piecewise-linear upper envelope is integrated in
 *    closed form against the Gaussian density, and the bounded remainder
 *    log(1 + sum exp(l_k - l_top)) by composite Gauss-Legendre on panels
 *    graded toward every envelope crossing.
 * The panel order scales with node_count, so doubling node_count refines
 * both paths.
 */
class ChannelEvaluator {
 public:
  static constexpr double kSoftKinkSlope = 1.5;

  explicit ChannelEvaluator(int node_count = kDefaultNodeCount);

  int node_count() const { return static_cast<int>(hermite_.size()); }
  int panel_order() const { return static_cast<int>(legendre_.size()); }
  const Eigen::ArrayXd& nodes() const { return hermite_.nodes; }
  const Eigen::ArrayXd& weights() const { return hermite_.weights; }

  /// E_z f(z) with the Hermite rule; accurate for smooth f.
  template <typename F>
  double expectation(F&& f) const {
    return hermite_.integrate(std::forward<F>(f));
  }

  /*!
   * E_z log sum_k exp(slopes_k z + intercepts_k). Intercepts carry any log
   * weights. Lines with -inf intercept are ignored.
   */
  double expected_log_sum_exp(const Eigen::ArrayXd& slopes, const Eigen::ArrayXd& intercepts) const;

 private:
  QuadratureRule<double> hermite_;
  QuadratureRule<double> legendre_;
};

ChannelEvaluator make_evaluator(int node_count);

/// Process-wide evaluator with kDefaultNodeCount nodes.
const ChannelEvaluator& default_evaluator();

/// E_z log int exp(sqrt(r) z x + s x - r x^2 / 2) dP(x).
double psi_hat(const ChannelEvaluator& ev, const Prior& p, double r, double s);

/// Scalar-channel free entropy: E_{x*} psi_hat(r, r x*).
double psi(const ChannelEvaluator& ev, const Prior& p, double r);

/// E_{x*} psi_hat(r, s x*).
double psi_bar(const ChannelEvaluator& ev, const Prior& p, double r, double s);

/// d psi / dr by the five-point central stencil, h = 2e-3 max(1, r); the
/// fourth-order forward stencil when r < 2h.
double psi_prime(const ChannelEvaluator& ev, const Prior& p, double r);

/// psi_bar(r, r) - psi_bar(r, -r); nonnegative for every prior.
double asymmetry_gap(const ChannelEvaluator& ev, const Prior& p, double r);

/*!
 * Largest |psi_hat| change between `ev` and an evaluator with twice the
 * nodes (minus one, keeping the count odd), over a fixed probe set with
 * r <= r_max and |s| <= s_max.
 */
double refinement_gap(const ChannelEvaluator& ev, const Prior& p, double r_max = 50.0,
                      double s_max = 50.0);

/*!
 * Runs refinement_gap once per process per (prior, node_count) and throws
 * NumericalError when it exceeds `tolerance`. Later calls are cache hits.
 */
void ensure_converged(const ChannelEvaluator& ev, const Prior& p, double tolerance = 1e-9);

}  // namespace replica_lab
