#pragma once

#include "replica_lab/optimize.hpp"
#include "replica_lab/prior.hpp"
#include "replica_lab/scalar_channel.hpp"

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <vector>

namespace replica_lab {

class NoTransition : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LocalOptimum {
  double q;
  double value;
};

/// An optimized potential value with its optimizer(s).
struct PotentialResult {
  double value = 0.0;
  double optimizer_q = 0.0;
  std::optional<double> optimizer_m;  // saddle only
  std::vector<LocalOptimum> local_optima;
  double grid_resolution = 0.0;
};

struct SETrace {
  std::vector<double> iterates;
  bool converged = false;
  double fixed_point = 0.0;
};

struct CriticalPoint {
  double lambda;
  double bracket_lo;
  double bracket_hi;
  PotentialResult at_lambda;
};

struct CurvePoint {
  double lambda;
  double q_star;
  double phi_rs;
  double saddle;
  double mutual_information;
  double mmse;
};

inline constexpr double kQGridStep = 1e-3;
inline constexpr double kMGridStep = 2e-2;
inline constexpr int kInnerGridPanels = 80;
inline constexpr double kRefineTol = 1e-8;
inline constexpr double kSnapTol = 1e-14;

/// F(lambda, q) = psi(lambda q) - lambda q^2 / 4.
double rs_potential(const Prior& p, double lambda, double q, const ChannelEvaluator& ev = default_evaluator());

/*!
 * phi_RS(lambda) = sup_{q >= 0} F(lambda, q). Grid scan over [0, E X^2] at
 * kQGridStep, every grid local maximum golden-refined to kRefineTol. The
 * global maximum wins; values within 1e-10 resolve toward larger q.
 */
PotentialResult phi_rs(const Prior& p, double lambda, const ChannelEvaluator& ev = default_evaluator());

/// F_bar(lambda, m, q) = psi_bar(lambda q, lambda m) - lambda m^2 / 2 + lambda q^2 / 4.
double f_bar(const Prior& p, double lambda, double m, double q, const ChannelEvaluator& ev = default_evaluator());

/// F_hat(lambda, m, q, x*) = mean_i psi_hat(lambda q, lambda m x*_i) - lambda m^2 / 2 + lambda q^2 / 4.
double f_hat(const Prior& p, double lambda, double m, double q, const Eigen::VectorXd& spike,
             const ChannelEvaluator& ev = default_evaluator());

/// Upper end of the inner q search for the saddle: max(E X^2 + 1, K^2).
double saddle_q_max(const Prior& p);

/// inf_{q in [0, saddle_q_max]} F_bar(lambda, m, q): grid + golden refinement.
Optimum inner_min_f_bar(const Prior& p, double lambda, double m, const ChannelEvaluator& ev = default_evaluator());

/*!
 * sup_m inf_{q >= 0} F_bar(lambda, m, q), m over [-E X^2, E X^2] (only
 * [0, E X^2] for symmetric priors, where the objective is even in m).
 * Reports m* in optimizer_m and the inner minimizer q_bar(m*) in
 * optimizer_q.
 */
PotentialResult saddle(const Prior& p, double lambda, const ChannelEvaluator& ev = default_evaluator());

/// Iterates q <- 2 psi'(lambda q) from q0 until successive iterates differ by <= tol.
SETrace state_evolution(const Prior& p, double lambda, double q0, double tol, int max_iter,
                        const ChannelEvaluator& ev = default_evaluator());

/// lambda/4 (E X^2)^2 - phi_RS(lambda).
double mutual_information(const Prior& p, double lambda, const ChannelEvaluator& ev = default_evaluator());

/*!
 * Smallest lambda with q*(lambda) > delta, by bisection on [0, lambda_hi]
 * where lambda_hi doubles from 1. Throws NoTransition past lambda = 64.
 */
CriticalPoint critical_lambda(const Prior& p, double delta, double tol,
                              const ChannelEvaluator& ev = default_evaluator());

/// (lambda, (E X^2)^2 - q*(lambda)^2) per grid point.
std::vector<std::pair<double, double>> mmse_curve(const Prior& p, const std::vector<double>& lambdas,
                                                  const ChannelEvaluator& ev = default_evaluator());

/// One row of the rs-curve table.
CurvePoint curve_point(const Prior& p, double lambda, const ChannelEvaluator& ev = default_evaluator());

}  // namespace replica_lab
