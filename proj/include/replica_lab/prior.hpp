#pragma once

#include <Eigen/Core>
#include "json.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace replica_lab {

class InvalidPrior : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Atom {
  double value;
  double weight;
};

/*!
 * A bounded-support probability law on the reals, stored as a finite mixture
 * of weighted atoms. Immutable after construction.
 *
 * Weights are renormalized when their total is within 1e-9 of one and
 * rejected otherwise; duplicate atom values are rejected.
 */
class Prior {
 public:
  static Prior make(const std::vector<Atom>& atoms, std::string name = "custom");

  const std::string& name() const { return name_; }
  Eigen::Index size() const { return values_.size(); }

  const Eigen::VectorXd& values() const { return values_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& log_weights() const { return log_weights_; }
  std::vector<Atom> atoms() const;

  double mean() const { return weights_.dot(values_); }
  double second_moment() const { return weights_.dot(values_.cwiseAbs2()); }
  double support_bound() const { return values_.cwiseAbs().maxCoeff(); }

  /// True when the law is invariant under x -> -x (within `tol` on weights).
  bool is_symmetric(double tol = 1e-12) const;
  /// is_symmetric() at the default tolerance, cached at construction.
  bool symmetric() const { return symmetric_; }

  /// Index of the atom equal to `x` within 1e-12, or -1.
  Eigen::Index index_of(double x) const;

  nlohmann::json to_json() const;
  static Prior from_json(const nlohmann::json& j);

 private:
  Prior() = default;

  std::string name_;
  Eigen::VectorXd values_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd log_weights_;
  bool symmetric_ = false;
};

inline Prior make_prior(const std::vector<Atom>& atoms, std::string name = "custom") {
  return Prior::make(atoms, std::move(name));
}

inline double second_moment(const Prior& p) { return p.second_moment(); }
inline double support_bound(const Prior& p) { return p.support_bound(); }

namespace priors {

Prior rademacher();

/// Atoms +-1/sqrt(rho) with weight rho/2 each and 0 with weight 1-rho.
Prior sparse_rademacher(double rho);

/// +1 with probability `p_plus`, -1 otherwise.
Prior asymmetric_binary(double p_plus);

/// Midpoint discretization of the centered uniform law on [-sqrt3, sqrt3],
/// rescaled so the second moment is exactly one.
Prior uniform(int atom_count = 21);

Prior point_mass(double c);

}  // namespace priors

/// rademacher, sparse:0.25, asym:0.7, uniform:21.
std::vector<Prior> standard_priors();

/*!
 * Parses a CLI prior name: "rademacher", "sparse:<rho>", "asym:<p>",
 * "uniform:<atoms>", "point:<c>". Throws InvalidPrior on anything else.
 */
Prior parse_prior(std::string_view spec);

}  // namespace replica_lab
