#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace replica_lab {

template <typename Scalar = double>
struct QuadratureRule {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  Array nodes;
  Array weights;

  Eigen::Index size() const { return nodes.size(); }

  template <typename F>
  Scalar integrate(F&& f) const {
    Scalar acc = 0;
    for (Eigen::Index i = 0; i < nodes.size(); ++i) acc += weights(i) * f(nodes(i));
    return acc;
  }
};

namespace detail {

/*!
 * Gauss rule for a measure whose orthonormal polynomials satisfy
 *   x p_k = b_{k+1} p_{k+1} + b_k p_{k-1}   (zero recurrence diagonal),
 * with total mass `mass`. Nodes come from the Jacobi matrix eigenvalues
 * (Golub-Welsch); weights are recomputed from the Christoffel function
 * 1 / sum_k p_k(x)^2, which keeps tiny tail weights accurate.
 */
template <typename Scalar, typename OffDiag>
QuadratureRule<Scalar> symmetric_gauss_rule(int n, OffDiag&& off_diag, Scalar mass) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix jacobi = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const Scalar b = off_diag(k);
    jacobi(k - 1, k) = b;
    jacobi(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Golub-Welsch eigen solve failed");

  QuadratureRule<Scalar> rule;
  rule.nodes = solver.eigenvalues().array();
  // Exact symmetry about the origin.
  for (int i = 0; i < n / 2; ++i) {
    const Scalar x = (rule.nodes(n - 1 - i) - rule.nodes(i)) / 2;
    rule.nodes(i) = -x;
    rule.nodes(n - 1 - i) = x;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = 0;

  rule.weights.resize(n);
  const Scalar p0 = 1 / std::sqrt(mass);
  for (int i = 0; i < n; ++i) {
    const Scalar x = rule.nodes(i);
    Scalar prev = 0, cur = p0, sum = cur * cur;
    for (int k = 1; k < n; ++k) {
      const Scalar next = (x * cur - (k > 1 ? off_diag(k - 1) : Scalar(0)) * prev) / off_diag(k);
      prev = cur;
      cur = next;
      sum += cur * cur;
    }
    rule.weights(i) = 1 / sum;
  }
  rule.weights *= mass / rule.weights.sum();
  return rule;
}

}  // namespace detail

/// Gauss-Hermite rule for the standard normal law: sum of weights is one.
template <typename Scalar = double>
QuadratureRule<Scalar> gauss_hermite_normal(int n) {
  if (n < 2) throw std::invalid_argument("Gauss-Hermite rule needs at least 2 nodes");
  return detail::symmetric_gauss_rule<Scalar>(
      n, [](int k) { return std::sqrt(Scalar(k)); }, Scalar(1));
}

/// Gauss-Legendre rule on [-1, 1].
template <typename Scalar = double>
QuadratureRule<Scalar> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs at least 1 node");
  if (n == 1) {
    QuadratureRule<Scalar> rule;
    rule.nodes = QuadratureRule<Scalar>::Array::Zero(1);
    rule.weights = QuadratureRule<Scalar>::Array::Constant(1, Scalar(2));
    return rule;
  }
  return detail::symmetric_gauss_rule<Scalar>(
      n, [](int k) { return Scalar(k) / std::sqrt(Scalar(4 * k * k - 1)); }, Scalar(2));
}

/// Numerically stable log(sum(exp(v))).
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  using std::exp;
  using std::log;
  const auto m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + log((v.derived().array() - m).exp().sum());
}

/// Streaming log-sum-exp accumulator; rescales when a larger term arrives.
template <typename Scalar = double>
class LogSumExp {
 public:
  void add(Scalar log_term) {
    if (!(log_term > -std::numeric_limits<Scalar>::infinity())) return;
    if (log_term <= max_) {
      sum_ += std::exp(log_term - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - log_term) + 1;
      max_ = log_term;
    }
  }

  void merge(const LogSumExp& other) {
    if (other.empty()) return;
    if (empty()) {
      *this = other;
      return;
    }
    if (other.max_ <= max_) {
      sum_ += other.sum_ * std::exp(other.max_ - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - other.max_) + other.sum_;
      max_ = other.max_;
    }
  }

  bool empty() const { return sum_ == 0; }
  Scalar value() const {
    return empty() ? -std::numeric_limits<Scalar>::infinity() : max_ + std::log(sum_);
  }

 private:
  Scalar max_ = -std::numeric_limits<Scalar>::infinity();
  Scalar sum_ = 0;
};

}  // namespace replica_lab
