#include "doctest.h"

#include "replica_lab/quadrature.hpp"

#include <cmath>

using namespace replica_lab;

TEST_CASE("Gauss-Hermite rule integrates Gaussian moments exactly") {
  const auto rule = gauss_hermite_normal<double>(21);
  CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
  // E z^{2k} = (2k-1)!!
  double dfact = 1.0;
  for (int k = 1; k <= 20; ++k) {
    dfact *= 2 * k - 1;
    const double m = rule.integrate([k](double z) { return std::pow(z, 2 * k); });
    CHECK(m == doctest::Approx(dfact).epsilon(1e-11));
    const double odd = rule.integrate([k](double z) { return std::pow(z, 2 * k - 1); });
    CHECK(std::abs(odd) < 1e-12 * dfact);
  }
  // Nodes are mirrored exactly.
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    CHECK(rule.nodes(i) == -rule.nodes(rule.nodes.size() - 1 - i));
  }
}

TEST_CASE("Gauss-Legendre rule on [-1, 1]") {
  const auto rule = gauss_legendre<double>(8);
  CHECK(rule.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
  for (int k = 0; k <= 15; ++k) {
    const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
    CHECK(rule.integrate([k](double x) { return std::pow(x, k); }) == doctest::Approx(exact).epsilon(1e-13));
  }
  CHECK(rule.integrate([](double x) { return std::exp(x); }) == doctest::Approx(std::exp(1.0) - std::exp(-1.0)));
}

TEST_CASE("log-sum-exp is stable and mergeable") {
  Eigen::VectorXd v(3);
  v << 1000.0, 1000.0, -1e300;
  CHECK(log_sum_exp(v) == doctest::Approx(1000.0 + std::log(2.0)));

  LogSumExp<double> a, b, all;
  CHECK(a.empty());
  CHECK(std::isinf(a.value()));
  CHECK(a.value() < 0);
  for (int i = 0; i < 50; ++i) {
    const double t = std::sin(i) * 700.0;
    (i % 2 ? a : b).add(t);
    all.add(t);
  }
  a.merge(b);
  CHECK(a.value() == doctest::Approx(all.value()).epsilon(1e-15));
}

TEST_CASE("rule construction rejects tiny orders") {
  CHECK_THROWS(gauss_hermite_normal<double>(1));
}
