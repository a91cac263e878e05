#include "doctest.h"

#include "replica_lab/rs_solver.hpp"

#include <cmath>

using namespace replica_lab;

namespace {

// Rademacher: root of q = E tanh(lambda q + sqrt(lambda q) z) and phi_RS there, 30-digit mpmath.
struct FixedPoint {
  double lambda, q, phi;
};
const FixedPoint kRademacher[] = {
    {1.5, 0.394186133771825483, 0.00738651025533604178},
    {2.0, 0.618447509348822913, 0.0412853087054774077},
    {4.0, 0.916511011037802338, 0.372964277080980667},
};

}  // namespace

TEST_CASE("Rademacher optimizer and value match the tanh fixed-point oracle") {
  const auto p = priors::rademacher();
  for (const auto& f : kRademacher) {
    CAPTURE(f.lambda);
    const auto rs = phi_rs(p, f.lambda);
    CHECK(std::abs(rs.optimizer_q - f.q) < 1e-6);
    CHECK(std::abs(rs.value - f.phi) < 1e-12);
    const auto se = state_evolution(p, f.lambda, 1.0, 1e-13, 10000);
    CHECK(se.converged);
    CHECK(std::abs(se.fixed_point - f.q) < 1e-9);
  }
}

TEST_CASE("below the transition the Rademacher potential is maximized at zero") {
  const auto p = priors::rademacher();
  for (double lambda : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const auto rs = phi_rs(p, lambda);
    CHECK(rs.optimizer_q == 0.0);
    CHECK(rs.value == 0.0);
  }
  // Just above: scipy root of the tanh fixed point at lambda = 1.05.
  CHECK(std::abs(phi_rs(p, 1.05).optimizer_q - 0.0490866614612418) < 1e-6);
}

TEST_CASE("phi_rs dominates a dense grid scan") {
  for (const auto& p : standard_priors()) {
    for (double lambda : {0.7, 1.3, 3.0}) {
      CAPTURE(p.name());
      CAPTURE(lambda);
      const auto rs = phi_rs(p, lambda);
      double grid_best = -1e300;
      for (int i = 0; i <= 10000; ++i) grid_best = std::max(grid_best, rs_potential(p, lambda, 1e-4 * i));
      CHECK(rs.value >= grid_best - 1e-13);
      CHECK(rs.value - grid_best < 1e-8);
      CHECK(rs_potential(p, lambda, rs.optimizer_q) == doctest::Approx(rs.value).epsilon(1e-14));
    }
  }
}

TEST_CASE("phi_rs is nondecreasing and convex in lambda, and mutual information is bounded") {
  for (const auto& p : standard_priors()) {
    CAPTURE(p.name());
    double prev2 = 0.0, prev1 = phi_rs(p, 0.0).value;
    for (int i = 1; i <= 24; ++i) {
      const double lambda = 0.25 * i;
      const double v = phi_rs(p, lambda).value;
      CHECK(v >= prev1 - 1e-12);
      if (i >= 2) CHECK(v - 2 * prev1 + prev2 >= -1e-9);
      const double mi = mutual_information(p, lambda);
      CHECK(mi >= -1e-12);
      CHECK(mi <= lambda / 4.0 + 1e-12);
      prev2 = prev1;
      prev1 = v;
    }
  }
}

TEST_CASE("F_bar on the Nishimori line is F, and F_hat with exact proportions is F_bar") {
  const auto p = priors::asymmetric_binary(0.7);
  for (double q : {0.0, 0.3, 0.8}) {
    CHECK(f_bar(p, 2.0, q, q) == doctest::Approx(rs_potential(p, 2.0, q)).epsilon(1e-14));
  }
  Eigen::VectorXd spike(10);
  spike << 1, 1, 1, 1, 1, 1, 1, -1, -1, -1;
  for (double m : {-0.4, 0.0, 0.6}) {
    CHECK(f_hat(p, 1.5, m, 0.4, spike) == doctest::Approx(f_bar(p, 1.5, m, 0.4)).epsilon(1e-13));
  }
}

TEST_CASE("saddle equals phi_rs on sample points") {
  for (const auto& p : standard_priors()) {
    for (double lambda : {0.5, 2.0, 5.0}) {
      CAPTURE(p.name());
      CAPTURE(lambda);
      const auto sd = saddle(p, lambda);
      CHECK(std::abs(sd.value - phi_rs(p, lambda).value) <= 1e-4);
      REQUIRE(sd.optimizer_m.has_value());
      CHECK(std::abs(*sd.optimizer_m) <= p.second_moment() + 1e-12);
    }
  }
}

TEST_CASE("inner minimizer sits at m on the Nishimori line") {
  // At m = q*, the inner infimum over q is attained at q = q*.
  const auto p = priors::rademacher();
  const double q_star = phi_rs(p, 2.0).optimizer_q;
  const auto inner = inner_min_f_bar(p, 2.0, q_star);
  CHECK(inner.x == doctest::Approx(q_star).epsilon(1e-5));
}

TEST_CASE("state evolution from zero stays at the uninformative fixed point") {
  const auto se = state_evolution(priors::rademacher(), 2.0, 0.0, 1e-12, 50);
  CHECK(se.converged);
  CHECK(std::abs(se.fixed_point) < 1e-9);
}

TEST_CASE("state evolution and phi_rs agree for every catalog prior") {
  for (const auto& p : standard_priors()) {
    for (double lambda : {2.0, 4.0}) {
      CAPTURE(p.name());
      CAPTURE(lambda);
      const auto se = state_evolution(p, lambda, p.second_moment(), 1e-12, 20000);
      CHECK(se.converged);
      CHECK(std::abs(se.fixed_point - phi_rs(p, lambda).optimizer_q) < 1e-5);
    }
  }
}

TEST_CASE("critical lambda") {
  const auto c = critical_lambda(priors::rademacher(), 0.01, 1e-3);
  CHECK(std::abs(c.lambda - 1.0) <= 0.02);
  CHECK(c.bracket_lo <= c.lambda);
  CHECK(c.bracket_hi >= c.lambda);

  // Sparse prior: first-order jump between two competing maxima.
  const auto s = critical_lambda(priors::sparse_rademacher(0.05), 0.01, 1e-4);
  CHECK(s.lambda > 0.6);
  CHECK(s.lambda < 0.9);
  CHECK(s.at_lambda.local_optima.size() >= 2);
  CHECK(phi_rs(priors::sparse_rademacher(0.05), s.bracket_hi).optimizer_q > 0.3);

  CHECK_THROWS_AS(critical_lambda(priors::point_mass(0.0), 0.01, 1e-3), NoTransition);
  CHECK_THROWS_AS(critical_lambda(priors::rademacher(), 0.0, 1e-3), std::invalid_argument);
}

TEST_CASE("mmse curve is nonincreasing") {
  std::vector<double> lambdas;
  for (int i = 0; i <= 24; ++i) lambdas.push_back(0.25 * i);
  const auto curve = mmse_curve(priors::rademacher(), lambdas);
  CHECK(curve.front().second == doctest::Approx(1.0));
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].second <= curve[i - 1].second + 1e-12);
}

TEST_CASE("domain errors") {
  const auto p = priors::rademacher();
  CHECK_THROWS_AS(phi_rs(p, -1.0), DomainError);
  CHECK_THROWS_AS(rs_potential(p, 1.0, -0.5), DomainError);
  CHECK_THROWS_AS(state_evolution(p, 1.0, 2.0, 1e-9, 10), DomainError);
  CHECK_THROWS_AS(state_evolution(p, 1.0, 0.5, 0.0, 10), std::invalid_argument);
}

TEST_CASE("state evolution: trivial and subcritical starts") {
  for (const auto& p : standard_priors()) {
    const auto se = state_evolution(p, 0.0, 0.7, 1e-12, 10);
    CHECK(se.converged);
    CHECK(se.iterates.at(1) == doctest::Approx(p.mean() * p.mean()).epsilon(1e-12));
  }
  const auto below = state_evolution(priors::rademacher(), 0.5, 0.9, 1e-10, 10000);
  CHECK(below.converged);
  CHECK(std::abs(below.fixed_point) < 1e-8);
}

TEST_CASE("the RS optimizer is a stationary point and overlaps stay bounded") {
  for (const auto& p : standard_priors()) {
    for (double lambda : {0.5, 1.5, 3.0, 6.0}) {
      CAPTURE(p.name());
      CAPTURE(lambda);
      const auto rs = phi_rs(p, lambda);
      if (rs.optimizer_q > 1e-4) {
        CHECK(std::abs(rs.optimizer_q - 2 * psi_prime(default_evaluator(), p, lambda * rs.optimizer_q)) <= 1e-5);
      }
      CHECK(rs.optimizer_q <= p.second_moment() + 1e-9);
      CHECK(rs.value >= 0.0);
    }
  }
}

TEST_CASE("symmetric priors: inner minimizer and saddle are even in m") {
  for (const auto& p : {priors::rademacher(), priors::sparse_rademacher(0.25)}) {
    for (double m : {0.2, 0.5, 0.9}) {
      const auto plus = inner_min_f_bar(p, 2.0, m);
      const auto minus = inner_min_f_bar(p, 2.0, -m);
      CHECK(std::abs(plus.x - minus.x) <= 1e-6);
      CHECK(std::abs(plus.value - minus.value) <= 1e-9);
    }
    const auto sd = saddle(p, 3.0);
    REQUIRE(sd.optimizer_m.has_value());
    CHECK(*sd.optimizer_m >= 0.0);
    CHECK(std::abs(inner_min_f_bar(p, 3.0, -*sd.optimizer_m).value - sd.value) <= 1e-9);
  }
}

TEST_CASE("mutual information and MMSE limits") {
  const auto p = priors::rademacher();
  CHECK(mutual_information(p, 0.0) == 0.0);
  double prev = 0.0;
  for (int i = 1; i <= 24; ++i) {
    const double mi = mutual_information(p, 0.25 * i);
    CHECK(mi >= prev - 1e-12);
    prev = mi;
  }
  CHECK(mmse_curve(p, {50.0}).front().second <= 0.01);
  CHECK(mmse_curve(priors::sparse_rademacher(0.25), {0.0}).front().second == doctest::Approx(1.0));
}

TEST_CASE("critical lambda at the documented tolerances") {
  const auto c = critical_lambda(priors::rademacher(), 1e-3, 0.01);
  CHECK(std::abs(c.lambda - 1.0) <= 0.02);
  // Nonzero mean: q = 0 is never stationary, so the transition sits at zero.
  const auto shifted = critical_lambda(priors::point_mass(1.0), 1e-3, 0.01);
  CHECK(shifted.lambda <= 0.01);
  CHECK(phi_rs(priors::point_mass(1.0), 0.05).optimizer_q > 1e-3);
  const auto sparse = critical_lambda(priors::sparse_rademacher(0.05), 1e-3, 1e-4);
  CHECK(sparse.lambda < 1.0);
  CHECK(sparse.at_lambda.local_optima.size() >= 2);
}
