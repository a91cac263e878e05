#include "doctest.h"

#include "replica_lab/interpolation.hpp"
#include "replica_lab/rs_solver.hpp"

#include <cmath>

using namespace replica_lab;

namespace {

Eigen::VectorXd side_noise(int n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_normal_vector(n, rng);
}

}  // namespace

TEST_CASE("interpolating Hamiltonian endpoints") {
  const auto p = priors::sparse_rademacher(0.25);
  const auto inst = sample_instance(p, 8, 2.0, 41);
  const auto z = side_noise(8, 2);
  Rng rng(6);
  for (int k = 0; k < 10; ++k) {
    const auto x = sample_spike(p, 8, rng);
    CHECK(h_t(augment(inst, 1.0, 0.7, 0.3, z), x) == doctest::Approx(hamiltonian(inst, x)).epsilon(1e-13));

    // t = 0 with r = s: a sum of independent scalar channels.
    const double r = 0.9;
    double scalar = 0.0;
    for (int i = 0; i < 8; ++i) {
      scalar += std::sqrt(r) * z(i) * x(i) + r * x(i) * inst.spike(i) - r / 2 * x(i) * x(i);
    }
    CHECK(h_t(augment(inst, 0.0, r, r, z), x) == doctest::Approx(scalar).epsilon(1e-13));

    const auto mid = augment(inst, 0.4, 1.1, 0.2, z);
    CHECK(std::abs(h_t(mid, x) - interpolating_model(mid).energy(x)) < 1e-12);
  }
  CHECK(h_t(augment(inst, 0.5, 1.0, 1.0, z), Eigen::VectorXd::Zero(8)) == 0.0);

  const auto top = interpolating_model(augment(inst, 1.0, 0.7, 0.3, z));
  const auto ref = spiked_model(inst);
  CHECK(top.coupling == ref.coupling);
  CHECK(top.quartic == ref.quartic);
  CHECK(top.quadratic == 0.0);
  CHECK(top.field.cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(augment(inst, 1.5, 1.0, 1.0, z), DomainError);
  CHECK_THROWS_AS(augment(inst, -0.1, 1.0, 1.0, z), DomainError);
  CHECK_THROWS_AS(augment(inst, 0.5, 1.0, 1.0, side_noise(7, 1)), std::invalid_argument);
}

TEST_CASE("phi at t = 1 is the free entropy, draw for draw") {
  const auto p = priors::rademacher();
  const auto phi = phi_samples(p, 10, 2.0, 0.5, 0.5, 1.0, 30, 88);
  const auto fe = free_entropy_samples(p, 10, 2.0, 30, 88);
  REQUIRE(phi.size() == fe.size());
  for (std::size_t d = 0; d < fe.size(); ++d) CHECK(phi[d] == fe[d]);
}

TEST_CASE("phi at t = 0 is the scalar-channel free entropy") {
  for (const auto& p : {priors::rademacher(), priors::asymmetric_binary(0.7)}) {
    CAPTURE(p.name());
    const double lambda = 2.0, q = 0.6;
    const auto est = phi_of_t(p, 10, lambda, q, q, 0.0, 400, 12);
    const double target = psi(default_evaluator(), p, lambda * q);
    CHECK(std::abs(est.mean - target) <= 3 * est.std_error);
  }
}

TEST_CASE("fixed-spike restricted phi at t = 0 is below the scalar average") {
  const auto p = priors::rademacher();
  const int n = 12;
  const double lambda = 2.0, q = 0.5, m = 0.25;
  Rng rng(5);
  const Eigen::VectorXd spike = sample_spike(p, n, rng);
  PhiOptions opt;
  opt.mode = SpikeMode::kFixed;
  opt.spike = &spike;
  opt.window = OverlapWindow{m, 0.25};
  const auto est = phi_of_t(p, n, lambda, q, m, 0.0, 200, 3, opt);
  double bound = 0.0;
  for (int i = 0; i < n; ++i) bound += psi_hat(default_evaluator(), p, lambda * q, lambda * m * spike(i));
  CHECK(est.mean <= bound / n + 3 * est.std_error);

  opt.window = OverlapWindow{1.5, 0.1};
  const auto empty = phi_of_t(p, n, lambda, q, m, 0.0, 10, 3, opt);
  CHECK(std::isinf(empty.mean));
  CHECK(empty.n_samples == 0);
  CHECK(phi_samples(p, n, lambda, q, m, 0.0, 10, 3, opt).empty());

  PhiOptions missing;
  missing.mode = SpikeMode::kFixed;
  CHECK_THROWS_AS(phi_of_t(p, n, lambda, q, m, 0.5, 10, 3, missing), std::invalid_argument);
}

TEST_CASE("phi is Lipschitz in t") {
  // |E d phi/dt| <= (lambda/4)(K^2 + |q|)^2 + lambda q^2/4 + lambda K^4/n; K = 1 here.
  const auto p = priors::rademacher();
  const int n = 10;
  const double lambda = 2.0, q = 0.5;
  const double bound = lambda / 4 * (1 + q) * (1 + q) + lambda * q * q / 4 + lambda / n;
  const auto grid = linear_grid(0.0, 1.0, 11);
  std::vector<std::vector<double>> rows;
  for (double t : grid) rows.push_back(phi_samples(p, n, lambda, q, q, t, 200, 4));
  for (std::size_t k = 1; k < grid.size(); ++k) {
    std::vector<double> diff(rows[k].size());
    for (std::size_t d = 0; d < diff.size(); ++d) diff[d] = rows[k][d] - rows[k - 1][d];
    const auto est = summarize(diff, 4);
    CHECK(std::abs(est.mean) <= bound * (grid[k] - grid[k - 1]) + 3 * est.std_error);
  }
}

TEST_CASE("Guerra slope") {
  const auto p = priors::rademacher();
  // No signal, no side channel: phi is identically zero.
  const auto flat = guerra_slope_check(p, 8, 0.0, 0.5, default_t_grid(), 20, 1);
  CHECK(flat.pass);
  for (const auto& s : flat.params["slopes"]) CHECK(std::abs(s["slope"].get<double>()) < 1e-14);

  for (double q : {0.0, 0.25, 0.5}) {
    const auto rep = guerra_slope_check(p, 10, 1.0, q, default_t_grid(), 300, 7);
    CAPTURE(rep.to_json().dump());
    CHECK(rep.pass);
  }
}

TEST_CASE("Franz-Parisi upper bound") {
  const auto p = priors::rademacher();
  // With lambda = 0 the window mass is a prior probability, below F_hat = log-mgf terms.
  const auto zero = fp_upper_check(p, 10, 0.0, 0.2, 0.2, {}, 20, 3);
  CAPTURE(zero.to_json().dump());
  CHECK(zero.pass);
  CHECK(zero.slack >= 0.0);

  const auto empty = fp_upper_check(p, 10, 2.0, 1.5, 0.1, {}, 10, 3);
  CHECK(empty.skipped);
  CHECK(empty.pass);

  Eigen::VectorXd ones = Eigen::VectorXd::Ones(10);
  const auto single = fp_upper_check(p, 10, 2.0, 1.0 - 1e-9, 1e-6, {}, 50, 3, &ones);
  CAPTURE(single.to_json().dump());
  CHECK(single.pass);

  for (double m : {-0.5, 0.0, 0.5}) {
    const auto rep = fp_upper_check(p, 12, 2.0, m, 0.25, {}, 100, 9);
    CAPTURE(rep.to_json().dump());
    CHECK(rep.pass);
  }
}

TEST_CASE("min_f_hat agrees with a dense scan") {
  const auto p = priors::asymmetric_binary(0.7);
  Rng rng(3);
  const Eigen::VectorXd spike = sample_spike(p, 12, rng);
  const auto opt = min_f_hat(p, 2.0, 0.3, spike, {});
  double best = INFINITY;
  for (int i = 0; i <= 4000; ++i) best = std::min(best, f_hat(p, 2.0, 0.3, 1e-3 * i, spike));
  CHECK(opt.value <= best + 1e-12);
  CHECK(best - opt.value < 1e-6);
}
