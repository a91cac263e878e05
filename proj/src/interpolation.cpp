#include "replica_lab/interpolation.hpp"

#include "replica_lab/optimize.hpp"
#include "replica_lab/rs_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace replica_lab {

namespace {

void require_t(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("t must lie in [0, 1], got " + std::to_string(t));
}

}  // namespace

AugmentedInstance augment(const SpikedInstance& base, double t, double r, double s, const Eigen::VectorXd& side_noise) {
  require_t(t);
  if (!(r >= 0.0)) throw DomainError("r must be >= 0");
  if (side_noise.size() != base.n) throw std::invalid_argument("side noise length differs from instance size");
  AugmentedInstance aug;
  aug.base = base;
  aug.t = t;
  aug.r = r;
  aug.s = s;
  aug.side_noise = side_noise;
  aug.side_obs = std::sqrt((1.0 - t) * r) * base.spike + side_noise;
  return aug;
}

double h_t(const AugmentedInstance& aug, const Eigen::VectorXd& x) {
  require_t(aug.t);
  const auto& b = aug.base;
  if (x.size() != b.n) throw std::invalid_argument("h_t: configuration length differs from instance size");
  const double n = b.n;
  const double tl = aug.t * b.lambda;
  const double a = std::sqrt(tl / n);
  double acc = 0.0;
  for (int i = 0; i < b.n; ++i) {
    for (int j = i + 1; j < b.n; ++j) {
      const double xx = x(i) * x(j);
      acc += a * b.noise(i, j) * xx + tl / n * xx * b.spike(i) * b.spike(j) - tl / (2.0 * n) * xx * xx;
    }
  }
  const double u = 1.0 - aug.t;
  for (int i = 0; i < b.n; ++i) {
    acc += std::sqrt(u * aug.r) * aug.side_noise(i) * x(i) + u * aug.s * x(i) * b.spike(i) -
           u * aug.r / 2.0 * x(i) * x(i);
  }
  return acc;
}

PairwiseModel interpolating_model(const AugmentedInstance& aug) {
  require_t(aug.t);
  const auto& b = aug.base;
  PairwiseModel model = matrix_channel_model(b.noise, b.spike, aug.t * b.lambda);
  const double u = 1.0 - aug.t;
  model.field = std::sqrt(u * aug.r) * aug.side_noise + u * aug.s * b.spike;
  model.quadratic = u * aug.r / 2.0;
  return model;
}

std::vector<double> phi_samples(const Prior& p, int n, double lambda, double q, double m, double t, int n_disorder,
                                std::uint64_t seed, const PhiOptions& options) {
  require_t(t);
  if (n_disorder < 1) throw std::invalid_argument("n_disorder must be >= 1");
  if (!(q >= 0.0)) throw DomainError("q must be >= 0");
  if (options.mode == SpikeMode::kFixed) {
    if (!options.spike) throw std::invalid_argument("fixed-spike mode needs a spike");
    if (options.spike->size() != n) throw std::invalid_argument("fixed spike length differs from n");
  }
  if (options.window && !(options.window->eps > 0.0)) throw std::invalid_argument("window eps must be > 0");
  const std::uint64_t total = configuration_count(p, n);
  if (total > options.budget) throw BudgetExceeded(total, options.budget);

  const double r = lambda * q;
  const double s = lambda * m;
  std::vector<double> out(n_disorder);
  for (int d = 0; d < n_disorder; ++d) {
    const std::uint64_t draw_seed = derive_seed(seed, d);
    Rng rng(draw_seed);
    SpikedInstance inst;
    if (options.mode == SpikeMode::kResample) {
      inst = draw_instance(p, n, lambda, rng, draw_seed);
    } else {
      inst = draw_planted_instance(*options.spike, lambda, rng, draw_seed);
    }
    const Eigen::VectorXd z = sample_normal_vector(n, rng);
    const auto aug = augment(inst, t, r, s, z);

    EnumerationOptions opt;
    opt.budget = options.budget;
    if (options.window) opt.reference = &aug.base.spike;
    const auto res = enumerate(interpolating_model(aug), p, opt);
    if (options.window) {
      const double lm = res.log_window_mass(options.window->m, options.window->eps);
      if (std::isinf(lm)) return {};
      out[d] = lm / n;
    } else {
      out[d] = res.log_z / n;
    }
  }
  return out;
}

McEstimate phi_of_t(const Prior& p, int n, double lambda, double q, double m, double t, int n_disorder,
                    std::uint64_t seed, const PhiOptions& options) {
  const auto samples = phi_samples(p, n, lambda, q, m, t, n_disorder, seed, options);
  if (samples.empty()) {
    McEstimate empty;
    empty.mean = -std::numeric_limits<double>::infinity();
    empty.seed = seed;
    return empty;
  }
  return summarize(samples, seed);
}

std::vector<double> default_t_grid() { return {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}; }

VerificationReport guerra_slope_check(const Prior& p, int n, double lambda, double q,
                                      const std::vector<double>& t_grid, int n_disorder, std::uint64_t seed,
                                      std::uint64_t budget) {
  if (t_grid.size() < 2) throw std::invalid_argument("guerra_slope_check needs at least two t values");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    require_t(t_grid[i]);
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw std::invalid_argument("t grid must be strictly increasing");
  }
  PhiOptions opt;
  opt.budget = budget;
  std::vector<std::vector<double>> phi;
  phi.reserve(t_grid.size());
  for (double t : t_grid) phi.push_back(phi_samples(p, n, lambda, q, q, t, n_disorder, seed, opt));

  const double k = p.support_bound();
  const double calib = lambda * k * k * k * k;
  const double floor = -lambda * q * q / 4.0;

  VerificationReport rep;
  rep.check = "guerra_slope";
  nlohmann::json slopes = nlohmann::json::array();
  double best_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < t_grid.size(); ++i) {
    const double dt = t_grid[i + 1] - t_grid[i];
    std::vector<double> diff(n_disorder);
    for (int d = 0; d < n_disorder; ++d) diff[d] = (phi[i + 1][d] - phi[i][d]) / dt;
    const auto est = summarize(diff, seed);
    const double slack = est.mean - floor;
    const double allowance = calib / n + 3.0 * est.std_error;
    slopes.push_back({{"t_lo", t_grid[i]}, {"t_hi", t_grid[i + 1]}, {"slope", est.mean}, {"stderr", est.std_error}});
    if (slack + allowance < best_margin) {
      best_margin = slack + allowance;
      rep.slack = slack;
      rep.std_error = est.std_error;
      rep.allowance = allowance;
    }
  }
  rep.params = {{"prior", p.name()},       {"n", n},        {"lambda", lambda},          {"q", q},
                {"n_disorder", n_disorder}, {"seed", seed}, {"calibration_c", calib},   {"slopes", slopes}};
  rep.note = "slack = min slope + lambda q^2/4; allowance = lambda K^4 / n + 3 stderr";
  rep.decide();
  return rep;
}

Optimum min_f_hat(const Prior& p, double lambda, double m, const Eigen::VectorXd& spike,
                  const std::vector<double>& q_grid, const ChannelEvaluator& ev) {
  std::vector<double> grid = q_grid;
  if (grid.empty()) grid = linear_grid(0.0, saddle_q_max(p), 81);
  std::sort(grid.begin(), grid.end());
  auto f = [&](double q) { return f_hat(p, lambda, m, q, spike, ev); };
  std::size_t best = 0;
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    vals[i] = f(grid[i]);
    if (vals[i] < vals[best]) best = i;
  }
  Optimum out{grid[best], vals[best]};
  if (grid.size() >= 2) {
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    const auto refined = golden_section_min(f, lo, hi, kRefineTol);
    if (refined.value < out.value) out = refined;
  }
  return out;
}

VerificationReport fp_upper_check(const Prior& p, int n, double lambda, double m, double eps,
                                  const std::vector<double>& q_grid, int n_disorder, std::uint64_t seed,
                                  const Eigen::VectorXd* spike, const ChannelEvaluator& ev, std::uint64_t budget) {
  Eigen::VectorXd x_star;
  if (spike) {
    x_star = *spike;
  } else {
    Rng rng(derive_seed(seed, 0));
    x_star = sample_spike(p, n, rng);
  }
  const auto lhs = fp_potential(p, n, lambda, m, eps, x_star, n_disorder, derive_seed(seed, 1), budget);

  const double k = p.support_bound();
  const double calib = lambda * k * k * k * k;
  VerificationReport rep;
  rep.check = "fp_upper";
  rep.params = {{"prior", p.name()}, {"n", n},       {"lambda", lambda}, {"m", m},
                {"eps", eps},        {"n_disorder", n_disorder}, {"seed", seed}, {"calibration_c", calib}};
  if (lhs.empty_window) {
    rep.skipped = true;
    rep.note = "empty overlap window for this spike";
    rep.decide();
    return rep;
  }
  const auto inf_q = min_f_hat(p, lambda, m, x_star, q_grid, ev);
  const double rhs = inf_q.value + lambda * eps * eps / 2.0;
  rep.params["phi_eps"] = lhs.estimate.mean;
  rep.params["inf_f_hat"] = inf_q.value;
  rep.params["q_min"] = inf_q.x;
  rep.slack = rhs - lhs.estimate.mean;
  rep.std_error = lhs.estimate.std_error;
  rep.allowance = calib / n + 3.0 * lhs.estimate.std_error;
  rep.note = "slack = inf_q F_hat + lambda eps^2/2 - Phi_eps; allowance = lambda K^4 / n + 3 stderr";
  rep.decide();
  return rep;
}

}  // namespace replica_lab
