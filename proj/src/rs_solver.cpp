#include "replica_lab/rs_solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace replica_lab {

namespace {

void check_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be finite and >= 0, got " + std::to_string(v));
  }
}

// A maximizer within one grid step of 0 whose value cannot be told apart from
// the value at 0 is the boundary point itself; golden refinement on a flat
// top only returns rounding noise.
void snap_to_origin(double& x, double& value, double value_at_origin) {
  if (x != 0.0 && std::abs(x) < kQGridStep && value - value_at_origin <= kSnapTol) {
    x = 0.0;
    value = value_at_origin;
  }
}

}  // namespace

double rs_potential(const Prior& p, double lambda, double q, const ChannelEvaluator& ev) {
  check_nonnegative(lambda, "lambda");
  check_nonnegative(q, "q");
  return psi(ev, p, lambda * q) - lambda * q * q / 4.0;
}

PotentialResult phi_rs(const Prior& p, double lambda, const ChannelEvaluator& ev) {
  check_nonnegative(lambda, "lambda");
  PotentialResult out;
  out.grid_resolution = kQGridStep;
  if (lambda == 0.0) {
    out.local_optima = {{0.0, 0.0}};
    return out;
  }
  ensure_converged(ev, p);

  const double q_hi = p.second_moment();
  const auto scan = scan_max([&](double q) { return rs_potential(p, lambda, q, ev); }, 0.0, q_hi, kQGridStep,
                             kRefineTol);
  out.value = scan.best.value;
  out.optimizer_q = scan.best.x;
  snap_to_origin(out.optimizer_q, out.value, rs_potential(p, lambda, 0.0, ev));
  for (const auto& o : scan.local_optima) out.local_optima.push_back({o.x, o.value});
  return out;
}

double f_bar(const Prior& p, double lambda, double m, double q, const ChannelEvaluator& ev) {
  check_nonnegative(lambda, "lambda");
  check_nonnegative(q, "q");
  return psi_bar(ev, p, lambda * q, lambda * m) - lambda * m * m / 2.0 + lambda * q * q / 4.0;
}

double f_hat(const Prior& p, double lambda, double m, double q, const Eigen::VectorXd& spike,
             const ChannelEvaluator& ev) {
  check_nonnegative(lambda, "lambda");
  check_nonnegative(q, "q");
  if (spike.size() == 0) throw std::invalid_argument("f_hat needs a nonempty spike");
  std::map<double, int> counts;
  for (Eigen::Index i = 0; i < spike.size(); ++i) ++counts[spike(i)];
  double acc = 0.0;
  for (const auto& [x, c] : counts) acc += c * psi_hat(ev, p, lambda * q, lambda * m * x);
  return acc / static_cast<double>(spike.size()) - lambda * m * m / 2.0 + lambda * q * q / 4.0;
}

double saddle_q_max(const Prior& p) {
  const double k = p.support_bound();
  return std::max(p.second_moment() + 1.0, k * k);
}

Optimum inner_min_f_bar(const Prior& p, double lambda, double m, const ChannelEvaluator& ev) {
  const double q_max = saddle_q_max(p);
  return scan_min_best([&](double q) { return f_bar(p, lambda, m, q, ev); }, 0.0, q_max,
                       q_max / kInnerGridPanels, kRefineTol);
}

PotentialResult saddle(const Prior& p, double lambda, const ChannelEvaluator& ev) {
  check_nonnegative(lambda, "lambda");
  PotentialResult out;
  out.grid_resolution = kMGridStep;
  out.optimizer_m = 0.0;
  if (lambda == 0.0) {
    out.local_optima = {{0.0, 0.0}};
    return out;
  }
  ensure_converged(ev, p);

  const double m_hi = p.second_moment();
  const double m_lo = p.symmetric() ? 0.0 : -m_hi;
  auto outer = [&](double m) { return inner_min_f_bar(p, lambda, m, ev).value; };
  const Optimum best = scan_max_best(outer, m_lo, m_hi, kMGridStep, 1e-7);

  double m_star = best.x;
  out.value = best.value;
  snap_to_origin(m_star, out.value, outer(0.0));
  out.optimizer_m = m_star;
  out.optimizer_q = inner_min_f_bar(p, lambda, m_star, ev).x;
  out.local_optima = {{best.x, best.value}};
  return out;
}

SETrace state_evolution(const Prior& p, double lambda, double q0, double tol, int max_iter,
                        const ChannelEvaluator& ev) {
  check_nonnegative(lambda, "lambda");
  const double e2 = p.second_moment();
  if (!(q0 >= 0.0 && q0 <= e2 + 1e-12)) throw DomainError("state_evolution needs q0 in [0, E X^2]");
  if (!(tol > 0.0)) throw std::invalid_argument("state_evolution needs tol > 0");

  SETrace trace;
  trace.iterates.push_back(q0);
  double q = q0;
  for (int t = 0; t < max_iter; ++t) {
    double next = 2.0 * psi_prime(ev, p, lambda * q);
    if (next < -1e-6 || next > e2 + 1e-6 || !std::isfinite(next)) {
      throw NumericalError("state evolution left [0, E X^2]: q = " + std::to_string(next));
    }
    next = std::clamp(next, 0.0, e2);
    trace.iterates.push_back(next);
    const double step = std::abs(next - q);
    q = next;
    if (step <= tol) {
      trace.converged = true;
      break;
    }
  }
  trace.fixed_point = q;
  return trace;
}

double mutual_information(const Prior& p, double lambda, const ChannelEvaluator& ev) {
  const double e2 = p.second_moment();
  return lambda / 4.0 * e2 * e2 - phi_rs(p, lambda, ev).value;
}

CriticalPoint critical_lambda(const Prior& p, double delta, double tol, const ChannelEvaluator& ev) {
  if (!(delta > 0.0 && delta <= 0.1)) throw std::invalid_argument("critical_lambda needs delta in (0, 0.1]");
  if (!(tol > 0.0)) throw std::invalid_argument("critical_lambda needs tol > 0");

  auto informative = [&](double lambda) { return phi_rs(p, lambda, ev).optimizer_q > delta; };
  double hi = 1.0;
  while (!informative(hi)) {
    hi *= 2.0;
    if (hi > 64.0) throw NoTransition("q* stays below delta up to lambda = 64 for prior '" + p.name() + "'");
  }
  double lo = 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (informative(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double lambda_c = 0.5 * (lo + hi);
  return {lambda_c, lo, hi, phi_rs(p, lambda_c, ev)};
}

std::vector<std::pair<double, double>> mmse_curve(const Prior& p, const std::vector<double>& lambdas,
                                                  const ChannelEvaluator& ev) {
  const double e2 = p.second_moment();
  std::vector<std::pair<double, double>> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    const double q = phi_rs(p, lambda, ev).optimizer_q;
    out.emplace_back(lambda, e2 * e2 - q * q);
  }
  return out;
}

CurvePoint curve_point(const Prior& p, double lambda, const ChannelEvaluator& ev) {
  const double e2 = p.second_moment();
  const auto rs = phi_rs(p, lambda, ev);
  const auto sd = saddle(p, lambda, ev);
  return {lambda,
          rs.optimizer_q,
          rs.value,
          sd.value,
          lambda / 4.0 * e2 * e2 - rs.value,
          e2 * e2 - rs.optimizer_q * rs.optimizer_q};
}

}  // namespace replica_lab
