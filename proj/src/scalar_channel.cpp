#include "replica_lab/scalar_channel.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace replica_lab {

namespace {

// phi(9) ~ 1e-18; the remainder is bounded by log(#atoms), so the tail
// beyond +-kTailCut is below double resolution of any result.
constexpr double kTailCut = 9.0;
// exp(-45) * #atoms is negligible against the remainder's O(1) scale.
constexpr double kNegligibleGap = 45.0;

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// P(l <= Z <= u) for Z ~ N(0,1), accurate in both tails.
double normal_mass(double l, double u) {
  constexpr double r2 = std::numbers::sqrt2;
  if (l >= 0.0) return 0.5 * (std::erfc(l / r2) - std::erfc(u / r2));
  if (u <= 0.0) return 0.5 * (std::erfc(-u / r2) - std::erfc(-l / r2));
  return 1.0 - 0.5 * std::erfc(u / r2) - 0.5 * std::erfc(-l / r2);
}

struct Line {
  double slope;
  double intercept;
  double at(double z) const { return slope * z + intercept; }
};

// Abscissa where line b (steeper) overtakes line a.
double crossing(const Line& a, const Line& b) { return (a.intercept - b.intercept) / (b.slope - a.slope); }

// Upper envelope of lines, left to right. Lines must be sorted by slope
// ascending with distinct slopes.
std::vector<Line> upper_envelope(const std::vector<Line>& sorted) {
  std::vector<Line> hull;
  for (const auto& line : sorted) {
    while (hull.size() >= 2 &&
           crossing(hull[hull.size() - 2], line) <= crossing(hull[hull.size() - 2], hull.back())) {
      hull.pop_back();
    }
    hull.push_back(line);
  }
  return hull;
}

// Panel breakpoints on [u, v]: geometric grading off both ends starting at
// h0, then uniform panels no longer than one.
void graded_breakpoints(double u, double v, double h0, std::vector<double>& out) {
  out.clear();
  out.push_back(u);
  const double mid = 0.5 * (u + v);
  std::vector<double> right;
  double step = h0;
  double left_end = u, right_end = v;
  while (step <= 1.0 && left_end + step < mid) {
    left_end += step;
    out.push_back(left_end);
    right_end -= step;
    right.push_back(right_end);
    step *= 2.0;
  }
  const double gap = right_end - left_end;
  const int fill = std::max(1, static_cast<int>(std::ceil(gap)));
  for (int i = 1; i < fill; ++i) out.push_back(left_end + gap * i / fill);
  out.push_back(right_end);
  for (auto it = right.rbegin(); it != right.rend(); ++it) out.push_back(*it);
  out.push_back(v);
  // right_end may coincide with left_end when the ladder reaches the midpoint.
  out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return b - a <= 0.0; }),
            out.end());
}

void check_r(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw DomainError("scalar channel needs r >= 0, got " + std::to_string(r));
  }
}

}  // namespace

ChannelEvaluator::ChannelEvaluator(int node_count)
    : hermite_(gauss_hermite_normal<double>(node_count)),
      legendre_(gauss_legendre<double>(std::max(8, (node_count + 3) / 4))) {}

ChannelEvaluator make_evaluator(int node_count) {
  if (node_count < 2) throw std::invalid_argument("node_count must be >= 2");
  return ChannelEvaluator(node_count);
}

const ChannelEvaluator& default_evaluator() {
  static const ChannelEvaluator ev(kDefaultNodeCount);
  return ev;
}

double ChannelEvaluator::expected_log_sum_exp(const Eigen::ArrayXd& slopes,
                                              const Eigen::ArrayXd& intercepts) const {
  std::vector<Line> lines;
  lines.reserve(static_cast<std::size_t>(slopes.size()));
  for (Eigen::Index k = 0; k < slopes.size(); ++k) {
    if (std::isfinite(intercepts(k))) lines.push_back({slopes(k), intercepts(k)});
  }
  if (lines.empty()) return -std::numeric_limits<double>::infinity();

  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    return a.slope < b.slope || (a.slope == b.slope && a.intercept > b.intercept);
  });

  // Equal slopes merge exactly: log(e^{a z + b1} + e^{a z + b2}) = a z + lse(b1, b2).
  std::vector<Line> merged;
  for (const auto& line : lines) {
    if (!merged.empty() && merged.back().slope == line.slope) {
      const double hi = std::max(merged.back().intercept, line.intercept);
      const double lo = std::min(merged.back().intercept, line.intercept);
      merged.back().intercept = hi + std::log1p(std::exp(lo - hi));
    } else {
      merged.push_back(line);
    }
  }
  // E[a z + b] = b.
  if (merged.size() == 1) return merged.front().intercept;

  const std::vector<Line> hull = upper_envelope(merged);
  double max_jump = 0.0;
  for (std::size_t i = 1; i < hull.size(); ++i) max_jump = std::max(max_jump, hull[i].slope - hull[i - 1].slope);

  const auto k = static_cast<Eigen::Index>(merged.size());
  Eigen::ArrayXd a(k), b(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    a(i) = merged[static_cast<std::size_t>(i)].slope;
    b(i) = merged[static_cast<std::size_t>(i)].intercept;
  }

  if (max_jump <= kSoftKinkSlope) {
    Eigen::ArrayXXd exponents = (hermite_.nodes.matrix() * a.matrix().transpose()).array();
    exponents.rowwise() += b.transpose();
    const Eigen::ArrayXd row_max = exponents.rowwise().maxCoeff();
    exponents.colwise() -= row_max;
    const Eigen::ArrayXd f = row_max + exponents.exp().rowwise().sum().log();
    return (hermite_.weights * f).sum();
  }

  // Envelope part in closed form.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cuts(hull.size() + 1);
  cuts.front() = -inf;
  cuts.back() = inf;
  for (std::size_t i = 1; i < hull.size(); ++i) cuts[i] = crossing(hull[i - 1], hull[i]);

  double envelope = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const double l = cuts[i], u = cuts[i + 1];
    const double dens = (std::isfinite(l) ? normal_pdf(l) : 0.0) - (std::isfinite(u) ? normal_pdf(u) : 0.0);
    envelope += hull[i].slope * dens + hull[i].intercept * normal_mass(l, u);
  }

  // Remainder log(1 + sum_{k != top} exp(l_k - l_top)) in [0, log K].
  double remainder = 0.0;
  std::vector<double> breaks;
  const Eigen::ArrayXd& gl_x = legendre_.nodes;
  const Eigen::ArrayXd& gl_w = legendre_.weights;

  for (std::size_t i = 0; i < hull.size(); ++i) {
    const double seg_lo = std::max(cuts[i], -kTailCut);
    const double seg_hi = std::min(cuts[i + 1], kTailCut);
    if (!(seg_hi > seg_lo)) continue;
    const Line& top = hull[i];

    // Where every other line sits kNegligibleGap below the top, the
    // remainder vanishes to double precision. That set is an interval.
    double neg_lo = -inf, neg_hi = inf, spread = 0.0;
    for (const auto& line : merged) {
      if (line.slope == top.slope) continue;
      const double d = line.slope - top.slope;
      const double c = line.intercept - top.intercept;
      spread = std::max(spread, std::abs(d));
      const double edge = (-kNegligibleGap - c) / d;
      if (d > 0) {
        neg_hi = std::min(neg_hi, edge);
      } else {
        neg_lo = std::max(neg_lo, edge);
      }
    }

    std::pair<double, double> pieces[2] = {{seg_lo, seg_hi}, {0.0, 0.0}};
    int piece_count = 1;
    if (neg_lo < neg_hi) {
      piece_count = 0;
      if (neg_lo > seg_lo) pieces[piece_count++] = {seg_lo, std::min(neg_lo, seg_hi)};
      if (neg_hi < seg_hi) pieces[piece_count++] = {std::max(neg_hi, seg_lo), seg_hi};
    }

    const double h0 = std::min(1.0, 0.25 / spread);
    for (int pi = 0; pi < piece_count; ++pi) {
      const auto [u, v] = pieces[pi];
      if (!(v > u)) continue;
      graded_breakpoints(u, v, h0, breaks);
      for (std::size_t j = 1; j < breaks.size(); ++j) {
        const double lo = breaks[j - 1], hi = breaks[j];
        const double half = 0.5 * (hi - lo), centre = 0.5 * (hi + lo);
        double panel = 0.0;
        for (Eigen::Index q = 0; q < gl_x.size(); ++q) {
          const double z = centre + half * gl_x(q);
          const double top_value = top.at(z);
          double tail = 0.0;
          for (Eigen::Index m = 0; m < k; ++m) {
            if (a(m) == top.slope) continue;
            tail += std::exp(a(m) * z + b(m) - top_value);
          }
          panel += gl_w(q) * normal_pdf(z) * std::log1p(tail);
        }
        remainder += half * panel;
      }
    }
  }
  return envelope + remainder;
}

double psi_hat(const ChannelEvaluator& ev, const Prior& p, double r, double s) {
  check_r(r);
  const Eigen::ArrayXd x = p.values().array();
  const Eigen::ArrayXd slopes = std::sqrt(r) * x;
  const Eigen::ArrayXd intercepts = s * x - 0.5 * r * x.square() + p.log_weights().array();
  return ev.expected_log_sum_exp(slopes, intercepts);
}

double psi_bar(const ChannelEvaluator& ev, const Prior& p, double r, double s) {
  check_r(r);
  const Eigen::VectorXd& x = p.values();
  const Eigen::VectorXd& w = p.weights();
  double acc = 0.0;
  if (p.symmetric()) {
    // psi_hat(r, s) = psi_hat(r, -s) for symmetric priors, so pair atoms.
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (x(i) < 0.0) continue;
      const double mult = x(i) > 0.0 ? 2.0 : 1.0;
      acc += mult * w(i) * psi_hat(ev, p, r, s * x(i));
    }
    return acc;
  }
  for (Eigen::Index i = 0; i < p.size(); ++i) acc += w(i) * psi_hat(ev, p, r, s * x(i));
  return acc;
}

double psi(const ChannelEvaluator& ev, const Prior& p, double r) {
  check_r(r);
  // E log sum_k w_k = log 1; skip the quadrature rounding.
  if (r == 0.0) return 0.0;
  return psi_bar(ev, p, r, r);
}

double psi_prime(const ChannelEvaluator& ev, const Prior& p, double r) {
  check_r(r);
  // No information at r = 0: the posterior mean is the prior mean.
  if (r == 0.0) return 0.5 * p.mean() * p.mean();
  // Fourth-order stencils; h balances truncation (h^4) against rounding (eps/h).
  const double h = 2e-3 * std::max(1.0, r);
  auto f = [&](double x) { return psi(ev, p, x); };
  if (r >= 2.0 * h) return (f(r - 2.0 * h) - 8.0 * f(r - h) + 8.0 * f(r + h) - f(r + 2.0 * h)) / (12.0 * h);
  return (-25.0 * f(r) + 48.0 * f(r + h) - 36.0 * f(r + 2.0 * h) + 16.0 * f(r + 3.0 * h) - 3.0 * f(r + 4.0 * h)) /
         (12.0 * h);
}

double asymmetry_gap(const ChannelEvaluator& ev, const Prior& p, double r) {
  check_r(r);
  return psi_bar(ev, p, r, r) - psi_bar(ev, p, r, -r);
}

double refinement_gap(const ChannelEvaluator& ev, const Prior& p, double r_max, double s_max) {
  const ChannelEvaluator fine(2 * ev.node_count() - 1);
  static constexpr double kR[] = {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 35.0, 50.0};
  static constexpr double kS[] = {-50.0, -20.0, -5.0, -1.0, 0.0, 1.0, 5.0, 20.0, 50.0};
  double worst = 0.0;
  for (double r : kR) {
    if (r > r_max) continue;
    for (double s : kS) {
      if (std::abs(s) > s_max) continue;
      worst = std::max(worst, std::abs(psi_hat(ev, p, r, s) - psi_hat(fine, p, r, s)));
    }
  }
  return worst;
}

void ensure_converged(const ChannelEvaluator& ev, const Prior& p, double tolerance) {
  static std::mutex mutex;
  static std::set<std::pair<std::string, int>> verified;
  auto key = std::make_pair(p.to_json().dump(), ev.node_count());
  {
    std::lock_guard lock(mutex);
    if (verified.count(key)) return;
  }
  const double gap = refinement_gap(ev, p);
  if (gap > tolerance) {
    throw NumericalError("quadrature for prior '" + p.name() + "' moved by " + std::to_string(gap) +
                         " when doubling nodes from " + std::to_string(ev.node_count()));
  }
  std::lock_guard lock(mutex);
  verified.insert(std::move(key));
}

}  // namespace replica_lab
