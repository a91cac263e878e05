#include "replica_lab/optimize.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace replica_lab {

Optimum golden_section_max(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (hi < lo) throw std::invalid_argument("golden_section_max: empty bracket");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  Optimum best = fc >= fd ? Optimum{c, fc} : Optimum{d, fd};
  const double f_lo = f(lo);
  if (f_lo > best.value) best = {lo, f_lo};
  const double f_hi = f(hi);
  if (f_hi > best.value) best = {hi, f_hi};
  return best;
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  if (count < 2) return {lo};
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  grid.back() = hi;
  return grid;
}

std::vector<std::size_t> grid_local_maxima(const std::vector<double>& values) {
  std::vector<std::size_t> out;
  const std::size_t n = values.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = i == 0 || values[i] > values[i - 1];
    const bool right = i + 1 == n || values[i] >= values[i + 1];
    if (left && right) out.push_back(i);
  }
  return out;
}

namespace {

int grid_count(double lo, double hi, double step) {
  if (hi <= lo) return 1;
  return std::max(2, static_cast<int>(std::ceil((hi - lo) / step - 1e-9)) + 1);
}

}  // namespace

ScanResult scan_max(const std::function<double(double)>& f, double lo, double hi, double step, double tol,
                    double tie) {
  const auto grid = linear_grid(lo, hi, grid_count(lo, hi, step));
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = f(grid[i]);

  ScanResult result;
  if (grid.size() == 1) {
    result.best = {grid[0], values[0]};
    result.local_optima = {result.best};
    return result;
  }
  for (std::size_t i : grid_local_maxima(values)) {
    const double a = grid[i == 0 ? 0 : i - 1];
    const double b = grid[std::min(i + 1, grid.size() - 1)];
    Optimum refined = golden_section_max(f, a, b, tol);
    if (values[i] > refined.value) refined = {grid[i], values[i]};
    result.local_optima.push_back(refined);
  }

  result.best = result.local_optima.front();
  for (const auto& o : result.local_optima) {
    if (o.value > result.best.value) result.best = o;
  }
  const double top = result.best.value;
  for (const auto& o : result.local_optima) {
    if (o.value >= top - tie && o.x > result.best.x) result.best = o;
  }
  return result;
}

Optimum scan_max_best(const std::function<double(double)>& f, double lo, double hi, double step, double tol) {
  const auto grid = linear_grid(lo, hi, grid_count(lo, hi, step));
  if (grid.size() == 1) return {grid[0], f(grid[0])};
  std::size_t arg = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  const double a = grid[arg == 0 ? 0 : arg - 1];
  const double b = grid[std::min(arg + 1, grid.size() - 1)];
  Optimum refined = golden_section_max(f, a, b, tol);
  if (best > refined.value) refined = {grid[arg], best};
  return refined;
}

}  // namespace replica_lab
