#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace replica_lab {

struct Optimum {
  double x;
  double value;
};

/*!
 * Golden-section search for a maximum of `f` on [lo, hi] down to bracket
 * width `tol`. The endpoints are compared against the interior estimate, so
 * a maximum sitting exactly on the boundary is returned exactly.
 */
Optimum golden_section_max(const std::function<double(double)>& f, double lo, double hi, double tol);

inline Optimum golden_section_min(const std::function<double(double)>& f, double lo, double hi, double tol) {
  auto r = golden_section_max([&](double x) { return -f(x); }, lo, hi, tol);
  return {r.x, -r.value};
}

/// Uniform grid of `count` points spanning [lo, hi].
std::vector<double> linear_grid(double lo, double hi, int count);

/// Indices of grid local maxima (strict on the left, weak on the right).
std::vector<std::size_t> grid_local_maxima(const std::vector<double>& values);

struct ScanResult {
  Optimum best;
  std::vector<Optimum> local_optima;
};

/*!
 * Grid scan of `f` on [lo, hi] at spacing no coarser than `step`, followed by
 * golden refinement of every grid local maximum inside its neighbouring
 * bracket. Values within `tie` of the best resolve toward larger x.
 */
ScanResult scan_max(const std::function<double(double)>& f, double lo, double hi, double step, double tol,
                    double tie = 1e-10);

/// Same, but only the best grid bracket is refined.
Optimum scan_max_best(const std::function<double(double)>& f, double lo, double hi, double step, double tol);

inline Optimum scan_min_best(const std::function<double(double)>& f, double lo, double hi, double step,
                             double tol) {
  auto r = scan_max_best([&](double x) { return -f(x); }, lo, hi, step, tol);
  return {r.x, -r.value};
}

}  // namespace replica_lab
