// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "cli.hpp"
#include "replica_lab/finite_system.hpp"
#include "replica_lab/interpolation.hpp"
#include "replica_lab/quadrature.hpp"
#include "replica_lab/rs_solver.hpp"
#include "replica_lab/scalar_channel.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace replica_lab;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20170301;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[fail] " << what << "; ";
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<double> lambda_grid(double hi, double step) {
  std::vector<double> out;
  for (int i = 0; i * step <= hi + 1e-12; ++i) out.push_back(i * step);
  return out;
}

std::vector<Prior> catalog() {
  auto ps = standard_priors();
  ps.push_back(priors::sparse_rademacher(0.05));
  ps.push_back(priors::point_mass(0.5));
  return ps;
}

void saddle_equivalence(Outcome& o) {
  double worst = 0.0;
  for (const auto& p : standard_priors()) {
    for (double lambda : lambda_grid(6.0, 0.25)) {
      const double gap = std::abs(saddle(p, lambda).value - phi_rs(p, lambda).value);
      worst = std::max(worst, gap);
      o.require(gap <= 1e-4, p.name() + " lambda=" + fmt(lambda) + " gap=" + fmt(gap));
    }
  }
  o.detail << "max |saddle - phi_rs| = " << fmt(worst);
}

void asymmetry(Outcome& o) {
  double worst = INFINITY;
  for (const auto& p : catalog()) {
    for (double r : lambda_grid(10.0, 0.25)) {
      const double gap = asymmetry_gap(default_evaluator(), p, r);
      worst = std::min(worst, gap);
      o.require(gap >= -1e-10, p.name() + " r=" + fmt(r));
    }
  }
  o.detail << "min gap = " << fmt(worst);
}

void finite_size(Outcome& o) {
  const auto p = priors::rademacher();
  const double lambda = 2.0;
  const double target = phi_rs(p, lambda).value;
  double f16 = 0.0;
  for (int n : {8, 12, 16}) {
    const auto est = free_entropy_mc(p, n, lambda, 400, derive_seed(kSeed, n));
    o.detail << "F_" << n << " = " << fmt(est.mean) << " +- " << fmt(est.std_error) << "; ";
    o.require(est.mean >= target - lambda / n - 3 * est.std_error, "Guerra side at n=" + std::to_string(n));
    if (n == 16) f16 = est.mean;
  }
  o.require(std::abs(f16 - target) <= 0.05, "|F_16 - phi_RS| <= 0.05");
  o.detail << "phi_RS = " << fmt(target);
}

void kl_identity(Outcome& o) {
  const auto p = priors::rademacher();
  const int n = 10;
  for (double lambda : {0.5, 2.0}) {
    double worst = 0.0;
    std::vector<double> direct;
    for (int k = 0; k < 100; ++k) {
      const auto inst = sample_instance(p, n, lambda, derive_seed(kSeed + 4, k));
      const auto [llr, log_z] = kl_log_likelihood_ratio(inst, p);
      worst = std::max(worst, std::abs(llr - log_z));
      direct.push_back(llr);
    }
    o.require(worst <= 1e-10, "per-instance agreement at lambda=" + fmt(lambda));
    // Independent draws for N F_N against the KL estimate.
    const auto kl = summarize(direct, kSeed + 4);
    const auto fe = free_entropy_mc(p, n, lambda, 100, kSeed + 5);
    const double diff = n * fe.mean - kl.mean;
    const double se = std::hypot(n * fe.std_error, kl.std_error);
    o.require(std::abs(diff) <= 3 * se, "N F_N vs KL at lambda=" + fmt(lambda));
    o.detail << "lambda=" << fmt(lambda) << ": max diff " << fmt(worst) << ", N F_N - KL = " << fmt(diff) << " (se "
             << fmt(se) << "); ";
  }
}

void nishimori(Outcome& o) {
  for (double lambda : {0.5, 1.0, 2.0}) {
    const auto rep = nishimori_check(priors::rademacher(), 10, lambda, 400, derive_seed(kSeed, 50));
    const auto& j = rep.params;
    const double first = j["mean_r12"].get<double>() - j["mean_r1star"].get<double>();
    const double second = j["mean_r12_sq"].get<double>() - j["mean_r1star_sq"].get<double>();
    o.require(rep.pass, "lambda=" + fmt(lambda));
    o.detail << "lambda=" << fmt(lambda) << ": first moments " << fmt(first) << " (se "
             << fmt(j["stderr_first"].get<double>()) << "), second moments " << fmt(second) << " (se "
             << fmt(j["stderr_second"].get<double>()) << "); ";
  }
}

void fp_upper(Outcome& o) {
  for (double m : {-0.5, 0.0, 0.5}) {
    const auto rep = fp_upper_check(priors::rademacher(), 12, 2.0, m, 0.25, {}, 400, derive_seed(kSeed, 60));
    o.require(rep.pass && !rep.skipped, "m=" + fmt(m));
    o.detail << "m=" << fmt(m) << ": slack " << fmt(rep.slack) << " allowance " << fmt(rep.allowance) << "; ";
  }
}

void slope(Outcome& o) {
  const auto p = priors::rademacher();
  const double q_star = phi_rs(p, 2.0).optimizer_q;
  for (double q : {0.25, 0.5, q_star}) {
    const auto rep = guerra_slope_check(p, 10, 2.0, q, default_t_grid(), 400, derive_seed(kSeed, 70));
    o.require(rep.pass, "q=" + fmt(q));
    o.detail << "q=" << fmt(q) << ": slack " << fmt(rep.slack) << " allowance " << fmt(rep.allowance) << "; ";
  }
}

void critical(Outcome& o) {
  const auto c = critical_lambda(priors::rademacher(), 0.01, 1e-4);
  o.require(std::abs(c.lambda - 1.0) <= 0.02, "rademacher lambda_c = " + fmt(c.lambda));
  o.detail << "rademacher lambda_c = " << fmt(c.lambda) << "; ";
  double worst = 0.0;
  for (const auto& p : standard_priors()) {
    for (double lambda : {2.0, 4.0}) {
      const auto se = state_evolution(p, lambda, p.second_moment(), 1e-12, 20000);
      const double gap = std::abs(se.fixed_point - phi_rs(p, lambda).optimizer_q);
      worst = std::max(worst, gap);
      o.require(se.converged && gap <= 1e-5, p.name() + " lambda=" + fmt(lambda));
    }
  }
  o.detail << "max |SE - q*| = " << fmt(worst) << "; ";
  const auto s = critical_lambda(priors::sparse_rademacher(0.05), 0.01, 1e-4);
  o.require(s.at_lambda.local_optima.size() >= 2, "sparse:0.05 local maxima");
  o.detail << "sparse:0.05 lambda_c = " << fmt(s.lambda) << " with " << s.at_lambda.local_optima.size()
           << " local maxima";
}

void numerical_core(Outcome& o) {
  // Independent 1e7-sample Monte Carlo of -r/2 + log cosh(sqrt(r) z + s), numpy seed 20240611.
  struct Mc {
    double r, s, mean, se;
  };
  const Mc oracle[] = {{1.0, 1.0, 0.1633065660145975, 0.00020441681878048733},
                       {2.0, -1.0, -0.12473507849310168, 0.0002775201217521523},
                       {5.0, 5.0, 1.8409432880577732, 0.000684170903238012}};
  const auto reference = gauss_hermite_normal<double>(121);
  const auto p = priors::rademacher();
  for (const auto& m : oracle) {
    const double closed = -m.r / 2 + reference.integrate([&](double z) {
      const double a = std::abs(std::sqrt(m.r) * z + m.s);
      return a + std::log1p(std::exp(-2 * a)) - std::log(2.0);
    });
    const double v = psi_hat(default_evaluator(), p, m.r, m.s);
    o.require(std::abs(v - closed) <= 1e-8, "closed form at r=" + fmt(m.r));
    o.require(std::abs(v - m.mean) <= 3 * m.se, "Monte Carlo at r=" + fmt(m.r));
    o.detail << "(" << fmt(m.r) << "," << fmt(m.s) << "): |quadrature - closed| " << fmt(std::abs(v - closed))
             << ", z_mc " << fmt((v - m.mean) / m.se) << "; ";
  }
}

double tv_distance(const EnumerationResult& res, const std::vector<double>& samples) {
  std::map<long long, double> emp;
  for (double s : samples) emp[std::llround(s * 1e9)] += 1.0 / samples.size();
  double tv = 0.0;
  for (std::size_t i = 0; i < res.overlap_law.size(); ++i) {
    const auto key = std::llround(res.overlap_law[i].overlap * 1e9);
    tv += std::abs(res.probability(i) - emp[key]);
    emp.erase(key);
  }
  for (const auto& kv : emp) tv += kv.second;
  return tv / 2;
}

void sampler(Outcome& o) {
  const auto p = priors::rademacher();
  for (int k = 0; k < 3; ++k) {
    const auto inst = sample_instance(p, 12, 1.0, derive_seed(kSeed + 10, k));
    const auto exact = log_partition_exact(inst, p);
    const double tv = tv_distance(exact, metropolis_sampler(inst, p, 100000, 1000, derive_seed(kSeed + 11, k)));
    o.require(tv <= 0.05, "instance " + std::to_string(k));
    o.detail << "TV " << fmt(tv) << "; ";
  }
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void determinism(Outcome& o) {
  const auto root = fs::temp_directory_path() / "replica_lab_acceptance";
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> commands = {
      {"rs-curve"},
      {"saddle", "--prior", "asym:0.7"},
      {"se", "--lambda", "2,4"},
      {"finite-n", "--n", "6,8", "--disorder", "50"},
      {"fp", "--n", "10", "--disorder", "50"},
      {"verify", "--disorder", "200"},
  };
  int compared = 0;
  for (const auto& base : commands) {
    for (const std::string format : {"csv", "json"}) {
      std::vector<std::string> outputs;
      for (int rep = 0; rep < 2; ++rep) {
        const auto dir = root / std::to_string(rep);
        fs::create_directories(dir);
        auto args = base;
        const auto out = dir / (base[0] + "." + format);
        args.insert(args.end(), {"--format", format, "--out", out.string(), "--plot", "--seed", "11"});
        std::ostringstream sink, err;
        const int code = cli::run_cli(args, sink, err);
        o.require(code == 0, base[0] + " exited " + std::to_string(code) + " " + err.str());
      }
      for (const auto& entry : fs::directory_iterator(root / "0")) {
        const auto twin = root / "1" / entry.path().filename();
        o.require(fs::exists(twin) && slurp(entry.path()) == slurp(twin), entry.path().filename().string());
        ++compared;
      }
      fs::remove_all(root);
    }
  }
  o.detail << compared << " artifacts byte-identical across reruns";
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Outcome&)> run;
  };
  const Criterion criteria[] = {
      {"saddle value equals phi_RS", saddle_equivalence},
      {"asymmetry gap nonnegative", asymmetry},
      {"finite-size convergence", finite_size},
      {"KL identity", kl_identity},
      {"Nishimori identity", nishimori},
      {"Franz-Parisi upper bound", fp_upper},
      {"interpolation slope bound", slope},
      {"critical SNR and state evolution", critical},
      {"scalar channel numerics", numerical_core},
      {"Metropolis sampler", sampler},
      {"CLI determinism", determinism},
  };
  int failures = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << index << " (" << c.name << ", " << fmt(secs)
              << " s): " << o.detail.str() << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
