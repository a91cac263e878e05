#include "cli.hpp"

#include "replica_lab/finite_system.hpp"
#include "replica_lab/interpolation.hpp"
#include "replica_lab/io.hpp"
#include "replica_lab/prior.hpp"
#include "replica_lab/rs_solver.hpp"
#include "replica_lab/scalar_channel.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace replica_lab::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw UsageError("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

// A table whose cells keep their JSON type, so seeds stay exact integers.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<nlohmann::json>> rows;

  void add(std::vector<nlohmann::json> row) { rows.push_back(std::move(row)); }

  std::vector<double> column(const std::string& name) const {
    std::size_t c = 0;
    while (c < header.size() && header[c] != name) ++c;
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[c].is_number() ? r[c].get<double>() : std::nan(""));
    return out;
  }

  CsvTable to_csv() const {
    CsvTable t(header);
    for (const auto& r : rows) {
      std::vector<std::string> cells;
      for (const auto& v : r) {
        if (v.is_number_float()) {
          cells.push_back(format_number(v.get<double>()));
        } else if (v.is_string()) {
          cells.push_back(v.get<std::string>());
        } else {
          cells.push_back(v.dump());
        }
      }
      t.add_row(std::move(cells));
    }
    return t;
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json obj = nlohmann::json::object();
      for (std::size_t i = 0; i < header.size(); ++i) obj[header[i]] = r[i];
      arr.push_back(std::move(obj));
    }
    return arr;
  }
};

struct PlotSpec {
  std::string suffix;
  std::string x;
  std::vector<std::string> ys;
  std::string group;  // one series per distinct value of this column
};

struct Output {
  Table table;
  nlohmann::json json_results;  // used instead of the table when set
  std::vector<PlotSpec> plots;
  int exit_code = kOk;
};

nlohmann::json num(double v) { return nlohmann::json(v); }

std::vector<double> require_lambdas(const RunConfig& c) {
  if (c.lambdas.empty()) throw UsageError("--lambda is empty");
  for (double l : c.lambdas) {
    if (l < 0.0) throw UsageError("lambda must be >= 0");
  }
  return c.lambdas;
}

Output cmd_rs_curve(const RunConfig& c, const Prior& p, const ChannelEvaluator& ev) {
  Output o;
  o.table.header = {"lambda", "q_star", "phi_rs", "mi", "mmse"};
  const double e2 = p.second_moment();
  for (double lambda : require_lambdas(c)) {
    const auto rs = phi_rs(p, lambda, ev);
    o.table.add({num(lambda), num(rs.optimizer_q), num(rs.value), num(lambda / 4.0 * e2 * e2 - rs.value),
                 num(e2 * e2 - rs.optimizer_q * rs.optimizer_q)});
  }
  for (const char* y : {"q_star", "phi_rs", "mi", "mmse"}) o.plots.push_back({y, "lambda", {y}, ""});
  return o;
}

Output cmd_saddle(const RunConfig& c, const Prior& p, const ChannelEvaluator& ev) {
  Output o;
  o.table.header = {"lambda", "saddle", "m_star", "q_bar", "phi_rs", "gap"};
  for (double lambda : require_lambdas(c)) {
    const auto sd = saddle(p, lambda, ev);
    const auto rs = phi_rs(p, lambda, ev);
    o.table.add({num(lambda), num(sd.value), num(sd.optimizer_m.value_or(0.0)), num(sd.optimizer_q), num(rs.value),
                 num(std::abs(sd.value - rs.value))});
  }
  o.plots.push_back({"saddle", "lambda", {"saddle", "phi_rs"}, ""});
  o.plots.push_back({"gap", "lambda", {"gap"}, ""});
  return o;
}

Output cmd_se(const RunConfig& c, const Prior& p, const ChannelEvaluator& ev) {
  Output o;
  o.table.header = {"lambda", "iteration", "q", "converged"};
  const double q0 = c.q.value_or(p.second_moment());
  for (double lambda : require_lambdas(c)) {
    const auto trace = state_evolution(p, lambda, q0, 1e-12, 10000, ev);
    for (std::size_t i = 0; i < trace.iterates.size(); ++i) {
      o.table.add({num(lambda), static_cast<int>(i), num(trace.iterates[i]), trace.converged ? 1 : 0});
    }
  }
  o.plots.push_back({"q", "iteration", {"q"}, "lambda"});
  return o;
}

Output cmd_finite_n(const RunConfig& c, const Prior& p) {
  Output o;
  o.table.header = {"n", "lambda", "quantity", "mean", "stderr", "n_samples", "seed"};
  for (int n : c.ns) {
    for (double lambda : require_lambdas(c)) {
      const auto est = free_entropy_mc(p, n, lambda, c.n_disorder, c.seed, c.budget);
      o.table.add({n, num(lambda), "free_entropy", num(est.mean), num(est.std_error), est.n_samples, est.seed});
    }
  }
  o.plots.push_back({"free_entropy", "n", {"mean"}, "lambda"});
  return o;
}

Output cmd_fp(const RunConfig& c, const Prior& p, const ChannelEvaluator& ev) {
  if (c.ms.empty()) throw UsageError("--m is empty");
  if (!(c.eps > 0.0)) throw UsageError("--eps must be > 0");
  Output o;
  o.table.header = {"n", "lambda", "m", "eps", "mean", "stderr", "n_samples", "seed", "empty", "upper_bound"};
  for (int n : c.ns) {
    // Same spike and noise streams as fp_upper_check.
    Rng rng(derive_seed(c.seed, 0));
    const Eigen::VectorXd spike = sample_spike(p, n, rng);
    for (double lambda : require_lambdas(c)) {
      for (double m : c.ms) {
        const auto fp = fp_potential(p, n, lambda, m, c.eps, spike, c.n_disorder, derive_seed(c.seed, 1), c.budget);
        const double bound = min_f_hat(p, lambda, m, spike, {}, ev).value + lambda * c.eps * c.eps / 2.0;
        o.table.add({n, num(lambda), num(m), num(c.eps), num(fp.estimate.mean), num(fp.estimate.std_error),
                     fp.estimate.n_samples, c.seed, fp.empty_window ? 1 : 0, num(bound)});
      }
    }
  }
  o.plots.push_back({"profile", "m", {"mean", "upper_bound"}, ""});
  return o;
}

VerificationReport budget_skip(const std::string& check, const BudgetExceeded& e) {
  VerificationReport rep;
  rep.check = check;
  rep.skipped = true;
  rep.note = e.what();
  rep.decide();
  return rep;
}

Output cmd_verify(const RunConfig& c, const Prior& p, const ChannelEvaluator& ev, std::ostream& err) {
  const int n = c.ns.front();
  const double lambda = c.lambdas.empty() ? 2.0 : c.lambdas.front();
  const int draws = c.n_disorder;
  std::vector<VerificationReport> reports;
  std::uint64_t stream = 0;
  auto next_seed = [&] { return derive_seed(c.seed, stream++); };
  auto guarded = [&](const std::string& name, const std::function<VerificationReport()>& f) {
    try {
      reports.push_back(f());
    } catch (const BudgetExceeded& e) {
      reports.push_back(budget_skip(name, e));
    }
  };

  {
    VerificationReport rep;
    rep.check = "saddle_equivalence";
    double worst = 0.0;
    for (double l : {0.5, 1.0, 2.0, 4.0}) {
      worst = std::max(worst, std::abs(saddle(p, l, ev).value - phi_rs(p, l, ev).value));
    }
    rep.params = {{"prior", p.name()}, {"lambdas", {0.5, 1.0, 2.0, 4.0}}, {"max_gap", worst}};
    rep.slack = -worst;
    rep.allowance = 1e-4;
    rep.decide();
    reports.push_back(rep);
  }
  {
    VerificationReport rep;
    rep.check = "asymmetry_gap";
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 40; ++i) worst = std::min(worst, asymmetry_gap(ev, p, 0.25 * i));
    rep.params = {{"prior", p.name()}, {"r_max", 10.0}, {"min_gap", worst}};
    rep.slack = worst;
    rep.allowance = 1e-10;
    rep.decide();
    reports.push_back(rep);
  }
  guarded("kl_identity", [&] {
    VerificationReport rep;
    rep.check = "kl_identity";
    const std::uint64_t s = next_seed();
    double worst = 0.0;
    for (int d = 0; d < 20; ++d) {
      const auto inst = sample_instance(p, n, lambda, derive_seed(s, d));
      const auto [direct, log_z] = kl_log_likelihood_ratio(inst, p, c.budget);
      worst = std::max(worst, std::abs(direct - log_z));
    }
    rep.params = {{"prior", p.name()}, {"n", n}, {"lambda", lambda}, {"instances", 20}, {"max_abs_diff", worst}};
    rep.slack = -worst;
    rep.allowance = 1e-10;
    rep.decide();
    return rep;
  });
  for (double l : {0.5, 1.0, 2.0}) {
    guarded("nishimori", [&] { return nishimori_check(p, n, l, draws, next_seed(), c.budget); });
  }
  guarded("guerra_lower_bound", [&] {
    return guerra_lower_bound_check(p, n, lambda, linear_grid(0.0, p.second_moment(), 21), draws, next_seed(), ev);
  });
  const double q_star = phi_rs(p, lambda, ev).optimizer_q;
  for (double q : {0.25, 0.5, q_star}) {
    guarded("guerra_slope",
            [&] { return guerra_slope_check(p, n, lambda, q, default_t_grid(), draws, next_seed(), c.budget); });
  }
  for (double m : {-0.5, 0.0, 0.5}) {
    guarded("fp_upper",
            [&] { return fp_upper_check(p, n, lambda, m, 0.25, {}, draws, next_seed(), nullptr, ev, c.budget); });
  }
  guarded("overlap_discretization", [&] {
    return laplace_discretization_check(p, n, lambda, 0.25, std::max(1, draws / 10), 10, next_seed(), c.budget);
  });
  guarded("log_z_concentration", [&] {
    // Largest size whose doubled instance stays cheap to enumerate.
    int small = 0;
    while (configuration_count(p, 2 * (small + 1)) <= (1ULL << 16)) ++small;
    if (small < 2) throw BudgetExceeded(configuration_count(p, 4), 1ULL << 16);
    return lipschitz_concentration_check(p, small, lambda, draws, next_seed(), c.budget);
  });
  reports.push_back(planted_concentration_check(p, n, lambda, 0.5, 0.5, draws, next_seed(), ev));

  Output o;
  o.table.header = {"check", "pass", "skipped", "slack", "allowance", "stderr"};
  o.json_results = nlohmann::json::array();
  bool all = true;
  for (const auto& r : reports) {
    all = all && r.pass;
    o.table.add({r.check, r.pass ? 1 : 0, r.skipped ? 1 : 0, num(r.slack), num(r.allowance), num(r.std_error)});
    o.json_results.push_back(r.to_json());
    if (!r.pass) err << "check failed: " << r.check << " slack=" << r.slack << " allowance=" << r.allowance << '\n';
  }
  o.exit_code = all ? kOk : kCheckFailed;
  return o;
}

std::vector<Series> build_series(const Table& t, const PlotSpec& spec) {
  const auto xs = t.column(spec.x);
  std::vector<Series> out;
  for (const auto& y : spec.ys) {
    const auto ys = t.column(y);
    if (spec.group.empty()) {
      out.push_back({y, xs, ys});
      continue;
    }
    const auto groups = t.column(spec.group);
    std::vector<double> seen;
    for (double g : groups) {
      if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
      seen.push_back(g);
      Series s{spec.group + "=" + format_number(g), {}, {}};
      for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i] == g) {
          s.x.push_back(xs[i]);
          s.y.push_back(ys[i]);
        }
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string plot_path(const std::string& out, const std::string& suffix) {
  const auto slash = out.find_last_of('/');
  const auto dot = out.find_last_of('.');
  const std::string stem = (dot != std::string::npos && (slash == std::string::npos || dot > slash)) ? out.substr(0, dot) : out;
  return stem + "." + suffix + ".svg";
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << contents;
  if (!f) throw UsageError("cannot write '" + path + "'");
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = {{"command", command}, {"prior", prior},       {"eps", eps},         {"disorder", n_disorder},
                      {"seed", seed},       {"seed_source", seed_source}, {"nodes", nodes}, {"budget", budget},
                      {"format", format},   {"plot", plot}};
  j["lambda"] = lambdas;
  j["lambda_spec"] = lambda_spec;
  j["n"] = ns;
  j["m"] = ms;
  j["q"] = q ? nlohmann::json(*q) : nlohmann::json(nullptr);
  return j;
}

std::vector<double> parse_range(const std::string& spec) {
  std::vector<double> out;
  if (spec.empty()) throw UsageError("empty range");
  for (const auto& item : split(spec, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(parse_number(parts[0]));
    } else if (parts.size() == 3) {
      const double a = parse_number(parts[0]);
      const double b = parse_number(parts[1]);
      const double h = parse_number(parts[2]);
      if (!(h > 0.0)) throw UsageError("range step must be > 0 in '" + item + "'");
      if (b < a) throw UsageError("range end below start in '" + item + "'");
      const auto count = static_cast<long>(std::floor((b - a) / h + 0.5)) + 1;
      if (count > 100000) throw UsageError("range '" + item + "' has too many points");
      for (long i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * h);
    } else {
      throw UsageError("bad range item '" + item + "' (expected x or start:stop:step)");
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& spec) {
  std::vector<int> out;
  for (const auto& item : split(spec, ',')) {
    const double v = parse_number(item);
    if (v != std::floor(v) || v < 2 || v > 64) throw UsageError("n must be an integer in [2, 64], got '" + item + "'");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw UsageError("empty n list");
  return out;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.format != "csv" && config.format != "json") throw UsageError("--format must be csv or json");
    if (config.plot && config.out.empty()) throw UsageError("--plot needs --out");
    if (config.n_disorder < 1) throw UsageError("--disorder must be >= 1");
    if (config.nodes < 2) throw UsageError("--nodes must be >= 2");
    Prior p = [&] {
      try {
        return parse_prior(config.prior);
      } catch (const std::exception& e) {
        throw UsageError(std::string("bad --prior: ") + e.what());
      }
    }();
    const auto ev = make_evaluator(config.nodes);

    Output o;
    const auto& cmd = config.command;
    if (cmd == "rs-curve") {
      o = cmd_rs_curve(config, p, ev);
    } else if (cmd == "saddle") {
      o = cmd_saddle(config, p, ev);
    } else if (cmd == "se") {
      o = cmd_se(config, p, ev);
    } else if (cmd == "finite-n") {
      o = cmd_finite_n(config, p);
    } else if (cmd == "fp") {
      o = cmd_fp(config, p, ev);
    } else if (cmd == "verify") {
      o = cmd_verify(config, p, ev, err);
    } else {
      throw UsageError("unknown command '" + cmd + "'");
    }

    std::ostringstream body;
    const auto cfg = config.to_json();
    if (config.format == "json") {
      const auto results = o.json_results.is_null() ? o.table.to_json() : o.json_results;
      body << json_envelope(cfg, results).dump(2) << '\n';
    } else {
      o.table.to_csv().write(body, {"replica_lab " + version_string(), "config " + cfg.dump()});
    }
    if (config.out.empty() || config.out == "-") {
      out << body.str();
    } else {
      write_file(config.out, body.str());
    }
    if (config.plot) {
      for (const auto& spec : o.plots) {
        std::ostringstream svg;
        write_svg_line_chart(svg, build_series(o.table, spec), {cmd + " (" + p.name() + ")", spec.x, spec.suffix});
        write_file(plot_path(config.out, spec.suffix), svg.str());
      }
    }
    return o.exit_code;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << " (raise --budget or lower --n)\n";
    return kUsageError;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Replica-symmetric formula lab for the spiked Wigner model", "replica-lab"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  RunConfig c;
  std::string lambda_spec, n_spec, m_spec;
  std::optional<std::uint64_t> seed;
  std::optional<int> disorder;
  app.add_option("--prior", c.prior, "rademacher | sparse:<rho> | asym:<p> | uniform:<k> | point:<c>");
  app.add_option("--lambda", lambda_spec,
                 "value, comma list, or start:stop:step (stop included when within half a step of the grid)");
  app.add_option("--n", n_spec, "system size(s), comma-separated");
  app.add_option("--m", m_spec, "overlap grid for fp (same syntax as --lambda)");
  app.add_option("--eps", c.eps, "overlap window width for fp");
  app.add_option("--q", c.q, "initial q for se");
  app.add_option("--disorder", disorder, "disorder draws per estimate");
  app.add_option("--seed", seed, std::string("master seed (default ") + std::to_string(kDefaultSeed) + ", or $" +
                                     kSeedEnv + ")");
  app.add_option("--nodes", c.nodes, "Gauss-Hermite nodes");
  app.add_option("--budget", c.budget, "enumeration budget in configurations");
  app.add_option("--out", c.out, "output file (stdout when absent)");
  app.add_option("--format", c.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--plot", c.plot, "also write one SVG line chart per curve next to --out");

  struct Defaults {
    const char* name;
    const char* help;
    const char* lambda;
    const char* n;
    const char* m;
    int disorder;
  };
  const Defaults table[] = {
      {"rs-curve", "q*, phi_RS, mutual information and MMSE over lambda", "0:6:0.25", "12", "0", 1},
      {"saddle", "sup_m inf_q F_bar against phi_RS over lambda", "0:6:0.5", "12", "0", 1},
      {"se", "state evolution traces", "2", "12", "0", 1},
      {"finite-n", "exact-enumeration estimates of F_N across n", "2", "8,12,16", "0", 100},
      {"fp", "Franz-Parisi potential profile over m", "2", "12", "-1:1:0.125", 100},
      {"verify", "run the inequality and identity suite; nonzero exit on failure", "2", "10", "0", 400},
  };
  for (const auto& d : table) app.add_subcommand(d.name, d.help);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
    return kUsageError;
  }

  const auto* sub = app.get_subcommands().front();
  c.command = sub->get_name();
  const Defaults* def = nullptr;
  for (const auto& d : table) {
    if (c.command == d.name) def = &d;
  }
  try {
    c.lambda_spec = lambda_spec.empty() ? def->lambda : lambda_spec;
    c.lambdas = parse_range(c.lambda_spec);
    c.n_spec = n_spec.empty() ? def->n : n_spec;
    c.ns = parse_int_list(c.n_spec);
    c.m_spec = m_spec.empty() ? def->m : m_spec;
    c.ms = parse_range(c.m_spec);
    c.n_disorder = disorder.value_or(def->disorder);
    if (seed) {
      c.seed = *seed;
      c.seed_source = "flag";
    } else if (const char* env = std::getenv(kSeedEnv); env && *env) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(env, &end, 10);
      if (*end != '\0') throw UsageError(std::string(kSeedEnv) + " is not an unsigned integer");
      c.seed = v;
      c.seed_source = "env";
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  }
  return run(c, out, err);
}

}  // namespace replica_lab::cli
