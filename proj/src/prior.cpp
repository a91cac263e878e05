#include "replica_lab/prior.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace replica_lab {

namespace {

constexpr double kRenormalizeTolerance = 1e-9;

double parse_double(std::string_view text, std::string_view spec) {
  double out = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) {
    throw InvalidPrior("cannot parse prior parameter in '" + std::string(spec) + "'");
  }
  return out;
}

}  // namespace

Prior Prior::make(const std::vector<Atom>& atoms, std::string name) {
  if (atoms.empty()) throw InvalidPrior("prior needs at least one atom");

  double total = 0.0;
  for (const auto& a : atoms) {
    if (!std::isfinite(a.value)) throw InvalidPrior("prior atom value is not finite");
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      throw InvalidPrior("prior atom weight must be positive and finite");
    }
    total += a.weight;
  }
  if (std::abs(total - 1.0) > kRenormalizeTolerance) {
    throw InvalidPrior("prior weights sum to " + std::to_string(total) + ", not 1");
  }

  std::vector<Atom> sorted = atoms;
  std::sort(sorted.begin(), sorted.end(),
            [](const Atom& a, const Atom& b) { return a.value > b.value; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].value == sorted[i - 1].value) {
      throw InvalidPrior("duplicate prior atom " + std::to_string(sorted[i].value));
    }
  }

  Prior p;
  p.name_ = std::move(name);
  const auto k = static_cast<Eigen::Index>(sorted.size());
  p.values_.resize(k);
  p.weights_.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    p.values_(i) = sorted[static_cast<std::size_t>(i)].value;
    p.weights_(i) = sorted[static_cast<std::size_t>(i)].weight / total;
  }
  p.log_weights_ = p.weights_.array().log().matrix();
  p.symmetric_ = p.is_symmetric();
  return p;
}

std::vector<Atom> Prior::atoms() const {
  std::vector<Atom> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (Eigen::Index i = 0; i < size(); ++i) out.push_back({values_(i), weights_(i)});
  return out;
}

bool Prior::is_symmetric(double tol) const {
  for (Eigen::Index i = 0; i < size(); ++i) {
    const Eigen::Index j = index_of(-values_(i));
    if (j < 0 || std::abs(weights_(j) - weights_(i)) > tol) return false;
  }
  return true;
}

Eigen::Index Prior::index_of(double x) const {
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (std::abs(values_(i) - x) <= 1e-12) return i;
  }
  return -1;
}

nlohmann::json Prior::to_json() const {
  nlohmann::json atoms_json = nlohmann::json::array();
  for (Eigen::Index i = 0; i < size(); ++i) atoms_json.push_back({values_(i), weights_(i)});
  return {{"name", name_}, {"atoms", atoms_json}};
}

Prior Prior::from_json(const nlohmann::json& j) {
  if (!j.contains("atoms") || !j.at("atoms").is_array()) {
    throw InvalidPrior("prior JSON needs an 'atoms' array");
  }
  std::vector<Atom> atoms;
  for (const auto& a : j.at("atoms")) {
    if (!a.is_array() || a.size() != 2) throw InvalidPrior("prior atom must be [value, weight]");
    atoms.push_back({a[0].get<double>(), a[1].get<double>()});
  }
  return make(atoms, j.value("name", std::string("custom")));
}

namespace priors {

Prior rademacher() { return Prior::make({{1.0, 0.5}, {-1.0, 0.5}}, "rademacher"); }

Prior sparse_rademacher(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidPrior("sparsity must lie in (0, 1]");
  const double amp = 1.0 / std::sqrt(rho);
  std::string name = "sparse:" + nlohmann::json(rho).dump();
  if (rho == 1.0) return Prior::make({{amp, 0.5}, {-amp, 0.5}}, std::move(name));
  return Prior::make({{amp, rho / 2}, {0.0, 1.0 - rho}, {-amp, rho / 2}}, std::move(name));
}

Prior asymmetric_binary(double p_plus) {
  if (!(p_plus > 0.0 && p_plus < 1.0)) throw InvalidPrior("asym probability must lie in (0, 1)");
  return Prior::make({{1.0, p_plus}, {-1.0, 1.0 - p_plus}},
                     "asym:" + nlohmann::json(p_plus).dump());
}

Prior uniform(int atom_count) {
  if (atom_count < 2) throw InvalidPrior("uniform prior needs at least two atoms");
  const double half_width = std::sqrt(3.0);
  const double h = 2.0 * half_width / atom_count;
  std::vector<double> xs(static_cast<std::size_t>(atom_count));
  for (int i = 0; i < atom_count; ++i) xs[static_cast<std::size_t>(i)] = -half_width + (i + 0.5) * h;
  // Symmetrize exactly so the mean is zero to rounding.
  for (int i = 0; i < atom_count / 2; ++i) {
    xs[static_cast<std::size_t>(atom_count - 1 - i)] = -xs[static_cast<std::size_t>(i)];
  }
  if (atom_count % 2 == 1) xs[static_cast<std::size_t>(atom_count / 2)] = 0.0;

  double m2 = 0.0;
  for (double x : xs) m2 += x * x;
  m2 /= atom_count;
  const double scale = 1.0 / std::sqrt(m2);

  std::vector<Atom> atoms;
  for (double x : xs) atoms.push_back({x * scale, 1.0 / atom_count});
  return Prior::make(atoms, "uniform:" + std::to_string(atom_count));
}

Prior point_mass(double c) {
  return Prior::make({{c, 1.0}}, "point:" + nlohmann::json(c).dump());
}

}  // namespace priors

std::vector<Prior> standard_priors() {
  return {priors::rademacher(), priors::sparse_rademacher(0.25), priors::asymmetric_binary(0.7),
          priors::uniform(21)};
}

Prior parse_prior(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view head = spec.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);

  if (head == "rademacher" && arg.empty()) return priors::rademacher();
  if (arg.empty()) throw InvalidPrior("unknown prior spec '" + std::string(spec) + "'");

  if (head == "sparse") return priors::sparse_rademacher(parse_double(arg, spec));
  if (head == "asym") return priors::asymmetric_binary(parse_double(arg, spec));
  if (head == "point") return priors::point_mass(parse_double(arg, spec));
  if (head == "uniform") {
    const double count = parse_double(arg, spec);
    if (count != std::floor(count) || count < 2 || count > 10000) {
      throw InvalidPrior("uniform atom count must be an integer >= 2");
    }
    return priors::uniform(static_cast<int>(count));
  }
  throw InvalidPrior("unknown prior spec '" + std::string(spec) + "'");
}

}  // namespace replica_lab
