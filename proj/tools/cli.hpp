#pragma once

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace replica_lab::cli {

inline constexpr std::uint64_t kDefaultSeed = 20170301;
inline constexpr const char* kSeedEnv = "REPLICA_LAB_SEED";

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsageError = 2,
  kRuntimeError = 3,
};

struct RunConfig {
  std::string command;
  std::string prior = "rademacher";
  std::string lambda_spec;
  std::vector<double> lambdas;
  std::string n_spec;
  std::vector<int> ns;
  std::string m_spec;
  std::vector<double> ms;
  double eps = 0.25;
  std::optional<double> q;
  int n_disorder = 0;
  std::uint64_t seed = kDefaultSeed;
  std::string seed_source = "default";
  int nodes = 61;
  std::uint64_t budget = 1ULL << 20;
  std::string out;
  std::string format = "csv";
  bool plot = false;

  nlohmann::json to_json() const;
};

/*!
 * "a:b:h" expands to a, a+h, ... up to b inclusive when b lies within h/2 of
 * a grid point; "x" is a single value; items may be comma-separated.
 */
std::vector<double> parse_range(const std::string& spec);

std::vector<int> parse_int_list(const std::string& spec);

/// Parses argv-style arguments (without the program name) and runs.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace replica_lab::cli
