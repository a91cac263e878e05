#pragma once

#include "json.hpp"

#include <cstdint>
#include <string>

namespace replica_lab {

/*!
 * Outcome of a numerical inequality or identity check.
 *
 * `slack` is the raw margin, oriented so a positive value means the claim
 * holds with no tolerance at all. `allowance` is the total tolerance granted
 * (calibration constant / n plus 3 standard errors, as documented per
 * check). The check passes iff slack + allowance >= 0.
 */
struct VerificationReport {
  std::string check;
  nlohmann::json params = nlohmann::json::object();
  double slack = 0.0;
  double std_error = 0.0;
  double allowance = 0.0;
  bool pass = false;
  bool skipped = false;
  std::string note;

  void decide() { pass = skipped || slack + allowance >= 0.0; }

  nlohmann::json to_json() const {
    nlohmann::json j = {{"check", check},         {"params", params}, {"slack", slack},
                        {"stderr", std_error},  {"allowance", allowance}, {"pass", pass}};
    if (skipped) j["skipped"] = true;
    if (!note.empty()) j["note"] = note;
    return j;
  }
};

}  // namespace replica_lab
