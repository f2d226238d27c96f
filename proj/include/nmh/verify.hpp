// Numerical verification reports: each check runs a pinned experiment and
// returns pass/fail lines with the evidence behind them.  The acceptance
// test binary and the `nmh verify` command share these implementations.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nmh {

struct VerifyCheck {
  bool pass = false;
  std::string text;
};

struct VerifyReport {
  std::string id;
  std::string title;
  bool pass = false;
  std::vector<VerifyCheck> checks;
  nlohmann::json data;

  std::string summary() const;
  nlohmann::json to_json() const;
};

struct VerifyOptions {
  std::uint64_t seed = 7;
};

std::vector<std::string> verify_ids();
bool is_verify_id(const std::string& id);
VerifyReport run_verify(const std::string& id, const VerifyOptions& options = {});

}  // namespace nmh
