#pragma once

#include <cstdint>
#include <iosfwd>

#include "config.hpp"

namespace geoldp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitSparsity = 2;
inline constexpr int kExitUnderResolved = 3;
inline constexpr int kExitCheckFailed = 4;

int cmd_simulate(const Config& config, std::ostream& log);
int cmd_rate(const Config& config, std::ostream& log);
int cmd_persistence(const Config& config, std::ostream& log);

struct ValidateOptions {
  std::uint64_t seed = 1;
  bool inject_isolation_fault = false;
};
int cmd_validate(const ValidateOptions& options, std::ostream& log);

}  // namespace geoldp::cli
