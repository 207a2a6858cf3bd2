#ifndef VFSM_CLI_COMMANDS_HPP
#define VFSM_CLI_COMMANDS_HPP

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "vfsm/bbvfgp.hpp"

namespace vfsm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInput = 2;

/// Parses "builtin:<name>" or "exec:<command>" into a memoizing oracle.
std::shared_ptr<LowFidelityOracle> make_oracle(const std::string& spec, std::uint64_t seed);

/// Entry point of the vfsm tool; returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vfsm::cli

#endif  // VFSM_CLI_COMMANDS_HPP
