#pragma once

#include <atomic>
#include <iosfwd>
#include <string>
#include <vector>

namespace forge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Set by SIGINT/SIGTERM; running stages stop taking work and flush their checkpoint.
std::atomic<bool>& interrupt_flag();
void install_signal_handlers();

/// Dispatches `forge <subcommand> ...`. args[0] is the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace forge::cli
