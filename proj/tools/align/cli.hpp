#pragma once

#include <iosfwd>

namespace align::cli {

inline constexpr int k_exit_ok = 0;
inline constexpr int k_exit_data = 1;
inline constexpr int k_exit_backend = 2;
inline constexpr int k_exit_usage = 64;

/// Runs one `align` subcommand. Diagnostics go to `err`, progress lines to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace align::cli
