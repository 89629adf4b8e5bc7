#pragma once

#include <iosfwd>

namespace vdd::cli
{

// Exit codes of every command.
inline constexpr int exit_ok = 0;
inline constexpr int exit_io = 1;      // I/O and usage errors
inline constexpr int exit_invalid = 2; // parse, frame and type errors
inline constexpr int exit_unsound = 3; // invariant violations
inline constexpr int exit_failed = 4;  // some obligation FAILs

int run_cli( int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in );

} // namespace vdd::cli
