#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>

namespace neurosym::cli {

/// Exit codes of the command-line front end.
enum Exit : int {
    kOk = 0,
    kRuntimeError = 1,  // I/O, parse, divergence and other pipeline errors
    kUsageError = 2,    // invalid flags or configuration
    kAssertFailed = 3,  // evaluate --assert threshold not met
};

/// Runs the `neurosym` command line with its subcommands: cnd, label, cluster, train,
/// predict, evaluate.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a hash.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace neurosym::cli
