#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pulsehr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Runs `pulsehr <command> [flags]`. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// Turns `key = value` lines into `--key=value` arguments. Blank lines and
/// text after '#' are ignored. Throws InvalidConfig (index = line) on a
/// line without '='.
std::vector<std::string> config_args(std::string_view text);

/// PULSEHR_SEED when set, otherwise kDefaultSeed. Throws InvalidConfig if
/// the variable is not an unsigned integer.
std::uint64_t default_seed();

} // namespace pulsehr::cli
