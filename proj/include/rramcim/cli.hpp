#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace rramcim::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

struct Key {
  std::string name;
  std::string default_value;
  std::string help;
};

/// Every configurable key with its built-in default. Flags use the same
/// names with '-' for '_' (--horizon-min sets horizon_min).
const std::vector<Key>& keys();

using Settings = std::map<std::string, std::string>;

/// key=value lines; '#' starts a comment. Unknown keys are usage errors.
Settings parse_config(const std::string& text);

/// Defaults, overlaid by the config file, overlaid by flags.
Settings layer(const Settings& file, const Settings& flags);

/// Digest of every setting that can change results (not out/threads).
std::string config_hash(const Settings& settings);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rramcim::cli
