#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace CLI {
class App;
}

namespace hiercls::cli {

// Flat key=value run configuration. Keys are long flag names without the
// leading dashes; '_' and '-' are interchangeable.
struct RunConfig {
  std::vector<std::pair<std::string, std::string>> entries;
};

// '#' starts a comment line. Throws ParseError on malformed or repeated keys.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::string& path);

// Command-line arguments equivalent to the configuration for one subcommand.
// Throws ValidationError naming the first key the subcommand does not know.
std::vector<std::string> config_arguments(const RunConfig& cfg, const CLI::App& sub);

// Value of --config in argv after the subcommand at argv[1], if any.
std::string find_config_path(int argc, const char* const* argv);

}  // namespace hiercls::cli
