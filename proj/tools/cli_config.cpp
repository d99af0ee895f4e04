#include "cli_config.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "hiercls/errors.hpp"

namespace hiercls::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string_view k) {
  std::string out(k);
  for (char& c : out)
    if (c == '_') c = '-';
  return out;
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
    const auto key = normalize_key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (key == "config") throw ParseError(line_no, "configuration files cannot include other files");
    if (!seen.insert(key).second) throw ParseError(line_no, "key '" + key + "' given twice");
    cfg.entries.emplace_back(key, std::string(value));
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::vector<std::string> config_arguments(const RunConfig& cfg, const CLI::App& sub) {
  std::vector<std::string> args;
  for (const auto& [key, value] : cfg.entries) {
    if (sub.get_option_no_throw("--" + key) == nullptr)
      throw ValidationError("unknown config key '" + key + "' for " + sub.get_name());
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

std::string find_config_path(int argc, const char* const* argv) {
  for (int i = 2; i < argc; ++i) {
    const std::string_view a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.starts_with("--config=")) return std::string(a.substr(9));
  }
  return {};
}

}  // namespace hiercls::cli
