#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

// Subcommands of the collision-gauge tool. Each takes a parsed config, writes
// its files below `out_dir` and returns a JSON report.
namespace cgauge::commands {

struct Context {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed; ///< overrides run.seed
  std::string config_hash;
};

nlohmann::json spectrum(const nlohmann::json& cfg, const Context& ctx);
nlohmann::json snr(const nlohmann::json& cfg, const Context& ctx);
nlohmann::json simulate_detect(const nlohmann::json& cfg, const Context& ctx);
nlohmann::json infer(const nlohmann::json& cfg, const Context& ctx);

enum ExitCode : int {
  ok = 0,
  usage_error = 1,
  config_error = 2,
  numeric_error = 3,
  io_error = 4,
};

/// Loads the config, runs `command` and maps failures to exit codes, writing
/// messages to `err`. The report is printed to `out`.
int run(const std::string& command, const std::filesystem::path& config_path,
        const Context& ctx, std::ostream& out, std::ostream& err);

} // namespace cgauge::commands
