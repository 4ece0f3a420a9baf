#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scatterguard/pipeline.hpp"
#include "scatterguard/scenario.hpp"

namespace scatterguard::cli {

// Exit codes.
inline constexpr int kExitOnBody = 0;
inline constexpr int kExitAttacker = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitData = 65;
inline constexpr int kExitFailure = 70;

enum class OutputFormat { Human, Csv };

struct RunConfig {
  std::string command;  // synth | auth | sweep | latency | report
  ScenarioSpec scenario;
  PipelineParams params;
  std::string in, out;
  std::uint64_t seed = 1;
  std::size_t trials = 100;
  std::string axis;
  std::vector<std::string> values;
  OutputFormat format = OutputFormat::Human;
  bool binary = false;
  unsigned threads = 0;
};

// Thrown for anything the user got wrong on the command line or in --config.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flags override --config values, which override defaults. `env_seed` is the
// SCATTERGUARD_SEED fallback. Returns nullopt after printing --help.
std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::ostream& out,
                                    const char* env_seed = nullptr);

std::string emit_verdict(const Verdict& verdict, OutputFormat format);
int exit_code(FinalVerdict verdict);

// Executes a parsed command; returns the process exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// argv-level entry point used by the executable.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scatterguard::cli
