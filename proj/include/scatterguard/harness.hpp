#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scatterguard/pipeline.hpp"
#include "scatterguard/scenario.hpp"

namespace scatterguard {

enum class SweepAxis {
  AttackerDistance,
  AttackerDirection,
  MovementCount,
  BodyDynamics,
  TagPosition,
  Band,
  TrafficRate,
  TagAngle,
  LatencySamples,
};

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(std::string_view name);

struct TrialOutcome {
  bool genuine = true;
  std::size_t segments = 0;          // injected movements + unmatched groups
  std::size_t onbody_segments = 0;
  std::size_t groups = 0;
  FinalVerdict final = FinalVerdict::Inconclusive;
};

struct MetricsReport {
  std::string axis;   // empty for a plain run
  std::string value;
  std::size_t n_trials = 0;
  std::size_t genuine_trials = 0;
  std::size_t attacker_trials = 0;
  std::size_t tp_segments = 0, genuine_segments = 0;
  std::size_t fp_segments = 0, attacker_segments = 0;
  std::optional<double> tp_rate, fp_rate;            // per segment
  std::optional<double> vote_tp_rate, vote_fp_rate;  // per trial, majority vote
  double mean_groups_per_trial = 0.0;
  std::size_t latency_samples_used = 0;  // 0 = untruncated

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

struct HarnessOptions {
  PipelineParams params;
  unsigned threads = 0;  // 0 = hardware concurrency
};

TrialOutcome score_trial(const LabeledSeries& truth, const Verdict& verdict);
MetricsReport summarize(const std::vector<TrialOutcome>& outcomes);

// Population follows the template: no attacker -> genuine-tag trials,
// otherwise attacker trials. Trial i uses derive_seed(master_seed, i).
MetricsReport run_trials(const ScenarioSpec& spec_template, std::size_t n_trials,
                         std::uint64_t master_seed, const HarnessOptions& options = {});

// Substitutes `value` for the axis field; throws ConfigError on a bad value
// or an axis that does not apply to the template.
void apply_axis(ScenarioSpec& spec, PipelineParams& params, SweepAxis axis, const std::string& value);

std::vector<std::pair<std::string, MetricsReport>> sweep(const ScenarioSpec& spec_template, SweepAxis axis,
                                                         const std::vector<std::string>& values,
                                                         std::size_t n_trials, std::uint64_t master_seed,
                                                         const HarnessOptions& options = {});

// Truncates stable segments to each length before grouping; every trial is
// synthesized and analysed once.
std::vector<std::pair<double, MetricsReport>> latency_study(const ScenarioSpec& spec,
                                                            const std::vector<double>& segment_lengths_ms,
                                                            std::size_t n_trials, std::uint64_t master_seed,
                                                            const HarnessOptions& options = {});

std::string format_report_csv(const std::vector<MetricsReport>& reports);
void export_report(const std::vector<MetricsReport>& reports, const std::string& path);
std::vector<MetricsReport> parse_report_csv(const std::string& text);
std::vector<MetricsReport> read_report(const std::string& path);

}  // namespace scatterguard
