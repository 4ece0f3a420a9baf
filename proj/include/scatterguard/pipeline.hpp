#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "scatterguard/series.hpp"

namespace scatterguard {

struct PipelineParams {
  std::size_t smooth_window = 50;
  double w_coeff = 1.2;
  double slope_threshold_db = 10.0;      // on the trace slope, dB/s
  double state_diff_threshold_db = 4.0;
  double variance_threshold_db = 2.5;    // on sqrt(Var)
  double auth_threshold_db = 4.5;
  std::size_t min_stable_intervals = 3;
  std::size_t trace_window = 0;          // samples; 0 = one bit interval

  double drift_window_factor = 50.0;
  double drift_threshold_db_per_s = 0.5;
  std::size_t context_bits = 8;
  double separability_factor = 5.0;
  double min_separable_fraction = 0.5;
  double gate_drop_db = 45.0;
  std::size_t segment_limit_samples = 0;  // 0 = whole stable segments

  void validate() const;
};

struct BackscatterStream {
  std::uint64_t sample_rate_hz = 0;
  std::size_t samples_per_bit = 0;
  std::vector<double> reflection_power;  // dB, one per bit interval
  std::vector<std::uint8_t> decoded_bits;
  std::vector<std::size_t> bit_boundaries;  // start sample of each bit, plus the end
  std::vector<std::uint8_t> separable;  // bit context shows two distinct levels
  std::vector<double> high_db;  // local reflecting / idle levels
  std::vector<double> low_db;
  // original sample index of each analysed sample; empty when nothing was gated
  std::vector<std::size_t> positions;
};

struct Extraction {
  BackscatterStream stream;
  SampleSeries residual;
};

struct MainPathTrace {
  std::vector<double> values;
  std::size_t window = 0;
};

struct SlopeSeries {
  std::size_t n = 0;                   // N, in trace points
  double trace_rate_hz = 0.0;          // trace points per second
  std::vector<double> raw;             // |S2 - S1| / N^2
  std::vector<double> window_mean_diff;  // raw * N, dB
  std::vector<double> db_per_s;          // raw * trace rate
  std::vector<double> normalized;        // min-max of raw
  std::vector<double> trace;             // trace the slopes came from
};

enum class StateKind { Stable, Varying };

struct StateMark {
  StateKind kind = StateKind::Stable;
  Interval interval;  // trace coordinates
  double mean_db = 0.0;
};

struct MovementTriple {
  StateMark pre, varying, post;
};

struct SegmentGroup {
  Interval pre_bits, post_bits;
  Interval pre, movement, post;  // original sample coordinates
  std::vector<double> pre_values, post_values;
  double pre_mean_db = 0.0, post_mean_db = 0.0;
  double pre_var = 0.0, post_var = 0.0;            // dB^2
  double pre_var_norm = 0.0, post_var_norm = 0.0;  // min-max across the run
};

struct Variance {
  double raw = 0.0;
  double normalized = 0.0;
};

enum class SegmentClass { Slow, Fast };
enum class GroupVerdict { OnBody, Attacker, PowerfulAttacker };
enum class FinalVerdict { OnBody, Attacker, Inconclusive };

const char* to_string(GroupVerdict v);
const char* to_string(FinalVerdict v);

struct Verdict {
  std::vector<SegmentGroup> groups;
  std::vector<GroupVerdict> per_group;
  FinalVerdict final = FinalVerdict::Inconclusive;
  std::size_t groups_used = 0;
  std::vector<std::string> diagnostics;
};

// Everything authenticate() derives from a series, kept so grouping can be
// redone cheaply with different segment limits.
struct Analysis {
  std::uint64_t sample_rate_hz = 0;
  std::uint64_t bitrate_bps = 0;
  bool backscatter_found = false;
  Extraction extraction;
  MainPathTrace trace;
  SlopeSeries slopes;
  std::vector<StateMark> states;
  std::vector<MovementTriple> triples;
  std::vector<std::string> diagnostics;
};

// Centered moving average; edges use the part of the window inside the series.
std::vector<double> moving_average(const std::vector<double>& x, std::size_t window);
// Least-squares linear trend, dB/s.
double estimate_drift(const SampleSeries& series);

SampleSeries smooth(const SampleSeries& series, const PipelineParams& params);

// `levels` supplies the H/L levels and residual (defaults to `smoothed`);
// `smoothed` drives the bit decisions.
Extraction extract_backscatter(const SampleSeries& smoothed, std::uint64_t bitrate_bps,
                               const PipelineParams& params,
                               const SampleSeries* levels = nullptr);

MainPathTrace extract_trace(const SampleSeries& residual, std::size_t trace_window);
// Trace over real time for a gated residual: residual[i] sits at original sample
// positions[i]; windows holding no samples are interpolated from their neighbours.
MainPathTrace extract_trace(const SampleSeries& residual, std::size_t trace_window,
                            const std::vector<std::size_t>& positions, std::size_t original_length);

SlopeSeries slopes(const MainPathTrace& trace, const PipelineParams& params,
                   std::uint64_t sample_rate_hz, std::uint64_t bitrate_bps);

std::vector<StateMark> detect_states(const SlopeSeries& slope_series, const PipelineParams& params);

std::vector<MovementTriple> select_movement_states(const std::vector<StateMark>& states,
                                                   const MainPathTrace& trace,
                                                   const PipelineParams& params);

std::vector<SegmentGroup> segment_and_group(const BackscatterStream& bs,
                                            const std::vector<MovementTriple>& triples,
                                            std::size_t trace_window, const PipelineParams& params,
                                            std::vector<std::string>* diagnostics = nullptr);

// Literal variance: sum(|x| - mean|x|)^2 / N. `normalized` is the variance of
// the min-max normalized segment.
Variance segment_variance(const std::vector<double>& segment);

struct SegmentClasses {
  SegmentClass pre = SegmentClass::Slow;
  SegmentClass post = SegmentClass::Slow;
  bool powerful() const { return pre == SegmentClass::Fast || post == SegmentClass::Fast; }
};
SegmentClasses classify_powerful(const SegmentGroup& group, const PipelineParams& params);
GroupVerdict authenticate_group(const SegmentGroup& group, const PipelineParams& params);
FinalVerdict majority_vote(const std::vector<GroupVerdict>& votes);

Analysis analyze(const SampleSeries& series, std::uint64_t bitrate_bps, const PipelineParams& params);
// Groups and votes an analysis.
Verdict regroup(const Analysis& analysis, const PipelineParams& params);
Verdict authenticate(const SampleSeries& series, std::uint64_t bitrate_bps,
                     const PipelineParams& params);

}  // namespace scatterguard
