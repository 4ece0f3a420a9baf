#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace scatterguard {

// Uniformly sampled RSS values in dB.
struct SampleSeries {
  std::uint64_t sample_rate_hz = 0;
  std::vector<double> samples;
  double start_time_s = 0.0;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }

  // Throws PreconditionError on a zero rate, empty series or non-finite sample.
  void validate() const;
};

enum class SourceLabel : std::uint8_t { MainOnly, GenuineReflect, AttackerReflect };

const char* to_string(SourceLabel label);
SourceLabel source_label_from_string(const std::string_view& name);

// Half-open sample interval [begin, end).
struct Interval {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - begin; }
  bool overlaps(const Interval& other) const noexcept {
    return begin < other.end && other.begin < end;
  }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct ScenarioSpec;

struct LabeledSeries {
  SampleSeries series;
  std::uint64_t bitrate_bps = 0;
  std::uint64_t seed = 0;
  std::vector<SourceLabel> source_labels;
  std::vector<Interval> movement_intervals;

  // Ground truth per transmitted bit slot, in on-air order: the bit value and
  // main-path and reflected-path levels at the slot centre.
  std::vector<std::uint8_t> bits;
  std::vector<double> bit_main_db;
  std::vector<double> bit_reflect_db;

  bool genuine = true;
};

}  // namespace scatterguard
