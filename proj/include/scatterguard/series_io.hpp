#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scatterguard/series.hpp"

namespace scatterguard::io {

struct SeriesFile {
  SampleSeries series;
  std::uint64_t bitrate_bps = 0;
  std::optional<std::uint64_t> seed;
};

struct Labels {
  std::vector<SourceLabel> sources;
  std::vector<Interval> movement_intervals;
};

// Text: `# key=value` header lines (sample_rate_hz, bitrate_bps, optional
// seed and start_time_s), then one value per line.
std::string format_series_text(const SeriesFile& file);
SeriesFile parse_series_text(const std::string& text);

// Binary: "SCGRSS01", u64 sample rate, u64 bitrate, u64 count, then
// little-endian doubles.
std::string format_series_binary(const SeriesFile& file);
SeriesFile parse_series_binary(const std::string& bytes);

// Reads either format (binary is recognised by its magic).
SeriesFile read_series(const std::string& path);
void write_series(const SeriesFile& file, const std::string& path, bool binary = false);

// Sibling labels file: same stem, ".labels" extension.
std::string labels_path(const std::string& series_path);
std::string format_labels(const Labels& labels);
Labels parse_labels(const std::string& text, std::size_t expected_len);
Labels read_labels(const std::string& path, std::size_t expected_len);
void write_labels(const Labels& labels, const std::string& path);

void write_labeled(const LabeledSeries& ls, const std::string& path, bool binary = false);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace scatterguard::io
