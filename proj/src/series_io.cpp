#include "scatterguard/series_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "scatterguard/error.hpp"

namespace scatterguard::io {

namespace {

constexpr char kMagic[8] = {'S', 'C', 'G', 'R', 'S', 'S', '0', '1'};
constexpr std::size_t kHeaderBytes = 32;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_full(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(in[at + i]);
  return v;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out.flush()) throw Error("write to '" + path + "' failed");
}

std::string format_series_text(const SeriesFile& file) {
  std::string out;
  out += "# sample_rate_hz=" + std::to_string(file.series.sample_rate_hz) + "\n";
  out += "# bitrate_bps=" + std::to_string(file.bitrate_bps) + "\n";
  if (file.seed) out += "# seed=" + std::to_string(*file.seed) + "\n";
  if (file.series.start_time_s != 0.0) out += "# start_time_s=" + number(file.series.start_time_s) + "\n";
  out.reserve(out.size() + file.series.samples.size() * 24);
  for (double v : file.series.samples) {
    out += number(v);
    out += '\n';
  }
  return out;
}

SeriesFile parse_series_text(const std::string& text) {
  SeriesFile f;
  bool have_rate = false, have_bitrate = false, in_header = true;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string_view line = trim(std::string_view(text).substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (!in_header) throw ParseError("header line after the first sample", line_no);
      const std::string_view kv = trim(line.substr(1));
      const auto eq = kv.find('=');
      if (eq == std::string_view::npos) throw ParseError("header line is not key=value", line_no);
      const std::string_view key = trim(kv.substr(0, eq)), value = trim(kv.substr(eq + 1));
      std::uint64_t u = 0;
      if (key == "sample_rate_hz") {
        if (!parse_full(value, u) || u == 0) throw ParseError("invalid sample_rate_hz", line_no);
        f.series.sample_rate_hz = u;
        have_rate = true;
      } else if (key == "bitrate_bps") {
        if (!parse_full(value, u) || u == 0) throw ParseError("invalid bitrate_bps", line_no);
        f.bitrate_bps = u;
        have_bitrate = true;
      } else if (key == "seed") {
        if (!parse_full(value, u)) throw ParseError("invalid seed", line_no);
        f.seed = u;
      } else if (key == "start_time_s") {
        double d = 0.0;
        if (!parse_full(value, d) || !std::isfinite(d)) throw ParseError("invalid start_time_s", line_no);
        f.series.start_time_s = d;
      } else {
        throw ParseError("unknown header key '" + std::string(key) + "'", line_no);
      }
      continue;
    }
    if (in_header) {
      if (!have_rate) throw ParseError("missing sample_rate_hz header", 1);
      if (!have_bitrate) throw ParseError("missing bitrate_bps header", 1);
      in_header = false;
    }
    double v = 0.0;
    if (!parse_full(line, v)) throw ParseError("invalid sample '" + std::string(line) + "'", line_no);
    if (!std::isfinite(v)) throw ParseError("non-finite sample", line_no);
    f.series.samples.push_back(v);
  }
  if (!have_rate) throw ParseError("missing sample_rate_hz header", 1);
  if (!have_bitrate) throw ParseError("missing bitrate_bps header", 1);
  if (f.series.samples.empty()) throw ParseError("no samples", line_no ? line_no : 1);
  return f;
}

std::string format_series_binary(const SeriesFile& file) {
  std::string out(kMagic, sizeof kMagic);
  put_u64(out, file.series.sample_rate_hz);
  put_u64(out, file.bitrate_bps);
  put_u64(out, file.series.samples.size());
  for (double v : file.series.samples) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(out, bits);
  }
  return out;
}

SeriesFile parse_series_binary(const std::string& bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw ParseError("not a binary series file", 0);
  SeriesFile f;
  f.series.sample_rate_hz = get_u64(bytes, 8);
  f.bitrate_bps = get_u64(bytes, 16);
  const std::uint64_t count = get_u64(bytes, 24);
  if (f.series.sample_rate_hz == 0 || f.bitrate_bps == 0) throw ParseError("zero rate in binary header", 0);
  if (count == 0 || (bytes.size() - kHeaderBytes) / 8 != count || (bytes.size() - kHeaderBytes) % 8 != 0)
    throw ParseError("binary sample count does not match file size", 0);
  f.series.samples.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t bits = get_u64(bytes, kHeaderBytes + 8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) throw ParseError("non-finite sample at index " + std::to_string(i), 0);
    f.series.samples[i] = v;
  }
  return f;
}

SeriesFile read_series(const std::string& path) {
  const std::string data = read_file(path);
  try {
    if (data.size() >= sizeof kMagic && std::memcmp(data.data(), kMagic, sizeof kMagic) == 0)
      return parse_series_binary(data);
    return parse_series_text(data);
  } catch (const ParseError& e) {
    throw ParseError(path, e);
  }
}

void write_series(const SeriesFile& file, const std::string& path, bool binary) {
  file.series.validate();
  write_file(path, binary ? format_series_binary(file) : format_series_text(file));
}

std::string labels_path(const std::string& series_path) {
  return std::filesystem::path(series_path).replace_extension(".labels").string();
}

std::string format_labels(const Labels& labels) {
  std::string out = "index,source,in_movement\n";
  std::size_t m = 0;
  for (std::size_t i = 0; i < labels.sources.size(); ++i) {
    while (m < labels.movement_intervals.size() && labels.movement_intervals[m].end <= i) ++m;
    const bool moving = m < labels.movement_intervals.size() && labels.movement_intervals[m].begin <= i;
    out += std::to_string(i);
    out += ',';
    out += to_string(labels.sources[i]);
    out += moving ? ",1\n" : ",0\n";
  }
  return out;
}

Labels parse_labels(const std::string& text, std::size_t expected_len) {
  Labels l;
  std::size_t line_no = 0, pos = 0;
  bool moving = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string_view line = trim(std::string_view(text).substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != "index,source,in_movement") throw ParseError("expected header index,source,in_movement", 1);
      continue;
    }
    if (line.empty()) continue;
    const auto c1 = line.find(','), c2 = line.rfind(',');
    if (c1 == std::string_view::npos || c1 == c2) throw ParseError("expected 3 fields", line_no);
    std::size_t index = 0;
    if (!parse_full(line.substr(0, c1), index) || index != l.sources.size())
      throw ParseError("index out of sequence", line_no);
    try {
      l.sources.push_back(source_label_from_string(line.substr(c1 + 1, c2 - c1 - 1)));
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
    const std::string_view flag = line.substr(c2 + 1);
    if (flag != "0" && flag != "1") throw ParseError("in_movement must be 0 or 1", line_no);
    const bool now = flag == "1";
    if (now && !moving) l.movement_intervals.push_back({index, index + 1});
    if (now) l.movement_intervals.back().end = index + 1;
    moving = now;
  }
  if (l.sources.size() != expected_len)
    throw ParseError("label count " + std::to_string(l.sources.size()) + " differs from sample count " +
                         std::to_string(expected_len),
                     line_no);
  return l;
}

Labels read_labels(const std::string& path, std::size_t expected_len) {
  try {
    return parse_labels(read_file(path), expected_len);
  } catch (const ParseError& e) {
    throw ParseError(path, e);
  }
}

void write_labels(const Labels& labels, const std::string& path) { write_file(path, format_labels(labels)); }

void write_labeled(const LabeledSeries& ls, const std::string& path, bool binary) {
  SeriesFile f{ls.series, ls.bitrate_bps, ls.seed};
  write_series(f, path, binary);
  write_labels({ls.source_labels, ls.movement_intervals}, labels_path(path));
}

}  // namespace scatterguard::io
