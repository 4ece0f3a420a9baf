#include "scatterguard/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "scatterguard/error.hpp"
#include "scatterguard/random.hpp"
#include "scatterguard/synth.hpp"

namespace scatterguard {

namespace {

constexpr const char* kReportHeader =
    "axis,value,n_trials,genuine_trials,attacker_trials,tp_segments,genuine_segments,fp_segments,"
    "attacker_segments,tp_rate,fp_rate,vote_tp_rate,vote_fp_rate,mean_groups_per_trial,"
    "latency_samples_used";

double parse_number(const std::string& text, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v))
    throw ConfigError(std::string("invalid ") + what + " value '" + text + "'");
  return v;
}

unsigned thread_count(unsigned requested, std::size_t jobs) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, 8);
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

// Runs every trial once and scores it under each parameter variant (the
// variants may only differ in grouping settings). Results are in trial order
// regardless of scheduling.
std::vector<std::vector<TrialOutcome>> evaluate(const ScenarioSpec& spec,
                                                const std::vector<PipelineParams>& variants,
                                                std::size_t n_trials, std::uint64_t master_seed,
                                                unsigned threads) {
  spec.validate();
  if (spec.movement_count < 1 && spec.script.events.empty())
    throw ConfigError("trials need at least one authentication movement");
  for (const auto& p : variants) p.validate();
  std::vector<std::vector<TrialOutcome>> out(variants.size(), std::vector<TrialOutcome>(n_trials));
  std::vector<std::exception_ptr> errors(n_trials);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n_trials; i = next++) {
      try {
        const LabeledSeries truth = synth::synthesize(spec, derive_seed(master_seed, i));
        const Analysis analysis = analyze(truth.series, truth.bitrate_bps, variants.front());
        for (std::size_t v = 0; v < variants.size(); ++v)
          out[v][i] = score_trial(truth, regroup(analysis, variants[v]));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads = thread_count(threads, n_trials);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string format_rate(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::AttackerDistance: return "distance";
    case SweepAxis::AttackerDirection: return "direction";
    case SweepAxis::MovementCount: return "movements";
    case SweepAxis::BodyDynamics: return "dynamics";
    case SweepAxis::TagPosition: return "position";
    case SweepAxis::Band: return "band";
    case SweepAxis::TrafficRate: return "traffic";
    case SweepAxis::TagAngle: return "angle";
    case SweepAxis::LatencySamples: return "latency";
  }
  return "?";
}

SweepAxis sweep_axis_from_string(std::string_view name) {
  static const std::pair<const char*, SweepAxis> kNames[] = {
      {"distance", SweepAxis::AttackerDistance},   {"AttackerDistance", SweepAxis::AttackerDistance},
      {"direction", SweepAxis::AttackerDirection}, {"AttackerDirection", SweepAxis::AttackerDirection},
      {"movements", SweepAxis::MovementCount},     {"MovementCount", SweepAxis::MovementCount},
      {"dynamics", SweepAxis::BodyDynamics},       {"BodyDynamics", SweepAxis::BodyDynamics},
      {"position", SweepAxis::TagPosition},        {"TagPosition", SweepAxis::TagPosition},
      {"band", SweepAxis::Band},                   {"Band", SweepAxis::Band},
      {"traffic", SweepAxis::TrafficRate},         {"TrafficRate", SweepAxis::TrafficRate},
      {"angle", SweepAxis::TagAngle},              {"TagAngle", SweepAxis::TagAngle},
      {"latency", SweepAxis::LatencySamples},      {"LatencySamples", SweepAxis::LatencySamples},
  };
  for (const auto& [n, axis] : kNames)
    if (name == n) return axis;
  throw ConfigError("unknown sweep axis '" + std::string(name) + "'");
}

TrialOutcome score_trial(const LabeledSeries& truth, const Verdict& verdict) {
  TrialOutcome t;
  t.genuine = truth.genuine;
  t.groups = verdict.groups.size();
  t.final = verdict.final;
  std::vector<std::uint8_t> used(verdict.groups.size(), 0);
  for (const auto& movement : truth.movement_intervals) {
    ++t.segments;
    for (std::size_t g = 0; g < verdict.groups.size(); ++g) {
      if (used[g] || !verdict.groups[g].movement.overlaps(movement)) continue;
      used[g] = 1;
      if (verdict.per_group[g] == GroupVerdict::OnBody) ++t.onbody_segments;
      break;
    }
  }
  for (std::size_t g = 0; g < verdict.groups.size(); ++g) {
    if (used[g]) continue;
    ++t.segments;
    if (verdict.per_group[g] == GroupVerdict::OnBody) ++t.onbody_segments;
  }
  return t;
}

MetricsReport summarize(const std::vector<TrialOutcome>& outcomes) {
  MetricsReport r;
  r.n_trials = outcomes.size();
  std::size_t genuine_votes = 0, attacker_votes = 0, groups = 0;
  for (const auto& t : outcomes) {
    groups += t.groups;
    const bool accepted = t.final == FinalVerdict::OnBody;
    if (t.genuine) {
      ++r.genuine_trials;
      r.tp_segments += t.onbody_segments;
      r.genuine_segments += t.segments;
      genuine_votes += accepted;
    } else {
      ++r.attacker_trials;
      r.fp_segments += t.onbody_segments;
      r.attacker_segments += t.segments;
      attacker_votes += accepted;
    }
  }
  auto ratio = [](std::size_t a, std::size_t b) -> std::optional<double> {
    if (b == 0) return std::nullopt;
    return static_cast<double>(a) / static_cast<double>(b);
  };
  r.tp_rate = ratio(r.tp_segments, r.genuine_segments);
  r.fp_rate = ratio(r.fp_segments, r.attacker_segments);
  r.vote_tp_rate = ratio(genuine_votes, r.genuine_trials);
  r.vote_fp_rate = ratio(attacker_votes, r.attacker_trials);
  r.mean_groups_per_trial =
      r.n_trials ? static_cast<double>(groups) / static_cast<double>(r.n_trials) : 0.0;
  return r;
}

MetricsReport run_trials(const ScenarioSpec& spec_template, std::size_t n_trials,
                         std::uint64_t master_seed, const HarnessOptions& options) {
  if (n_trials < 1) throw PreconditionError("n_trials must be >= 1");
  auto outcomes = evaluate(spec_template, {options.params}, n_trials, master_seed, options.threads);
  MetricsReport r = summarize(outcomes.front());
  r.latency_samples_used = options.params.segment_limit_samples;
  return r;
}

void apply_axis(ScenarioSpec& spec, PipelineParams& params, SweepAxis axis, const std::string& value) {
  const bool genuine = spec.attacker.kind == AttackerKind::None;
  switch (axis) {
    case SweepAxis::AttackerDistance:
      if (genuine) throw ConfigError("distance axis needs an attacker scenario");
      spec.attacker.distance_m = parse_number(value, "distance");
      break;
    case SweepAxis::AttackerDirection: {
      if (genuine) throw ConfigError("direction axis needs an attacker scenario");
      const double d = parse_number(value, "direction");
      if (d != std::floor(d)) throw ConfigError("direction must be an integer 1..5");
      spec.attacker.direction = static_cast<int>(d);
      break;
    }
    case SweepAxis::MovementCount: {
      const double m = parse_number(value, "movement count");
      if (m != std::floor(m) || m < 1) throw ConfigError("movement count must be a positive integer");
      spec.movement_count = static_cast<int>(m);
      break;
    }
    case SweepAxis::BodyDynamics: {
      const auto colon = value.find(':');
      spec.dynamics.profile = dynamics_from_string(value.substr(0, colon));
      if (colon != std::string::npos)
        spec.dynamics.walker_distance_m = parse_number(value.substr(colon + 1), "walker distance");
      break;
    }
    case SweepAxis::TagPosition:
      if (!genuine) throw ConfigError("tag position axis needs a genuine-tag scenario");
      spec.tag_position = tag_position_from_string(value);
      break;
    case SweepAxis::Band:
      spec.band = band_from_string(value);
      break;
    case SweepAxis::TrafficRate:
      spec.traffic_rate_pkt_s = parse_number(value, "traffic rate");
      break;
    case SweepAxis::TagAngle:
      if (!genuine) throw ConfigError("tag angle axis needs a genuine-tag scenario");
      spec.tag_angle_deg = parse_number(value, "tag angle");
      break;
    case SweepAxis::LatencySamples: {
      const double s = parse_number(value, "latency samples");
      if (s != std::floor(s) || s < 1) throw ConfigError("latency samples must be a positive integer");
      params.segment_limit_samples = static_cast<std::size_t>(s);
      break;
    }
  }
  spec.validate();
  params.validate();
}

std::vector<std::pair<std::string, MetricsReport>> sweep(const ScenarioSpec& spec_template, SweepAxis axis,
                                                         const std::vector<std::string>& values,
                                                         std::size_t n_trials, std::uint64_t master_seed,
                                                         const HarnessOptions& options) {
  if (values.empty()) throw PreconditionError("sweep needs at least one value");
  if (n_trials < 1) throw PreconditionError("n_trials must be >= 1");
  std::vector<ScenarioSpec> specs;
  std::vector<PipelineParams> params;
  for (const auto& v : values) {
    ScenarioSpec s = spec_template;
    PipelineParams p = options.params;
    apply_axis(s, p, axis, v);
    specs.push_back(s);
    params.push_back(p);
  }

  std::vector<std::pair<std::string, MetricsReport>> out;
  auto label = [&](MetricsReport r, std::size_t i) {
    r.axis = to_string(axis);
    r.value = values[i];
    r.latency_samples_used = params[i].segment_limit_samples;
    out.emplace_back(values[i], std::move(r));
  };
  if (axis == SweepAxis::LatencySamples) {
    // Only grouping changes, so each trial is analysed once.
    auto outcomes = evaluate(spec_template, params, n_trials, master_seed, options.threads);
    for (std::size_t i = 0; i < values.size(); ++i) label(summarize(outcomes[i]), i);
    return out;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    HarnessOptions o = options;
    o.params = params[i];
    label(run_trials(specs[i], n_trials, master_seed, o), i);
  }
  return out;
}

std::vector<std::pair<double, MetricsReport>> latency_study(const ScenarioSpec& spec,
                                                            const std::vector<double>& segment_lengths_ms,
                                                            std::size_t n_trials, std::uint64_t master_seed,
                                                            const HarnessOptions& options) {
  if (segment_lengths_ms.empty()) throw PreconditionError("latency study needs at least one length");
  if (n_trials < 1) throw PreconditionError("n_trials must be >= 1");
  const double bit_ms = 1e3 / spec.backscatter.bitrate_bps;
  std::vector<PipelineParams> variants;
  for (double ms : segment_lengths_ms) {
    if (!(ms > 0.0) || !std::isfinite(ms)) throw PreconditionError("segment lengths must be positive");
    if (ms + 1e-9 < bit_ms) throw PreconditionError("segment length shorter than one bit interval");
    PipelineParams p = options.params;
    p.segment_limit_samples =
        static_cast<std::size_t>(std::llround(ms * 1e-3 * static_cast<double>(spec.sample_rate_hz)));
    variants.push_back(p);
  }
  auto outcomes = evaluate(spec, variants, n_trials, master_seed, options.threads);
  std::vector<std::pair<double, MetricsReport>> out;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    MetricsReport r = summarize(outcomes[i]);
    r.axis = "latency_ms";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", segment_lengths_ms[i]);
    r.value = buf;
    r.latency_samples_used = variants[i].segment_limit_samples;
    out.emplace_back(segment_lengths_ms[i], std::move(r));
  }
  return out;
}

std::string format_report_csv(const std::vector<MetricsReport>& reports) {
  std::string out = std::string(kReportHeader) + "\n";
  char buf[64];
  for (const auto& r : reports) {
    out += r.axis + "," + r.value + ",";
    out += std::to_string(r.n_trials) + "," + std::to_string(r.genuine_trials) + "," +
           std::to_string(r.attacker_trials) + "," + std::to_string(r.tp_segments) + "," +
           std::to_string(r.genuine_segments) + "," + std::to_string(r.fp_segments) + "," +
           std::to_string(r.attacker_segments) + ",";
    out += format_rate(r.tp_rate) + "," + format_rate(r.fp_rate) + "," + format_rate(r.vote_tp_rate) + "," +
           format_rate(r.vote_fp_rate) + ",";
    std::snprintf(buf, sizeof buf, "%.17g", r.mean_groups_per_trial);
    out += std::string(buf) + "," + std::to_string(r.latency_samples_used) + "\n";
  }
  return out;
}

void export_report(const std::vector<MetricsReport>& reports, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << format_report_csv(reports);
  if (!out.flush()) throw Error("write to '" + path + "' failed");
}

std::vector<MetricsReport> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<MetricsReport> out;
  auto count = [&](const std::string& s) -> std::size_t {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size()) throw ParseError("invalid count '" + s + "'", line_no);
    return static_cast<std::size_t>(v);
  };
  auto rate = [&](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw ParseError("invalid number '" + s + "'", line_no);
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kReportHeader) throw ParseError("unexpected report header", line_no);
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 15) throw ParseError("expected 15 fields, got " + std::to_string(f.size()), line_no);
    MetricsReport r;
    r.axis = f[0];
    r.value = f[1];
    r.n_trials = count(f[2]);
    r.genuine_trials = count(f[3]);
    r.attacker_trials = count(f[4]);
    r.tp_segments = count(f[5]);
    r.genuine_segments = count(f[6]);
    r.fp_segments = count(f[7]);
    r.attacker_segments = count(f[8]);
    r.tp_rate = rate(f[9]);
    r.fp_rate = rate(f[10]);
    r.vote_tp_rate = rate(f[11]);
    r.vote_fp_rate = rate(f[12]);
    const auto mg = rate(f[13]);
    if (!mg) throw ParseError("missing mean_groups_per_trial", line_no);
    r.mean_groups_per_trial = *mg;
    r.latency_samples_used = count(f[14]);
    out.push_back(std::move(r));
  }
  if (line_no == 0) throw ParseError("empty report", 1);
  return out;
}

std::vector<MetricsReport> read_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_report_csv(ss.str());
}

}  // namespace scatterguard
