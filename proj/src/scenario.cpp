#include "scatterguard/scenario.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "scatterguard/error.hpp"
#include "scatterguard/series.hpp"

namespace scatterguard {

namespace {

template <typename Enum, std::size_t N>
Enum lookup(std::string_view name, const std::array<std::pair<std::string_view, Enum>, N>& table,
            const char* what) {
  for (const auto& [key, value] : table) {
    if (key == name) return value;
  }
  throw ConfigError(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

constexpr std::array<std::pair<std::string_view, AttackerKind>, 4> kAttackerNames{{
    {"none", AttackerKind::None},
    {"constant", AttackerKind::ConstantPowerActive},
    {"powerful", AttackerKind::PowerfulActive},
    {"tag", AttackerKind::TagAttacker},
}};
constexpr std::array<std::pair<std::string_view, TagPosition>, 4> kPositionNames{{
    {"chest", TagPosition::Chest},
    {"waist", TagPosition::Waist},
    {"wrist", TagPosition::Wrist},
    {"neck", TagPosition::Neck},
}};
constexpr std::array<std::pair<std::string_view, DynamicsProfile>, 3> kDynamicsNames{{
    {"static", DynamicsProfile::Static},
    {"slight", DynamicsProfile::SlightMotion},
    {"walkers", DynamicsProfile::WalkersNearby},
}};
constexpr std::array<std::pair<std::string_view, propagation::Band>, 2> kBandNames{{
    {"900", propagation::Band::MHz900},
    {"2400", propagation::Band::GHz2400},
}};

template <typename Enum, std::size_t N>
std::string name_of(Enum value, const std::array<std::pair<std::string_view, Enum>, N>& table) {
  for (const auto& [key, v] : table) {
    if (v == value) return std::string(key);
  }
  return "?";
}

}  // namespace

std::string to_string(AttackerKind kind) { return name_of(kind, kAttackerNames); }
std::string to_string(TagPosition position) { return name_of(position, kPositionNames); }
std::string to_string(DynamicsProfile profile) { return name_of(profile, kDynamicsNames); }
std::string to_string(propagation::Band band) { return name_of(band, kBandNames); }
AttackerKind attacker_kind_from_string(std::string_view name) {
  return lookup(name, kAttackerNames, "attacker kind");
}
TagPosition tag_position_from_string(std::string_view name) {
  return lookup(name, kPositionNames, "tag position");
}
DynamicsProfile dynamics_from_string(std::string_view name) {
  return lookup(name, kDynamicsNames, "dynamics profile");
}
propagation::Band band_from_string(std::string_view name) {
  if (name == "900MHz" || name == "0.9") return propagation::Band::MHz900;
  if (name == "2.4GHz" || name == "2.4") return propagation::Band::GHz2400;
  return lookup(name, kBandNames, "band");
}

const char* to_string(SourceLabel label) {
  switch (label) {
    case SourceLabel::MainOnly: return "MainOnly";
    case SourceLabel::GenuineReflect: return "GenuineReflect";
    case SourceLabel::AttackerReflect: return "AttackerReflect";
  }
  return "?";
}

SourceLabel source_label_from_string(const std::string_view& name) {
  if (name == "MainOnly") return SourceLabel::MainOnly;
  if (name == "GenuineReflect") return SourceLabel::GenuineReflect;
  if (name == "AttackerReflect") return SourceLabel::AttackerReflect;
  throw ConfigError("unknown source label '" + std::string(name) + "'");
}

void SampleSeries::validate() const {
  if (sample_rate_hz == 0) throw PreconditionError("sample rate must be positive");
  if (samples.empty()) throw PreconditionError("series is empty");
  for (double v : samples) {
    if (!std::isfinite(v)) throw PreconditionError("series contains a non-finite sample");
  }
}

void AttackerConfig::validate() const {
  if (kind == AttackerKind::None) return;
  if (!(distance_m > 0.0)) throw ConfigError("attacker distance must be positive");
  if (direction < 1 || direction > 5) throw ConfigError("attacker direction must be 1..5");
  if (kind == AttackerKind::PowerfulActive) {
    if (!(reaction_latency_s > 0.0)) throw ConfigError("reaction latency must be positive");
    if (!(monitor_threshold_db > 0.0)) throw ConfigError("monitor threshold must be positive");
    if (power_step_noise_db < 0.0) throw ConfigError("power step noise must be non-negative");
    if (!(power_update_interval_s > 0.0)) throw ConfigError("power update interval must be positive");
  }
}

void MovementScript::validate(double min_gap_s) const {
  double previous_end = -1e300;
  for (const auto& e : events) {
    if (!(e.duration_s > 0.0) || e.start_s < 0.0) throw ConfigError("malformed movement event");
    if (!(std::abs(e.delta_db) > 4.0))
      throw ConfigError("authentication movements must change the main path by more than 4 dB");
    if (e.start_s - previous_end < min_gap_s)
      throw ConfigError("movement events overlap or are not separated by a stable gap");
    previous_end = e.start_s + e.duration_s;
  }
}

double MovementScript::offset_at(double t_s) const {
  double offset = 0.0;
  for (const auto& e : events) {
    if (t_s <= e.start_s) break;
    const double progress = std::min(1.0, (t_s - e.start_s) / e.duration_s);
    offset += e.delta_db * progress;
  }
  return offset;
}

double ScenarioSpec::effective_duration_s() const {
  if (duration_s > 0.0) return duration_s;
  if (!script.events.empty()) {
    const auto& last = script.events.back();
    return last.start_s + last.duration_s + lead_s;
  }
  return 2.0 * lead_s + movement_count * movement_duration_s +
         std::max(0, movement_count - 1) * stable_gap_s;
}

void ScenarioSpec::validate() const {
  if (movement_count < 0) throw ConfigError("movement_count must be >= 0");
  if (movement_count == 0 && script.events.empty() && !(duration_s > 0.0))
    throw ConfigError("a scenario without movements needs an explicit duration");
  if (sample_rate_hz == 0) throw ConfigError("sample rate must be positive");
  if (!(backscatter.bitrate_bps > 0.0)) throw ConfigError("bitrate must be positive");
  if (!(backscatter.reflection_depth_db > 0.0)) throw ConfigError("reflection depth must be positive");
  if (static_cast<double>(sample_rate_hz) < 10.0 * backscatter.bitrate_bps)
    throw ConfigError("sample_rate/bitrate ratio below 10");
  const double samples_per_bit = static_cast<double>(sample_rate_hz) / backscatter.bitrate_bps;
  if (std::abs(samples_per_bit - std::round(samples_per_bit)) > 1e-9)
    throw ConfigError("sample rate must be an integer multiple of the bitrate");
  if (traffic_rate_pkt_s < 0.0) throw ConfigError("traffic rate must be non-negative");
  if (traffic_rate_pkt_s > 0.0) {
    if (!(packet_duration_s > 0.0)) throw ConfigError("packet duration must be positive");
    if (packet_duration_s * traffic_rate_pkt_s > 1.0 + 1e-12)
      throw ConfigError("packet duty cycle exceeds 1");
  }
  if (!(tag_angle_deg >= 0.0 && tag_angle_deg <= 180.0)) throw ConfigError("tag angle must be in [0, 180]");
  if (noise_std_db < 0.0 || ripple_db < 0.0 || tag_noise_db < 0.0)
    throw ConfigError("noise levels must be non-negative");
  if (ripple_db > 1.0) throw ConfigError("transmitter ripple is limited to 1 dB");
  if (!(movement_delta_min_db > 4.0) || movement_delta_max_db < movement_delta_min_db)
    throw ConfigError("movement deltas must exceed 4 dB");
  if (!(movement_duration_s > 0.0) || !(stable_gap_s > 0.0) || lead_s < 0.0)
    throw ConfigError("movement timing must be positive");
  if (dynamics.profile == DynamicsProfile::WalkersNearby && !(dynamics.walker_distance_m > 0.0))
    throw ConfigError("walker distance must be positive");
  attacker.validate();
  if (!script.events.empty()) {
    script.validate(0.0);
    const auto& last = script.events.back();
    if (last.start_s + last.duration_s > effective_duration_s())
      throw ConfigError("duration too short for the movement script");
  } else if (duration_s > 0.0) {
    const double needed = movement_count == 0 ? 0.0 : lead_s + movement_count * movement_duration_s +
                          std::max(0, movement_count - 1) * stable_gap_s;
    if (duration_s < needed) throw ConfigError("duration too short to hold all movements");
  }
}

}  // namespace scatterguard
