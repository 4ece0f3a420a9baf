#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "scatterguard/propagation.hpp"

namespace scatterguard {

enum class AttackerKind { None, ConstantPowerActive, PowerfulActive, TagAttacker };
enum class TagPosition { Chest, Waist, Wrist, Neck };
enum class DynamicsProfile { Static, SlightMotion, WalkersNearby };

struct AttackerConfig {
  AttackerKind kind = AttackerKind::None;
  double distance_m = 1.0;
  int direction = 1;  // placement 1 (line of sight) .. 5
  double reaction_latency_s = 0.05;
  double monitor_threshold_db = 4.0;
  double power_step_noise_db = 5.0;
  double power_update_interval_s = 0.02;  // PowerfulActive control tick

  void validate() const;
};

struct BackscatterConfig {
  double bitrate_bps = 1.0e4;
  double reflection_depth_db = 2.0;
  std::uint64_t bit_seed = 0x5eed;
  bool correlated_with_main = true;
  // Cycled instead of the PRBS when non-empty.
  std::vector<std::uint8_t> fixed_bits;
};

struct Dynamics {
  DynamicsProfile profile = DynamicsProfile::Static;
  double walker_distance_m = 1.0;
};

struct MovementEvent {
  double start_s = 0.0;
  double duration_s = 0.0;
  double delta_db = 0.0;
};

struct MovementScript {
  std::vector<MovementEvent> events;

  // Time-ordered, non-overlapping, |delta| > 4 dB, gaps >= min_gap_s.
  void validate(double min_gap_s) const;
  // Cumulative main-path offset (dB) at time t.
  double offset_at(double t_s) const;
};

// One simulated experiment.
struct ScenarioSpec {
  propagation::Band band = propagation::Band::MHz900;
  TagPosition tag_position = TagPosition::Chest;
  AttackerConfig attacker;
  Dynamics dynamics;
  int movement_count = 3;
  double traffic_rate_pkt_s = 0.0;  // 0 = continuous
  double packet_duration_s = 0.002;
  double tag_angle_deg = 0.0;
  double duration_s = 0.0;  // 0 = just long enough for the movements
  std::uint64_t seed = 1;

  std::uint64_t sample_rate_hz = 1000000;
  BackscatterConfig backscatter;
  double noise_std_db = 0.5;
  double ripple_db = 0.3;
  double tag_noise_db = 0.5;
  double drift_db_per_s = 0.0;

  double movement_delta_min_db = 5.0;
  double movement_delta_max_db = 8.0;
  double movement_duration_s = 0.1;
  double stable_gap_s = 0.25;
  double lead_s = 0.2;
  // Explicit script; generated from the fields above when empty.
  MovementScript script;

  double effective_duration_s() const;
  void validate() const;
};

std::string to_string(AttackerKind kind);
std::string to_string(TagPosition position);
std::string to_string(DynamicsProfile profile);
std::string to_string(propagation::Band band);
AttackerKind attacker_kind_from_string(std::string_view name);
TagPosition tag_position_from_string(std::string_view name);
DynamicsProfile dynamics_from_string(std::string_view name);
propagation::Band band_from_string(std::string_view name);

}  // namespace scatterguard
