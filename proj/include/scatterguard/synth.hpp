#pragma once

#include <cstdint>
#include <vector>

#include "scatterguard/scenario.hpp"
#include "scatterguard/series.hpp"

namespace scatterguard::synth {

/// Main-path reference level (dB) for the scenario's band with no movement.
double main_reference_db(const ScenarioSpec& scenario);

/// Level (dB) of the genuine tag's reflected path before any movement,
/// including wearing-position and polarization effects.
double tag_reference_db(const ScenarioSpec& scenario);

/// Movement script used by synthesize(): the explicit one when present,
/// otherwise alternating back-and-forth events drawn from `seed`.
MovementScript movement_script(const ScenarioSpec& scenario, std::uint64_t seed);

/// Synthesizes a labeled RSS series. Pure in (scenario, seed).
LabeledSeries synthesize(const ScenarioSpec& scenario, std::uint64_t seed);

/// Received level (dB) of an attacker's fake reflection over time.
///
/// ConstantPowerActive and TagAttacker hold `reference_level_db`. A
/// PowerfulActive attacker runs a control loop that ticks every
/// power_update_interval_s: a monitored change larger than
/// monitor_threshold_db is applied on the first tick at least
/// reaction_latency_s after it was seen, and every tick re-emits the tracked
/// level with N(0, power_step_noise_db) error.
SampleSeries attacker_reflection(const AttackerConfig& attacker,
                                 const SampleSeries& monitored_main_db,
                                 double reference_level_db, std::uint64_t seed);

/// Periodic transmitter on/off mask for non-continuous traffic.
std::vector<std::uint8_t> packet_gating(double traffic_rate_pkt_s, double packet_duration_s,
                                        std::size_t series_len, std::uint64_t sample_rate_hz);

/// Additive slow body/environment jitter (dB).
std::vector<double> body_dynamics(std::size_t series_len, std::uint64_t sample_rate_hz,
                                  const Dynamics& dynamics, std::uint64_t seed);

}  // namespace scatterguard::synth
