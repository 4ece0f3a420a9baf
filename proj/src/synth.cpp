#include "scatterguard/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>

#include "scatterguard/error.hpp"
#include "scatterguard/random.hpp"

namespace scatterguard::synth {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMainLinkDistanceM = 0.5;  // hand to pocket
constexpr double kTxPowerW = 1e-3;
constexpr double kAntennaGain = 2.0;        // 3 dBi
constexpr double kOffGapDropDb = 70.0;      // receiver floor between packets
constexpr double kAttackerClampDb = 20.0;
constexpr double kCrossPolarDb = 10.0;     // on-body cross-polar discrimination
constexpr std::size_t kJitterStride = 64;
constexpr int kRipplePeriod = 8;

struct PositionProfile {
  double distance_m;  // transmitter to tag along the body
  double coupling;    // share of a transmitter movement seen on the tag path
};

PositionProfile position_profile(TagPosition position) {
  switch (position) {
    case TagPosition::Chest: return {0.45, 1.00};
    case TagPosition::Waist: return {0.35, 1.00};
    case TagPosition::Wrist: return {0.25, 0.85};
    case TagPosition::Neck: return {0.55, 0.88};
  }
  return {0.45, 1.0};
}

struct DirectionProfile {
  double level_db;
  double coupling_scale;
};

// Placement 1 is line of sight, 2/3 behind wooden barriers, 4/5 beside the body.
DirectionProfile direction_profile(int direction) {
  static constexpr std::array<DirectionProfile, 5> kTable{{
      {0.0, 1.0}, {-3.0, 1.15}, {-3.0, 1.15}, {2.0, 1.3}, {2.0, 1.3}}};
  return kTable.at(static_cast<std::size_t>(direction - 1));
}

double on_body_level(const ScenarioSpec& s, double distance_m) {
  const auto link = propagation::LinkParams::make(kTxPowerW, kAntennaGain, kAntennaGain, distance_m,
                                                  propagation::band_frequency_hz(s.band));
  return propagation::on_body_rss_db(link, propagation::BodyGeometry{},
                                     propagation::band_attenuation(s.band), 0.0);
}

double nominal_reflection_db(const ScenarioSpec& s) {
  return main_reference_db(s) +
         10.0 * std::log10(std::pow(10.0, s.backscatter.reflection_depth_db / 10.0) - 1.0);
}

double attacker_reference_db(const ScenarioSpec& s) {
  const auto& a = s.attacker;
  const double f = propagation::band_frequency_hz(s.band);
  const double path_gain = propagation::free_space_rss_db(a.distance_m, f, 1.0, 1.0, 1.0) -
                           propagation::free_space_rss_db(1.0, f, 1.0, 1.0, 1.0);
  const double legs = a.kind == AttackerKind::TagAttacker ? 2.0 : 1.0;
  return nominal_reflection_db(s) +
         std::clamp(legs * path_gain, -kAttackerClampDb, kAttackerClampDb) +
         direction_profile(a.direction).level_db;
}

// PRBS-15 (x^15 + x^14 + 1).
class Prbs15 {
 public:
  explicit Prbs15(std::uint64_t seed) : state_(static_cast<std::uint16_t>(seed & 0x7fff)) {
    if (state_ == 0) state_ = 0x1;
  }
  std::uint8_t next() {
    const std::uint16_t bit = ((state_ >> 14) ^ (state_ >> 13)) & 1u;
    state_ = static_cast<std::uint16_t>(((state_ << 1) | bit) & 0x7fff);
    return static_cast<std::uint8_t>(bit);
  }

 private:
  std::uint16_t state_;
};

}  // namespace

double main_reference_db(const ScenarioSpec& scenario) {
  return on_body_level(scenario, kMainLinkDistanceM);
}

double tag_reference_db(const ScenarioSpec& scenario) {
  const auto pos = position_profile(scenario.tag_position);
  const auto chest = position_profile(TagPosition::Chest);
  const double position_offset =
      std::clamp(on_body_level(scenario, pos.distance_m) - on_body_level(scenario, chest.distance_m),
                 -6.0, 6.0);
  // The body scatters part of the power into the cross-polar component, so a
  // mismatched tag still picks up kCrossPolarDb below the co-polar level.
  const double co = std::pow(10.0, propagation::polarization_penalty_db(scenario.tag_angle_deg) / 10.0);
  const double coupling = co + std::pow(10.0, -kCrossPolarDb / 10.0) * (1.0 - co);
  return nominal_reflection_db(scenario) + position_offset + 10.0 * std::log10(coupling);
}

MovementScript movement_script(const ScenarioSpec& scenario, std::uint64_t seed) {
  if (!scenario.script.events.empty()) return scenario.script;
  std::mt19937_64 rng(splitmix64(seed ^ 0x6d6f7665ULL));
  std::uniform_real_distribution<double> magnitude(scenario.movement_delta_min_db,
                                                   scenario.movement_delta_max_db);
  double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
  MovementScript script;
  for (int i = 0; i < scenario.movement_count; ++i) {
    MovementEvent e;
    e.start_s = scenario.lead_s + i * (scenario.movement_duration_s + scenario.stable_gap_s);
    e.duration_s = scenario.movement_duration_s;
    e.delta_db = sign * magnitude(rng);
    script.events.push_back(e);
    sign = -sign;
  }
  return script;
}

std::vector<std::uint8_t> packet_gating(double traffic_rate_pkt_s, double packet_duration_s,
                                        std::size_t series_len, std::uint64_t sample_rate_hz) {
  if (!(traffic_rate_pkt_s > 0.0) || !(packet_duration_s > 0.0) || sample_rate_hz == 0)
    throw PreconditionError("packet rate, duration and sample rate must be positive");
  const double duty = traffic_rate_pkt_s * packet_duration_s;
  if (duty > 1.0 + 1e-12) throw ConfigError("packet duty cycle exceeds 1");
  std::vector<std::uint8_t> mask(series_len, 0);
  if (duty >= 1.0 - 1e-12) {
    std::fill(mask.begin(), mask.end(), 1);
    return mask;
  }
  const double period = static_cast<double>(sample_rate_hz) / traffic_rate_pkt_s;
  const auto on_len = static_cast<std::size_t>(std::llround(packet_duration_s * sample_rate_hz));
  for (std::size_t k = 0;; ++k) {
    const auto start = static_cast<std::size_t>(std::llround(k * period));
    if (start >= series_len) break;
    const std::size_t end = std::min(series_len, start + on_len);
    std::fill(mask.begin() + static_cast<std::ptrdiff_t>(start),
              mask.begin() + static_cast<std::ptrdiff_t>(end), 1);
  }
  return mask;
}

std::vector<double> body_dynamics(std::size_t series_len, std::uint64_t sample_rate_hz,
                                  const Dynamics& dynamics, std::uint64_t seed) {
  if (sample_rate_hz == 0) throw PreconditionError("sample rate must be positive");
  std::mt19937_64 rng(splitmix64(seed ^ 0x626f6479ULL));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);

  struct Tone {
    double amplitude, frequency, phase;
  };
  std::vector<Tone> tones;
  // Tones whose amplitudes sum to `total`, so peak-to-peak <= 2 * total.
  auto bounded = [&](int count, double total, double f_lo, double f_hi) {
    std::uniform_real_distribution<double> weight(0.5, 1.0), freq(f_lo, f_hi);
    std::vector<double> w(count);
    double sum = 0.0;
    for (auto& x : w) sum += (x = weight(rng));
    for (double x : w) tones.push_back({total * x / sum, freq(rng), phase(rng)});
  };

  switch (dynamics.profile) {
    case DynamicsProfile::Static:
      bounded(3, 0.45, 0.1, 1.0);
      break;
    case DynamicsProfile::SlightMotion:
      bounded(4, 1.4, 0.2, 0.8);
      break;
    case DynamicsProfile::WalkersNearby: {
      bounded(3, 0.45, 0.1, 1.0);
      const double sigma = propagation::proximity_coupling_std_db(dynamics.walker_distance_m);
      constexpr int kWalkerTones = 4;
      std::uniform_real_distribution<double> freq(0.3, 1.5);
      for (int i = 0; i < kWalkerTones; ++i)
        tones.push_back({sigma * std::sqrt(2.0 / kWalkerTones), freq(rng), phase(rng)});
      break;
    }
  }

  auto value_at = [&](std::size_t i) {
    const double t = static_cast<double>(i) / sample_rate_hz;
    double v = 0.0;
    for (const auto& tone : tones) v += tone.amplitude * std::sin(2.0 * kPi * tone.frequency * t + tone.phase);
    return v;
  };

  // Sub-Hz content: evaluate on a coarse grid and interpolate linearly.
  std::vector<double> out(series_len);
  for (std::size_t base = 0; base < series_len; base += kJitterStride) {
    const double a = value_at(base);
    const double b = value_at(base + kJitterStride);
    const std::size_t end = std::min(series_len, base + kJitterStride);
    for (std::size_t i = base; i < end; ++i)
      out[i] = a + (b - a) * static_cast<double>(i - base) / kJitterStride;
  }
  return out;
}

SampleSeries attacker_reflection(const AttackerConfig& attacker,
                                 const SampleSeries& monitored_main_db,
                                 double reference_level_db, std::uint64_t seed) {
  if (attacker.kind == AttackerKind::None)
    throw PreconditionError("attacker_reflection requires an attacker");
  attacker.validate();
  SampleSeries out;
  out.sample_rate_hz = monitored_main_db.sample_rate_hz;
  out.start_time_s = monitored_main_db.start_time_s;
  const std::size_t n = monitored_main_db.size();
  out.samples.assign(n, reference_level_db);
  if (attacker.kind != AttackerKind::PowerfulActive || n == 0) return out;

  // Off-body monitoring loses sensitivity with distance; a close attacker
  // also sets its power more precisely.
  const double d = attacker.distance_m;
  const double sensitivity = 1.0 / (1.0 + std::max(0.0, d - 0.5));
  const double step_noise = attacker.power_step_noise_db * std::min(1.0, d / 0.5);

  std::mt19937_64 rng(splitmix64(seed ^ 0x706f7765ULL));
  std::normal_distribution<double> error(0.0, 1.0);
  const double fs = static_cast<double>(out.sample_rate_hz);
  const auto tick = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(attacker.power_update_interval_s * fs)));
  const auto delay = static_cast<std::size_t>(std::ceil(attacker.reaction_latency_s * fs - 1e-9));

  struct Pending {
    std::size_t due;
    double delta;
  };
  std::deque<Pending> pending;
  const auto& mon = monitored_main_db.samples;
  double reference_monitor = mon.front();
  double target = reference_level_db;
  double emitted = reference_level_db;
  for (std::size_t start = 0; start < n; start += tick) {
    while (!pending.empty() && pending.front().due <= start) {
      target += pending.front().delta;
      pending.pop_front();
    }
    if (start > 0) emitted = target + step_noise * error(rng);
    const double variation = (mon[start] - reference_monitor) * sensitivity;
    if (std::abs(variation) > attacker.monitor_threshold_db) {
      pending.push_back({start + delay, variation});
      reference_monitor = mon[start];
    }
    const std::size_t end = std::min(n, start + tick);
    std::fill(out.samples.begin() + static_cast<std::ptrdiff_t>(start),
              out.samples.begin() + static_cast<std::ptrdiff_t>(end), emitted);
  }
  return out;
}

LabeledSeries synthesize(const ScenarioSpec& scenario, std::uint64_t seed) {
  scenario.validate();
  const std::uint64_t fs = scenario.sample_rate_hz;
  const auto bit_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(fs) / scenario.backscatter.bitrate_bps));
  const double duration = scenario.effective_duration_s();
  const std::size_t n_bits_total =
      static_cast<std::size_t>(std::ceil(duration * scenario.backscatter.bitrate_bps - 1e-9));
  const std::size_t n = n_bits_total * bit_len;

  const MovementScript script = movement_script(scenario, seed);
  script.validate(0.0);
  const bool genuine = scenario.attacker.kind == AttackerKind::None;

  LabeledSeries out;
  out.bitrate_bps = static_cast<std::uint64_t>(std::llround(scenario.backscatter.bitrate_bps));
  out.seed = seed;
  out.genuine = genuine;
  out.series.sample_rate_hz = fs;
  for (const auto& e : script.events) {
    out.movement_intervals.push_back(
        {static_cast<std::size_t>(std::llround(e.start_s * fs)),
         std::min(n, static_cast<std::size_t>(std::llround((e.start_s + e.duration_s) * fs)))});
  }

  // Transmitter on/off, packets rounded to whole bits.
  std::vector<std::uint8_t> active;
  std::size_t packet_len = n;
  if (scenario.traffic_rate_pkt_s > 0.0) {
    const double bits = std::max(1.0, std::round(scenario.packet_duration_s * scenario.backscatter.bitrate_bps));
    packet_len = static_cast<std::size_t>(bits) * bit_len;
    const double packet_s = static_cast<double>(packet_len) / fs;
    if (packet_s * scenario.traffic_rate_pkt_s > 1.0 + 1e-12)
      throw ConfigError("packet duty cycle exceeds 1 after rounding to whole bits");
    active = packet_gating(scenario.traffic_rate_pkt_s, packet_s, n, fs);
  } else {
    active.assign(n, 1);
  }

  const std::vector<double> jitter = body_dynamics(n, fs, scenario.dynamics, seed);
  const double main_ref = main_reference_db(scenario);
  auto main_at = [&](std::size_t i) {
    const double t = static_cast<double>(i) / fs;
    return main_ref + script.offset_at(t) + jitter[i] + scenario.drift_db_per_s * t;
  };

  // Path that produces the "1" bits, before jitter and drift.
  std::vector<double> reflector;  // per sample, only filled for attackers
  double tag_ref = 0.0, tag_coupling = 0.0;
  if (genuine) {
    tag_ref = tag_reference_db(scenario);
    tag_coupling = scenario.backscatter.correlated_with_main
                       ? position_profile(scenario.tag_position).coupling
                       : 0.0;
  } else {
    SampleSeries monitored;
    monitored.sample_rate_hz = fs;
    monitored.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      monitored.samples[i] = main_ref + script.offset_at(static_cast<double>(i) / fs) + jitter[i];
    reflector = attacker_reflection(scenario.attacker, monitored, attacker_reference_db(scenario),
                                    splitmix64(seed ^ 0x61747461ULL))
                    .samples;
    // The wearer's body perturbs a nearby off-body path whenever the hand moves.
    std::mt19937_64 rng(splitmix64(seed ^ 0x70726f78ULL));
    std::normal_distribution<double> step(0.0, 1.0);
    const double sigma = propagation::proximity_coupling_std_db(scenario.attacker.distance_m) *
                         direction_profile(scenario.attacker.direction).coupling_scale;
    for (const auto& e : script.events) {
      const double delta = sigma * step(rng);
      const auto from = std::min(n, static_cast<std::size_t>(std::llround((e.start_s + e.duration_s / 2) * fs)));
      for (std::size_t i = from; i < n; ++i) reflector[i] += delta;
    }
  }
  auto reflect_at = [&](std::size_t i) {
    const double t = static_cast<double>(i) / fs;
    const double common = jitter[i] + scenario.drift_db_per_s * t;
    if (genuine) return tag_ref + tag_coupling * script.offset_at(t) + common;
    return reflector[i] + common;
  };

  std::mt19937_64 rng(splitmix64(seed ^ 0x6e6f6973ULL));
  std::normal_distribution<double> unit(0.0, 1.0);
  Prbs15 prbs(splitmix64(scenario.backscatter.bit_seed ^ seed));
  const auto& fixed = scenario.backscatter.fixed_bits;
  std::size_t bit_counter = 0;
  auto next_bit = [&]() -> std::uint8_t {
    const std::size_t k = bit_counter++;
    return fixed.empty() ? prbs.next() : static_cast<std::uint8_t>(fixed[k % fixed.size()] != 0);
  };
  const SourceLabel reflect_label = genuine ? SourceLabel::GenuineReflect : SourceLabel::AttackerReflect;

  auto& x = out.series.samples;
  x.resize(n);
  out.source_labels.assign(n, SourceLabel::MainOnly);
  std::size_t i = 0;
  while (i < n) {
    if (!active[i]) {
      x[i] = main_at(i) - kOffGapDropDb;
      ++i;
      continue;
    }
    // A packet: the tag's bit clock restarts at its first sample.
    std::size_t end = i;
    while (end < n && active[end] && end - i < packet_len) ++end;
    for (std::size_t a = i; a < end; a += bit_len) {
      const std::size_t b = std::min(end, a + bit_len);
      const std::size_t c = a + (b - a) / 2;
      const std::uint8_t bit = next_bit();
      const double main_c = main_at(c);
      const double refl_c = reflect_at(c) + scenario.tag_noise_db * unit(rng);
      out.bits.push_back(bit);
      out.bit_main_db.push_back(main_c);
      out.bit_reflect_db.push_back(refl_c);
      const double excess = bit ? 10.0 * std::log10(1.0 + std::pow(10.0, (refl_c - main_c) / 10.0)) : 0.0;
      for (std::size_t k = a; k < b; ++k) {
        x[k] = main_at(k) + excess;
        if (bit) out.source_labels[k] = reflect_label;
      }
    }
    i = end;
  }

  // Fast transmitter component and receiver noise.
  std::array<double, kRipplePeriod> ripple{};
  const double ripple_phase = std::uniform_real_distribution<double>(0.0, 2.0 * kPi)(rng);
  for (int k = 0; k < kRipplePeriod; ++k)
    ripple[k] = scenario.ripple_db * std::sin(2.0 * kPi * k / kRipplePeriod + ripple_phase);
  if (scenario.noise_std_db > 0.0 || scenario.ripple_db > 0.0) {
    for (std::size_t k = 0; k < n; ++k)
      x[k] += ripple[k % kRipplePeriod] + (scenario.noise_std_db > 0.0 ? scenario.noise_std_db * unit(rng) : 0.0);
  }
  return out;
}

}  // namespace scatterguard::synth
