#include "scatterguard/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scatterguard/error.hpp"

namespace scatterguard::propagation {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kMaxAntennaHeight = 0.02;
}  // namespace

void BodyGeometry::validate() const {
  if (!(surface_radius_m > 0.0)) throw PreconditionError("surface radius must be positive");
  for (double h : {antenna_height_tx_m, antenna_height_rx_m}) {
    if (!(h >= 0.0 && h <= kMaxAntennaHeight))
      throw PreconditionError("antenna height must lie in [0, 0.02] m");
  }
  if (!(permittivity.real() >= 1.0)) throw PreconditionError("tissue permittivity real part < 1");
}

LinkParams LinkParams::make(double tx_power_w, double tx_gain, double rx_gain, double distance_m,
                            double frequency_hz) {
  LinkParams link;
  link.tx_power_w = tx_power_w;
  link.tx_gain = tx_gain;
  link.rx_gain = rx_gain;
  link.distance_m = distance_m;
  link.frequency_hz = frequency_hz;
  link.wavenumber = 2.0 * kPi * frequency_hz / kSpeedOfLight;
  return link;
}

void LinkParams::validate() const {
  if (!(tx_power_w >= 0.0)) throw PreconditionError("transmit power must be non-negative");
  if (!(distance_m > 0.0)) throw PreconditionError("link distance must be positive");
  if (!(frequency_hz > 0.0)) throw PreconditionError("carrier frequency must be positive");
  if (!(tx_gain > 0.0) || !(rx_gain > 0.0)) throw PreconditionError("antenna gains must be positive");
  const double expected = 2.0 * kPi * frequency_hz / kSpeedOfLight;
  if (std::abs(wavenumber - expected) > 1e-9 * expected)
    throw PreconditionError("wavenumber is inconsistent with the carrier frequency");
}

void AttenuationParams::validate() const {
  if (base_decay_per_m < 0.0 || curvature_coeff < 0.0 || height_coeff < 0.0)
    throw PreconditionError("attenuation parameters must be non-negative");
}

double band_frequency_hz(Band band) { return band == Band::MHz900 ? 9.0e8 : 2.4e9; }

AttenuationParams band_attenuation(Band band) {
  if (band == Band::MHz900) return {1.5, 0.05, 20.0};
  return {3.0, 0.05, 20.0};
}

double attenuation_w(double distance_m, const BodyGeometry& body, const AttenuationParams& params) {
  if (!(distance_m > 0.0)) throw PreconditionError("attenuation distance must be positive");
  params.validate();
  const double heights = body.antenna_height_tx_m + body.antenna_height_rx_m;
  const double gamma = params.base_decay_per_m * (1.0 + params.curvature_coeff / body.surface_radius_m) /
                       (1.0 + params.height_coeff * heights);
  return std::exp(-gamma * distance_m);
}

std::complex<double> creeping_field(const LinkParams& link, const BodyGeometry& body,
                                    const AttenuationParams& att) {
  link.validate();
  body.validate();
  const double circumference = 2.0 * kPi * body.surface_radius_m;
  if (link.distance_m >= circumference)
    throw PreconditionError("distance must be shorter than the body circumference");

  const double amplitude =
      std::sqrt(link.vacuum_impedance_ohm / (2.0 * kPi)) * std::sqrt(link.tx_power_w * link.tx_gain);
  auto term = [&](double path) {
    return amplitude / path * std::polar(1.0, -link.wavenumber * path) * attenuation_w(path, body, att);
  };
  return term(link.distance_m) + term(circumference - link.distance_m);
}

double on_body_rss_db(const LinkParams& link, const BodyGeometry& body,
                      const AttenuationParams& att, double movement_offset_db) {
  const double field = std::abs(creeping_field(link, body, att));
  return 20.0 * std::log10(field) + 10.0 * std::log10(link.rx_gain) + movement_offset_db;
}

double free_space_rss_db(double distance_m, double frequency_hz, double tx_power_w,
                         double tx_gain, double rx_gain) {
  if (!(distance_m > 0.0) || !(frequency_hz > 0.0) || !(tx_power_w > 0.0) || !(tx_gain > 0.0) ||
      !(rx_gain > 0.0))
    throw PreconditionError("free-space inputs must be positive");
  const double wavelength = kSpeedOfLight / frequency_hz;
  return 10.0 * std::log10(tx_power_w * tx_gain * rx_gain) +
         20.0 * std::log10(wavelength / (4.0 * kPi * distance_m));
}

double polarization_penalty_db(double angle_deg) {
  if (!(angle_deg >= 0.0 && angle_deg <= 180.0))
    throw PreconditionError("polarization angle must lie in [0, 180] degrees");
  const double c = std::abs(std::cos(angle_deg * kPi / 180.0));
  return 20.0 * std::log10(std::max(c, kPolarizationFloor));
}

double proximity_coupling_std_db(double attacker_distance_m) {
  if (!(attacker_distance_m > 0.0)) throw PreconditionError("attacker distance must be positive");
  constexpr double kPeak = 4.0, kKnee = 0.4, kWidth = 0.04;
  return kPeak / (1.0 + std::exp((attacker_distance_m - kKnee) / kWidth));
}

}  // namespace scatterguard::propagation
