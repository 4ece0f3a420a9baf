#pragma once

#include <complex>

namespace scatterguard::propagation {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kVacuumImpedance = 376.730313668;
inline constexpr double kPolarizationFloor = 0.01;  // -40 dB

struct BodyGeometry {
  double surface_radius_m = 0.15;
  std::complex<double> permittivity{52.0, 20.0};
  double antenna_height_tx_m = 0.015;
  double antenna_height_rx_m = 0.015;

  void validate() const;
};

struct LinkParams {
  double tx_power_w = 1e-3;
  double tx_gain = 2.0;  // 3 dBi
  double rx_gain = 2.0;
  double distance_m = 0.5;
  double frequency_hz = 9.0e8;
  double wavenumber = 0.0;
  double vacuum_impedance_ohm = kVacuumImpedance;

  // Builds a link with the wavenumber derived from the carrier.
  static LinkParams make(double tx_power_w, double tx_gain, double rx_gain, double distance_m,
                         double frequency_hz);
  void validate() const;
};

// Parameters of the closed-form creeping-wave attenuation W.
struct AttenuationParams {
  double base_decay_per_m = 1.5;
  double curvature_coeff = 0.05;
  double height_coeff = 20.0;

  void validate() const;
};

enum class Band { MHz900, GHz2400 };

double band_frequency_hz(Band band);
AttenuationParams band_attenuation(Band band);

/// W(d, r, eps, ht, hr) = exp(-gamma * d) with
/// gamma = base * (1 + curvature/r) / (1 + height * (ht + hr)).
double attenuation_w(double distance_m, const BodyGeometry& body, const AttenuationParams& params);

/// Two-term creeping-wave field: the short way round the body over d and the
/// long way over 2*pi*r - d.
std::complex<double> creeping_field(const LinkParams& link, const BodyGeometry& body,
                                    const AttenuationParams& att);

double on_body_rss_db(const LinkParams& link, const BodyGeometry& body,
                      const AttenuationParams& att, double movement_offset_db);

/// Friis free-space received power in dB(W).
double free_space_rss_db(double distance_m, double frequency_hz, double tx_power_w,
                         double tx_gain, double rx_gain);

/// Linear-polarization mismatch loss (<= 0 dB), floored at -40 dB.
double polarization_penalty_db(double angle_deg);

/// Std of the extra jitter an off-body path picks up from the wearer's body
/// when the attacker stands close.
double proximity_coupling_std_db(double attacker_distance_m);

}  // namespace scatterguard::propagation
