#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "scatterguard/error.hpp"
#include "scatterguard/propagation.hpp"

using namespace scatterguard;
using namespace scatterguard::propagation;

namespace {
constexpr double kPi = std::numbers::pi;

LinkParams link_900(double d) { return LinkParams::make(1e-3, 2.0, 2.0, d, 9.0e8); }
}  // namespace

TEST_CASE("attenuation_w: identity at zero distance and closed form") {
  BodyGeometry body;
  CHECK(attenuation_w(1e-12, body, AttenuationParams{}) == doctest::Approx(1.0).epsilon(1e-9));
  // gamma0 = 1, no curvature or height terms, 1 m
  CHECK(attenuation_w(1.0, body, AttenuationParams{1.0, 0.0, 0.0}) ==
        doctest::Approx(0.36787944117144233).epsilon(1e-14));
  CHECK_THROWS_AS(attenuation_w(0.0, body, AttenuationParams{}), PreconditionError);
  CHECK_THROWS_AS(attenuation_w(-1.0, body, AttenuationParams{}), PreconditionError);
}

TEST_CASE("attenuation_w: doubling the distance never increases it") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 5.0), dist(1e-3, 2.0), h(0.0, 0.02), r(0.05, 0.5);
  for (int i = 0; i < 500; ++i) {
    BodyGeometry body;
    body.surface_radius_m = r(rng);
    body.antenna_height_tx_m = h(rng);
    body.antenna_height_rx_m = h(rng);
    AttenuationParams p{u(rng), u(rng), u(rng)};
    const double d = dist(rng);
    const double w1 = attenuation_w(d, body, p), w2 = attenuation_w(2 * d, body, p);
    CHECK(w2 <= w1);
    CHECK(w1 > 0.0);
    CHECK(w1 <= 1.0);
  }
}

TEST_CASE("creeping_field: two-term sum") {
  BodyGeometry body;
  SUBCASE("antipodal receiver with aligned phases doubles one term") {
    // pick a carrier with k * pi * r = 2 pi * 3
    const double f = 3.0 * kSpeedOfLight / (kPi * body.surface_radius_m) ;
    const auto link = LinkParams::make(1e-3, 2.0, 2.0, kPi * body.surface_radius_m, f);
    const AttenuationParams att{};
    const double single = std::sqrt(kVacuumImpedance / (2 * kPi)) * std::sqrt(1e-3 * 2.0) /
                          link.distance_m * attenuation_w(link.distance_m, body, att);
    CHECK(std::abs(creeping_field(link, body, att)) == doctest::Approx(2.0 * single).epsilon(1e-9));
  }
  SUBCASE("zero power gives zero field") {
    auto link = link_900(0.3);
    link.tx_power_w = 0.0;
    CHECK(std::abs(creeping_field(link, body, AttenuationParams{})) == 0.0);
  }
  SUBCASE("term-by-term reference value") {
    // 900 MHz, r = 0.15 m, d = 0.3 m, gamma0 = 5 /m, 1 mW, Gt = 2
    const double e = std::abs(creeping_field(link_900(0.3), body, AttenuationParams{5.0, 0.05, 20.0}));
    CHECK(e == doctest::Approx(0.36725897981824670).epsilon(1e-12));
  }
  SUBCASE("invariant under d <-> 2 pi r - d") {
    const double c = 2 * kPi * body.surface_radius_m;
    for (double d : {0.05, 0.2, 0.4, 0.6, 0.9}) {
      const double a = std::abs(creeping_field(link_900(d), body, AttenuationParams{}));
      const double b = std::abs(creeping_field(link_900(c - d), body, AttenuationParams{}));
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
  }
  SUBCASE("distance must be shorter than the circumference") {
    CHECK_THROWS_AS(creeping_field(link_900(2 * kPi * body.surface_radius_m), body, AttenuationParams{}),
                    PreconditionError);
  }
  SUBCASE("wavenumber must match the carrier") {
    auto link = link_900(0.3);
    link.wavenumber *= 1.01;
    CHECK_THROWS_AS(creeping_field(link, body, AttenuationParams{}), PreconditionError);
  }
}

TEST_CASE("on_body_rss_db") {
  const BodyGeometry body;
  const AttenuationParams att;
  const auto link = link_900(0.3);
  CHECK(on_body_rss_db(link, body, att, 0.0) == on_body_rss_db(link, body, att, 0.0));
  CHECK(on_body_rss_db(link, body, att, 6.0) - on_body_rss_db(link, body, att, 0.0) ==
        doctest::Approx(6.0).epsilon(1e-12));
  CHECK(on_body_rss_db(link_900(0.3), body, AttenuationParams{5.0, 0.05, 20.0}, 0.0) ==
        doctest::Approx(-5.6902515735651017).epsilon(1e-12));

  // least-squares fit over an offset sweep: slope 1
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (double o = -10.0; o <= 10.0; o += 0.5, ++n) {
    const double y = on_body_rss_db(link, body, att, o);
    sx += o;
    sy += y;
    sxx += o * o;
    sxy += o * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("free_space_rss_db") {
  CHECK(free_space_rss_db(1.0, 9e8, 1.0, 1.0, 1.0) - free_space_rss_db(2.0, 9e8, 1.0, 1.0, 1.0) ==
        doctest::Approx(6.0205999132796239).epsilon(1e-12));
  CHECK(free_space_rss_db(1.0, 9e8, 1.0, 1.0, 1.0) == doctest::Approx(-31.532633410669871).epsilon(1e-12));
  CHECK(free_space_rss_db(0.7, 2.4e9, 1e-3, 2, 2) == free_space_rss_db(0.7, 2.4e9, 1e-3, 2, 2));
  double previous = free_space_rss_db(0.05, 9e8, 1.0, 1.0, 1.0);
  for (double d = 0.1; d < 5.0; d += 0.05) {
    const double v = free_space_rss_db(d, 9e8, 1.0, 1.0, 1.0);
    CHECK(v < previous);
    previous = v;
  }
  CHECK_THROWS_AS(free_space_rss_db(0.0, 9e8, 1, 1, 1), PreconditionError);
  CHECK_THROWS_AS(free_space_rss_db(1.0, -1.0, 1, 1, 1), PreconditionError);
}

TEST_CASE("polarization_penalty_db") {
  CHECK(polarization_penalty_db(0.0) == 0.0);
  CHECK(polarization_penalty_db(180.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(polarization_penalty_db(60.0) == doctest::Approx(-6.0205999132796239).epsilon(1e-9));
  CHECK(polarization_penalty_db(80.0) < polarization_penalty_db(45.0));
  CHECK(polarization_penalty_db(90.0) == doctest::Approx(-40.0));
  for (double a = 0.0; a <= 90.0; a += 7.5) {
    CHECK(polarization_penalty_db(a) <= 0.0);
    CHECK(polarization_penalty_db(a) == doctest::Approx(polarization_penalty_db(180.0 - a)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(polarization_penalty_db(-1.0), PreconditionError);
  CHECK_THROWS_AS(polarization_penalty_db(181.0), PreconditionError);
}

TEST_CASE("proximity_coupling_std_db") {
  CHECK(proximity_coupling_std_db(2.0) == doctest::Approx(0.0).epsilon(0.1));
  CHECK(proximity_coupling_std_db(2.0) < 0.1);
  CHECK(proximity_coupling_std_db(0.2) > proximity_coupling_std_db(0.5));
  CHECK(proximity_coupling_std_db(0.29) >= 2.0);
  CHECK(proximity_coupling_std_db(0.51) <= 0.5);
  double previous = proximity_coupling_std_db(0.1);
  for (double d = 0.11; d <= 2.0; d += 0.01) {
    const double v = proximity_coupling_std_db(d);
    CHECK(v <= previous);
    previous = v;
  }
  CHECK_THROWS_AS(proximity_coupling_std_db(0.0), PreconditionError);
}

TEST_CASE("geometry validation") {
  BodyGeometry body;
  body.antenna_height_tx_m = 0.03;
  CHECK_THROWS_AS(body.validate(), PreconditionError);
  body = {};
  body.permittivity = {0.5, 1.0};
  CHECK_THROWS_AS(body.validate(), PreconditionError);
  body = {};
  body.surface_radius_m = 0.0;
  CHECK_THROWS_AS(body.validate(), PreconditionError);
}
