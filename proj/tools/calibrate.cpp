// Prints TP/FP tables for the calibrated scenarios along every evaluation axis.
// usage: calibrate [trials=100] [group=all]
//   groups: static attackers movements powerful powerful-distance latency
//           position angle band traffic dynamics direction all
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include "scatterguard/harness.hpp"

using namespace scatterguard;

namespace {

void show(const std::string& name, const MetricsReport& r) {
  auto f = [](const std::optional<double>& v) { return v ? std::to_string(*v).substr(0, 5) : std::string("  -  "); };
  std::printf("%-26s tp %s  fp %s  vote tp %s  vote fp %s  groups/trial %.2f\n", name.c_str(), f(r.tp_rate).c_str(),
              f(r.fp_rate).c_str(), f(r.vote_tp_rate).c_str(), f(r.vote_fp_rate).c_str(), r.mean_groups_per_trial);
  std::fflush(stdout);
}

void show_sweep(const std::string& label, const ScenarioSpec& spec, SweepAxis axis,
                const std::vector<std::string>& values, std::size_t n) {
  for (const auto& [v, r] : sweep(spec, axis, values, n, 42)) show(label + " " + v, r);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 100;
  const std::string group = argc > 2 ? argv[2] : "all";
  auto want = [&](const char* g) { return group == "all" || group == g; };
  const auto t0 = std::chrono::steady_clock::now();

  const ScenarioSpec genuine;
  ScenarioSpec constant;
  constant.attacker.kind = AttackerKind::ConstantPowerActive;
  ScenarioSpec tag;
  tag.attacker.kind = AttackerKind::TagAttacker;
  ScenarioSpec powerful;
  powerful.attacker.kind = AttackerKind::PowerfulActive;
  powerful.dynamics.profile = DynamicsProfile::SlightMotion;

  if (want("static")) show("genuine static", run_trials(genuine, n, 42));
  if (want("attackers")) {
    show_sweep("constant-power at", constant, SweepAxis::AttackerDistance, {"0.2", "0.3", "0.5", "1", "2"}, n);
    show_sweep("tag attacker at", tag, SweepAxis::AttackerDistance, {"0.2", "0.3", "0.5", "1", "2"}, n);
  }
  if (want("movements")) show_sweep("movements", genuine, SweepAxis::MovementCount, {"1", "3", "5"}, n);
  if (want("powerful")) {
    for (double latency : {0.05, 0.1, 0.2}) {
      ScenarioSpec p = powerful;
      p.attacker.reaction_latency_s = latency;
      show("powerful latency " + std::to_string(static_cast<int>(latency * 1000)) + " ms", run_trials(p, n, 42));
    }
    ScenarioSpec slight;
    slight.dynamics.profile = DynamicsProfile::SlightMotion;
    show("genuine slight motion", run_trials(slight, n, 42));
  }
  if (want("powerful-distance"))
    show_sweep("powerful at", powerful, SweepAxis::AttackerDistance, {"0.1", "0.2", "0.3", "0.5", "1", "2"}, n);
  if (want("latency"))
    for (const auto& [ms, r] : latency_study(genuine, {10, 25, 50, 100, 150, 200, 1000}, n, 42))
      show("segment " + std::to_string(static_cast<int>(ms)) + " ms", r);
  if (want("position")) show_sweep("position", genuine, SweepAxis::TagPosition, {"chest", "waist", "wrist", "neck"}, n);
  if (want("angle")) show_sweep("tag angle", genuine, SweepAxis::TagAngle, {"0", "30", "45", "60", "80", "90", "120", "150"}, n);
  if (want("band")) show_sweep("band", genuine, SweepAxis::Band, {"900", "2400"}, n);
  if (want("traffic")) {
    show_sweep("traffic", genuine, SweepAxis::TrafficRate, {"10", "40", "160", "320"}, n);
    show_sweep("traffic, attacker", constant, SweepAxis::TrafficRate, {"10", "40", "160", "320"}, n);
  }
  if (want("dynamics"))
    show_sweep("dynamics", genuine, SweepAxis::BodyDynamics, {"static", "slight", "walkers:0.3", "walkers:1"}, n);
  if (want("direction")) show_sweep("direction", constant, SweepAxis::AttackerDirection, {"1", "2", "3", "4", "5"}, n);

  std::printf("elapsed %.1f s\n", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}
