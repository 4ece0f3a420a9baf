#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "scatterguard/error.hpp"
#include "scatterguard/pipeline.hpp"
#include "scatterguard/synth.hpp"

using namespace scatterguard;

namespace {

SampleSeries series_of(std::vector<double> v, std::uint64_t fs = 1000000) {
  SampleSeries s;
  s.sample_rate_hz = fs;
  s.samples = std::move(v);
  return s;
}

ScenarioSpec noiseless() {
  ScenarioSpec s;
  s.noise_std_db = 0.0;
  s.ripple_db = 0.0;
  s.tag_noise_db = 0.0;
  return s;
}

SlopeSeries slopes_from_db_per_s(std::vector<double> v, std::size_t N, std::size_t trace_len) {
  SlopeSeries s;
  s.n = N;
  s.trace_rate_hz = 1.0;
  s.db_per_s = v;
  s.raw = v;
  s.trace.assign(trace_len, 0.0);
  return s;
}

}  // namespace

TEST_CASE("moving_average") {
  SUBCASE("constant series comes back unchanged") {
    const std::vector<double> x(1000, -37.125);
    CHECK(moving_average(x, 50) == x);
  }
  SUBCASE("impulse spreads to h/50 across the window") {
    std::vector<double> x(400, 0.0);
    x[200] = 5.0;
    const auto y = moving_average(x, 50);
    for (std::size_t i = 176; i <= 225; ++i) CHECK(y[i] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(y[175] == doctest::Approx(0.0));
    CHECK(y[226] == doctest::Approx(0.0));
  }
  SUBCASE("white noise std shrinks by sqrt(window)") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 2.0);
    std::vector<double> x(200000);
    for (auto& v : x) v = g(rng);
    const auto y = moving_average(x, 50);
    double m = 0, s = 0;
    for (std::size_t i = 100; i < y.size() - 100; ++i) m += y[i];
    m /= (y.size() - 200);
    for (std::size_t i = 100; i < y.size() - 100; ++i) s += (y[i] - m) * (y[i] - m);
    s = std::sqrt(s / (y.size() - 200));
    CHECK(s == doctest::Approx(2.0 / std::sqrt(50.0)).epsilon(0.05));
  }
  SUBCASE("matches direct summation, edges included") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-80, -20);
    for (std::size_t w : {2u, 7u, 50u, 51u}) {
      std::vector<double> x(300);
      for (auto& v : x) v = u(rng);
      const auto a = moving_average(x, w), b = oracle::moving_average(x, w);
      for (std::size_t i = 0; i < x.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("smooth") {
  PipelineParams p;
  CHECK_THROWS_AS(smooth(series_of(std::vector<double>(49, 1.0)), p), PreconditionError);
  const auto c = smooth(series_of(std::vector<double>(500, 3.0)), p);
  CHECK(std::all_of(c.samples.begin(), c.samples.end(), [](double v) { return v == 3.0; }));

  // a drifting series has its slow trend removed before averaging
  std::vector<double> ramp(200000);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 2.0 * static_cast<double>(i) / 1e6;  // 2 dB/s
  CHECK(estimate_drift(series_of(ramp)) == doctest::Approx(2.0).epsilon(1e-9));
  const auto d = smooth(series_of(ramp), p);
  CHECK(std::abs(d.samples[100000] - d.samples[50000]) < 1e-6);
}

TEST_CASE("extract_backscatter: noiseless alternating bits") {
  ScenarioSpec s = noiseless();
  s.movement_count = 0;
  s.duration_s = 0.05;
  s.backscatter.fixed_bits = {1, 0};
  s.backscatter.reflection_depth_db = 3.0;
  const auto ls = synth::synthesize(s, 2);
  PipelineParams p;
  const auto smoothed = smooth(ls.series, p);
  const auto ex = extract_backscatter(smoothed, ls.bitrate_bps, p);
  CHECK(ex.stream.decoded_bits == ls.bits);
  CHECK(ex.stream.decoded_bits[0] == 1);
  CHECK(ex.stream.decoded_bits[1] == 0);
  // residual is the main path alone: flat up to sub-Hz body jitter
  const auto [lo, hi] = std::minmax_element(ex.residual.samples.begin(), ex.residual.samples.end());
  CHECK(*hi - *lo < 0.05);
  // reflection power recovers the reflected-path level
  for (std::size_t k = 5; k + 5 < ls.bits.size(); k += 37)
    CHECK(ex.stream.reflection_power[k] == doctest::Approx(ls.bit_reflect_db[k]).epsilon(1e-3));
}

TEST_CASE("extract_backscatter: a tag that never reflects is not detected") {
  ScenarioSpec s = noiseless();
  s.movement_count = 0;
  s.duration_s = 0.05;
  s.backscatter.fixed_bits = {0};
  const auto ls = synth::synthesize(s, 2);
  PipelineParams p;
  CHECK_THROWS_AS(extract_backscatter(smooth(ls.series, p), ls.bitrate_bps, p), NoBackscatterDetected);
}

TEST_CASE("extract_backscatter: decodes noisy tags without errors") {
  ScenarioSpec s;
  s.movement_count = 1;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto ls = synth::synthesize(s, seed);
    const auto a = analyze(ls.series, ls.bitrate_bps, PipelineParams{});
    REQUIRE(a.backscatter_found);
    CHECK(a.extraction.stream.decoded_bits == ls.bits);
  }
}

TEST_CASE("extract_trace") {
  const auto t = extract_trace(series_of(std::vector<double>(1050, -4.0)), 100);
  CHECK(t.values.size() == 11);
  CHECK(std::all_of(t.values.begin(), t.values.end(), [](double v) { return v == -4.0; }));
  std::vector<double> step(1000, 1.0);
  std::fill(step.begin() + 600, step.end(), 7.0);
  const auto u = extract_trace(series_of(step), 100);
  for (std::size_t i = 0; i < 10; ++i) CHECK(u.values[i] == (i < 6 ? 1.0 : 7.0));
  CHECK_THROWS_AS(extract_trace(series_of(std::vector<double>(50, 0.0)), 100), PreconditionError);
}

TEST_CASE("extract_trace over gated samples") {
  // samples live in windows 1 and 4 of a 6-window span; the rest is interpolated
  std::vector<std::size_t> pos;
  std::vector<double> v;
  for (std::size_t i = 10; i < 20; ++i) pos.push_back(i), v.push_back(2.0);
  for (std::size_t i = 40; i < 45; ++i) pos.push_back(i), v.push_back(8.0);
  const auto t = extract_trace(series_of(v), 10, pos, 60);
  REQUIRE(t.values.size() == 6);
  const std::vector<double> expect{2.0, 2.0, 4.0, 6.0, 8.0, 8.0};
  for (std::size_t i = 0; i < 6; ++i) CHECK(t.values[i] == doctest::Approx(expect[i]));
  CHECK_THROWS_AS(extract_trace(series_of(v), 10, pos, 44), PreconditionError);
  pos.pop_back();
  CHECK_THROWS_AS(extract_trace(series_of(v), 10, pos, 60), PreconditionError);
}

TEST_CASE("slopes") {
  PipelineParams p;
  p.w_coeff = 1.2;
  // N = round(1.2 * 1e5 / 1e4) = 12 trace points
  SUBCASE("constant trace has zero slope") {
    MainPathTrace t{std::vector<double>(100, 5.0), 10};
    const auto s = slopes(t, p, 100000, 10000);
    CHECK(s.n == 12);
    CHECK(s.raw.size() == 100 - 24);
    CHECK(std::all_of(s.raw.begin(), s.raw.end(), [](double v) { return v == 0.0; }));
  }
  SUBCASE("step of h: window mean difference equals h") {
    std::vector<double> x(100, 10.0);
    std::fill(x.begin() + 50, x.end(), 16.0);
    MainPathTrace t{x, 10};
    const auto s = slopes(t, p, 100000, 10000);
    // windows [n, n+12] below the step and [n+12, n+24] above: n + 12 == 50
    CHECK(s.window_mean_diff[38] == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(s.raw[38] == oracle::slope_raw(x, 12)[38]);
    CHECK(s.db_per_s[38] == doctest::Approx(6.0 / 12 * 10000.0).epsilon(1e-12));
  }
  SUBCASE("equals the brute-force sums on random traces") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> x(200 + trial);
      for (auto& v : x) v = u(rng);
      const auto s = slopes(MainPathTrace{x, 1}, p, 100000, 10000);
      const auto ref = oracle::slope_raw(x, 12);
      REQUIRE(s.raw.size() == ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) CHECK(s.raw[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
  }
  SUBCASE("normalized slope spans [0, 1]") {
    std::vector<double> x(100, 10.0);
    std::fill(x.begin() + 50, x.end(), 16.0);
    const auto s = slopes(MainPathTrace{x, 10}, p, 100000, 10000);
    CHECK(*std::max_element(s.normalized.begin(), s.normalized.end()) == 1.0);
    CHECK(*std::min_element(s.normalized.begin(), s.normalized.end()) == 0.0);
  }
  SUBCASE("bad configurations") {
    PipelineParams q;
    q.w_coeff = 1e-6;
    CHECK_THROWS_AS(slopes(MainPathTrace{std::vector<double>(100, 1.0), 1}, q, 100000, 10000), ConfigError);
    CHECK_THROWS_AS(slopes(MainPathTrace{std::vector<double>(24, 1.0), 1}, p, 100000, 10000),
                    PreconditionError);
  }
}

TEST_CASE("detect_states") {
  PipelineParams p;
  const std::size_t N = 4;
  SUBCASE("all sub-threshold gives one stable mark") {
    const auto marks = detect_states(slopes_from_db_per_s(std::vector<double>(80, 1.0), N, 88), p);
    REQUIRE(marks.size() == 1);
    CHECK(marks[0].kind == StateKind::Stable);
    CHECK(marks[0].interval == Interval{0, 88});
  }
  SUBCASE("a burst in the middle gives stable, varying, stable") {
    std::vector<double> v(80, 1.0);
    std::fill(v.begin() + 36, v.begin() + 44, 50.0);
    const auto marks = detect_states(slopes_from_db_per_s(v, N, 88), p);
    REQUIRE(marks.size() == 3);
    CHECK(marks[0].kind == StateKind::Stable);
    CHECK(marks[1].kind == StateKind::Varying);
    CHECK(marks[2].kind == StateKind::Stable);
    CHECK(marks[0].interval.end == marks[1].interval.begin);
    CHECK(marks[1].interval.end == marks[2].interval.begin);
  }
  SUBCASE("matches the brute-force scan on random series") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 14.0);
    std::uniform_int_distribution<std::size_t> len(10, 300), nn(1, 9), ms(1, 5);
    for (int trial = 0; trial < 300; ++trial) {
      PipelineParams q;
      q.min_stable_intervals = ms(rng);
      const std::size_t n = nn(rng), count = len(rng);
      std::vector<double> v(count);
      for (auto& x : v) x = u(rng);
      const std::size_t trace_len = count + 2 * n;
      const auto marks = detect_states(slopes_from_db_per_s(v, n, trace_len), q);
      const auto ref = oracle::states(v, n, q.slope_threshold_db, q.min_stable_intervals, trace_len);
      REQUIRE(marks.size() == ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK((marks[i].kind == StateKind::Stable) == ref[i].stable);
        CHECK(marks[i].interval.begin == ref[i].begin);
        CHECK(marks[i].interval.end == ref[i].end);
      }
    }
  }
}

TEST_CASE("select_movement_states") {
  PipelineParams p;
  std::vector<double> trace(300, 0.0);
  std::fill(trace.begin() + 200, trace.end(), 6.0);
  MainPathTrace t{trace, 100};
  std::vector<StateMark> marks{{StateKind::Stable, {0, 100}, 0.0},
                               {StateKind::Varying, {100, 200}, 0.0},
                               {StateKind::Stable, {200, 300}, 0.0}};
  auto kept = select_movement_states(marks, t, p);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].post.mean_db - kept[0].pre.mean_db == doctest::Approx(6.0));

  std::fill(t.values.begin() + 200, t.values.end(), 2.0);
  CHECK(select_movement_states(marks, t, p).empty());

  std::vector<StateMark> only_stable{{StateKind::Stable, {0, 300}, 0.0}};
  CHECK(select_movement_states(only_stable, t, p).empty());
}

TEST_CASE("segment_variance") {
  CHECK(segment_variance(std::vector<double>(10, -3.0)).raw == 0.0);
  std::vector<double> alt;
  for (int i = 0; i < 20; ++i) alt.push_back(i % 2 ? 11.0 : 9.0);
  CHECK(segment_variance(alt).raw == 1.0);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(2 + trial);
    for (auto& v : x) v = u(rng);
    CHECK(segment_variance(x).raw == doctest::Approx(oracle::variance(x)).epsilon(1e-12));
    const double nv = segment_variance(x).normalized;
    CHECK(nv >= 0.0);
    CHECK(nv <= 0.25 + 1e-12);
  }
  CHECK_THROWS_AS(segment_variance({1.0}), PreconditionError);
}

TEST_CASE("segment_and_group") {
  BackscatterStream bs;
  bs.samples_per_bit = 100;
  bs.reflection_power.assign(100, -10.0);
  std::fill(bs.reflection_power.begin() + 60, bs.reflection_power.end(), -4.0);
  bs.separable.assign(100, 1);
  MovementTriple t;
  t.pre.interval = {0, 40};       // trace points of 100 samples = bits
  t.varying.interval = {40, 60};
  t.post.interval = {60, 100};
  PipelineParams p;
  auto g = segment_and_group(bs, {t}, 100, p);
  REQUIRE(g.size() == 1);
  CHECK(g[0].pre_bits == Interval{0, 40});
  CHECK(g[0].post_bits == Interval{60, 100});
  CHECK(g[0].pre_mean_db == -10.0);
  CHECK(g[0].post_mean_db == -4.0);
  CHECK(g[0].pre.end <= g[0].movement.begin);
  CHECK(g[0].post.begin >= g[0].movement.end);

  SUBCASE("order is preserved") {
    MovementTriple a = t, b = t;
    b.pre.interval = {60, 70};
    b.varying.interval = {70, 80};
    b.post.interval = {80, 100};
    const auto gs = segment_and_group(bs, {a, b, a}, 100, p);
    REQUIRE(gs.size() == 3);
    CHECK(gs[1].pre_bits.begin == 60);
    CHECK(gs[2].pre_bits.begin == 0);
  }
  SUBCASE("segment limit keeps the bits nearest the movement") {
    PipelineParams q;
    q.segment_limit_samples = 1000;
    const auto gs = segment_and_group(bs, {t}, 100, q);
    CHECK(gs[0].pre_bits == Interval{30, 40});
    CHECK(gs[0].post_bits == Interval{60, 70});
    q.segment_limit_samples = 50;
    CHECK_THROWS_AS(segment_and_group(bs, {t}, 100, q), PreconditionError);
  }
  SUBCASE("gated streams map bits through their original positions") {
    BackscatterStream gated = bs;
    // each analysed bit of 100 samples sits 250 samples apart in the original series
    for (std::size_t k = 0; k < 100; ++k)
      for (std::size_t i = 0; i < 100; ++i) gated.positions.push_back(k * 250 + i);
    MovementTriple r;
    r.pre.interval = {0, 100};      // original samples [0, 10000): bits 0..39
    r.varying.interval = {100, 150};
    r.post.interval = {150, 250};   // [15000, 25000): bits 60..99
    const auto gs = segment_and_group(gated, {r}, 100, p);
    REQUIRE(gs.size() == 1);
    CHECK(gs[0].pre_bits == Interval{0, 40});
    CHECK(gs[0].post_bits == Interval{60, 100});
    CHECK(gs[0].pre == Interval{0, 39 * 250 + 100});
    CHECK(gs[0].movement == Interval{10000, 15000});
    CHECK(gs[0].post.begin == 15000);
  }
  SUBCASE("a stable interval without whole bits is skipped") {
    MovementTriple s = t;
    s.pre.interval = {0, 1};
    std::vector<std::string> diag;
    CHECK(segment_and_group(bs, {s}, 50, p, &diag).empty());
    CHECK(diag.size() == 1);
  }
}

TEST_CASE("group decisions") {
  PipelineParams p;
  SegmentGroup g;
  g.pre_mean_db = -3.0;
  g.post_mean_db = -9.0;
  CHECK(classify_powerful(g, p).pre == SegmentClass::Slow);
  CHECK(classify_powerful(g, p).post == SegmentClass::Slow);
  CHECK(authenticate_group(g, p) == GroupVerdict::OnBody);
  g.post_mean_db = -4.0;
  CHECK(authenticate_group(g, p) == GroupVerdict::Attacker);
  g.post_mean_db = -9.0;
  g.post_var = 9.0;  // 3 dB
  CHECK(classify_powerful(g, p).post == SegmentClass::Fast);
  CHECK(authenticate_group(g, p) == GroupVerdict::PowerfulAttacker);
}

TEST_CASE("majority_vote") {
  using V = GroupVerdict;
  CHECK(majority_vote({}) == FinalVerdict::Inconclusive);
  CHECK(majority_vote({V::OnBody, V::OnBody}) == FinalVerdict::OnBody);
  CHECK(majority_vote({V::OnBody, V::Attacker}) == FinalVerdict::Inconclusive);
  CHECK(majority_vote({V::OnBody, V::PowerfulAttacker, V::Attacker}) == FinalVerdict::Attacker);
  // flipping an Attacker vote to OnBody never moves the result toward Attacker
  auto rank = [](FinalVerdict f) { return f == FinalVerdict::Attacker ? 0 : f == FinalVerdict::Inconclusive ? 1 : 2; };
  for (unsigned n = 1; n <= 7; ++n)
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      std::vector<V> votes;
      for (unsigned i = 0; i < n; ++i) votes.push_back(mask >> i & 1 ? V::OnBody : V::Attacker);
      for (unsigned i = 0; i < n; ++i) {
        if (votes[i] != V::Attacker) continue;
        auto flipped = votes;
        flipped[i] = V::OnBody;
        CHECK(rank(majority_vote(flipped)) >= rank(majority_vote(votes)));
      }
    }
}

TEST_CASE("authenticate end to end") {
  ScenarioSpec s;
  s.movement_count = 5;
  auto ls = synth::synthesize(s, 17);
  auto v = authenticate(ls.series, ls.bitrate_bps, PipelineParams{});
  CHECK(v.final == FinalVerdict::OnBody);
  CHECK(v.groups_used == 5);

  s.attacker.kind = AttackerKind::ConstantPowerActive;
  ls = synth::synthesize(s, 17);
  v = authenticate(ls.series, ls.bitrate_bps, PipelineParams{});
  CHECK(v.final == FinalVerdict::Attacker);

  ScenarioSpec still;
  still.movement_count = 0;
  still.duration_s = 0.8;
  ls = synth::synthesize(still, 17);
  v = authenticate(ls.series, ls.bitrate_bps, PipelineParams{});
  CHECK(v.final == FinalVerdict::Inconclusive);
  CHECK(v.groups_used == 0);
  CHECK_FALSE(v.diagnostics.empty());

  // no tag at all: fails safe
  ScenarioSpec silent = s;
  silent.attacker.kind = AttackerKind::None;
  silent.backscatter.fixed_bits = {0};
  ls = synth::synthesize(silent, 17);
  v = authenticate(ls.series, ls.bitrate_bps, PipelineParams{});
  CHECK(v.final == FinalVerdict::Inconclusive);
}

TEST_CASE("non-continuous traffic is gated out") {
  ScenarioSpec s;
  s.traffic_rate_pkt_s = 80;
  s.packet_duration_s = 0.008;
  const auto ls = synth::synthesize(s, 4);
  const auto v = authenticate(ls.series, ls.bitrate_bps, PipelineParams{});
  CHECK(v.final == FinalVerdict::OnBody);
  for (const auto& g : v.groups) {
    CHECK(g.pre.end <= g.movement.begin);
    CHECK(g.movement.end <= g.post.begin);
  }
}

TEST_CASE("params validation") {
  PipelineParams p;
  CHECK_NOTHROW(p.validate());
  p.w_coeff = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.smooth_window = 1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.min_stable_intervals = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
