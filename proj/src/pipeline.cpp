#include "scatterguard/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scatterguard/error.hpp"

namespace scatterguard {

namespace {

double mean_of(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  long double s = 0.0L;
  for (std::size_t i = begin; i < end; ++i) s += v[i];
  return static_cast<double>(s / static_cast<long double>(end - begin));
}

// Reflected-path level from the reflecting and idle received levels (dB).
double reflected_level_db(double high_db, double low_db) {
  const double ratio = std::pow(10.0, (high_db - low_db) / 10.0) - 1.0;
  return low_db + 10.0 * std::log10(std::max(ratio, 1e-3));
}

// 1-D two-means, solved exactly over every split of the sorted values.
struct TwoMeans {
  double low = 0.0, high = 0.0, sse = 0.0;
};

TwoMeans two_means(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const double centre = v[n / 2];
  long double total = 0.0L, total_sq = 0.0L;
  for (double x : v) {
    total += x - centre;
    total_sq += static_cast<long double>(x - centre) * (x - centre);
  }
  TwoMeans best{centre, centre, static_cast<double>(total_sq - total * total / n)};
  long double left = 0.0L, left_sq = 0.0L;
  for (std::size_t s = 1; s < n; ++s) {
    const long double x = v[s - 1] - centre;
    left += x;
    left_sq += x * x;
    const long double right = total - left;
    const long double sse = (left_sq - left * left / s) + (total_sq - left_sq - right * right / (n - s));
    if (sse < best.sse) {
      best.sse = static_cast<double>(std::max(sse, 0.0L));
      best.low = static_cast<double>(left / s) + centre;
      best.high = static_cast<double>(right / (n - s)) + centre;
    }
  }
  return best;
}

// Copies the value at the nearest index where `valid` holds into the others.
void fill_nearest(std::vector<double>& v, const std::vector<std::uint8_t>& valid) {
  const std::size_t n = v.size();
  std::vector<std::ptrdiff_t> prev(n, -1), next(n, -1);
  std::ptrdiff_t last = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (valid[i]) last = static_cast<std::ptrdiff_t>(i);
    prev[i] = last;
  }
  last = -1;
  for (std::size_t i = n; i-- > 0;) {
    if (valid[i]) last = static_cast<std::ptrdiff_t>(i);
    next[i] = last;
  }
  const std::vector<double> src = v;
  for (std::size_t i = 0; i < n; ++i) {
    if (valid[i]) continue;
    const auto p = prev[i], q = next[i];
    if (p < 0 && q < 0) continue;
    if (q < 0 || (p >= 0 && static_cast<std::ptrdiff_t>(i) - p <= q - static_cast<std::ptrdiff_t>(i)))
      v[i] = src[static_cast<std::size_t>(p)];
    else
      v[i] = src[static_cast<std::size_t>(q)];
  }
}

SampleSeries with_samples(const SampleSeries& like, std::vector<double> samples) {
  SampleSeries out;
  out.sample_rate_hz = like.sample_rate_hz;
  out.start_time_s = like.start_time_s;
  out.samples = std::move(samples);
  return out;
}

std::vector<double> detrended(const SampleSeries& series, const PipelineParams& params) {
  const auto long_window = static_cast<std::size_t>(
      std::llround(params.drift_window_factor * static_cast<double>(params.smooth_window)));
  const std::vector<double>& x = series.samples;
  const std::vector<double> trend = moving_average(x, std::max<std::size_t>(long_window, 1));
  const double centre = mean_of(x, 0, x.size());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - trend[i] + centre;
  return out;
}

bool drifting(const SampleSeries& series, const PipelineParams& params) {
  return std::abs(estimate_drift(series)) > params.drift_threshold_db_per_s;
}

}  // namespace

void PipelineParams::validate() const {
  if (smooth_window < 2) throw ConfigError("smooth_window must be >= 2");
  if (!(w_coeff > 0.0)) throw ConfigError("w must be > 0");
  if (!(slope_threshold_db > 0.0)) throw ConfigError("slope threshold must be > 0");
  if (!(state_diff_threshold_db > 0.0)) throw ConfigError("state threshold must be > 0");
  if (!(variance_threshold_db > 0.0)) throw ConfigError("variance threshold must be > 0");
  if (!(auth_threshold_db > 0.0)) throw ConfigError("auth threshold must be > 0");
  if (min_stable_intervals < 1) throw ConfigError("min_stable_intervals must be >= 1");
  if (!(drift_window_factor >= 1.0)) throw ConfigError("drift window factor must be >= 1");
  if (!(drift_threshold_db_per_s > 0.0)) throw ConfigError("drift threshold must be > 0");
  if (context_bits < 1) throw ConfigError("context_bits must be >= 1");
  if (!(separability_factor > 0.0)) throw ConfigError("separability factor must be > 0");
  if (!(min_separable_fraction >= 0.0 && min_separable_fraction <= 1.0))
    throw ConfigError("min_separable_fraction must be in [0, 1]");
  if (!(gate_drop_db > 0.0)) throw ConfigError("gate drop must be > 0");
}

const char* to_string(GroupVerdict v) {
  switch (v) {
    case GroupVerdict::OnBody: return "OnBody";
    case GroupVerdict::Attacker: return "Attacker";
    case GroupVerdict::PowerfulAttacker: return "PowerfulAttacker";
  }
  return "?";
}

const char* to_string(FinalVerdict v) {
  switch (v) {
    case FinalVerdict::OnBody: return "OnBody";
    case FinalVerdict::Attacker: return "Attacker";
    case FinalVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

std::vector<double> moving_average(const std::vector<double>& x, std::size_t window) {
  if (window < 1) throw PreconditionError("moving average window must be >= 1");
  const std::size_t n = x.size();
  std::vector<double> out(n);
  if (n == 0) return out;
  // Offsetting by x[0] keeps constant inputs exact.
  const double base = x[0];
  std::vector<long double> prefix(n + 1, 0.0L);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + (x[i] - base);
  const std::size_t before = window / 2, after = window - before;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= before ? i - before : 0;
    const std::size_t hi = std::min(n, i + after);
    out[i] = base + static_cast<double>((prefix[hi] - prefix[lo]) / static_cast<long double>(hi - lo));
  }
  return out;
}

double estimate_drift(const SampleSeries& series) {
  const std::size_t n = series.size();
  if (n < 2 || series.sample_rate_hz == 0) return 0.0;
  const long double tc = (static_cast<long double>(n) - 1.0L) / 2.0L;
  const double y0 = series.samples[0];
  long double sty = 0.0L, stt = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const long double t = static_cast<long double>(i) - tc;
    sty += t * (series.samples[i] - y0);
    stt += t * t;
  }
  return static_cast<double>(sty / stt) * static_cast<double>(series.sample_rate_hz);
}

SampleSeries smooth(const SampleSeries& series, const PipelineParams& params) {
  params.validate();
  if (series.size() < params.smooth_window)
    throw PreconditionError("series shorter than the smoothing window");
  if (drifting(series, params))
    return with_samples(series, moving_average(detrended(series, params), params.smooth_window));
  return with_samples(series, moving_average(series.samples, params.smooth_window));
}

Extraction extract_backscatter(const SampleSeries& smoothed, std::uint64_t bitrate_bps,
                               const PipelineParams& params, const SampleSeries* levels) {
  params.validate();
  const SampleSeries& lev_series = levels ? *levels : smoothed;
  if (bitrate_bps == 0 || smoothed.sample_rate_hz < 10 * bitrate_bps)
    throw PreconditionError("sample rate must be at least 10x the bitrate");
  if (lev_series.size() != smoothed.size())
    throw PreconditionError("level series length differs from the smoothed series");
  const auto b = static_cast<std::size_t>(
      std::llround(static_cast<double>(smoothed.sample_rate_hz) / static_cast<double>(bitrate_bps)));
  const std::size_t nb = smoothed.size() / b;
  if (nb < 2) throw NoBackscatterDetected("fewer than two bit intervals");

  // Mean over the part of each bit the smoother leaves untouched.
  const std::size_t edge = std::min(params.smooth_window / 2, (b - 1) / 2);
  std::vector<double> cls(nb), lev(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    cls[k] = mean_of(smoothed.samples, k * b + edge, (k + 1) * b - edge);
    lev[k] = mean_of(lev_series.samples, k * b + edge, (k + 1) * b - edge);
  }

  const std::size_t c = params.context_bits;
  std::vector<double> threshold(nb, 0.0);
  std::vector<std::uint8_t> separable(nb, 0);
  std::size_t n_separable = 0;
  std::vector<double> ctx;
  for (std::size_t k = 0; k < nb; ++k) {
    const std::size_t lo = k >= c ? k - c : 0, hi = std::min(nb, k + c + 1);
    ctx.assign(cls.begin() + static_cast<std::ptrdiff_t>(lo), cls.begin() + static_cast<std::ptrdiff_t>(hi));
    const TwoMeans tm = two_means(ctx);
    const double pooled = std::sqrt(tm.sse / static_cast<double>(ctx.size()));
    if (tm.high - tm.low > params.separability_factor * pooled && tm.high > tm.low) {
      separable[k] = 1;
      ++n_separable;
      threshold[k] = 0.5 * (tm.low + tm.high);
    }
  }
  if (static_cast<double>(n_separable) < params.min_separable_fraction * static_cast<double>(nb) ||
      n_separable == 0)
    throw NoBackscatterDetected("no two-level backscatter signal (" + std::to_string(n_separable) +
                                " of " + std::to_string(nb) + " bit contexts separable)");
  fill_nearest(threshold, separable);

  Extraction out;
  auto& bs = out.stream;
  bs.sample_rate_hz = smoothed.sample_rate_hz;
  bs.samples_per_bit = b;
  bs.separable = separable;
  bs.decoded_bits.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) bs.decoded_bits[k] = cls[k] > threshold[k] ? 1 : 0;
  bs.bit_boundaries.resize(nb + 1);
  for (std::size_t k = 0; k <= nb; ++k) bs.bit_boundaries[k] = k * b;

  // Local reflecting / idle levels from each bit's context.
  std::vector<long double> pre_sum(nb + 1, 0.0L), pre_cnt(nb + 1, 0.0L);
  std::vector<long double> pre_sum0(nb + 1, 0.0L), pre_cnt0(nb + 1, 0.0L);
  const double ref = lev[0];
  for (std::size_t k = 0; k < nb; ++k) {
    const bool one = bs.decoded_bits[k] != 0;
    pre_sum[k + 1] = pre_sum[k] + (one ? lev[k] - ref : 0.0);
    pre_cnt[k + 1] = pre_cnt[k] + (one ? 1 : 0);
    pre_sum0[k + 1] = pre_sum0[k] + (one ? 0.0 : lev[k] - ref);
    pre_cnt0[k + 1] = pre_cnt0[k] + (one ? 0 : 1);
  }
  bs.high_db.assign(nb, 0.0);
  bs.low_db.assign(nb, 0.0);
  std::vector<std::uint8_t> has_high(nb, 0), has_low(nb, 0);
  for (std::size_t k = 0; k < nb; ++k) {
    const std::size_t lo = k >= c ? k - c : 0, hi = std::min(nb, k + c + 1);
    const long double n1 = pre_cnt[hi] - pre_cnt[lo], n0 = pre_cnt0[hi] - pre_cnt0[lo];
    if (n1 > 0) {
      bs.high_db[k] = ref + static_cast<double>((pre_sum[hi] - pre_sum[lo]) / n1);
      has_high[k] = 1;
    }
    if (n0 > 0) {
      bs.low_db[k] = ref + static_cast<double>((pre_sum0[hi] - pre_sum0[lo]) / n0);
      has_low[k] = 1;
    }
  }
  if (std::none_of(has_high.begin(), has_high.end(), [](auto v) { return v != 0; }) ||
      std::none_of(has_low.begin(), has_low.end(), [](auto v) { return v != 0; }))
    throw NoBackscatterDetected("decoded stream lacks one of the two levels");
  fill_nearest(bs.high_db, has_high);
  fill_nearest(bs.low_db, has_low);

  bs.reflection_power.resize(nb);
  for (std::size_t k = 0; k < nb; ++k)
    bs.reflection_power[k] = reflected_level_db(bs.high_db[k], bs.low_db[k]);

  // Lower each reflecting interval to its local idle level.
  std::vector<double> excess(lev_series.size(), 0.0);
  for (std::size_t k = 0; k < nb; ++k) {
    if (!bs.decoded_bits[k]) continue;
    std::fill(excess.begin() + static_cast<std::ptrdiff_t>(k * b),
              excess.begin() + static_cast<std::ptrdiff_t>((k + 1) * b), lev[k] - bs.low_db[k]);
  }
  const std::vector<double> excess_smoothed = moving_average(excess, params.smooth_window);
  std::vector<double> residual(lev_series.size());
  for (std::size_t i = 0; i < residual.size(); ++i)
    residual[i] = lev_series.samples[i] - excess_smoothed[i];
  out.residual = with_samples(lev_series, std::move(residual));
  return out;
}

MainPathTrace extract_trace(const SampleSeries& residual, std::size_t trace_window) {
  if (trace_window < 1) throw PreconditionError("trace window must be >= 1");
  if (residual.size() < trace_window) throw PreconditionError("residual shorter than the trace window");
  MainPathTrace trace;
  trace.window = trace_window;
  const std::size_t n = residual.size();
  trace.values.reserve((n + trace_window - 1) / trace_window);
  for (std::size_t begin = 0; begin < n; begin += trace_window)
    trace.values.push_back(mean_of(residual.samples, begin, std::min(n, begin + trace_window)));
  return trace;
}

MainPathTrace extract_trace(const SampleSeries& residual, std::size_t trace_window,
                            const std::vector<std::size_t>& positions, std::size_t original_length) {
  if (trace_window < 1) throw PreconditionError("trace window must be >= 1");
  if (positions.size() != residual.size()) throw PreconditionError("one position per residual sample required");
  if (residual.samples.empty()) throw PreconditionError("residual is empty");
  if (positions.back() >= original_length) throw PreconditionError("position beyond the original length");
  const std::size_t m = (original_length + trace_window - 1) / trace_window;
  std::vector<double> sum(m, 0.0);
  std::vector<std::size_t> count(m, 0);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (i > 0 && positions[i] <= positions[i - 1]) throw PreconditionError("positions must increase");
    sum[positions[i] / trace_window] += residual.samples[i];
    ++count[positions[i] / trace_window];
  }
  MainPathTrace trace;
  trace.window = trace_window;
  trace.values.assign(m, 0.0);
  std::size_t prev = m;  // last filled window
  for (std::size_t j = 0; j < m; ++j) {
    if (count[j] == 0) continue;
    trace.values[j] = sum[j] / static_cast<double>(count[j]);
    if (prev == m) {
      for (std::size_t k = 0; k < j; ++k) trace.values[k] = trace.values[j];
    } else {
      for (std::size_t k = prev + 1; k < j; ++k) {
        const double f = static_cast<double>(k - prev) / static_cast<double>(j - prev);
        trace.values[k] = trace.values[prev] + f * (trace.values[j] - trace.values[prev]);
      }
    }
    prev = j;
  }
  for (std::size_t k = prev + 1; k < m; ++k) trace.values[k] = trace.values[prev];
  return trace;
}

SlopeSeries slopes(const MainPathTrace& trace, const PipelineParams& params,
                   std::uint64_t sample_rate_hz, std::uint64_t bitrate_bps) {
  if (bitrate_bps == 0 || sample_rate_hz == 0) throw PreconditionError("rates must be positive");
  if (trace.window < 1) throw PreconditionError("trace window must be >= 1");
  const long long n_ll = std::llround(params.w_coeff * static_cast<double>(sample_rate_hz) /
                                      static_cast<double>(bitrate_bps));
  if (n_ll < 1) throw ConfigError("slope interval N must be >= 1");
  const auto N = static_cast<std::size_t>(n_ll);
  const std::vector<double>& x = trace.values;
  if (x.size() < 2 * N + 1) throw PreconditionError("trace shorter than 2N+1 points");

  SlopeSeries out;
  out.n = N;
  out.trace_rate_hz = static_cast<double>(sample_rate_hz) / static_cast<double>(trace.window);
  out.trace = x;
  const std::size_t count = x.size() - 2 * N;
  out.raw.resize(count);
  const double nn = static_cast<double>(N) * static_cast<double>(N);
  for (std::size_t n = 0; n < count; ++n) {
    double first = 0.0, second = 0.0;
    for (std::size_t i = n; i <= n + N; ++i) first += std::abs(x[i]);
    for (std::size_t i = n + N; i <= n + 2 * N; ++i) second += std::abs(x[i]);
    out.raw[n] = std::abs(second - first) / nn;
  }
  out.window_mean_diff.resize(count);
  out.db_per_s.resize(count);
  out.normalized.resize(count);
  const auto [lo, hi] = std::minmax_element(out.raw.begin(), out.raw.end());
  const double span = *hi - *lo;
  for (std::size_t n = 0; n < count; ++n) {
    out.window_mean_diff[n] = out.raw[n] * static_cast<double>(N);
    out.db_per_s[n] = out.raw[n] * out.trace_rate_hz;
    out.normalized[n] = span > 0.0 ? (out.raw[n] - *lo) / span : 0.0;
  }
  return out;
}

std::vector<StateMark> detect_states(const SlopeSeries& s, const PipelineParams& params) {
  std::vector<StateMark> marks;
  if (s.db_per_s.empty() || s.n == 0) return marks;
  const std::size_t N = s.n;
  const std::size_t len = s.trace.size();
  const std::size_t J = (s.db_per_s.size() - 1) / N + 1;

  std::vector<std::uint8_t> stable(J, 0);
  for (std::size_t j = 0; j < J;) {
    if (!(s.db_per_s[j * N] < params.slope_threshold_db)) {
      ++j;
      continue;
    }
    std::size_t e = j;
    while (e < J && s.db_per_s[e * N] < params.slope_threshold_db) ++e;
    if (e - j >= params.min_stable_intervals + 1) std::fill(stable.begin() + j, stable.begin() + e, 1);
    j = e;
  }

  // Decimated index j stands for trace points [jN + N/2, (j+1)N + N/2).
  auto span_begin = [&](std::size_t j) { return j == 0 ? 0 : j * N + N / 2; };
  auto span_end = [&](std::size_t j) { return j + 1 == J ? len : (j + 1) * N + N / 2; };
  for (std::size_t j = 0; j < J;) {
    std::size_t e = j;
    while (e < J && stable[e] == stable[j]) ++e;
    StateMark m;
    m.kind = stable[j] ? StateKind::Stable : StateKind::Varying;
    m.interval = {span_begin(j), span_end(e - 1)};
    m.mean_db = s.trace.empty() ? 0.0 : mean_of(s.trace, m.interval.begin, m.interval.end);
    marks.push_back(m);
    j = e;
  }
  return marks;
}

std::vector<MovementTriple> select_movement_states(const std::vector<StateMark>& states,
                                                   const MainPathTrace& trace,
                                                   const PipelineParams& params) {
  std::vector<MovementTriple> out;
  for (std::size_t i = 1; i + 1 < states.size(); ++i) {
    if (states[i].kind != StateKind::Varying || states[i - 1].kind != StateKind::Stable ||
        states[i + 1].kind != StateKind::Stable)
      continue;
    MovementTriple t{states[i - 1], states[i], states[i + 1]};
    for (StateMark* m : {&t.pre, &t.varying, &t.post}) {
      if (m->interval.end > trace.values.size() || m->interval.length() == 0)
        throw PreconditionError("state interval outside the trace");
      m->mean_db = mean_of(trace.values, m->interval.begin, m->interval.end);
    }
    if (std::abs(t.pre.mean_db - t.post.mean_db) > params.state_diff_threshold_db) out.push_back(t);
  }
  return out;
}

Variance segment_variance(const std::vector<double>& segment) {
  const std::size_t n = segment.size();
  if (n < 2) throw PreconditionError("segment needs at least two values");
  double mean = 0.0;
  for (double x : segment) mean += std::abs(x);
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : segment) var += (std::abs(x) - mean) * (std::abs(x) - mean);
  Variance out;
  out.raw = var / static_cast<double>(n);

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : segment) {
    lo = std::min(lo, std::abs(x));
    hi = std::max(hi, std::abs(x));
  }
  if (hi > lo) {
    double nm = 0.0;
    for (double x : segment) nm += (std::abs(x) - lo) / (hi - lo);
    nm /= static_cast<double>(n);
    double nv = 0.0;
    for (double x : segment) {
      const double d = (std::abs(x) - lo) / (hi - lo) - nm;
      nv += d * d;
    }
    out.normalized = nv / static_cast<double>(n);
  }
  return out;
}

std::vector<SegmentGroup> segment_and_group(const BackscatterStream& bs,
                                            const std::vector<MovementTriple>& triples,
                                            std::size_t trace_window, const PipelineParams& params,
                                            std::vector<std::string>* diagnostics) {
  const std::size_t b = bs.samples_per_bit;
  const std::size_t nb = bs.reflection_power.size();
  if (b == 0) throw PreconditionError("backscatter stream has no bit interval");
  if (trace_window == 0) throw PreconditionError("trace window must be >= 1");
  std::size_t limit_bits = 0;
  if (params.segment_limit_samples > 0) {
    limit_bits = params.segment_limit_samples / b;
    if (limit_bits == 0) throw PreconditionError("segment limit shorter than one bit interval");
  }

  const auto& pos = bs.positions;
  if (!pos.empty() && pos.size() < nb * b) throw PreconditionError("positions do not cover every bit");
  auto bit_start = [&](std::size_t k) { return pos.empty() ? k * b : pos[k * b]; };
  auto bit_end = [&](std::size_t k) { return pos.empty() ? (k + 1) * b : pos[(k + 1) * b - 1] + 1; };
  // first bit starting at or after s, one past the last bit ending at or before e
  auto first_bit = [&](std::size_t s) {
    std::size_t lo = 0, hi = nb;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (bit_start(mid) < s) lo = mid + 1; else hi = mid;
    }
    return lo;
  };
  auto end_bit = [&](std::size_t e) {
    std::size_t lo = 0, hi = nb;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (bit_end(mid) <= e) lo = mid + 1; else hi = mid;
    }
    return lo;
  };
  auto bits_inside = [&](const Interval& trace_iv) {
    const std::size_t first = first_bit(trace_iv.begin * trace_window);
    const std::size_t last = end_bit(trace_iv.end * trace_window);
    return first < last ? Interval{first, last} : Interval{first, first};
  };
  auto values = [&](const Interval& bits) {
    return std::vector<double>(bs.reflection_power.begin() + static_cast<std::ptrdiff_t>(bits.begin),
                               bs.reflection_power.begin() + static_cast<std::ptrdiff_t>(bits.end));
  };
  auto separable_share = [&](const Interval& bits) {
    if (bs.separable.size() < bits.end) return 1.0;
    const auto n = std::count(bs.separable.begin() + static_cast<std::ptrdiff_t>(bits.begin),
                              bs.separable.begin() + static_cast<std::ptrdiff_t>(bits.end), 1);
    return static_cast<double>(n) / static_cast<double>(bits.length());
  };
  // The variance takes |x|; referencing to just below the minimum makes it the identity.
  auto variance = [](const std::vector<double>& v) {
    const double m = *std::min_element(v.begin(), v.end());
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i] - m + 1.0;
    return segment_variance(r).raw;
  };

  std::vector<SegmentGroup> groups;
  for (std::size_t t = 0; t < triples.size(); ++t) {
    const auto& tr = triples[t];
    Interval pre = bits_inside(tr.pre.interval), post = bits_inside(tr.post.interval);
    if (limit_bits > 0) {
      if (pre.length() > limit_bits) pre.begin = pre.end - limit_bits;
      if (post.length() > limit_bits) post.end = post.begin + limit_bits;
    }
    if (pre.length() < 2 || post.length() < 2) {
      if (diagnostics)
        diagnostics->push_back("movement " + std::to_string(t) +
                               ": stable segment holds fewer than two bit intervals, skipped");
      continue;
    }
    if (separable_share(pre) < params.min_separable_fraction ||
        separable_share(post) < params.min_separable_fraction) {
      if (diagnostics)
        diagnostics->push_back("movement " + std::to_string(t) +
                               ": no two-level backscatter in a stable segment, skipped");
      continue;
    }
    SegmentGroup g;
    g.pre_bits = pre;
    g.post_bits = post;
    g.pre = {bit_start(pre.begin), bit_end(pre.end - 1)};
    g.post = {bit_start(post.begin), bit_end(post.end - 1)};
    g.movement = {tr.varying.interval.begin * trace_window, tr.varying.interval.end * trace_window};
    g.pre_values = values(pre);
    g.post_values = values(post);
    g.pre_mean_db = mean_of(g.pre_values, 0, g.pre_values.size());
    g.post_mean_db = mean_of(g.post_values, 0, g.post_values.size());
    g.pre_var = variance(g.pre_values);
    g.post_var = variance(g.post_values);
    groups.push_back(std::move(g));
  }

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& g : groups) {
    lo = std::min({lo, g.pre_var, g.post_var});
    hi = std::max({hi, g.pre_var, g.post_var});
  }
  for (auto& g : groups) {
    g.pre_var_norm = hi > lo ? (g.pre_var - lo) / (hi - lo) : 0.0;
    g.post_var_norm = hi > lo ? (g.post_var - lo) / (hi - lo) : 0.0;
  }
  return groups;
}

SegmentClasses classify_powerful(const SegmentGroup& group, const PipelineParams& params) {
  SegmentClasses c;
  if (std::sqrt(group.pre_var) > params.variance_threshold_db) c.pre = SegmentClass::Fast;
  if (std::sqrt(group.post_var) > params.variance_threshold_db) c.post = SegmentClass::Fast;
  return c;
}

GroupVerdict authenticate_group(const SegmentGroup& group, const PipelineParams& params) {
  if (classify_powerful(group, params).powerful()) return GroupVerdict::PowerfulAttacker;
  return std::abs(group.pre_mean_db - group.post_mean_db) > params.auth_threshold_db
             ? GroupVerdict::OnBody
             : GroupVerdict::Attacker;
}

FinalVerdict majority_vote(const std::vector<GroupVerdict>& votes) {
  const auto on = static_cast<std::size_t>(std::count(votes.begin(), votes.end(), GroupVerdict::OnBody));
  const std::size_t off = votes.size() - on;
  if (on > off) return FinalVerdict::OnBody;
  if (off > on) return FinalVerdict::Attacker;
  return FinalVerdict::Inconclusive;
}

Analysis analyze(const SampleSeries& series, std::uint64_t bitrate_bps, const PipelineParams& params) {
  params.validate();
  series.validate();
  if (bitrate_bps == 0) throw PreconditionError("bitrate must be positive");
  Analysis a;
  a.sample_rate_hz = series.sample_rate_hz;
  a.bitrate_bps = bitrate_bps;

  // Drop transmitter-off gaps so every window only sees received packets.
  SampleSeries work;
  std::vector<std::size_t> kept;
  {
    std::vector<double> sorted = series.samples;
    const auto rank = static_cast<std::size_t>(std::floor(0.999 * static_cast<double>(sorted.size() - 1)));
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank), sorted.end());
    const double gate = sorted[rank] - params.gate_drop_db;
    std::size_t active = 0;
    for (double x : series.samples) active += x > gate ? 1 : 0;
    if (active < series.size()) {
      std::vector<double> kept_values;
      kept_values.reserve(active);
      kept.reserve(active);
      for (std::size_t i = 0; i < series.size(); ++i) {
        if (series.samples[i] > gate) {
          kept_values.push_back(series.samples[i]);
          kept.push_back(i);
        }
      }
      a.diagnostics.push_back("gated " + std::to_string(series.size() - active) +
                              " transmitter-off samples");
      work = with_samples(series, std::move(kept_values));
    } else {
      work = series;
    }
  }
  if (work.size() < params.smooth_window)
    throw PreconditionError("series shorter than the smoothing window");

  const SampleSeries levels = with_samples(work, moving_average(work.samples, params.smooth_window));
  const bool drift = drifting(work, params);
  const SampleSeries detr =
      drift ? with_samples(work, moving_average(detrended(work, params), params.smooth_window)) : SampleSeries{};
  try {
    a.extraction = extract_backscatter(drift ? detr : levels, bitrate_bps, params, &levels);
  } catch (const NoBackscatterDetected& e) {
    a.diagnostics.push_back(std::string("no backscatter detected: ") + e.what());
    return a;
  }
  a.backscatter_found = true;
  a.extraction.stream.positions = kept;

  const std::size_t tw = params.trace_window ? params.trace_window : a.extraction.stream.samples_per_bit;
  if (a.extraction.residual.size() < tw) {
    a.diagnostics.push_back("series shorter than one trace window");
    return a;
  }
  a.trace = kept.empty() ? extract_trace(a.extraction.residual, tw)
                         : extract_trace(a.extraction.residual, tw, kept, series.size());

  // Slopes see the trace referenced to just below its minimum, so |x| is the identity.
  MainPathTrace referenced = a.trace;
  const double lowest = *std::min_element(referenced.values.begin(), referenced.values.end());
  for (double& v : referenced.values) v = v - lowest + 1.0;
  try {
    a.slopes = slopes(referenced, params, a.sample_rate_hz, bitrate_bps);
  } catch (const PreconditionError& e) {
    a.diagnostics.push_back(std::string("movement detection skipped: ") + e.what());
    return a;
  }
  a.states = detect_states(a.slopes, params);
  a.triples = select_movement_states(a.states, a.trace, params);
  return a;
}

Verdict regroup(const Analysis& a, const PipelineParams& params) {
  Verdict v;
  v.diagnostics = a.diagnostics;
  if (!a.backscatter_found) return v;
  v.groups = segment_and_group(a.extraction.stream, a.triples, a.trace.window, params, &v.diagnostics);
  for (const auto& g : v.groups) v.per_group.push_back(authenticate_group(g, params));
  v.groups_used = v.groups.size();
  v.final = majority_vote(v.per_group);
  if (v.groups_used == 0) v.diagnostics.push_back("no usable movement groups");
  return v;
}

Verdict authenticate(const SampleSeries& series, std::uint64_t bitrate_bps, const PipelineParams& params) {
  return regroup(analyze(series, bitrate_bps, params), params);
}

}  // namespace scatterguard
