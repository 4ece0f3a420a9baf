// Brute-force reference implementations used only by the tests. They follow
// the definitions literally and share no code with the library.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

// Slope: |sum_{i=n+N}^{n+2N} |x(i)| - sum_{i=n}^{n+N} |x(i)|| / N^2.
inline std::vector<double> slope_raw(const std::vector<double>& x, std::size_t N) {
  std::vector<double> out;
  for (std::size_t n = 0; n + 2 * N < x.size(); ++n) {
    double a = 0.0, b = 0.0;
    for (std::size_t i = n; i <= n + N; ++i) a += std::fabs(x[i]);
    for (std::size_t i = n + N; i <= n + 2 * N; ++i) b += std::fabs(x[i]);
    out.push_back(std::fabs(b - a) / (static_cast<double>(N) * static_cast<double>(N)));
  }
  return out;
}

// Variance: sum(|x| - mean|x|)^2 / N.
inline double variance(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += std::fabs(v);
  mean /= static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (std::fabs(v) - mean) * (std::fabs(v) - mean);
  return acc / static_cast<double>(x.size());
}

// Centered moving average by direct summation with shrunken edge windows.
inline std::vector<double> moving_average(const std::vector<double>& x, std::size_t w) {
  const long n = static_cast<long>(x.size());
  std::vector<double> out(x.size());
  for (long i = 0; i < n; ++i) {
    const long lo = std::max(0L, i - static_cast<long>(w / 2));
    const long hi = std::min(n, i - static_cast<long>(w / 2) + static_cast<long>(w));
    long double s = 0.0L;
    for (long k = lo; k < hi; ++k) s += x[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(i)] = static_cast<double>(s / (hi - lo));
  }
  return out;
}

struct Mark {
  bool stable;
  std::size_t begin, end;
};

// Stable-state scan: decimated index j (every N-th slope value) is stable when
// some window of min_stable+1 consecutive decimated values containing j lies
// entirely below the threshold. Trace point t belongs to the decimated index
// whose centre jN+N is nearest from below, i.e. spans [jN+N/2, (j+1)N+N/2),
// with the first and last spans stretched to the trace ends.
inline std::vector<Mark> states(const std::vector<double>& db_per_s, std::size_t N, double threshold,
                                std::size_t min_stable, std::size_t trace_len) {
  std::vector<double> dec;
  for (std::size_t n = 0; n < db_per_s.size(); n += N) dec.push_back(db_per_s[n]);
  const std::size_t J = dec.size(), need = min_stable + 1;
  std::vector<bool> stable(J, false);
  for (std::size_t a = 0; a + need <= J; ++a) {
    bool all = true;
    for (std::size_t j = a; j < a + need; ++j) all = all && dec[j] < threshold;
    if (all)
      for (std::size_t j = a; j < a + need; ++j) stable[j] = true;
  }
  std::vector<bool> point(trace_len);
  for (std::size_t t = 0; t < trace_len; ++t) {
    std::size_t j = t < N + N / 2 ? 0 : (t - N / 2) / N;
    if (j >= J) j = J - 1;
    point[t] = stable[j];
  }
  std::vector<Mark> marks;
  for (std::size_t t = 0; t < trace_len; ++t) {
    if (marks.empty() || marks.back().stable != point[t]) marks.push_back({point[t], t, t + 1});
    else marks.back().end = t + 1;
  }
  return marks;
}

}  // namespace oracle
