#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "heatcast/errors.hpp"

namespace heatcast {

// Compensated (Kahan) accumulator. Several score identities in the test
// suite compare two algebraic routes to ~1e-12, which plain summation over
// 10^6 terms does not reliably hold.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

inline double mean(std::span<const double> xs) {
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value() / static_cast<double>(xs.size());
}

// Unbiased (1/(n-1)) sample variance.
inline double variance(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) throw DataError("variance needs at least 2 values");
  const double m = mean(xs);
  KahanSum s;
  for (double x : xs) s.add((x - m) * (x - m));
  return s.value() / static_cast<double>(n - 1);
}

inline double covariance(std::span<const double> xs,
                         std::span<const double> ys) {
  const std::size_t n = xs.size();
  if (n != ys.size() || n < 2) throw DataError("covariance needs paired data");
  const double mx = mean(xs), my = mean(ys);
  KahanSum s;
  for (std::size_t i = 0; i < n; ++i) s.add((xs[i] - mx) * (ys[i] - my));
  return s.value() / static_cast<double>(n - 1);
}

// Empirical quantile with midpoint plotting positions p_i = (i - 1/2)/n and
// linear interpolation between order statistics. With n = 10 the grid
// 5%,15%,...,95% lands exactly on the sorted values.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 0) throw DataError("quantile of empty sample");
  if (n == 1) return sorted[0];
  const double h = p * static_cast<double>(n) - 0.5;
  if (h <= 0.0) return sorted.front();
  if (h >= static_cast<double>(n - 1)) return sorted.back();
  const std::size_t i = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

inline double quantile(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  return quantile_sorted(xs, p);
}

// Ranks with ties broken by position (stable): rank[k] is the position of
// element k in the sorted order, 1-based. A permutation of 1..n.
inline std::vector<int> stable_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<int> rank(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    rank[idx[pos]] = static_cast<int>(pos) + 1;
  }
  return rank;
}

// Midranks: ties share the average of the positions they occupy.
inline std::vector<double> midranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> rank(n);
  std::size_t pos = 0;
  while (pos < n) {
    std::size_t end = pos;
    while (end + 1 < n && xs[idx[end + 1]] == xs[idx[pos]]) ++end;
    const double r = 0.5 * static_cast<double>(pos + end) + 1.0;
    for (std::size_t j = pos; j <= end; ++j) rank[idx[j]] = r;
    pos = end + 1;
  }
  return rank;
}

inline double spearman_correlation(std::span<const double> xs,
                                   std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw DataError("spearman needs paired data");
  }
  const std::vector<double> rx = midranks(xs);
  const std::vector<double> ry = midranks(ys);
  const double sx = std::sqrt(variance(rx));
  const double sy = std::sqrt(variance(ry));
  if (sx == 0.0 || sy == 0.0) throw DataError("spearman of constant series");
  return covariance(rx, ry) / (sx * sy);
}

struct MomentStats {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  std::optional<double> skewness;  // third standardized moment (biased form)
};

inline MomentStats moment_stats(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 3) throw DataError("moment statistics need at least 3 values");
  const double m = mean(xs);
  KahanSum s2, s3;
  for (double x : xs) {
    const double d = x - m;
    s2.add(d * d);
    s3.add(d * d * d);
  }
  const double nd = static_cast<double>(n);
  MomentStats out;
  out.mean = m;
  out.variance = s2.value() / (nd - 1.0);
  const double m2 = s2.value() / nd;
  if (m2 > 0.0) {
    out.skewness = (s3.value() / nd) / std::pow(m2, 1.5);
  }
  return out;
}

}  // namespace heatcast
