#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "heatcast/errors.hpp"

// Heat index math: relative humidity (Magnus form), discomfort index,
// psychrometric wet-bulb temperature (Bernard's vapour-pressure balance)
// and indoor wet-bulb globe temperature. All in degrees Celsius, double
// precision, pure functions.

namespace heatcast {

enum class IndexKind { DI, WBGTid };

struct IndexValue {
  IndexKind kind;
  double value;  // degC
};

// Air temperature / dew point pair. Valid when both are finite, inside
// [-60, 60] degC and td <= t; construction rejects anything else.
struct ThermoPair {
  double t;   // air temperature, degC
  double td;  // dew point temperature, degC

  static constexpr double kMinC = -60.0;
  static constexpr double kMaxC = 60.0;

  ThermoPair(double t_, double td_) : t(t_), td(td_) {
    if (!std::isfinite(t) || !std::isfinite(td)) {
      throw DataError("ThermoPair: non-finite input");
    }
    if (t < kMinC || t > kMaxC || td < kMinC || td > kMaxC) {
      throw DataError("ThermoPair: temperature outside [-60, 60] degC: t=" +
                      std::to_string(t) + " td=" + std::to_string(td));
    }
    if (td > t) {
      throw DataError("ThermoPair: dew point above temperature (td=" +
                      std::to_string(td) + " > t=" + std::to_string(t) + ")");
    }
  }
};

// Relative humidity (%) from the Magnus formula; strictly increasing in td,
// strictly decreasing in t, equal to 100 at saturation.
inline double relative_humidity(const ThermoPair& p) {
  constexpr double a = 17.62;
  constexpr double b = 243.12;
  const double hr =
      100.0 * std::exp(a * p.td / (b + p.td) - a * p.t / (b + p.t));
  return std::min(hr, 100.0);  // guard the td ~ t rounding edge
}

// Discomfort index from temperature and relative humidity.
inline IndexValue discomfort_from_rh(double t, double hr) {
  if (!(hr > 0.0 && hr <= 100.0)) {
    throw DataError("discomfort_from_rh: humidity outside (0, 100]: " +
                    std::to_string(hr));
  }
  return {IndexKind::DI, t - 0.0055 * (100.0 - hr) * (t - 14.5)};
}

namespace detail {

// Saturation vapour pressure (hPa) used by Bernard's balance.
inline double saturation_vapour_pressure(double tc) {
  return 6.106 * std::exp(17.27 * tc / (237.3 + tc));
}

// Residual of Bernard's balance at candidate wet-bulb temperature x.
// Positive at x = td, negative at x = t, strictly bracketing the root.
inline double bernard_residual(double t, double td, double x) {
  const double pd = saturation_vapour_pressure(td);
  const double pw = saturation_vapour_pressure(x);
  return 1556.0 * pd - 1.484 * pd * x - 1556.0 * pw + 1.484 * pw * x +
         1010.0 * (t - x);
}

}  // namespace detail

// Psychrometric wet-bulb temperature: the root of Bernard's balance,
// bracketed in [td, t]. Bisection until the bracket collapses below
// 1e-13 degC (residual then far below the 1e-8 contract).
inline double psychrometric_wet_bulb(const ThermoPair& p) {
  if (p.td == p.t) return p.t;  // saturated: residual is exactly zero
  double lo = p.td, hi = p.t;
  double flo = detail::bernard_residual(p.t, p.td, lo);
  if (flo <= 0.0) return lo;
  constexpr int kMaxIter = 200;
  constexpr double kXTol = 1e-13;
  for (int i = 0; i < kMaxIter && hi - lo > kXTol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = detail::bernard_residual(p.t, p.td, mid);
    if (fm > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double root = 0.5 * (lo + hi);
  if (std::fabs(detail::bernard_residual(p.t, p.td, root)) >= 1e-8) {
    throw NumericError("psychrometric_wet_bulb: residual tolerance not met");
  }
  return root;
}

// Indoor wet-bulb globe temperature: 0.67 * wet bulb + 0.33 * temperature.
inline IndexValue wbgt_indoor(const ThermoPair& p) {
  return {IndexKind::WBGTid, 0.67 * psychrometric_wet_bulb(p) + 0.33 * p.t};
}

struct HeatIndices {
  IndexValue di;
  IndexValue wbgt;
};

inline HeatIndices heat_indices(const ThermoPair& p) {
  return {discomfort_from_rh(p.t, relative_humidity(p)), wbgt_indoor(p)};
}

}  // namespace heatcast
