#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "heatcast/date.hpp"
#include "heatcast/errors.hpp"
#include "heatcast/indices.hpp"
#include "heatcast/rng.hpp"
#include "heatcast/stats.hpp"

// Data model and the forecast adjustment steps: orographic correction,
// elevation-dependent spread adjustment with rank-preserving reordering,
// the dew point consistency clamp, and member-wise index derivation.

namespace heatcast {

enum class Variable { T, TD, DI, WBGTID };

inline std::string variable_name(Variable v) {
  switch (v) {
    case Variable::T: return "T";
    case Variable::TD: return "TD";
    case Variable::DI: return "DI";
    case Variable::WBGTID: return "WBGTID";
  }
  throw DataError("unknown variable");
}

inline Variable variable_from_name(const std::string& s) {
  if (s == "T") return Variable::T;
  if (s == "TD") return Variable::TD;
  if (s == "DI") return Variable::DI;
  if (s == "WBGTID") return Variable::WBGTID;
  throw DataError("unknown variable name: '" + s + "'");
}

struct StationRecord {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
  double elev_station = 0.0;
  double elev_model = 0.0;

  double elevation_difference() const { return elev_model - elev_station; }
};

struct EnsembleForecast {
  std::string station_id;
  Date init_date;
  int lead_days = 1;
  Variable variable = Variable::T;
  std::vector<double> members;  // order carries the ECC rank structure

  Date valid_date() const { return init_date + lead_days; }
};

struct Observation {
  std::string station_id;
  Date valid_date;
  Variable variable = Variable::T;
  double value = 0.0;
};

struct ClimatologyStats {
  double mean = 0.0;
  double variance = 0.0;
  bool skewness_defined = false;
  double skewness = 0.0;
  std::size_t count = 0;
};

// Constant lapse-rate correction for the station/model elevation mismatch:
// adds 0.0065 degC per metre of (model - station) elevation.
inline EnsembleForecast orographic_correction(EnsembleForecast f,
                                              const StationRecord& s) {
  if (f.variable != Variable::T && f.variable != Variable::TD) {
    throw DataError("orographic_correction: only T and TD are corrected");
  }
  const double offset = 0.0065 * s.elevation_difference();
  for (double& m : f.members) m += offset;
  return f;
}

// Standard deviation of the representativeness perturbation as a function
// of the elevation difference.
inline double spread_sigma(double delta_e) {
  return 0.75 + 0.18 * std::pow(std::fabs(delta_e), 0.25);
}

// Adds an independent centered Gaussian draw (sd = spread_sigma) to every
// member, then reorders the perturbed values so their ranks match the raw
// members' ranks. sigma_override < 0 means "use spread_sigma(delta_e)".
inline EnsembleForecast adjust_ensemble(EnsembleForecast f,
                                        const StationRecord& s, RngStream& rng,
                                        double sigma_override = -1.0) {
  if (f.variable != Variable::T && f.variable != Variable::TD) {
    throw DataError("adjust_ensemble: only T and TD are adjusted");
  }
  const double sd = sigma_override >= 0.0
                        ? sigma_override
                        : spread_sigma(s.elevation_difference());
  std::vector<double> perturbed(f.members.size());
  for (std::size_t k = 0; k < f.members.size(); ++k) {
    perturbed[k] = f.members[k] + sd * rng.normal();
  }
  std::sort(perturbed.begin(), perturbed.end());
  const std::vector<int> rank = stable_ranks(f.members);
  for (std::size_t k = 0; k < f.members.size(); ++k) {
    f.members[k] = perturbed[rank[k] - 1];
  }
  return f;
}

// Member-wise dew point clamp: td' = min(td, t). Idempotent.
inline std::vector<double> consistency_clamp(std::span<const double> t_members,
                                             std::span<const double> td_members) {
  if (t_members.size() != td_members.size()) {
    throw DataError("consistency_clamp: member count mismatch");
  }
  std::vector<double> out(td_members.begin(), td_members.end());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::min(out[k], t_members[k]);
  }
  return out;
}

// Fraction of members a clamp would change; the paper-scale expectation is
// a few percent, reported for diagnostics.
inline double clamp_fraction(std::span<const double> t_members,
                             std::span<const double> td_members) {
  if (t_members.size() != td_members.size()) {
    throw DataError("clamp_fraction: member count mismatch");
  }
  std::size_t n = 0;
  for (std::size_t k = 0; k < t_members.size(); ++k) {
    if (td_members[k] > t_members[k]) ++n;
  }
  return static_cast<double>(n) / static_cast<double>(t_members.size());
}

struct IndexForecasts {
  EnsembleForecast di;
  EnsembleForecast wbgt;
};

// Member-wise DI / WBGTid derivation from paired T and TD forecasts. The
// clamp must have been applied first; inconsistent pairs are rejected by
// the index math.
inline IndexForecasts derive_index_forecasts(const EnsembleForecast& tf,
                                             const EnsembleForecast& tdf) {
  if (tf.variable != Variable::T || tdf.variable != Variable::TD) {
    throw DataError("derive_index_forecasts: expected a (T, TD) pair");
  }
  if (tf.station_id != tdf.station_id ||
      tf.init_date.serial() != tdf.init_date.serial() ||
      tf.lead_days != tdf.lead_days) {
    throw DataError("derive_index_forecasts: forecasts are not the same case");
  }
  if (tf.members.size() != tdf.members.size() || tf.members.empty()) {
    throw DataError("derive_index_forecasts: member count mismatch");
  }
  IndexForecasts out;
  out.di = {tf.station_id, tf.init_date, tf.lead_days, Variable::DI, {}};
  out.wbgt = {tf.station_id, tf.init_date, tf.lead_days, Variable::WBGTID, {}};
  out.di.members.reserve(tf.members.size());
  out.wbgt.members.reserve(tf.members.size());
  for (std::size_t k = 0; k < tf.members.size(); ++k) {
    const HeatIndices hi =
        heat_indices(ThermoPair(tf.members[k], tdf.members[k]));
    out.di.members.push_back(hi.di.value);
    out.wbgt.members.push_back(hi.wbgt.value);
  }
  return out;
}

// Sample mean, unbiased variance and (biased-form) sample skewness.
inline ClimatologyStats climatology_stats(std::span<const double> values) {
  if (values.size() < 3) {
    throw DataError("climatology_stats: need at least 3 observations");
  }
  const MomentStats m = moment_stats(values);
  ClimatologyStats out;
  out.mean = m.mean;
  out.variance = m.variance;
  out.count = values.size();
  if (m.skewness.has_value()) {
    out.skewness_defined = true;
    out.skewness = *m.skewness;
  }
  return out;
}

}  // namespace heatcast
