#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "heatcast/data.hpp"
#include "heatcast/date.hpp"
#include "heatcast/errors.hpp"
#include "heatcast/rng.hpp"

// Synthetic station network and forecast/observation generator, a stand-in
// for operational ensemble data at desk scale. Everything is derived from a
// single seed through keyed streams, so output is reproducible and
// independent of generation order.
//
// Per station and day a latent "truth" is a seasonal sinusoid plus AR(1)
// anomaly. Observations are truth plus noise; members are truth plus bias
// plus dispersion-scaled noise drawn with the same T/TD correlation. With
// bias 0 and dispersion 1 the observation is exchangeable with the members,
// so rank histograms are uniform. Member values are emitted at model
// elevation (the lapse-rate offset is subtracted) so that the pipeline's
// orographic correction restores station level.

namespace heatcast {

struct SynthConfig {
  int stations = 20;
  Date start_date = Date::from_ymd(2017, 5, 15);
  int days = 120;
  int members = 10;
  int max_lead = 5;
  double bias = 0.0;        // degC added to every member
  double dispersion = 1.0;  // member noise scale relative to obs noise
  double t_td_correlation = 0.6;
  double sigma = 1.5;       // obs / member base noise sd (degC)
  double lead_growth = 0.0; // extra member noise fraction per lead day
  std::uint64_t seed = 1;

  double lat_min = 35.0, lat_max = 65.0;
  double lon_min = -12.5, lon_max = 42.5;

  void validate() const {
    if (stations < 1) throw ConfigError("synth: stations must be >= 1");
    if (days < 2) throw ConfigError("synth: days must be >= 2");
    if (members < 2) throw ConfigError("synth: members must be >= 2");
    if (max_lead < 1 || max_lead > 15) {
      throw ConfigError("synth: max_lead must be in [1,15]");
    }
    if (!(t_td_correlation >= -1.0 && t_td_correlation <= 1.0)) {
      throw ConfigError("synth: t_td_correlation must be in [-1,1]");
    }
    if (!(sigma > 0.0)) throw ConfigError("synth: sigma must be > 0");
    if (!(dispersion >= 0.0)) {
      throw ConfigError("synth: dispersion must be >= 0");
    }
    if (lead_growth < 0.0) {
      throw ConfigError("synth: lead_growth must be >= 0");
    }
    if (!(lat_min < lat_max) || !(lon_min < lon_max)) {
      throw ConfigError("synth: empty coordinate domain");
    }
  }
};

struct SynthData {
  std::vector<StationRecord> stations;
  std::vector<EnsembleForecast> forecasts;  // T and TD at model level
  std::vector<Observation> observations;    // T and TD at station level
};

namespace synth_detail {

struct StationTraits {
  double base;        // mean summer temperature
  double amplitude;   // seasonal amplitude
  double depression;  // mean T - TD gap
  double ar_coeff;
  double ar_sd;
};

inline StationTraits station_traits(const SeedSequence& seeds,
                                    std::uint64_t s) {
  RngStream rng = seeds.stream("synth/traits", s);
  StationTraits t;
  t.base = 16.0 + 10.0 * rng.uniform();
  t.amplitude = 4.0 + 3.0 * rng.uniform();
  t.depression = 3.0 + 5.0 * rng.uniform();
  t.ar_coeff = 0.7;
  t.ar_sd = 1.8;
  return t;
}

}  // namespace synth_detail

inline SynthData synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  const SeedSequence seeds(cfg.seed);
  SynthData out;

  // Stations.
  for (int s = 0; s < cfg.stations; ++s) {
    RngStream rng = seeds.stream("synth/station", s);
    StationRecord rec;
    char buf[16];
    std::snprintf(buf, sizeof buf, "S%03d", s + 1);
    rec.id = buf;
    rec.lat = cfg.lat_min + (cfg.lat_max - cfg.lat_min) * rng.uniform();
    rec.lon = cfg.lon_min + (cfg.lon_max - cfg.lon_min) * rng.uniform();
    rec.elev_station = 1500.0 * rng.uniform();
    rec.elev_model = rec.elev_station + 300.0 * (rng.uniform() - 0.5);
    out.stations.push_back(rec);
  }

  // Latent truth per station/day; the AR(1) anomaly stream is sequential in
  // the day index by construction.
  std::vector<std::vector<double>> truth_t(cfg.stations);
  std::vector<std::vector<double>> truth_td(cfg.stations);
  for (int s = 0; s < cfg.stations; ++s) {
    const synth_detail::StationTraits tr =
        synth_detail::station_traits(seeds, s);
    RngStream rng = seeds.stream("synth/center", s);
    truth_t[s].resize(cfg.days);
    truth_td[s].resize(cfg.days);
    double anomaly =
        rng.normal() * tr.ar_sd;  // stationary start
    for (int d = 0; d < cfg.days; ++d) {
      if (d > 0) {
        anomaly = tr.ar_coeff * anomaly +
                  std::sqrt(1.0 - tr.ar_coeff * tr.ar_coeff) * tr.ar_sd *
                      rng.normal();
      }
      const int doy = static_cast<int>(((cfg.start_date + d).serial()) % 365);
      const double seasonal =
          tr.amplitude * std::sin(2.0 * 3.14159265358979323846 *
                                  (doy - 110) / 365.0);
      truth_t[s][d] = tr.base + seasonal + anomaly;
      truth_td[s][d] = truth_t[s][d] - tr.depression;
    }
  }

  const double rho = cfg.t_td_correlation;
  const double rho_c = std::sqrt(1.0 - rho * rho);
  auto correlated_pair = [&](RngStream& rng) {
    const double z1 = rng.normal();
    const double z2 = rho * z1 + rho_c * rng.normal();
    return std::pair<double, double>(z1, z2);
  };

  // Observations: truth + noise, dew point clamped to temperature.
  for (int s = 0; s < cfg.stations; ++s) {
    for (int d = 0; d < cfg.days; ++d) {
      RngStream rng = seeds.stream("synth/obs", s, d);
      const auto [zt, ztd] = correlated_pair(rng);
      const double ot = truth_t[s][d] + cfg.sigma * zt;
      const double otd =
          std::min(truth_td[s][d] + cfg.sigma * ztd, ot);
      const Date date = cfg.start_date + d;
      out.observations.push_back({out.stations[s].id, date, Variable::T, ot});
      out.observations.push_back(
          {out.stations[s].id, date, Variable::TD, otd});
    }
  }

  // Forecasts: members at model level for every init/lead with a valid date
  // inside the covered period.
  for (int s = 0; s < cfg.stations; ++s) {
    const double lapse = 0.0065 * out.stations[s].elevation_difference();
    for (int init = 0; init < cfg.days; ++init) {
      for (int lead = 1; lead <= cfg.max_lead; ++lead) {
        const int valid = init + lead;
        if (valid >= cfg.days) break;
        RngStream rng = seeds.stream(
            "synth/member", s,
            static_cast<std::uint64_t>(init) * 32 + lead);
        const double scale =
            cfg.dispersion * (1.0 + cfg.lead_growth * (lead - 1));
        EnsembleForecast ft{out.stations[s].id, cfg.start_date + init, lead,
                            Variable::T, {}};
        EnsembleForecast ftd{out.stations[s].id, cfg.start_date + init, lead,
                             Variable::TD, {}};
        ft.members.reserve(cfg.members);
        ftd.members.reserve(cfg.members);
        for (int k = 0; k < cfg.members; ++k) {
          const auto [zt, ztd] = correlated_pair(rng);
          ft.members.push_back(truth_t[s][valid] + cfg.bias +
                               scale * cfg.sigma * zt - lapse);
          ftd.members.push_back(truth_td[s][valid] + cfg.bias +
                                scale * cfg.sigma * ztd - lapse);
        }
        out.forecasts.push_back(std::move(ft));
        out.forecasts.push_back(std::move(ftd));
      }
    }
  }

  return out;
}

}  // namespace heatcast
