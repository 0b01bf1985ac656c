#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "heatcast/date.hpp"
#include "heatcast/errors.hpp"
#include "heatcast/rng.hpp"
#include "heatcast/stats.hpp"

// Training-set machinery: rolling windows, station feature vectors for
// semi-local estimation, k-means clustering, and the lead-time-dependent
// grouping schedules.

namespace heatcast {

constexpr int kMaxLead = 15;

// ---------------------------------------------------------------------------
// Rolling windows

struct TrainingWindow {
  Date target_date;
  int length_days = 60;

  // Calendar days covered: [target - length, target - 1].
  std::vector<Date> dates() const {
    std::vector<Date> out;
    out.reserve(length_days);
    for (int d = length_days; d >= 1; --d) {
      out.push_back(target_date - d);
    }
    return out;
  }
  Date first() const { return target_date - length_days; }
  Date last() const { return target_date - 1; }
};

// ---------------------------------------------------------------------------
// Station features: per variable (T, TD), ten equidistant quantiles
// (5%,15%,...,95%) of window observations and ten of the ensemble-mean
// errors -- 40 coordinates in total, standardized across stations.

constexpr int kFeatureQuantiles = 10;
constexpr int kFeatureDim = 4 * kFeatureQuantiles;

struct StationFeatures {
  std::array<double, kFeatureDim> values{};
};

namespace training_detail {

inline void quantile_block(std::vector<double> xs, double* out) {
  if (xs.empty()) throw DataError("build_features: empty window block");
  std::sort(xs.begin(), xs.end());
  for (int q = 0; q < kFeatureQuantiles; ++q) {
    out[q] = quantile_sorted(xs, (2.0 * q + 1.0) / (2.0 * kFeatureQuantiles));
  }
}

}  // namespace training_detail

// Raw (unstandardized) features from the per-window series of one station.
// err_* are ensemble-mean minus observation.
inline StationFeatures build_features(std::vector<double> obs_t,
                                      std::vector<double> obs_td,
                                      std::vector<double> err_t,
                                      std::vector<double> err_td) {
  StationFeatures f;
  training_detail::quantile_block(std::move(obs_t), f.values.data());
  training_detail::quantile_block(std::move(obs_td),
                                  f.values.data() + kFeatureQuantiles);
  training_detail::quantile_block(std::move(err_t),
                                  f.values.data() + 2 * kFeatureQuantiles);
  training_detail::quantile_block(std::move(err_td),
                                  f.values.data() + 3 * kFeatureQuantiles);
  return f;
}

// Per-coordinate standardization across stations; a constant coordinate
// maps to zero.
inline void standardize_features(std::vector<StationFeatures>& features) {
  if (features.empty()) return;
  const double n = static_cast<double>(features.size());
  for (int j = 0; j < kFeatureDim; ++j) {
    double m = 0.0;
    for (const StationFeatures& f : features) m += f.values[j];
    m /= n;
    double v = 0.0;
    for (const StationFeatures& f : features) {
      v += (f.values[j] - m) * (f.values[j] - m);
    }
    const double sd = std::sqrt(v / n);
    for (StationFeatures& f : features) {
      f.values[j] = sd > 0.0 ? (f.values[j] - m) / sd : 0.0;
    }
  }
}

// ---------------------------------------------------------------------------
// k-means (Lloyd) with k-means++ seeding and farthest-point reseeding of
// empty clusters.

struct KmeansResult {
  std::vector<int> assignment;
  std::vector<std::vector<double>> centers;
  double inertia = 0.0;
  int iterations = 0;
};

namespace training_detail {

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline KmeansResult kmeans_once(const std::vector<std::vector<double>>& pts,
                                int k, RngStream& rng, int max_iter) {
  const std::size_t n = pts.size();
  const std::size_t dim = pts[0].size();

  // k-means++ seeding.
  std::vector<std::vector<double>> centers;
  centers.reserve(k);
  centers.push_back(pts[rng.below(n)]);
  std::vector<double> min_d(n);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& cen : centers) best = std::min(best, sq_dist(pts[i], cen));
      min_d[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      centers.push_back(pts[rng.below(n)]);  // all points identical
      continue;
    }
    double target = rng.uniform() * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      target -= min_d[i];
      if (target <= 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(pts[pick]);
  }

  KmeansResult res;
  res.assignment.assign(n, 0);
  double prev_inertia = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    // Assignment step.
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int best_c = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = sq_dist(pts[i], centers[c]);
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      if (res.assignment[i] != best_c) {
        res.assignment[i] = best_c;
        changed = true;
      }
      inertia += best;
    }
    // Lloyd iterations never increase the objective.
    if (inertia > prev_inertia * (1.0 + 1e-12)) {
      throw NumericError("kmeans: inertia increased");
    }
    prev_inertia = inertia;
    res.inertia = inertia;
    res.iterations = it + 1;
    if (!changed && it > 0) break;

    // Update step.
    std::vector<int> count(k, 0);
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      ++count[res.assignment[i]];
      for (std::size_t j = 0; j < dim; ++j) {
        sums[res.assignment[i]][j] += pts[i][j];
      }
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] == 0) {
        // Reseed an empty cluster at the point farthest from its center.
        std::size_t far_i = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = sq_dist(pts[i], centers[res.assignment[i]]);
          if (d > far_d) {
            far_d = d;
            far_i = i;
          }
        }
        centers[c] = pts[far_i];
        prev_inertia = std::numeric_limits<double>::infinity();
        continue;
      }
      for (std::size_t j = 0; j < dim; ++j) {
        centers[c][j] = sums[c][j] / count[c];
      }
    }
  }
  res.centers = std::move(centers);
  return res;
}

}  // namespace training_detail

inline KmeansResult kmeans(const std::vector<std::vector<double>>& points,
                           int k, RngStream& rng, int restarts = 5,
                           int max_iter = 300) {
  if (points.empty()) throw DataError("kmeans: no points");
  if (k < 1 || static_cast<std::size_t>(k) > points.size()) {
    throw DataError("kmeans: k must be in [1, point count]");
  }
  KmeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KmeansResult cand = training_detail::kmeans_once(points, k, rng, max_iter);
    if (cand.inertia < best.inertia) best = std::move(cand);
  }
  return best;
}

inline KmeansResult kmeans(const std::vector<StationFeatures>& features,
                           int k, RngStream& rng, int restarts = 5,
                           int max_iter = 300) {
  std::vector<std::vector<double>> pts;
  pts.reserve(features.size());
  for (const StationFeatures& f : features) {
    pts.emplace_back(f.values.begin(), f.values.end());
  }
  return kmeans(pts, k, rng, restarts, max_iter);
}

// ---------------------------------------------------------------------------
// Grouping and schedules

enum class GroupingKind { Local, Clusters, Global };

struct Grouping {
  GroupingKind kind = GroupingKind::Local;
  int clusters = 0;  // only for Clusters

  bool operator==(const Grouping&) const = default;
};

inline std::string grouping_name(const Grouping& g) {
  switch (g.kind) {
    case GroupingKind::Local: return "local";
    case GroupingKind::Global: return "global";
    case GroupingKind::Clusters:
      return "clusters:" + std::to_string(g.clusters);
  }
  throw ConfigError("unknown grouping");
}

// Selects the stations whose window cases a given station trains on.
// cluster_of maps station id -> cluster id under the active clustering.
inline std::vector<std::string> assemble_training(
    const Grouping& grouping, const std::string& station_id,
    const std::vector<std::string>& all_stations,
    const std::map<std::string, int>* cluster_of = nullptr) {
  switch (grouping.kind) {
    case GroupingKind::Local:
      return {station_id};
    case GroupingKind::Global:
      return all_stations;
    case GroupingKind::Clusters: {
      if (cluster_of == nullptr) {
        throw DataError("assemble_training: cluster assignment required");
      }
      const auto it = cluster_of->find(station_id);
      if (it == cluster_of->end()) {
        throw DataError("assemble_training: station not clustered: " +
                        station_id);
      }
      std::vector<std::string> out;
      for (const std::string& s : all_stations) {
        const auto jt = cluster_of->find(s);
        if (jt != cluster_of->end() && jt->second == it->second) {
          out.push_back(s);
        }
      }
      return out;
    }
  }
  throw DataError("assemble_training: unknown grouping");
}

struct MlpSpec {
  bool dual = false;
  int hidden1 = 15;
  int hidden2 = 0;  // dual-net second component
  int error_days = 0;

  bool operator==(const MlpSpec&) const = default;
};

// Lead-time-dependent training configurations: per EMOS model family a
// grouping for every lead, and per index an MLP spec for every lead.
struct Schedule {
  std::map<std::string, std::array<std::optional<Grouping>, kMaxLead + 1>>
      emos;
  std::map<std::string, std::array<std::optional<MlpSpec>, kMaxLead + 1>> mlp;

  void set_emos(const std::string& model, int lead_lo, int lead_hi,
                Grouping g) {
    for (int l = lead_lo; l <= lead_hi; ++l) emos[model].at(l) = g;
  }
  void set_mlp(const std::string& model, int lead_lo, int lead_hi,
               MlpSpec spec) {
    for (int l = lead_lo; l <= lead_hi; ++l) mlp[model].at(l) = spec;
  }
};

inline Grouping schedule_lookup(const Schedule& s, int lead_days,
                                const std::string& model) {
  if (lead_days < 1 || lead_days > kMaxLead) {
    throw ConfigError("schedule_lookup: lead outside [1," +
                      std::to_string(kMaxLead) + "]");
  }
  const auto it = s.emos.find(model);
  if (it == s.emos.end()) {
    throw ConfigError("schedule_lookup: unknown model '" + model + "'");
  }
  const auto& g = it->second.at(lead_days);
  if (!g.has_value()) {
    throw ConfigError("schedule_lookup: lead " + std::to_string(lead_days) +
                      " unmapped for model '" + model + "'");
  }
  return *g;
}

inline MlpSpec mlp_schedule_lookup(const Schedule& s, int lead_days,
                                   const std::string& model) {
  if (lead_days < 1 || lead_days > kMaxLead) {
    throw ConfigError("mlp_schedule_lookup: lead outside [1," +
                      std::to_string(kMaxLead) + "]");
  }
  const auto it = s.mlp.find(model);
  if (it == s.mlp.end()) {
    throw ConfigError("mlp_schedule_lookup: unknown model '" + model + "'");
  }
  const auto& g = it->second.at(lead_days);
  if (!g.has_value()) {
    throw ConfigError("mlp_schedule_lookup: lead " + std::to_string(lead_days) +
                      " unmapped for model '" + model + "'");
  }
  return *g;
}

// Operational defaults: grouping mixtures per lead for the five EMOS model
// rows and the two MLP blends.
inline Schedule default_schedule() {
  Schedule s;
  const Grouping local{GroupingKind::Local, 0};
  auto clusters = [](int n) { return Grouping{GroupingKind::Clusters, n}; };

  s.set_emos("normal_t", 1, 5, local);
  s.set_emos("normal_t", 6, 10, clusters(75));
  s.set_emos("normal_t", 11, 15, clusters(5));

  s.set_emos("normal_td", 1, 5, local);
  s.set_emos("normal_td", 6, 15, clusters(75));

  s.set_emos("emos2d", 1, 4, local);
  s.set_emos("emos2d", 5, 7, clusters(50));
  s.set_emos("emos2d", 8, 15, clusters(5));

  s.set_emos("emos2d_optimal", 1, 5, local);
  s.set_emos("emos2d_optimal", 6, 10, clusters(75));
  s.set_emos("emos2d_optimal", 11, 15, clusters(5));

  s.set_emos("gev", 1, 4, local);
  s.set_emos("gev", 5, 8, clusters(75));
  s.set_emos("gev", 9, 15, clusters(5));

  s.set_mlp("mlp_di", 1, 4, MlpSpec{false, 40, 0, 5});
  s.set_mlp("mlp_di", 5, 8, MlpSpec{false, 15, 0, 0});
  s.set_mlp("mlp_di", 9, 15, MlpSpec{true, 15, 15, 0});

  s.set_mlp("mlp_wbgt", 1, 8, MlpSpec{false, 30, 0, 5});
  s.set_mlp("mlp_wbgt", 9, 12, MlpSpec{false, 35, 0, 0});
  s.set_mlp("mlp_wbgt", 13, 15, MlpSpec{false, 30, 0, 0});
  return s;
}

// Plain-text schedule format, one entry per line:
//   <model> <lead_lo>-<lead_hi> <spec>
// where <spec> is local | global | clusters:<n> for EMOS models and
// single:<h>:err<j> | dual:<h1>-<h2>:err<j> for MLP models. '#' starts a
// comment.
inline Schedule load_schedule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schedule file " + path);
  Schedule s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream is(line);
    std::string model, leads, spec;
    if (!(is >> model)) continue;  // blank line
    if (!(is >> leads >> spec)) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected '<model> <lo>-<hi> <spec>'");
    }
    int lo = 0, hi = 0;
    if (std::sscanf(leads.c_str(), "%d-%d", &lo, &hi) == 1) hi = lo;
    if (lo < 1 || hi > kMaxLead || lo > hi) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": lead range '" + leads + "' outside [1," +
                        std::to_string(kMaxLead) + "]");
    }
    if (model.rfind("mlp_", 0) == 0) {
      MlpSpec m;
      char kind[16];
      int h1 = 0, h2 = 0, err = 0;
      if (std::sscanf(spec.c_str(), "dual:%d-%d:err%d", &h1, &h2, &err) == 3) {
        m.dual = true;
        m.hidden1 = h1;
        m.hidden2 = h2;
        m.error_days = err;
      } else if (std::sscanf(spec.c_str(), "single:%d:err%d", &h1, &err) ==
                 2) {
        m.dual = false;
        m.hidden1 = h1;
        m.error_days = err;
      } else {
        (void)kind;
        throw ConfigError(path + ":" + std::to_string(line_no) +
                          ": bad MLP spec '" + spec + "'");
      }
      if (m.hidden1 < 1 || (m.dual && m.hidden2 < 1) || m.error_days < 0 ||
          m.error_days > 5) {
        throw ConfigError(path + ":" + std::to_string(line_no) +
                          ": MLP spec out of range '" + spec + "'");
      }
      s.set_mlp(model, lo, hi, m);
    } else {
      Grouping g;
      int n = 0;
      if (spec == "local") {
        g = {GroupingKind::Local, 0};
      } else if (spec == "global") {
        g = {GroupingKind::Global, 0};
      } else if (std::sscanf(spec.c_str(), "clusters:%d", &n) == 1 && n >= 1) {
        g = {GroupingKind::Clusters, n};
      } else {
        throw ConfigError(path + ":" + std::to_string(line_no) +
                          ": bad grouping spec '" + spec + "'");
      }
      s.set_emos(model, lo, hi, g);
    }
  }
  return s;
}

}  // namespace heatcast
