#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "heatcast/distributions.hpp"
#include "heatcast/emos_uni.hpp"
#include "heatcast/errors.hpp"
#include "heatcast/rng.hpp"
#include "heatcast/stats.hpp"

// Ensemble copula coupling, random-sampling flavour (ECC-R): draw samples
// from the calibrated margins and reorder each one so its ranks match the
// raw ensemble's ranks, restoring the raw dependence structure.

namespace heatcast {

// Permutes `calibrated` so that its rank vector equals the rank vector of
// `raw` (ties in the raw members broken by member index).
inline std::vector<double> ecc_reorder(std::span<const double> calibrated,
                                       std::span<const double> raw) {
  if (calibrated.size() != raw.size()) {
    throw DataError("ecc_reorder: sample/ensemble length mismatch");
  }
  std::vector<double> sorted(calibrated.begin(), calibrated.end());
  std::sort(sorted.begin(), sorted.end());
  const std::vector<int> rank = stable_ranks(raw);
  std::vector<double> out(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    out[k] = sorted[rank[k] - 1];
  }
  return out;
}

// One ECC replicate: K member pairs in raw member order.
struct EccSample {
  int replicate_index = 0;  // 1-based
  std::vector<double> t;
  std::vector<double> td;
};

// Draws `replicates` independent samples of the raw ensemble size from the
// two calibrated margins, reorders each against the raw ranks, and clamps
// dew point to temperature pairwise (physical consistency before index
// derivation).
inline std::vector<EccSample> ecc_r_pipeline(const NormalLaw& t_law,
                                             const NormalLaw& td_law,
                                             std::span<const double> raw_t,
                                             std::span<const double> raw_td,
                                             int replicates, RngStream& rng) {
  if (replicates < 1) throw DataError("ecc_r_pipeline: need replicates >= 1");
  if (raw_t.size() != raw_td.size() || raw_t.empty()) {
    throw DataError("ecc_r_pipeline: raw margins must be same nonempty size");
  }
  const std::size_t k = raw_t.size();
  std::vector<EccSample> out;
  out.reserve(replicates);
  for (int r = 0; r < replicates; ++r) {
    EccSample s;
    s.replicate_index = r + 1;
    s.t = ecc_reorder(sample_law(t_law, k, rng), raw_t);
    s.td = ecc_reorder(sample_law(td_law, k, rng), raw_td);
    for (std::size_t i = 0; i < k; ++i) {
      s.td[i] = std::min(s.td[i], s.t[i]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace heatcast
