#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "heatcast/distributions.hpp"
#include "heatcast/emos_uni.hpp"
#include "heatcast/errors.hpp"
#include "heatcast/optimize.hpp"
#include "heatcast/stats.hpp"

// Bivariate normal EMOS for joint (temperature, dew point) calibration:
// mean A + sum B_k fbar_k, covariance C C^T + D S^2 D^T, estimated by
// maximum likelihood.

namespace heatcast {

constexpr double kCovJitter = 1e-6;  // degC^2, keeps Sigma PD

struct GroupedEnsemble2D {
  std::vector<Vec2> group_means;
  std::vector<int> group_sizes;
  Mat2 covariance;  // S^2, unbiased over all members

  std::size_t group_count() const { return group_means.size(); }

  static GroupedEnsemble2D from_members(std::span<const Vec2> members) {
    return from_members(members, std::vector<int>(members.size(), 0), 1);
  }

  static GroupedEnsemble2D from_members(std::span<const Vec2> members,
                                        const std::vector<int>& group_of,
                                        int n_groups) {
    const std::size_t m = members.size();
    if (m < 2) throw DataError("GroupedEnsemble2D: need at least 2 members");
    if (group_of.size() != m) {
      throw DataError("GroupedEnsemble2D: group assignment size mismatch");
    }
    GroupedEnsemble2D g;
    g.group_means.assign(n_groups, Vec2{});
    g.group_sizes.assign(n_groups, 0);
    Vec2 overall{};
    for (std::size_t i = 0; i < m; ++i) {
      g.group_means.at(group_of[i]) = g.group_means.at(group_of[i]) + members[i];
      g.group_sizes.at(group_of[i]) += 1;
      overall = overall + members[i];
    }
    for (int k = 0; k < n_groups; ++k) {
      if (g.group_sizes[k] == 0) {
        throw DataError("GroupedEnsemble2D: empty exchangeable group");
      }
      g.group_means[k].x /= g.group_sizes[k];
      g.group_means[k].y /= g.group_sizes[k];
    }
    overall.x /= static_cast<double>(m);
    overall.y /= static_cast<double>(m);
    KahanSum sxx, sxy, syy;
    for (const Vec2& v : members) {
      const Vec2 d = v - overall;
      sxx.add(d.x * d.x);
      sxy.add(d.x * d.y);
      syy.add(d.y * d.y);
    }
    const double denom = static_cast<double>(m - 1);
    g.covariance = {sxx.value() / denom, sxy.value() / denom,
                    sxy.value() / denom, syy.value() / denom};
    return g;
  }
};

// 13 free parameters with one exchangeable group: A (2), B (4),
// C lower-triangular (3), D (4).
struct BiEmosCoefficients {
  Vec2 A{};
  std::vector<Mat2> B;  // one per exchangeable group
  Mat2 C = Mat2::identity();  // lower triangular (a12 stays 0)
  Mat2 D = Mat2::identity();

  static BiEmosCoefficients init(std::size_t groups) {
    BiEmosCoefficients co;
    co.B.assign(groups, Mat2::identity());
    return co;
  }

  std::size_t free_parameter_count() const { return 2 + 4 * B.size() + 3 + 4; }
};

inline BivariateNormalLaw link_bivariate(const BiEmosCoefficients& co,
                                         const GroupedEnsemble2D& g) {
  if (co.B.size() != g.group_count()) {
    throw DataError("link_bivariate: coefficient/group count mismatch");
  }
  Vec2 mu = co.A;
  for (std::size_t k = 0; k < co.B.size(); ++k) {
    mu = mu + co.B[k].mul(g.group_means[k]);
  }
  const Mat2 cct = co.C.mul(co.C.transpose());
  const Mat2 dsd = co.D.mul(g.covariance).mul(co.D.transpose());
  Mat2 sigma{cct.a11 + dsd.a11 + kCovJitter, cct.a12 + dsd.a12,
             cct.a21 + dsd.a21, cct.a22 + dsd.a22 + kCovJitter};
  // Enforce exact symmetry against rounding in the two products.
  const double off = 0.5 * (sigma.a12 + sigma.a21);
  sigma.a12 = sigma.a21 = off;
  return BivariateNormalLaw(mu, sigma);
}

inline double nll_bivariate(const BivariateNormalLaw& law, Vec2 obs) {
  return law.nll(obs);
}

struct TrainingCase2D {
  GroupedEnsemble2D ensemble;
  Vec2 observation;
};

struct BiFitOptions {
  int min_cases = 30;
  int max_evals = 30000;
  int restarts = 2;
};

inline FitResult<BiEmosCoefficients> fit_bivariate_emos(
    std::span<const TrainingCase2D> training, BiFitOptions opt = {},
    const BiEmosCoefficients* warm_start = nullptr) {
  if (training.empty()) {
    throw DataError("fit_bivariate_emos: empty training set");
  }
  const std::size_t groups = training[0].ensemble.group_count();
  if (static_cast<int>(training.size()) < opt.min_cases) {
    throw DataError("fit_bivariate_emos: fewer than " +
                    std::to_string(opt.min_cases) + " training cases");
  }

  auto pack = [groups](const BiEmosCoefficients& co) {
    std::vector<double> x;
    x.reserve(9 + 4 * groups);
    x.push_back(co.A.x);
    x.push_back(co.A.y);
    for (std::size_t k = 0; k < groups; ++k) {
      x.push_back(co.B[k].a11);
      x.push_back(co.B[k].a12);
      x.push_back(co.B[k].a21);
      x.push_back(co.B[k].a22);
    }
    x.push_back(co.C.a11);
    x.push_back(co.C.a21);
    x.push_back(co.C.a22);
    x.push_back(co.D.a11);
    x.push_back(co.D.a12);
    x.push_back(co.D.a21);
    x.push_back(co.D.a22);
    return x;
  };
  auto unpack = [groups](const std::vector<double>& x) {
    BiEmosCoefficients co;
    std::size_t i = 0;
    co.A = {x[i], x[i + 1]};
    i += 2;
    co.B.resize(groups);
    for (std::size_t k = 0; k < groups; ++k, i += 4) {
      co.B[k] = {x[i], x[i + 1], x[i + 2], x[i + 3]};
    }
    co.C = {x[i], 0.0, x[i + 1], x[i + 2]};
    i += 3;
    co.D = {x[i], x[i + 1], x[i + 2], x[i + 3]};
    return co;
  };
  auto objective = [&](const std::vector<double>& x) {
    const BiEmosCoefficients co = unpack(x);
    KahanSum s;
    for (const TrainingCase2D& tc : training) {
      s.add(link_bivariate(co, tc.ensemble).nll(tc.observation));
    }
    return s.value() / static_cast<double>(training.size());
  };

  const BiEmosCoefficients start =
      (warm_start != nullptr && warm_start->B.size() == groups)
          ? *warm_start
          : BiEmosCoefficients::init(groups);
  const std::vector<double> x0 = pack(start);

  NelderMeadOptions nm;
  nm.max_evals = opt.max_evals;
  nm.restarts = opt.restarts;
  nm.initial_step = 0.2;
  const OptimResult r = nelder_mead(objective, x0, nm);

  FitResult<BiEmosCoefficients> out;
  out.coefficients = unpack(r.x);
  out.objective = r.fx;
  out.initial_objective = objective(x0);
  out.status = r.converged ? FitStatus::Ok : FitStatus::BudgetExhausted;
  out.evals = r.evals;
  return out;
}

inline std::vector<Vec2> sample_bivariate(const BivariateNormalLaw& law,
                                          std::size_t n, RngStream& rng) {
  if (n == 0) throw DataError("sample_bivariate: n must be >= 1");
  std::vector<Vec2> out(n);
  for (Vec2& v : out) v = law.sample(rng);
  return out;
}

}  // namespace heatcast
