#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "heatcast/errors.hpp"
#include "heatcast/rng.hpp"

// Predictive laws used by the EMOS models: univariate normal, univariate
// GEV and bivariate normal.

namespace heatcast {

inline double normal_pdf(double z) {
  return 0.3989422804014326779 * std::exp(-0.5 * z * z);
}

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z * 0.7071067811865475244);
}

struct NormalLaw {
  double mu;
  double sigma;  // > 0

  NormalLaw(double mu_, double sigma_) : mu(mu_), sigma(sigma_) {
    if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma)) {
      throw NumericError("NormalLaw: invalid parameters");
    }
  }

  double cdf(double x) const { return normal_cdf((x - mu) / sigma); }
  double pdf(double x) const { return normal_pdf((x - mu) / sigma) / sigma; }
  double sample(RngStream& rng) const { return mu + sigma * rng.normal(); }

  // Effective support bounds for quadrature-style consumers.
  double lower_hint() const { return mu - 10.0 * sigma; }
  double upper_hint() const { return mu + 10.0 * sigma; }
};

// Generalized extreme value law, CDF
//   H(x) = exp(-[1 + xi (x-mu)/sigma]^(-1/xi))      for xi != 0
//   H(x) = exp(-exp(-(x-mu)/sigma))                 for xi == 0
// on the support where 1 + xi (x-mu)/sigma > 0; zero below a finite lower
// endpoint (xi > 0) and one above a finite upper endpoint (xi < 0).
struct GevLaw {
  double mu;
  double sigma;  // > 0
  double xi;     // < 1 so the mean is finite

  GevLaw(double mu_, double sigma_, double xi_)
      : mu(mu_), sigma(sigma_), xi(xi_) {
    if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma) ||
        !std::isfinite(xi) || xi >= 1.0) {
      throw NumericError("GevLaw: invalid parameters (need sigma>0, xi<1)");
    }
  }

  static constexpr double kXiZeroTol = 1e-8;

  double cdf(double x) const {
    const double z = (x - mu) / sigma;
    if (std::fabs(xi) < kXiZeroTol) {
      return std::exp(-std::exp(-z));
    }
    const double t = 1.0 + xi * z;
    if (t <= 0.0) return xi > 0.0 ? 0.0 : 1.0;
    return std::exp(-std::pow(t, -1.0 / xi));
  }

  double pdf(double x) const {
    const double z = (x - mu) / sigma;
    if (std::fabs(xi) < kXiZeroTol) {
      const double e = std::exp(-z);
      return e * std::exp(-e) / sigma;
    }
    const double t = 1.0 + xi * z;
    if (t <= 0.0) return 0.0;
    const double w = std::pow(t, -1.0 / xi);
    return w / t * std::exp(-w) / sigma;
  }

  double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) {
      throw NumericError("GevLaw::quantile: p outside (0,1)");
    }
    const double l = -std::log(p);
    if (std::fabs(xi) < kXiZeroTol) return mu - sigma * std::log(l);
    return mu + sigma * (std::pow(l, -xi) - 1.0) / xi;
  }

  // Inverse-CDF sampling.
  double sample(RngStream& rng) const { return quantile(rng.uniform_open()); }

  double lower_hint() const {
    if (xi > kXiZeroTol) return mu - sigma / xi;  // finite lower endpoint
    return quantile(1e-14);
  }
  double upper_hint() const {
    if (xi < -kXiZeroTol) return mu - sigma / xi;  // finite upper endpoint
    return quantile(1.0 - 1e-14);
  }
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  double& operator[](int i) { return i == 0 ? x : y; }
  double operator[](int i) const { return i == 0 ? x : y; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
};

struct Mat2 {
  // Row-major 2x2.
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  Vec2 mul(Vec2 v) const {
    return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
  }
  Mat2 mul(const Mat2& o) const {
    return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
            a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
  }
  Mat2 transpose() const { return {a11, a21, a12, a22}; }
  double det() const { return a11 * a22 - a12 * a21; }
};

// Lower Cholesky factor of a symmetric positive definite 2x2 matrix.
inline Mat2 cholesky2(const Mat2& s) {
  if (!(s.a11 > 0.0)) throw NumericError("cholesky2: matrix not PD");
  const double l11 = std::sqrt(s.a11);
  const double l21 = s.a21 / l11;
  const double d = s.a22 - l21 * l21;
  if (!(d > 0.0)) throw NumericError("cholesky2: matrix not PD");
  return {l11, 0.0, l21, std::sqrt(d)};
}

struct BivariateNormalLaw {
  Vec2 mu;
  Mat2 sigma;  // symmetric positive definite
  Mat2 chol;   // cached lower factor

  BivariateNormalLaw(Vec2 mu_, Mat2 sigma_)
      : mu(mu_), sigma(sigma_), chol(cholesky2(sigma_)) {}

  // Negative log density at obs.
  double nll(Vec2 obs) const {
    const Vec2 d = obs - mu;
    // Solve L z = d by forward substitution.
    const double z1 = d.x / chol.a11;
    const double z2 = (d.y - chol.a21 * z1) / chol.a22;
    const double log_det = 2.0 * (std::log(chol.a11) + std::log(chol.a22));
    constexpr double kLog2Pi = 1.8378770664093454836;
    return 0.5 * (z1 * z1 + z2 * z2) + 0.5 * log_det + kLog2Pi;
  }

  Vec2 sample(RngStream& rng) const {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    return {mu.x + chol.a11 * z1, mu.y + chol.a21 * z1 + chol.a22 * z2};
  }
};

}  // namespace heatcast
