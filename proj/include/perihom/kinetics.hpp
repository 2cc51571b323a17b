#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "perihom/grid.hpp"

namespace perihom {

class KineticsError : public Error {
 public:
  using Error::Error;
};

/// Symmetric aggregation rates beta_ij between aggregates of i and j
/// monomers, plus the truncation threshold M. Species are stored 0-based:
/// index p holds the aggregate of p + 1 monomers.
class CoagulationKernel {
 public:
  CoagulationKernel() = default;

  CoagulationKernel(int species, std::vector<double> beta, double threshold)
      : n_(species), beta_(std::move(beta)), m_(threshold) {
    if (n_ < 2) throw KineticsError("at least two species are required");
    if (beta_.size() != static_cast<std::size_t>(n_) * n_)
      throw KineticsError("beta must be an N x N matrix");
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        const double b = beta_[i * n_ + j];
        if (!(b >= 0.0) || !std::isfinite(b)) throw KineticsError("beta entries must be finite and nonnegative");
        if (b != beta_[j * n_ + i]) throw KineticsError("beta must be symmetric");
      }
    if (!(m_ > 0.0)) throw KineticsError("truncation threshold M must be positive");
  }

  static CoagulationKernel constant(int species, double value, double threshold) {
    return CoagulationKernel(species, std::vector<double>(static_cast<std::size_t>(species) * species, value),
                             threshold);
  }

  /// Named kernels in the aggregate sizes i, j (1-based):
  ///   constant:  c
  ///   sum:       c (i + j)
  ///   product:   c i j
  ///   brownian:  c (i^{1/3} + j^{1/3}) (i^{-1/3} + j^{-1/3})
  static CoagulationKernel preset(const std::string& name, int species, double scale, double threshold) {
    std::vector<double> beta(static_cast<std::size_t>(species) * species);
    for (int p = 0; p < species; ++p) {
      for (int q = 0; q < species; ++q) {
        const double i = p + 1.0, j = q + 1.0;
        double v;
        if (name == "constant") {
          v = 1.0;
        } else if (name == "sum") {
          v = i + j;
        } else if (name == "product") {
          v = i * j;
        } else if (name == "brownian") {
          v = (std::cbrt(i) + std::cbrt(j)) * (1.0 / std::cbrt(i) + 1.0 / std::cbrt(j));
        } else {
          throw KineticsError("unknown coagulation kernel preset '" + name + "'");
        }
        beta[p * species + q] = scale * v;
      }
    }
    // the brownian form is symmetric only up to rounding of the products
    for (int p = 0; p < species; ++p)
      for (int q = 0; q < p; ++q) beta[q * species + p] = beta[p * species + q];
    return CoagulationKernel(species, std::move(beta), threshold);
  }

  int species() const noexcept { return n_; }
  double threshold() const noexcept { return m_; }
  double operator()(int p, int q) const noexcept { return beta_[p * n_ + q]; }
  const std::vector<double>& matrix() const noexcept { return beta_; }

  CoagulationKernel with_threshold(double threshold) const { return CoagulationKernel(n_, beta_, threshold); }

 private:
  int n_ = 0;
  std::vector<double> beta_;
  double m_ = 1.0;
};

/// Clipping of a concentration to [0, M].
inline double sigma(double r, double threshold) { return r < 0.0 ? 0.0 : (r > threshold ? threshold : r); }

/// R_p(s) = 1/2 sum_{k+j=p} beta_kj s_k s_j - sum_j beta_pj s_p s_j.
inline void rates(std::span<const double> s, const CoagulationKernel& kernel, std::span<double> out) {
  const int n = kernel.species();
  for (int p = 0; p < n; ++p) {
    double gain = 0.0;
    for (int q = 0; q < p; ++q) gain += kernel(q, p - 1 - q) * s[q] * s[p - 1 - q];
    double loss = 0.0;
    for (int j = 0; j < n; ++j) loss += kernel(p, j) * s[j];
    out[p] = 0.5 * gain - s[p] * loss;
  }
}

inline std::vector<double> rates(std::span<const double> s, const CoagulationKernel& kernel) {
  std::vector<double> out(kernel.species());
  rates(s, kernel, out);
  return out;
}

inline std::vector<double> clip(std::span<const double> s, double threshold) {
  std::vector<double> c(s.begin(), s.end());
  for (double& v : c) v = sigma(v, threshold);
  return c;
}

/// R^M(s) = R(sigma_M(s_1), ..., sigma_M(s_N)).
inline std::vector<double> truncated_rates(std::span<const double> s, const CoagulationKernel& kernel) {
  return rates(clip(s, kernel.threshold()), kernel);
}

/// Monomer mass production sum_i i R_i(s).
inline double mass_production(std::span<const double> s, const CoagulationKernel& kernel) {
  const auto r = rates(s, kernel);
  double m = 0.0;
  for (int p = 0; p < kernel.species(); ++p) m += (p + 1) * r[p];
  return m;
}

/// Reaction terms of species p for the mass-consistent semi-implicit step.
///
/// Species are advanced in increasing size. The loss of species p is
/// `loss * u_p_new` with loss = sum_j beta_pj sigma(u_j_old). The gain splits
/// each aggregation k + j -> p by monomer share, k/p of it charged to the
/// freshly updated smaller partner:
///   gain = sum_{k+j=p} (k/p) beta_kj sigma(u_k_new) sigma(u_j_old).
/// In the limit dt -> 0 this is R_p; the monomer mass of the step changes by
/// -dt sum_{k+j>N} k beta_kj u_k_new u_j_old <= 0 exactly.
struct ReactionTerms {
  double gain = 0.0;
  double loss = 0.0;
};

inline ReactionTerms semi_implicit_terms(int p, std::span<const double> u_new, std::span<const double> u_old,
                                         const CoagulationKernel& kernel) {
  const double m = kernel.threshold();
  ReactionTerms t;
  const double size = p + 1.0;
  for (int k = 0; k < p; ++k) {
    const int j = p - 1 - k;
    t.gain += ((k + 1.0) / size) * kernel(k, j) * sigma(u_new[k], m) * sigma(u_old[j], m);
  }
  for (int j = 0; j < kernel.species(); ++j) t.loss += kernel(p, j) * sigma(u_old[j], m);
  return t;
}

/// Deposition rates a_i (attachment) and b_i (release).
struct DepositionParams {
  std::vector<double> a, b;

  int species() const { return static_cast<int>(a.size()); }
};

inline double deposition_rhs(double u_trace, double v, int p, const DepositionParams& params) {
  return params.a[p] * u_trace - params.b[p] * v;
}

/// Exact step of dv/dt = a u - b v with u frozen over the step:
///   v_new = keep * v_old + alpha * dt * u,   keep = exp(-b dt).
/// The exchange flux is (v_new - v_old) / dt = alpha u - gamma v_old.
struct ExchangeStep {
  double keep = 1.0;
  double alpha = 0.0;
  double gamma = 0.0;

  double advance(double v_old, double u) const { return keep * v_old + alpha * dt * u; }
  double flux(double v_old, double u) const { return alpha * u - gamma * v_old; }

  double dt = 0.0;
};

inline ExchangeStep exchange_step(double a, double b, double dt) {
  ExchangeStep e;
  e.dt = dt;
  const double bdt = b * dt;
  e.keep = std::exp(-bdt);
  const double one_minus_keep = -std::expm1(-bdt);
  // (1 - e^{-b dt}) / (b dt) -> 1 as b dt -> 0
  const double phi = bdt > 1e-12 ? one_minus_keep / bdt : 1.0 - 0.5 * bdt;
  e.alpha = a * phi;
  e.gamma = b * phi;
  return e;
}

inline double deposition_step(double v0, double u, double a, double b, double dt) {
  return exchange_step(a, b, dt).advance(v0, u);
}

}  // namespace perihom
