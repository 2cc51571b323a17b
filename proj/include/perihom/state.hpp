#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "perihom/kinetics.hpp"

namespace perihom {

/// Discrete unknowns at one time level. theta and u live on grid cells
/// (grain cells hold zero); v lives on grain-boundary faces for the
/// microscopic model and on cells for the upscaled one.
struct FieldState {
  double t = 0.0;
  std::vector<double> theta;
  std::vector<std::vector<double>> u;
  std::vector<std::vector<double>> v;

  int species() const { return static_cast<int>(u.size()); }
};

/// Upper bounds over [0, T] from the positivity/boundedness argument:
///   u_1 <= M_1,  v_1 <= Mbar_1,  a_1 M_1 = b_1 Mbar_1, both covering the data;
///   u_i <= M_i (T + 1), v_i <= Mbar_i (T + 1) for i >= 2 with
///   M_i >= 1/2 sum_{k+j=i} beta_kj U_k U_j, U_k the bound of u_k.
struct ConcentrationBounds {
  double theta_max = 0.0;
  std::vector<double> u, v;

  /// Default truncation threshold: twice the largest concentration bound.
  double suggested_threshold() const {
    double m = 0.0;
    for (double b : u) m = std::max(m, b);
    return m > 0.0 ? 2.0 * m : 1.0;
  }
};

inline ConcentrationBounds concentration_bounds(double theta0_max, const std::vector<double>& u0_max,
                                                const std::vector<double>& v0_max, const DepositionParams& dep,
                                                const CoagulationKernel& kernel, double t_end, bool reaction) {
  const int n = static_cast<int>(u0_max.size());
  ConcentrationBounds b;
  b.theta_max = theta0_max;
  b.u.assign(n, 0.0);
  b.v.assign(n, 0.0);
  std::vector<double> m(n, 0.0);
  for (int p = 0; p < n; ++p) {
    const double a = dep.a[p], bb = dep.b[p];
    double mp = u0_max[p];
    if (a > 0.0) mp = std::max(mp, bb * v0_max[p] / a);
    if (reaction && p > 0) {
      double gain = 0.0;
      for (int k = 0; k < p; ++k) gain += kernel(k, p - 1 - k) * b.u[k] * b.u[p - 1 - k];
      mp = std::max(mp, 0.5 * gain);
    }
    m[p] = mp;
    const double growth = (reaction && p > 0) ? t_end + 1.0 : 1.0;
    b.u[p] = mp * growth;
    if (a > 0.0 && bb > 0.0)
      b.v[p] = std::max(a * mp / bb * growth, v0_max[p]);
    else
      b.v[p] = v0_max[p] + a * b.u[p] * t_end;
  }
  return b;
}

/// One diagnostics row per time step.
struct StepDiagnostics {
  int step = 0;
  double t = 0.0;
  int iterations = 0;
  double contraction = 0.0;  // largest ratio of successive Picard increments
  double increment = 0.0;    // last Picard increment
  double theta_min = 0.0, theta_max = 0.0;
  std::vector<double> u_min, u_max, v_min, v_max;
  std::vector<double> species_mass;  // int u_i + exchange-weighted deposit
  double monomer_mass = 0.0;         // sum_i i * species_mass_i
  double heat = 0.0;
  double energy = 0.0;               // ||theta||^2 + kappa0 sum dt ||grad theta||^2
  double energy_bound = 0.0;
  int truncations = 0;
  int upwinded = 0;
};

struct InvariantAudit {
  double lower_tol = 1e-8;
  double upper_tol = 1e-8;
  int violations = 0;
  std::vector<std::string> messages;

  void check(bool ok, const std::string& what) {
    if (ok) return;
    ++violations;
    if (messages.size() < 50) messages.push_back(what);
  }

  void audit(const StepDiagnostics& d, const ConcentrationBounds& b) {
    const std::string at = " at step " + std::to_string(d.step);
    check(d.theta_min >= -lower_tol, "theta below zero" + at);
    check(d.theta_max <= b.theta_max + upper_tol, "theta above its initial maximum" + at);
    for (std::size_t p = 0; p < d.u_min.size(); ++p) {
      const std::string sp = " (species " + std::to_string(p + 1) + ")";
      check(d.u_min[p] >= -lower_tol, "u below zero" + sp + at);
      check(d.v_min[p] >= -lower_tol, "v below zero" + sp + at);
      check(d.u_max[p] <= b.u[p] * (1.0 + 1e-12) + upper_tol, "u above its bound" + sp + at);
      check(d.v_max[p] <= b.v[p] * (1.0 + 1e-12) + upper_tol, "v above its bound" + sp + at);
    }
    check(d.energy <= d.energy_bound * (1.0 + 1e-9) + 1e-14, "energy above its bound" + at);
  }
};

struct Trajectory {
  std::vector<StepDiagnostics> diagnostics;
  FieldState final_state;
  InvariantAudit audit;
  ConcentrationBounds bounds;
};

struct PicardReport {
  int iterations = 0;
  double contraction = 0.0;
  double increment = 0.0;
  std::vector<double> increments;
};

/// Fixed-point iteration x <- T(x) from `guess` until the increment drops
/// below `tol`. A map that ignores its argument (`decoupled`) is applied once.
/// Ratios of increments below `noise_floor` are rounding noise and do not
/// enter the contraction estimate.
template <class State, class Map, class Distance>
State picard_iterate(const State& guess, Map&& apply, Distance&& distance, double tol, int max_iter, bool decoupled,
                     PicardReport& rep, double noise_floor = 0.0) {
  rep = PicardReport{};
  State current = guess;
  for (int k = 1; k <= max_iter; ++k) {
    State next = apply(current);
    rep.iterations = k;
    if (decoupled) return next;
    const double inc = distance(next, current);
    if (!rep.increments.empty() && rep.increments.back() > 0.0 && inc > noise_floor)
      rep.contraction = std::max(rep.contraction, inc / rep.increments.back());
    rep.increments.push_back(inc);
    rep.increment = inc;
    current = std::move(next);
    if (inc < tol) return current;
  }
  throw SolverError("fixed-point iteration did not converge in " + std::to_string(max_iter) +
                        " iterations (increment " + std::to_string(rep.increment) +
                        "); reduce the time step, the contraction constant scales with it",
                    rep.increment);
}

}  // namespace perihom
