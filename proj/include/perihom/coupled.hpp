#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perihom/grid.hpp"
#include "perihom/kinetics.hpp"
#include "perihom/linear.hpp"
#include "perihom/mollifier.hpp"
#include "perihom/state.hpp"
#include "perihom/transport.hpp"

namespace perihom {

/// Cross-advection coefficient: w(c) = scale(c) * tensor * g(c) for a
/// mollified gradient g. An empty scale means 1 everywhere.
struct Drift {
  std::vector<double> scale;
  Eigen::Matrix2d tensor = Eigen::Matrix2d::Identity();

  bool zero() const {
    if (tensor.isZero(0.0)) return true;
    return !scale.empty() && std::all_of(scale.begin(), scale.end(), [](double s) { return s == 0.0; });
  }

  void accumulate(const MaskedGrid& g, const VectorField& grad, VectorField& w) const {
    for (int c : g.pore_cells()) {
      const double s = scale.empty() ? 1.0 : scale[c];
      if (s == 0.0) continue;
      w.x[c] += s * (tensor(0, 0) * grad.x[c] + tensor(0, 1) * grad.y[c]);
      w.y[c] += s * (tensor(1, 0) * grad.x[c] + tensor(1, 1) * grad.y[c]);
    }
  }
};

/// Where deposit lives: the exchange acts on `cell` with strength `weight`
/// per unit cell area (eps * face length / h^2 on grain faces, |Gamma|/|Y1|
/// on macroscopic cells).
struct ExchangeSite {
  int cell = 0;
  double weight = 0.0;
};

/// Discretised coupled heat/colloid/deposit system on one masked grid:
///   theta_t - div(K grad theta) + sink theta = w_theta . grad theta + f
///   u_p,t - div(D_p grad u_p) + exchange = w_p . grad u_p + R_p^M(u)
///   v_p,t = a_p u_p - b_p v_p on the exchange sites
/// with w_theta = sum_p heat_drift[p](grad^delta u_p) and
/// w_p = species_drift[p](grad^delta theta).
struct CoupledSystem {
  MaskedGrid grid;
  Conductances heat_conductance;
  std::vector<Conductances> species_conductance;
  std::vector<double> heat_sink;
  std::vector<Drift> heat_drift;
  std::vector<Drift> species_drift;
  std::vector<ExchangeSite> sites;
  DepositionParams deposition;
  CoagulationKernel kernel;
  bool reaction = false;
  bool auto_threshold = false;
  std::optional<MollifierKernel> mollifier;
  double kappa0 = 0.0;  // coercivity constant of the heat operator
  std::function<double(double, double, double)> heat_source;

  int species() const { return static_cast<int>(species_conductance.size()); }
  bool heat_coupled() const {
    return std::any_of(heat_drift.begin(), heat_drift.end(), [](const Drift& d) { return !d.zero(); });
  }
  bool species_coupled() const {
    return std::any_of(species_drift.begin(), species_drift.end(), [](const Drift& d) { return !d.zero(); });
  }
};

struct TimeControls {
  double dt = 1e-2;
  double t_end = 0.1;
  double fp_tol = 1e-10;
  int fp_max = 100;
};

using StepObserver = std::function<void(const FieldState&, const StepDiagnostics&)>;

class CoupledSolver {
 public:
  explicit CoupledSolver(CoupledSystem sys, double linear_tol = 1e-10) : sys_(std::move(sys)), lu_(linear_tol) {
    const int n = sys_.species();
    if (static_cast<int>(sys_.heat_drift.size()) != n || static_cast<int>(sys_.species_drift.size()) != n ||
        sys_.deposition.species() != n || static_cast<int>(sys_.deposition.b.size()) != n)
      throw Error("coupled system: species count mismatch");
    if (sys_.reaction && sys_.kernel.species() != n) throw Error("coupled system: kernel species count mismatch");
    if ((sys_.heat_coupled() || sys_.species_coupled()) && !sys_.mollifier)
      throw Error("cross-diffusion terms need a mollifier");
  }

  const CoupledSystem& system() const noexcept { return sys_; }
  bool decoupled() const { return !sys_.heat_coupled() && !sys_.species_coupled(); }
  int upwinded() const noexcept { return upwinded_; }
  int truncations() const noexcept { return truncations_; }
  double heat_speed() const noexcept { return heat_speed_; }

  FieldState zero_state() const {
    FieldState s;
    const int cells = sys_.grid.cell_count();
    s.theta.assign(cells, 0.0);
    s.u.assign(sys_.species(), std::vector<double>(cells, 0.0));
    s.v.assign(sys_.species(), std::vector<double>(sys_.sites.size(), 0.0));
    return s;
  }

  /// Backward-Euler heat step with the colloid fields frozen at `frozen_u`.
  std::vector<double> step_P1(const FieldState& prev, const std::vector<std::vector<double>>& frozen_u, double dt) {
    const auto& g = sys_.grid;
    std::optional<VectorField> w;
    if (sys_.heat_coupled()) {
      w.emplace(static_cast<std::size_t>(g.cell_count()));
      for (int p = 0; p < sys_.species(); ++p) {
        if (sys_.heat_drift[p].zero()) continue;
        sys_.heat_drift[p].accumulate(g, mollified_gradient(frozen_u[p], *sys_.mollifier, g), *w);
      }
      heat_speed_ = 0.0;
      for (int c : g.pore_cells()) heat_speed_ = std::max({heat_speed_, std::abs(w->x[c]), std::abs(w->y[c])});
    } else {
      heat_speed_ = 0.0;
    }

    // exponentially fitted sink: exact decay for spatially uniform data
    fitted_sink_.assign(sys_.heat_sink.size(), 0.0);
    for (std::size_t c = 0; c < sys_.heat_sink.size(); ++c)
      fitted_sink_[c] = sys_.heat_sink[c] > 0.0 ? std::expm1(sys_.heat_sink[c] * dt) / dt : 0.0;

    TransportTerms terms;
    terms.inv_dt = 1.0 / dt;
    terms.conductance = &sys_.heat_conductance;
    terms.velocity = w ? &*w : nullptr;
    terms.sink = fitted_sink_;
    AssemblyStats st;
    const SparseMatrix a = assemble_transport(g, terms, &st);
    upwinded_ += st.upwinded;

    Vector rhs = gather(g, prev.theta) / dt;
    if (sys_.heat_source) {
      const double t = prev.t + dt;
      for (int c : g.pore_cells()) rhs[g.unknown(c)] += sys_.heat_source(g.x(g.ci(c)), g.y(g.cj(c)), t);
    }
    std::vector<double> theta(g.cell_count(), 0.0);
    scatter(g, lu_.solve(a, rhs), theta);
    return theta;
  }

  /// Colloid and deposit step with the temperature frozen at `frozen_theta`.
  /// Species are solved in increasing size; reaction coefficients use the
  /// previous time level and the already updated smaller species.
  void step_P2(const FieldState& prev, std::span<const double> frozen_theta, double dt, FieldState& out) {
    const auto& g = sys_.grid;
    const int n = sys_.species();
    std::optional<VectorField> grad_theta;
    if (sys_.species_coupled()) grad_theta = mollified_gradient(frozen_theta, *sys_.mollifier, g);

    out.u.assign(n, std::vector<double>(g.cell_count(), 0.0));
    out.v.assign(n, std::vector<double>(sys_.sites.size(), 0.0));
    std::vector<double> sink(g.cell_count());
    std::vector<double> u_new(n), u_old(n);
    const double m = sys_.reaction ? sys_.kernel.threshold() : 0.0;

    for (int p = 0; p < n; ++p) {
      std::fill(sink.begin(), sink.end(), 0.0);
      Vector rhs = gather(g, prev.u[p]) / dt;
      const ExchangeStep ex = exchange_step(sys_.deposition.a[p], sys_.deposition.b[p], dt);
      for (std::size_t s = 0; s < sys_.sites.size(); ++s) {
        const auto& site = sys_.sites[s];
        sink[site.cell] += site.weight * ex.alpha;
        rhs[g.unknown(site.cell)] += site.weight * ex.gamma * prev.v[p][s];
      }
      if (sys_.reaction) {
        for (int c : g.pore_cells()) {
          for (int k = 0; k < n; ++k) {
            u_old[k] = prev.u[k][c];
            u_new[k] = k < p ? out.u[k][c] : 0.0;
          }
          if (sigma(u_old[p], m) != u_old[p]) ++truncations_;
          const ReactionTerms r = semi_implicit_terms(p, u_new, u_old, sys_.kernel);
          sink[c] += r.loss;
          rhs[g.unknown(c)] += r.gain;
        }
      }

      std::optional<VectorField> w;
      if (grad_theta && !sys_.species_drift[p].zero()) {
        w.emplace(static_cast<std::size_t>(g.cell_count()));
        sys_.species_drift[p].accumulate(g, *grad_theta, *w);
      }
      TransportTerms terms;
      terms.inv_dt = 1.0 / dt;
      terms.conductance = &sys_.species_conductance[p];
      terms.velocity = w ? &*w : nullptr;
      terms.sink = sink;
      AssemblyStats st;
      const SparseMatrix a = assemble_transport(g, terms, &st);
      upwinded_ += st.upwinded;
      scatter(g, lu_.solve(a, rhs), out.u[p]);

      for (std::size_t s = 0; s < sys_.sites.size(); ++s)
        out.v[p][s] = ex.advance(prev.v[p][s], out.u[p][sys_.sites[s].cell]);
    }
  }

  /// One time step: Picard iteration of (theta, u) <- (P1(u), P2(theta))
  /// started from the previous time level.
  FieldState fixed_point_step(const FieldState& prev, double dt, const TimeControls& ctl, PicardReport& rep) {
    if (!(dt > 0.0)) throw Error("time step must be positive");
    const auto& g = sys_.grid;
    auto apply = [&](const FieldState& it) {
      FieldState next;
      next.t = prev.t + dt;
      next.theta = step_P1(prev, it.u, dt);
      step_P2(prev, it.theta, dt, next);
      return next;
    };
    auto distance = [&](const FieldState& a, const FieldState& b) {
      double d = l2_distance(g, a.theta, b.theta);
      for (int p = 0; p < sys_.species(); ++p) d += l2_distance(g, a.u[p], b.u[p]);
      return d;
    };
    double scale = l2_norm(g, prev.theta);
    for (const auto& up : prev.u) scale += l2_norm(g, up);
    const double floor = 1e-13 * (1.0 + scale);
    return picard_iterate(prev, apply, distance, ctl.fp_tol, ctl.fp_max, decoupled(), rep, floor);
  }

  StepDiagnostics diagnose(const FieldState& s) const {
    const auto& g = sys_.grid;
    const int n = sys_.species();
    StepDiagnostics d;
    d.t = s.t;
    auto range = [&](const std::vector<double>& f, double& lo, double& hi) {
      lo = std::numeric_limits<double>::infinity();
      hi = -lo;
      for (int c : g.pore_cells()) {
        lo = std::min(lo, f[c]);
        hi = std::max(hi, f[c]);
      }
      if (g.pore_count() == 0) lo = hi = 0.0;
    };
    range(s.theta, d.theta_min, d.theta_max);
    d.heat = integrate(g, s.theta);
    d.u_min.resize(n);
    d.u_max.resize(n);
    d.v_min.assign(n, 0.0);
    d.v_max.assign(n, 0.0);
    d.species_mass.resize(n);
    const double area = g.h() * g.h();
    for (int p = 0; p < n; ++p) {
      range(s.u[p], d.u_min[p], d.u_max[p]);
      double deposit = 0.0;
      if (!sys_.sites.empty()) {
        d.v_min[p] = std::numeric_limits<double>::infinity();
        d.v_max[p] = -d.v_min[p];
        for (std::size_t k = 0; k < sys_.sites.size(); ++k) {
          const double v = s.v[p][k];
          d.v_min[p] = std::min(d.v_min[p], v);
          d.v_max[p] = std::max(d.v_max[p], v);
          deposit += sys_.sites[k].weight * area * v;
        }
      }
      d.species_mass[p] = integrate(g, s.u[p]) + deposit;
      d.monomer_mass += (p + 1) * d.species_mass[p];
    }
    return d;
  }

  /// Advances `initial` to ctl.t_end, auditing the invariants every step.
  Trajectory simulate(const FieldState& initial, const TimeControls& ctl, const StepObserver& observe = {}) {
    if (!(ctl.dt > 0.0)) throw Error("dt must be positive");
    if (!(ctl.t_end >= 0.0)) throw Error("T_end must be nonnegative");
    if (!(ctl.fp_tol > 0.0)) throw Error("fp_tol must be positive");
    if (ctl.fp_max < 1) throw Error("fp_max must be at least 1");
    const auto& g = sys_.grid;
    const int n = sys_.species();
    check_initial(initial);

    std::vector<double> u0(n, 0.0), v0(n, 0.0);
    double theta0 = 0.0;
    for (int c : g.pore_cells()) theta0 = std::max(theta0, initial.theta[c]);
    for (int p = 0; p < n; ++p) {
      for (int c : g.pore_cells()) u0[p] = std::max(u0[p], initial.u[p][c]);
      for (double v : initial.v[p]) v0[p] = std::max(v0[p], v);
    }

    Trajectory tr;
    tr.bounds = concentration_bounds(theta0, u0, v0, sys_.deposition, sys_.kernel, ctl.t_end, sys_.reaction);
    if (sys_.reaction && sys_.auto_threshold)
      sys_.kernel = sys_.kernel.with_threshold(tr.bounds.suggested_threshold());
    const bool sourced = static_cast<bool>(sys_.heat_source);
    if (sourced) tr.bounds.theta_max = std::numeric_limits<double>::infinity();

    FieldState state = initial;
    state.t = 0.0;
    const double e0 = std::pow(l2_norm(g, state.theta), 2);
    double dissipation = 0.0, speed = 0.0;

    auto record = [&](StepDiagnostics d) {
      d.energy = std::pow(l2_norm(g, state.theta), 2) + sys_.kappa0 * dissipation;
      if (sourced) {
        d.energy_bound = std::numeric_limits<double>::infinity();
      } else if (speed == 0.0) {
        d.energy_bound = e0;
      } else if (sys_.kappa0 > 0.0) {
        d.energy_bound = e0 + 8.0 * speed * speed / sys_.kappa0 * state.t * g.pore_area() * theta0 * theta0;
      } else {
        d.energy_bound = std::numeric_limits<double>::infinity();
      }
      tr.audit.audit(d, tr.bounds);
      if (observe) observe(state, d);
      tr.diagnostics.push_back(std::move(d));
    };

    record(diagnose(state));
    const long steps = ctl.t_end > 0.0 ? static_cast<long>(std::ceil(ctl.t_end / ctl.dt - 1e-9)) : 0;
    for (long k = 1; k <= steps; ++k) {
      const double t_next = k == steps ? ctl.t_end : static_cast<double>(k) * ctl.dt;
      const double dt = t_next - state.t;
      truncations_ = 0;
      upwinded_ = 0;
      double step_speed = 0.0;
      PicardReport rep;
      FieldState next = fixed_point_step(state, dt, ctl, rep);
      step_speed = heat_speed_;
      next.t = t_next;
      state = std::move(next);
      speed = std::max(speed, step_speed);
      dissipation += dt * gradient_norm_sq(g, state.theta);

      StepDiagnostics d = diagnose(state);
      d.step = static_cast<int>(k);
      d.iterations = rep.iterations;
      d.contraction = rep.contraction;
      d.increment = rep.increment;
      d.truncations = truncations_;
      d.upwinded = upwinded_;
      record(std::move(d));
    }
    tr.final_state = std::move(state);
    return tr;
  }

 private:
  void check_initial(const FieldState& s) const {
    const auto& g = sys_.grid;
    const int n = sys_.species();
    if (static_cast<int>(s.theta.size()) != g.cell_count() || s.species() != n ||
        static_cast<int>(s.v.size()) != n)
      throw Error("initial state does not match the system layout");
    auto check = [](double x, const char* what) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw Error(std::string("initial ") + what + " must be finite and nonnegative");
    };
    for (int c : g.pore_cells()) check(s.theta[c], "theta");
    for (int p = 0; p < n; ++p) {
      if (static_cast<int>(s.u[p].size()) != g.cell_count() || s.v[p].size() != sys_.sites.size())
        throw Error("initial state does not match the system layout");
      for (int c : g.pore_cells()) check(s.u[p][c], "u");
      for (double v : s.v[p]) check(v, "v");
    }
  }

  CoupledSystem sys_;
  DirectSolver lu_;
  std::vector<double> fitted_sink_;
  int upwinded_ = 0;
  int truncations_ = 0;
  double heat_speed_ = 0.0;
};

}  // namespace perihom
