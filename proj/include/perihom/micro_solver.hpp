#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "perihom/cell_solver.hpp"
#include "perihom/coupled.hpp"
#include "perihom/geometry.hpp"

namespace perihom {

struct MollifierSpec {
  double delta = 0.0;  // support radius in domain units; 0 disables
};

/// The eps-scale problem on a perforated domain. Coefficients are given on
/// the unit-cell grid and sampled at x/eps.
struct MicroRunConfig {
  PerforatedDomain domain;
  CellCoefficients coefficients;
  CoagulationKernel kernel;
  bool reaction = false;
  bool auto_threshold = true;
  DepositionParams deposition;
  double g0 = 0.0;
  MollifierSpec mollifier;
  TimeControls time;
};

inline CoupledSystem build_micro_system(const MicroRunConfig& cfg) {
  const auto& dom = cfg.domain;
  const auto& g = dom.grid;
  const auto& co = cfg.coefficients;
  const int n = co.species();
  const int cells = g.cell_count();
  const double eps = dom.epsilon, h2 = g.h() * g.h();
  if (!(cfg.g0 >= 0.0)) throw Error("g0 must be nonnegative");

  auto sample = [&](const std::vector<double>& cell_field) {
    std::vector<double> f(cells, 0.0);
    for (int c : g.pore_cells()) f[c] = cell_field[dom.cell_of(c)];
    return f;
  };

  CoupledSystem sys;
  sys.grid = g;
  const auto kappa = sample(co.kappa);
  sys.heat_conductance = harmonic_conductances(g, kappa);
  sys.kappa0 = std::numeric_limits<double>::infinity();
  for (int c : g.pore_cells()) sys.kappa0 = std::min(sys.kappa0, kappa[c]);
  if (g.pore_count() == 0) sys.kappa0 = 0.0;

  sys.heat_sink.assign(cells, 0.0);
  for (const auto& f : dom.faces) {
    if (f.cls == BoundaryClass::Robin) sys.heat_sink[f.cell] += eps * cfg.g0 * f.measure / h2;
    sys.sites.push_back({f.cell, eps * f.measure / h2});
  }

  for (int p = 0; p < n; ++p) {
    sys.species_conductance.push_back(harmonic_conductances(g, sample(co.diffusion[p])));
    sys.heat_drift.push_back(Drift{sample(co.tau[p]), Eigen::Matrix2d::Identity()});
    sys.species_drift.push_back(Drift{sample(co.dufour[p]), Eigen::Matrix2d::Identity()});
  }
  sys.deposition = cfg.deposition;
  sys.kernel = cfg.kernel;
  sys.reaction = cfg.reaction;
  sys.auto_threshold = cfg.auto_threshold;
  if (cfg.mollifier.delta > 0.0) sys.mollifier = MollifierKernel::build(cfg.mollifier.delta, g.h());
  return sys;
}

class MicroSolver : public CoupledSolver {
 public:
  explicit MicroSolver(const MicroRunConfig& cfg) : CoupledSolver(build_micro_system(cfg)), cfg_(cfg) {}

  const MicroRunConfig& config() const noexcept { return cfg_; }

 private:
  MicroRunConfig cfg_;
};

inline Trajectory simulate_micro(const MicroRunConfig& cfg, const FieldState& initial,
                                 const StepObserver& observe = {}) {
  MicroSolver solver(cfg);
  return solver.simulate(initial, cfg.time, observe);
}

}  // namespace perihom
