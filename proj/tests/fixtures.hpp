#pragma once

// Shared run configurations for the solver tests.

#include <nlohmann/json.hpp>

#include "perihom/harness.hpp"

namespace fixture {

/// Coupled two-species micro problem on a disc cell; `patch` is merged in.
inline perihom::RunConfig smoke(const nlohmann::json& patch = nlohmann::json::object()) {
  nlohmann::json j = R"({
    "mode": "micro",
    "species": 2,
    "geometry": {"grain": {"shape": "disc", "center": [0.5, 0.5], "radius": 0.25},
                 "resolution": 16, "robin_fraction": 0.5, "epsilon": 0.25},
    "coefficients": {"kappa": 1.0, "diffusion": [0.5, 0.25], "tau": 0.05, "dufour": 0.05, "g0": 0.5},
    "kinetics": {"reaction": true, "kernel": "constant", "a": [1.0, 0.5], "b": [0.5, 0.5]},
    "initial": {"theta": {"type": "cosine", "mean": 1.0, "amplitude": 0.5},
                "u": [{"type": "gaussian", "amplitude": 1.0, "center": [0.3, 0.6], "width": 0.25}, 0.1],
                "v": 0.0},
    "solver": {"dt": 0.01, "T_end": 0.2, "mollifier_delta": 0.0625}
  })"_json;
  j.merge_patch(patch);
  return perihom::parse_config(j);
}

/// Micro setup from a run configuration, as the CLI builds it.
struct Micro {
  perihom::MicroRunConfig cfg;
  perihom::FieldState initial;

  explicit Micro(const perihom::RunConfig& c) : cfg(perihom::make_micro_config(c, c.epsilon)) {
    const perihom::CoupledSystem sys = perihom::build_micro_system(cfg);
    initial = perihom::make_initial(c, sys.grid, perihom::site_points(sys, &cfg.domain.faces));
  }

  perihom::Trajectory run() const { return perihom::simulate_micro(cfg, initial); }
};

}  // namespace fixture
