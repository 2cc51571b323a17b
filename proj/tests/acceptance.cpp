// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "perihom/perihom.hpp"

using namespace perihom;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json config_json(const std::string& name) {
  return json::parse(slurp(fs::path(PERIHOM_SOURCE_DIR) / "configs" / name));
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("perihom_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Trajectory run_micro(const RunConfig& c) {
  const MicroRunConfig mc = make_micro_config(c, c.epsilon);
  MicroSolver solver(mc);
  const auto& sys = solver.system();
  const FieldState init = make_initial(c, sys.grid, site_points(sys, &mc.domain.faces));
  return solver.simulate(init, mc.time);
}

DepositionParams no_deposition(int n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; }

// ---- criteria ------------------------------------------------------------------------

Outcome kinetics_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> conc(0.0, 5.0);
  std::uniform_int_distribution<int> size(2, 4);
  double worst_rate = 0.0, worst_mass = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = size(rng);
    const auto beta = oracle::random_symmetric(n, rng, 0.0, 3.0);
    const CoagulationKernel k(n, oracle::flatten(beta), 1e6);
    std::vector<double> s(n);
    for (double& x : s) x = conc(rng);
    const auto got = rates(s, k);
    const auto want = oracle::smoluchowski(s, beta);
    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(want[i]));
    for (int i = 0; i < n; ++i) worst_rate = std::max(worst_rate, std::abs(got[i] - want[i]) / std::max(scale, 1e-300));
    double weighted = 0.0;
    for (int i = 0; i < n; ++i) weighted += (i + 1) * got[i];
    const double defect = oracle::mass_defect(s, beta);
    worst_mass = std::max(worst_mass, std::abs(weighted - defect) / std::max(std::abs(defect), 1.0));
  }
  return {worst_rate <= 1e-12 && worst_mass <= 1e-12,
          "max rel rate error " + num(worst_rate) + ", mass identity error " + num(worst_mass)};
}

Outcome truncation() {
  bool ok = sigma(-1.0, 5.0) == 0.0 && sigma(3.0, 5.0) == 3.0 && sigma(7.0, 5.0) == 5.0;
  std::mt19937_64 rng(5);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + trial % 3;
    const double m = 0.5 + trial % 7;
    std::uniform_real_distribution<double> in(0.0, m);
    const CoagulationKernel k(n, oracle::flatten(oracle::random_symmetric(n, rng)), m);
    std::vector<double> s(n);
    for (double& x : s) x = in(rng);
    s[trial % n] = (trial % 5 == 0) ? m : s[trial % n];  // include the upper face of the box
    if (truncated_rates(s, k) != rates(s, k)) ++mismatches;
  }
  ok = ok && mismatches == 0;
  return {ok, "sigma examples exact, " + std::to_string(mismatches) + " mismatches in 1000 states on [0,M]^N"};
}

Outcome mollifier() {
  const auto g = MaskedGrid::full(256);
  const auto k = MollifierKernel::build(4 * g.h(), g.h());
  const double sum_err = std::abs(k.weight_sum() - 1.0);

  const auto dom = tile_domain(build_unit_cell(Disc{{0.5, 0.5}, 0.25}, 32), 0.125);
  const auto kd = MollifierKernel::build(4 * dom.grid.h(), dom.grid.h());
  const std::vector<double> constant(dom.grid.cell_count(), 1.7);
  const auto zero = mollified_gradient(constant, kd, dom.grid);
  bool exact_zero = true;
  for (int c : dom.grid.pore_cells()) exact_zero = exact_zero && zero.x[c] == 0.0 && zero.y[c] == 0.0;

  std::vector<double> f(g.cell_count());
  for (int c = 0; c < g.cell_count(); ++c) f[c] = 0.7 * g.x(g.ci(c)) - 1.3 * g.y(g.cj(c)) + 0.2;
  const auto w = mollified_gradient(f, k, g);
  const int margin = k.radius() + 1;
  double err = 0.0;
  for (int j = margin; j < g.n() - margin; ++j)
    for (int i = margin; i < g.n() - margin; ++i) {
      const int c = g.index(i, j);
      err = std::max({err, std::abs(w.x[c] - 0.7), std::abs(w.y[c] + 1.3)});
    }
  return {sum_err <= 1e-12 && exact_zero && err <= 1e-6,
          "weight sum error " + num(sum_err) + ", constant field exact zero " + (exact_zero ? "yes" : "no") +
              ", affine error " + num(err)};
}

Outcome cell_trivial() {
  const auto cell = build_unit_cell(NoGrain{}, 64);
  const double kappa = 1.7;
  const auto c = CellCoefficients::uniform(cell.grid.cell_count(), 2, kappa, 0.2, 0.6, 0.1);
  const auto r = compute_effective_tensors(cell, c, no_deposition(2), 0.0);
  double cmax = 0.0;
  auto scan = [&](const std::array<CorrectorSolution, 2>& cs) {
    for (const auto& s : cs)
      for (double v : s.field) cmax = std::max(cmax, std::abs(v));
  };
  scan(r.correctors.theta);
  for (const auto& u : r.correctors.u) scan(u);
  const bool exact = r.tensors.K == kappa * Matrix2::Identity();
  return {cmax <= 1e-10 && exact, "max |corrector| " + num(cmax) + ", K == kappa I exactly " + (exact ? "yes" : "no")};
}

Outcome cell_layered() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cell = build_unit_cell(NoGrain{}, 256);
  auto c = CellCoefficients::uniform(cell.grid.cell_count(), 2, 1.0, 0.0, 1.0, 0.0);
  for (int k = 0; k < cell.grid.cell_count(); ++k)
    c.kappa[k] = 1.0 + 0.5 * std::sin(2.0 * kPi * cell.grid.x(cell.grid.ci(k)));
  const auto t = compute_effective_tensors(cell, c, no_deposition(2), 0.0).tensors;
  const double secs = seconds_since(t0);
  const double harm = std::sqrt(0.75);
  const double e11 = std::abs(t.K(0, 0) - harm) / harm, e22 = std::abs(t.K(1, 1) - 1.0);
  return {e11 <= 0.01 && e22 <= 0.01 && secs < 30.0,
          "K11 " + num(t.K(0, 0)) + " (rel " + num(e11) + "), K22 " + num(t.K(1, 1)) + " (rel " + num(e22) + "), " +
              num(secs) + " s"};
}

Outcome cell_dilute_disc() {
  const double f = 0.05;
  const auto cell = build_unit_cell(Disc{{0.5, 0.5}, std::sqrt(f / kPi)}, 256);
  const auto c = CellCoefficients::uniform(cell.grid.cell_count(), 2, 1.0, 0.0, 1.0, 0.0);
  const auto t = compute_effective_tensors(cell, c, no_deposition(2), 0.0).tensors;
  const Matrix2 bulk = t.bulk_K();
  const bool band = bulk(0, 0) >= 0.88 && bulk(0, 0) <= 0.93 && bulk(1, 1) >= 0.88 && bulk(1, 1) <= 0.93;
  const bool equal = std::abs(bulk(0, 0) - bulk(1, 1)) <= 1e-10;
  const bool offdiag = std::abs(t.K(0, 1)) <= 1e-3;
  Eigen::SelfAdjointEigenSolver<Matrix2> es(t.K);
  const bool bounded = es.eigenvalues()(1) <= t.K0 + 1e-12;
  return {band && equal && offdiag && bounded,
          "bulk K11 " + num(bulk(0, 0)) + ", K22 " + num(bulk(1, 1)) + " (Maxwell 0.9048), K12 " + num(t.K(0, 1)) +
              ", per-pore K max eig " + num(es.eigenvalues()(1)) + " <= K0 " + num(t.K0)};
}

Outcome max_principle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const char* kernels[] = {"constant", "sum", "product", "brownian"};
  int violations = 0;
  double theta_lo = 1e300, theta_over = -1e300, uv_lo = 1e300;
  for (int k = 0; k < 10; ++k) {
    json j = config_json("smoke.json");
    const double r = 0.15 + 0.2 * U(rng);
    j["geometry"]["grain"] = {{"shape", "disc"}, {"center", {0.5 + 0.05 * (U(rng) - 0.5), 0.5 + 0.05 * (U(rng) - 0.5)}},
                              {"radius", r}};
    j["geometry"]["robin_fraction"] = U(rng);
    j["geometry"]["robin_angle"] = 2.0 * kPi * U(rng);
    j["species"] = 2 + k % 3;
    const int n = j["species"];
    json d = json::array(), a = json::array(), b = json::array(), u = json::array();
    for (int p = 0; p < n; ++p) {
      d.push_back(0.1 + U(rng));
      a.push_back(2.0 * U(rng) + 0.1);
      b.push_back(2.0 * U(rng) + 0.1);
      u.push_back({{"type", "random"}, {"min", 0.0}, {"max", 1.0 / (p + 1)}, {"seed", 100 * k + p}});
    }
    j["coefficients"] = {{"kappa", {{"type", "layered"}, {"mean", 1.0}, {"amplitude", 0.5 * U(rng)}, {"axis", k % 2}}},
                         {"diffusion", d},
                         {"tau", 0.1 * U(rng)},
                         {"dufour", 0.1 * U(rng)},
                         {"g0", 2.0 * U(rng)}};
    j["kinetics"] = {{"reaction", true}, {"kernel", kernels[k % 4]}, {"scale", 0.5 + U(rng)}, {"a", a}, {"b", b}};
    j["initial"] = {{"theta", {{"type", "random"}, {"min", 0.0}, {"max", 1.0}, {"seed", 7 + k}}},
                    {"u", u},
                    {"v", {{"type", "random"}, {"min", 0.0}, {"max", 0.5}, {"seed", 50 + k}}}};
    j["solver"] = {{"dt", 0.01}, {"T_end", 0.2}, {"mollifier_delta", 0.0625}};
    const RunConfig c = parse_config(j);
    const Trajectory tr = run_micro(c);
    violations += tr.audit.violations;
    for (const auto& s : tr.diagnostics) {
      theta_lo = std::min(theta_lo, s.theta_min);
      theta_over = std::max(theta_over, s.theta_max - tr.bounds.theta_max);
      for (int p = 0; p < n; ++p) uv_lo = std::min({uv_lo, s.u_min[p], s.v_min[p]});
    }
  }
  const bool ok = violations == 0 && theta_lo >= -1e-8 && theta_over <= 1e-8 && uv_lo >= -1e-8;
  return {ok, "10 configs: min theta " + num(theta_lo) + ", max theta - |theta0|_inf " + num(theta_over) +
                  ", min u,v " + num(uv_lo) + ", audit violations " + std::to_string(violations)};
}

Outcome pair_conservation() {
  // Dufour advection is not in divergence form, so the budgets are audited with it off
  json j = config_json("smoke.json");
  j["coefficients"]["dufour"] = 0.0;
  j["kinetics"]["reaction"] = false;
  j["solver"]["T_end"] = 0.5;
  const Trajectory off = run_micro(parse_config(j));
  double drift = 0.0;
  for (const auto& d : off.diagnostics)
    for (std::size_t p = 0; p < d.species_mass.size(); ++p)
      if (d.t > 0.0)
        drift = std::max(drift, std::abs(d.species_mass[p] - off.diagnostics[0].species_mass[p]) / d.t);

  j["kinetics"]["reaction"] = true;
  j["initial"]["u"] = {{{"type", "gaussian"}, {"amplitude", 2.0}, {"center", {0.3, 0.6}}, {"width", 0.25}}, 0.5};
  const Trajectory on = run_micro(parse_config(j));
  double rise = -1e300;
  for (std::size_t k = 1; k < on.diagnostics.size(); ++k)
    rise = std::max(rise, on.diagnostics[k].monomer_mass - on.diagnostics[k - 1].monomer_mass);
  return {drift < 1e-8 && rise <= 0.0,
          "R off: max pair drift " + num(drift) + " per unit time; R on: largest step change of monomer mass " +
              num(rise)};
}

Outcome deposit_ode() {
  double err = 0.0;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.05, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = U(rng), b = U(rng), u = U(rng), v0 = U(rng), dt = 0.01 * U(rng);
    const int steps = 1 + trial % 300;
    const auto ex = exchange_step(a, b, dt);
    double v = v0;
    for (int k = 0; k < steps; ++k) v = ex.advance(v, u);
    err = std::max(err, std::abs(v - oracle::frozen_deposit(a, b, u, v0, steps * dt)));
  }
  // the same property through the micro solver: one face, colloids held fixed by a = b = 0 elsewhere
  return {err <= 1e-10, "max error over 200 random (a, b, u, v0, dt, steps) " + num(err)};
}

Outcome contraction() {
  auto worst = [](double dt) {
    json j = config_json("smoke.json");
    j["solver"]["dt"] = dt;
    const Trajectory tr = run_micro(parse_config(j));
    double q = 0.0;
    for (const auto& d : tr.diagnostics) q = std::max(q, d.contraction);
    return q;
  };
  const double q1 = worst(1e-2), q2 = worst(5e-3);
  return {q1 > 0.0 && q1 < 1.0 && q2 < q1, "factor " + num(q1) + " at dt=1e-2, " + num(q2) + " at dt=5e-3"};
}

Outcome manufactured() {
  const Matrix2 K{{1.2, 0.0}, {0.0, 0.7}};
  const double gamma = 0.3, t_end = 1.0 / 64;
  std::vector<double> err;
  std::string detail;
  for (int n : {16, 32, 64, 128}) {
    const double h = 1.0 / n;
    MacroRunConfig m;
    m.resolution = n;
    m.tensors.K = K;
    m.tensors.g_robin = gamma;
    m.tensors.measures.pore_area = 1.0;
    for (int p = 0; p < 2; ++p) {
      m.tensors.T.push_back(Matrix2::Zero());
      m.tensors.D.push_back(Matrix2::Identity());
      m.tensors.F.push_back(Matrix2::Zero());
    }
    m.deposition = no_deposition(2);
    m.kernel = CoagulationKernel::constant(2, 1.0, 1.0);
    m.time = {h * h, t_end, 1e-10, 10};
    const double rate = -1.0 + kPi * kPi * (K(0, 0) + K(1, 1)) + gamma;
    m.heat_source = [rate](double x, double y, double t) {
      return rate * std::cos(kPi * x) * std::cos(kPi * y) * std::exp(-t);
    };
    MacroSolver solver(m);
    const auto& g = solver.system().grid;
    FieldState s = solver.zero_state();
    auto exact = [&](int c, double t) {
      return std::cos(kPi * g.x(g.ci(c))) * std::cos(kPi * g.y(g.cj(c))) * std::exp(-t);
    };
    for (int c = 0; c < g.cell_count(); ++c) s.theta[c] = 1.0 + exact(c, 0.0);
    const auto tr = solver.simulate(s, m.time);
    double e = 0.0;
    for (int c = 0; c < g.cell_count(); ++c) {
      const double d = tr.final_state.theta[c] - std::exp(-gamma * t_end) - exact(c, t_end);
      e += d * d;
    }
    err.push_back(std::sqrt(e * h * h));
  }
  double min_order = 1e300;
  for (std::size_t k = 1; k < err.size(); ++k) {
    const double order = std::log2(err[k - 1] / err[k]);
    min_order = std::min(min_order, order);
    detail += (k > 1 ? ", " : "") + num(order);
  }
  return {min_order >= 1.8, "L2 errors " + num(err.front()) + " .. " + num(err.back()) + ", orders " + detail};
}

Outcome homogenisation_limit() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = scratch("converge");
  RunConfig c = load_config((fs::path(PERIHOM_SOURCE_DIR) / "configs" / "converge.json").string());
  std::ostringstream log;
  const int code = run(c, RunOptions{"converge", dir.string(), false, 1, &log});
  const double secs = seconds_since(t0);
  if (code != kExitOk) return {false, "converge mode exited with " + std::to_string(code) + ": " + log.str()};
  std::istringstream in(slurp(dir / "converge.csv"));
  std::string line;
  std::getline(in, line);
  std::vector<double> eps, e;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string a, b;
    std::getline(row, a, ',');
    std::getline(row, b, ',');
    eps.push_back(std::stod(a));
    e.push_back(std::stod(b));
  }
  bool decreasing = e.size() == 3;
  std::string detail;
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (k > 0) decreasing = decreasing && e[k] < e[k - 1];
    detail += (k ? ", " : "") + std::string("e(") + num(eps[k]) + ") = " + num(e[k]);
  }
  return {decreasing && secs < 600.0, detail + ", " + num(secs) + " s"};
}

Outcome determinism() {
  struct Case {
    std::string mode, config;
    std::function<void(json&)> tweak;
  };
  const std::vector<Case> cases{
      {"cell", "cell.json", [](json&) {}},
      {"micro", "smoke.json", [](json&) {}},
      {"macro", "macro.json", [](json&) {}},
      {"converge", "converge.json", [](json& j) { j["converge"]["epsilons"] = {0.5, 0.25}; }},
  };
  int files = 0;
  std::string bad;
  for (const auto& cs : cases) {
    json j = config_json(cs.config);
    cs.tweak(j);
    std::ostringstream log;
    const auto a = scratch("det_" + cs.mode + "_a"), b = scratch("det_" + cs.mode + "_b");
    const int ca = run(parse_config(j), RunOptions{cs.mode, a.string(), false, 1, &log});
    const int cb = run(parse_config(j), RunOptions{cs.mode, b.string(), false, 1, &log});
    if (ca != kExitOk || cb != kExitOk) bad += " " + cs.mode + "(exit)";
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      if (slurp(e.path()) != slurp(b / e.path().filename())) bad += " " + cs.mode + "/" + e.path().filename().string();
    }
  }
  return {bad.empty() && files > 0, std::to_string(files) + " CSV files compared across cell, micro, macro, converge" +
                                        (bad.empty() ? "" : "; differing:" + bad)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"kinetics oracle", kinetics_oracle},
      {"truncation", truncation},
      {"mollifier", mollifier},
      {"cell solver trivial case", cell_trivial},
      {"cell solver layered medium", cell_layered},
      {"cell solver dilute disc", cell_dilute_disc},
      {"micro maximum principle", max_principle},
      {"deposition pair conservation", pair_conservation},
      {"deposition ODE exactness", deposit_ode},
      {"fixed-point contraction", contraction},
      {"macro manufactured solution", manufactured},
      {"homogenisation limit", homogenisation_limit},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << (k + 1) << "] " << criteria[k].first << ": " << o.detail
              << " (" << num(seconds_since(t0)) << " s)" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
