#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perihom/cell_solver.hpp"
#include "perihom/geometry.hpp"
#include "perihom/kinetics.hpp"

namespace perihom {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// mean + amplitude * sin(2 pi y_axis) on the unit cell.
struct CoefficientSpec {
  double mean = 1.0;
  double amplitude = 0.0;
  int axis = 0;

  double operator()(double y0, double y1) const {
    if (amplitude == 0.0) return mean;
    return mean + amplitude * std::sin(2.0 * std::numbers::pi * (axis == 0 ? y0 : y1));
  }
  double lower() const { return mean - std::abs(amplitude); }
};

/// Initial data on the unit square.
struct InitialSpec {
  enum class Kind { Constant, Cosine, Gaussian, Random };
  Kind kind = Kind::Constant;
  double value = 0.0;      // constant; cosine mean
  double amplitude = 0.0;  // cosine and gaussian amplitude
  std::array<double, 2> center{0.5, 0.5};
  double width = 0.1;
  double lo = 0.0, hi = 1.0;
  std::uint64_t seed = 1;
};

/// Samples `spec` at the given points. Random data draws one value per point
/// in order from a seeded engine.
inline std::vector<double> sample_initial(const InitialSpec& spec, const std::vector<std::array<double, 2>>& points) {
  std::vector<double> out(points.size());
  std::mt19937_64 rng(spec.seed);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double x = points[k][0], y = points[k][1];
    switch (spec.kind) {
      case InitialSpec::Kind::Constant:
        out[k] = spec.value;
        break;
      case InitialSpec::Kind::Cosine:
        out[k] = spec.value + spec.amplitude * std::cos(std::numbers::pi * x) * std::cos(std::numbers::pi * y);
        break;
      case InitialSpec::Kind::Gaussian: {
        const double dx = x - spec.center[0], dy = y - spec.center[1];
        out[k] = spec.amplitude * std::exp(-(dx * dx + dy * dy) / (spec.width * spec.width));
        break;
      }
      case InitialSpec::Kind::Random: {
        // explicit affine map keeps the stream identical across standard libraries
        const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        out[k] = spec.lo + (spec.hi - spec.lo) * unit;
        break;
      }
    }
  }
  return out;
}

struct TensorOverride {
  Matrix2 K = Matrix2::Identity();
  std::vector<Matrix2> T, D, F;
  double exchange_ratio = 0.0;
  double g_robin = 0.0;
};

struct RunConfig {
  std::string mode;

  GrainShape shape = NoGrain{};
  int resolution = 16;
  double robin_fraction = 1.0;
  double robin_angle = 0.0;
  double epsilon = 0.25;

  int species = 2;
  CoefficientSpec kappa;
  std::vector<CoefficientSpec> tau, diffusion, dufour;
  double g0 = 0.0;

  bool reaction = false;
  std::string kernel_preset = "constant";
  double kernel_scale = 1.0;
  std::vector<double> beta;  // row-major, overrides the preset when set
  std::optional<double> threshold;
  std::vector<double> a, b;

  InitialSpec theta0;
  std::vector<InitialSpec> u0, v0;

  double dt = 1e-2;
  double t_end = 0.1;
  double fp_tol = 1e-10;
  int fp_max = 100;
  double mollifier_delta = 0.0;
  double corrector_tol = 1e-10;
  int corrector_max_iter = 50000;
  int macro_resolution = 64;

  std::string tensor_source = "cell";  // cell | file | explicit
  std::string tensor_file;
  TensorOverride tensor_values;

  std::vector<double> epsilons{0.25, 0.125, 0.0625};

  std::string out_dir = "out";
  int snapshot_every = 0;
  bool strict = false;
  bool vtk = true;

  std::string canonical;  // normalised JSON text of the input, hashed into the manifest
};

namespace detail {

/// JSON object view that records which keys were read and reports
/// leftovers as errors, with the dotted path of every value.
class Section {
 public:
  Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  const nlohmann::json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  Section child(const std::string& key) {
    if (!has(key)) throw ConfigError(where(key) + ": missing section");
    return Section(raw(key), where(key));
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError(where(key) + ": missing value");
    }
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(where(key) + ": must be finite");
    return x;
  }

  int integer(const std::string& key, std::optional<int> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError(where(key) + ": missing value");
    }
    const auto& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError(where(key) + ": missing value");
    }
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(where(key) + "[" + std::to_string(i) + "]: expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Matrix2 parse_matrix(const nlohmann::json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>() * Matrix2::Identity();
  if (!v.is_array() || v.size() != 2 || !v[0].is_array() || !v[1].is_array() || v[0].size() != 2 ||
      v[1].size() != 2)
    throw ConfigError(path + ": expected a number or a 2x2 array");
  Matrix2 m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if (!v[i][j].is_number()) throw ConfigError(path + ": entries must be numbers");
      m(i, j) = v[i][j].get<double>();
    }
  return m;
}

inline CoefficientSpec parse_coefficient(const nlohmann::json& v, const std::string& path) {
  if (v.is_number()) return CoefficientSpec{v.get<double>(), 0.0, 0};
  Section s(v, path);
  const std::string type = s.text("type");
  CoefficientSpec c;
  if (type == "constant") {
    c.mean = s.number("value");
  } else if (type == "layered") {
    c.mean = s.number("mean");
    c.amplitude = s.number("amplitude");
    c.axis = s.integer("axis", 0);
    if (c.axis != 0 && c.axis != 1) throw ConfigError(s.where("axis") + ": must be 0 or 1");
  } else {
    throw ConfigError(s.where("type") + ": unknown coefficient type '" + type + "' (constant, layered)");
  }
  s.finish();
  return c;
}

/// A per-species list, or one value broadcast to every species.
inline std::vector<nlohmann::json> per_species(Section& s, const std::string& key, int n,
                                               const nlohmann::json& fallback) {
  if (!s.has(key)) return std::vector<nlohmann::json>(n, fallback);
  const auto& v = s.raw(key);
  if (v.is_array() && !(v.size() == 2 && v[0].is_array())) {
    if (static_cast<int>(v.size()) != n)
      throw ConfigError(s.where(key) + ": expected " + std::to_string(n) + " entries, one per species");
    return std::vector<nlohmann::json>(v.begin(), v.end());
  }
  return std::vector<nlohmann::json>(n, v);
}

inline InitialSpec parse_initial(const nlohmann::json& v, const std::string& path) {
  InitialSpec f;
  if (v.is_number()) {
    f.value = v.get<double>();
    if (!(f.value >= 0.0)) throw ConfigError(path + ": initial data must be nonnegative");
    return f;
  }
  Section s(v, path);
  const std::string type = s.text("type");
  if (type == "constant") {
    f.kind = InitialSpec::Kind::Constant;
    f.value = s.number("value");
    if (!(f.value >= 0.0)) throw ConfigError(s.where("value") + ": initial data must be nonnegative");
  } else if (type == "cosine") {
    f.kind = InitialSpec::Kind::Cosine;
    f.value = s.number("mean");
    f.amplitude = s.number("amplitude");
    if (!(f.value - std::abs(f.amplitude) >= 0.0))
      throw ConfigError(s.where("amplitude") + ": mean - |amplitude| must be nonnegative");
  } else if (type == "gaussian") {
    f.kind = InitialSpec::Kind::Gaussian;
    f.amplitude = s.number("amplitude");
    f.width = s.number("width");
    if (s.has("center")) {
      const auto c = s.numbers("center");
      if (c.size() != 2) throw ConfigError(s.where("center") + ": expected two numbers");
      f.center = {c[0], c[1]};
    }
    if (!(f.amplitude >= 0.0)) throw ConfigError(s.where("amplitude") + ": must be nonnegative");
    if (!(f.width > 0.0)) throw ConfigError(s.where("width") + ": must be positive");
  } else if (type == "random") {
    f.kind = InitialSpec::Kind::Random;
    f.lo = s.number("min", 0.0);
    f.hi = s.number("max", 1.0);
    f.seed = static_cast<std::uint64_t>(s.integer("seed", 1));
    if (!(f.lo >= 0.0 && f.hi >= f.lo)) throw ConfigError(s.where("min") + ": need 0 <= min <= max");
  } else {
    throw ConfigError(s.where("type") + ": unknown initial field type '" + type +
                      "' (constant, cosine, gaussian, random)");
  }
  s.finish();
  return f;
}

inline GrainShape parse_grain(Section& g) {
  if (!g.has("grain")) return NoGrain{};
  Section s = g.child("grain");
  const std::string shape = s.text("shape");
  GrainShape out;
  if (shape == "none") {
    out = NoGrain{};
  } else if (shape == "disc") {
    Disc d;
    if (s.has("center")) {
      const auto c = s.numbers("center");
      if (c.size() != 2) throw ConfigError(s.where("center") + ": expected two numbers");
      d.center = {c[0], c[1]};
    }
    if (s.has("radius") && s.has("volume_fraction"))
      throw ConfigError(s.where("radius") + ": give either radius or volume_fraction");
    if (s.has("volume_fraction")) {
      const double f = s.number("volume_fraction");
      if (!(f > 0.0 && f < 1.0)) throw ConfigError(s.where("volume_fraction") + ": must lie in (0, 1)");
      d.radius = std::sqrt(f / std::numbers::pi);
    } else {
      d.radius = s.number("radius");
    }
    out = d;
  } else if (shape == "rectangle") {
    Rectangle r;
    r.x0 = s.number("x0");
    r.x1 = s.number("x1");
    r.y0 = s.number("y0");
    r.y1 = s.number("y1");
    out = r;
  } else {
    throw ConfigError(s.where("shape") + ": unknown grain shape '" + shape + "' (none, disc, rectangle)");
  }
  s.finish();
  try {
    check_shape(out);
  } catch (const GeometryError& e) {
    throw ConfigError(s.where() + ": " + e.what());
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& root) {
  using detail::Section;
  RunConfig c;
  Section top(root, "");
  c.canonical = root.dump(2);
  c.mode = top.text("mode", std::string{});
  if (!c.mode.empty() && c.mode != "cell" && c.mode != "micro" && c.mode != "macro" && c.mode != "converge")
    throw ConfigError("mode: must be one of cell, micro, macro, converge");

  c.species = top.integer("species", 2);
  if (c.species < 2) throw ConfigError("species: at least two species are required");
  const int n = c.species;

  if (top.has("geometry")) {
    Section g = top.child("geometry");
    c.shape = detail::parse_grain(g);
    c.resolution = g.integer("resolution", 16);
    if (c.resolution < 16) throw ConfigError(g.where("resolution") + ": must be at least 16");
    c.robin_fraction = g.number("robin_fraction", 1.0);
    if (!(c.robin_fraction >= 0.0 && c.robin_fraction <= 1.0))
      throw ConfigError(g.where("robin_fraction") + ": must lie in [0, 1]");
    c.robin_angle = g.number("robin_angle", 0.0);
    c.epsilon = g.number("epsilon", 0.25);
    try {
      periods_of(c.epsilon);
    } catch (const GeometryError& e) {
      throw ConfigError(g.where("epsilon") + ": " + e.what());
    }
    g.finish();
  }

  {
    const nlohmann::json empty = nlohmann::json::object();
    Section k(top.has("coefficients") ? top.raw("coefficients") : empty, "coefficients");
    c.kappa = k.has("kappa") ? detail::parse_coefficient(k.raw("kappa"), k.where("kappa")) : CoefficientSpec{};
    if (!(c.kappa.lower() > 0.0)) throw ConfigError(k.where("kappa") + ": must be bounded below by a positive constant");
    auto list = [&](const std::string& key, double fallback, bool positive) {
      std::vector<CoefficientSpec> out;
      const auto items = detail::per_species(k, key, n, fallback);
      for (int p = 0; p < n; ++p) {
        const std::string path = k.where(key) + (k.has(key) && k.raw(key).is_array() ? "[" + std::to_string(p) + "]" : "");
        out.push_back(detail::parse_coefficient(items[p], path));
        if (positive && !(out.back().lower() > 0.0))
          throw ConfigError(path + ": must be bounded below by a positive constant");
      }
      return out;
    };
    c.diffusion = list("diffusion", 1.0, true);
    c.tau = list("tau", 0.0, false);
    c.dufour = list("dufour", 0.0, false);
    c.g0 = k.number("g0", 0.0);
    if (!(c.g0 >= 0.0)) throw ConfigError(k.where("g0") + ": must be nonnegative");
    k.finish();
  }

  {
    const nlohmann::json empty = nlohmann::json::object();
    Section k(top.has("kinetics") ? top.raw("kinetics") : empty, "kinetics");
    c.reaction = k.boolean("reaction", false);
    c.kernel_preset = k.text("kernel", std::string("constant"));
    c.kernel_scale = k.number("scale", 1.0);
    if (!(c.kernel_scale >= 0.0)) throw ConfigError(k.where("scale") + ": must be nonnegative");
    if (k.has("beta")) {
      const auto& b = k.raw("beta");
      if (!b.is_array() || static_cast<int>(b.size()) != n)
        throw ConfigError(k.where("beta") + ": expected an N x N array");
      for (int i = 0; i < n; ++i) {
        if (!b[i].is_array() || static_cast<int>(b[i].size()) != n)
          throw ConfigError(k.where("beta") + "[" + std::to_string(i) + "]: expected " + std::to_string(n) + " numbers");
        for (int j = 0; j < n; ++j) {
          if (!b[i][j].is_number()) throw ConfigError(k.where("beta") + ": entries must be numbers");
          c.beta.push_back(b[i][j].get<double>());
        }
      }
    }
    if (k.has("threshold")) {
      const auto& t = k.raw("threshold");
      if (t.is_string() && t.get<std::string>() == "auto") {
      } else if (t.is_number() && t.get<double>() > 0.0) {
        c.threshold = t.get<double>();
      } else {
        throw ConfigError(k.where("threshold") + ": expected \"auto\" or a positive number");
      }
    }
    auto rates = [&](const std::string& key) {
      if (!k.has(key)) return std::vector<double>(n, 0.0);
      const auto& v = k.raw(key);
      if (v.is_number()) return std::vector<double>(n, v.get<double>());
      auto out = k.numbers(key);
      if (static_cast<int>(out.size()) != n)
        throw ConfigError(k.where(key) + ": expected " + std::to_string(n) + " entries, one per species");
      return out;
    };
    c.a = rates("a");
    c.b = rates("b");
    for (int p = 0; p < n; ++p) {
      const std::string at = "[" + std::to_string(p) + "]";
      if (!(c.a[p] >= 0.0)) throw ConfigError(k.where("a") + at + ": must be positive");
      if (!(c.b[p] >= 0.0)) throw ConfigError(k.where("b") + at + ": must be positive");
      if ((c.a[p] > 0.0) != (c.b[p] > 0.0))
        throw ConfigError(k.where("a") + at + ": a and b must both be positive, or both zero to switch deposition off");
    }
    try {
      (void)(c.beta.empty() ? CoagulationKernel::preset(c.kernel_preset, n, c.kernel_scale, 1.0)
                            : CoagulationKernel(n, c.beta, 1.0));
    } catch (const KineticsError& e) {
      throw ConfigError(k.where(c.beta.empty() ? "kernel" : "beta") + ": " + e.what());
    }
    k.finish();
  }

  {
    const nlohmann::json empty = nlohmann::json::object();
    Section s(top.has("initial") ? top.raw("initial") : empty, "initial");
    c.theta0 = s.has("theta") ? detail::parse_initial(s.raw("theta"), s.where("theta")) : InitialSpec{};
    auto list = [&](const std::string& key) {
      std::vector<InitialSpec> out;
      const auto items = detail::per_species(s, key, n, 0.0);
      for (int p = 0; p < n; ++p) {
        const std::string path = s.where(key) + (s.has(key) && s.raw(key).is_array() ? "[" + std::to_string(p) + "]" : "");
        out.push_back(detail::parse_initial(items[p], path));
      }
      return out;
    };
    c.u0 = list("u");
    c.v0 = list("v");
    s.finish();
  }

  if (top.has("solver")) {
    Section s = top.child("solver");
    c.dt = s.number("dt", c.dt);
    if (!(c.dt > 0.0)) throw ConfigError(s.where("dt") + ": must be positive");
    c.t_end = s.number("T_end", c.t_end);
    if (!(c.t_end >= 0.0)) throw ConfigError(s.where("T_end") + ": must be nonnegative");
    c.fp_tol = s.number("fp_tol", c.fp_tol);
    if (!(c.fp_tol > 0.0)) throw ConfigError(s.where("fp_tol") + ": must be positive");
    c.fp_max = s.integer("fp_max", c.fp_max);
    if (c.fp_max < 1) throw ConfigError(s.where("fp_max") + ": must be at least 1");
    c.mollifier_delta = s.number("mollifier_delta", 0.0);
    if (!(c.mollifier_delta >= 0.0)) throw ConfigError(s.where("mollifier_delta") + ": must be nonnegative");
    c.corrector_tol = s.number("corrector_tol", c.corrector_tol);
    if (!(c.corrector_tol > 0.0)) throw ConfigError(s.where("corrector_tol") + ": must be positive");
    c.corrector_max_iter = s.integer("corrector_max_iter", c.corrector_max_iter);
    c.macro_resolution = s.integer("macro_resolution", c.macro_resolution);
    if (c.macro_resolution < 2) throw ConfigError(s.where("macro_resolution") + ": must be at least 2");
    s.finish();
  }

  if (top.has("tensors")) {
    Section s = top.child("tensors");
    c.tensor_source = s.text("source", std::string("cell"));
    if (c.tensor_source == "file") {
      c.tensor_file = s.text("path");
    } else if (c.tensor_source == "explicit") {
      auto& tv = c.tensor_values;
      tv.K = detail::parse_matrix(s.raw("K"), s.where("K"));
      auto mats = [&](const std::string& key, double fallback) {
        std::vector<Matrix2> out;
        if (!s.has(key)) return std::vector<Matrix2>(n, fallback * Matrix2::Identity());
        const auto& v = s.raw(key);
        if (v.is_array() && static_cast<int>(v.size()) == n && !(v.size() == 2 && v[0].is_array() && v[0][0].is_number())) {
          for (int p = 0; p < n; ++p)
            out.push_back(detail::parse_matrix(v[p], s.where(key) + "[" + std::to_string(p) + "]"));
        } else {
          out.assign(n, detail::parse_matrix(v, s.where(key)));
        }
        return out;
      };
      tv.T = mats("T", 0.0);
      tv.D = mats("D", 1.0);
      tv.F = mats("F", 0.0);
      tv.exchange_ratio = s.number("exchange_ratio", 0.0);
      tv.g_robin = s.number("g_robin", 0.0);
      if (!(tv.exchange_ratio >= 0.0)) throw ConfigError(s.where("exchange_ratio") + ": must be nonnegative");
      if (!(tv.g_robin >= 0.0)) throw ConfigError(s.where("g_robin") + ": must be nonnegative");
    } else if (c.tensor_source != "cell") {
      throw ConfigError(s.where("source") + ": must be one of cell, file, explicit");
    }
    s.finish();
  }

  if (top.has("converge")) {
    Section s = top.child("converge");
    if (s.has("epsilons")) c.epsilons = s.numbers("epsilons");
    if (c.epsilons.empty()) throw ConfigError(s.where("epsilons") + ": at least one value required");
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
      try {
        periods_of(c.epsilons[i]);
      } catch (const GeometryError& e) {
        throw ConfigError(s.where("epsilons") + "[" + std::to_string(i) + "]: " + e.what());
      }
    }
    s.finish();
  }

  if (top.has("output")) {
    Section s = top.child("output");
    c.out_dir = s.text("directory", c.out_dir);
    c.snapshot_every = s.integer("snapshot_every", 0);
    if (c.snapshot_every < 0) throw ConfigError(s.where("snapshot_every") + ": must be nonnegative");
    c.strict = s.boolean("strict", false);
    c.vtk = s.boolean("vtk", true);
    s.finish();
  }

  top.finish();
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// ---- builders from a parsed config -------------------------------------------------

inline UnitCell make_unit_cell(const RunConfig& c) {
  return build_unit_cell(c.shape, c.resolution, c.robin_fraction, c.robin_angle);
}

inline CellCoefficients make_cell_coefficients(const RunConfig& c, const UnitCell& cell) {
  const auto& g = cell.grid;
  CellCoefficients co;
  auto sample = [&](const CoefficientSpec& s) {
    std::vector<double> f(g.cell_count(), 0.0);
    for (int k = 0; k < g.cell_count(); ++k) f[k] = s(g.x(g.ci(k)), g.y(g.cj(k)));
    return f;
  };
  co.kappa = sample(c.kappa);
  for (int p = 0; p < c.species; ++p) {
    co.tau.push_back(sample(c.tau[p]));
    co.diffusion.push_back(sample(c.diffusion[p]));
    co.dufour.push_back(sample(c.dufour[p]));
  }
  return co;
}

inline DepositionParams make_deposition(const RunConfig& c) { return DepositionParams{c.a, c.b}; }

inline CoagulationKernel make_kernel(const RunConfig& c) {
  const double m = c.threshold.value_or(1.0);
  return c.beta.empty() ? CoagulationKernel::preset(c.kernel_preset, c.species, c.kernel_scale, m)
                        : CoagulationKernel(c.species, c.beta, m);
}

}  // namespace perihom
