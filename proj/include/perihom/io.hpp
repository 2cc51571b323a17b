#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "perihom/cell_solver.hpp"
#include "perihom/grid.hpp"
#include "perihom/mollifier.hpp"
#include "perihom/state.hpp"

namespace perihom {

class IoError : public Error {
 public:
  using Error::Error;
};

/// Shortest round-trip decimal form, independent of the locale.
inline std::string fmt(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline std::string fmt(long x) { return std::to_string(x); }
inline std::string fmt(int x) { return std::to_string(x); }

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

/// Writes files into one directory through a temporary name and a rename,
/// remembering the content hash of each for the manifest.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  const std::filesystem::path& path() const noexcept { return dir_; }

  void write(const std::string& name, const std::string& content) {
    const auto target = dir_ / name;
    const auto tmp = dir_ / ("." + name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write '" + tmp.string() + "'");
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      if (!out) throw IoError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) throw IoError("cannot rename '" + tmp.string() + "': " + ec.message());
    hashes_[name] = sha256_hex(content);
  }

  const std::map<std::string, std::string>& hashes() const noexcept { return hashes_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> hashes_;
};

// ---- CSV ---------------------------------------------------------------------------

inline std::string diagnostics_csv(const std::vector<StepDiagnostics>& rows, int species) {
  std::ostringstream o;
  o << "step,t,iterations,contraction,increment,theta_min,theta_max";
  for (int p = 1; p <= species; ++p)
    o << ",u" << p << "_min,u" << p << "_max,v" << p << "_min,v" << p << "_max,mass" << p;
  o << ",monomer_mass,heat,energy,energy_bound,truncations,upwinded\n";
  for (const auto& d : rows) {
    o << d.step << ',' << fmt(d.t) << ',' << d.iterations << ',' << fmt(d.contraction) << ',' << fmt(d.increment)
      << ',' << fmt(d.theta_min) << ',' << fmt(d.theta_max);
    for (int p = 0; p < species; ++p)
      o << ',' << fmt(d.u_min[p]) << ',' << fmt(d.u_max[p]) << ',' << fmt(d.v_min[p]) << ',' << fmt(d.v_max[p]) << ','
        << fmt(d.species_mass[p]);
    o << ',' << fmt(d.monomer_mass) << ',' << fmt(d.heat) << ',' << fmt(d.energy) << ',' << fmt(d.energy_bound) << ','
      << d.truncations << ',' << d.upwinded << '\n';
  }
  return o.str();
}

/// Cell-centred snapshot: one row per pore cell.
inline std::string snapshot_csv(const MaskedGrid& g, const FieldState& s) {
  std::ostringstream o;
  o << "x,y,theta";
  for (int p = 1; p <= s.species(); ++p) o << ",u" << p;
  o << '\n';
  for (int c : g.pore_cells()) {
    o << fmt(g.x(g.ci(c))) << ',' << fmt(g.y(g.cj(c))) << ',' << fmt(s.theta[c]);
    for (const auto& u : s.u) o << ',' << fmt(u[c]);
    o << '\n';
  }
  return o.str();
}

/// Deposit values at their sites.
inline std::string deposit_csv(const std::vector<std::array<double, 2>>& points, const FieldState& s) {
  std::ostringstream o;
  o << "x,y";
  for (int p = 1; p <= s.species(); ++p) o << ",v" << p;
  o << '\n';
  for (std::size_t k = 0; k < points.size(); ++k) {
    o << fmt(points[k][0]) << ',' << fmt(points[k][1]);
    for (const auto& v : s.v) o << ',' << fmt(v[k]);
    o << '\n';
  }
  return o.str();
}

/// Legacy VTK structured points; grain cells carry NaN.
inline std::string snapshot_vtk(const MaskedGrid& g, const FieldState& s) {
  std::ostringstream o;
  const int n = g.n();
  o << "# vtk DataFile Version 3.0\nperihom snapshot t=" << fmt(s.t) << "\nASCII\nDATASET STRUCTURED_POINTS\n";
  o << "DIMENSIONS " << n + 1 << ' ' << n + 1 << " 1\nORIGIN 0 0 0\nSPACING " << fmt(g.h()) << ' ' << fmt(g.h())
    << " 1\nCELL_DATA " << n * n << '\n';
  auto field = [&](const std::string& name, const std::vector<double>& f) {
    o << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int c = 0; c < n * n; ++c) o << (g.is_pore(c) ? fmt(f[c]) : std::string("nan")) << '\n';
  };
  field("theta", s.theta);
  for (int p = 0; p < s.species(); ++p) field("u" + std::to_string(p + 1), s.u[p]);
  return o.str();
}

inline std::string mask_csv(const MaskedGrid& g) {
  std::ostringstream o;
  for (int j = g.n() - 1; j >= 0; --j) {
    for (int i = 0; i < g.n(); ++i) o << (i ? "," : "") << (g.is_pore(i, j) ? 1 : 0);
    o << '\n';
  }
  return o.str();
}

/// Binary greyscale image, pore white, top row = largest y.
inline std::string mask_pgm(const MaskedGrid& g) {
  std::string o = "P5\n" + std::to_string(g.n()) + " " + std::to_string(g.n()) + "\n255\n";
  for (int j = g.n() - 1; j >= 0; --j)
    for (int i = 0; i < g.n(); ++i) o.push_back(static_cast<char>(g.is_pore(i, j) ? 255 : 0));
  return o;
}

inline std::string kernel_csv(const MollifierKernel& k) {
  std::ostringstream o;
  o << "di,dj,weight\n";
  for (const auto& t : k.taps()) o << t.di << ',' << t.dj << ',' << fmt(t.weight) << '\n';
  return o.str();
}

// ---- tensors -----------------------------------------------------------------------

inline std::string tensors_csv(const EffectiveTensors& t) {
  std::ostringstream o;
  o << "name,species,i,j,value\n";
  auto mat = [&](const std::string& name, int p, const Matrix2& m) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) o << name << ',' << p << ',' << i + 1 << ',' << j + 1 << ',' << fmt(m(i, j)) << '\n';
  };
  auto scalar = [&](const std::string& name, int p, double v) { o << name << ',' << p << ",0,0," << fmt(v) << '\n'; };
  mat("K", 0, t.K);
  mat("K_bulk", 0, t.bulk_K());
  scalar("K0", 0, t.K0);
  for (int p = 0; p < t.species(); ++p) {
    mat("T", p + 1, t.T[p]);
    mat("D", p + 1, t.D[p]);
    mat("F", p + 1, t.F[p]);
    scalar("A", p + 1, t.A[p]);
    scalar("B", p + 1, t.B[p]);
  }
  scalar("g_robin", 0, t.g_robin);
  scalar("pore_area", 0, t.measures.pore_area);
  scalar("perimeter", 0, t.measures.perimeter);
  scalar("robin_perimeter", 0, t.measures.robin_perimeter);
  return o.str();
}

inline nlohmann::json matrix_json(const Matrix2& m) {
  return nlohmann::json::array({nlohmann::json::array({m(0, 0), m(0, 1)}), nlohmann::json::array({m(1, 0), m(1, 1)})});
}

inline Matrix2 matrix_from_json(const nlohmann::json& j) {
  Matrix2 m;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) m(i, k) = j.at(i).at(k).get<double>();
  return m;
}

/// Structured report; read back by tensors_from_json.
inline nlohmann::json tensors_json(const EffectiveTensors& t, const std::vector<KrylovReport>& residuals = {}) {
  nlohmann::json j;
  j["K"] = matrix_json(t.K);
  j["K_bulk"] = matrix_json(t.bulk_K());
  j["K0"] = t.K0;
  j["K_asymmetry"] = t.K_asymmetry;
  j["g_robin"] = t.g_robin;
  j["measures"] = {{"pore_area", t.measures.pore_area},
                   {"perimeter", t.measures.perimeter},
                   {"robin_perimeter", t.measures.robin_perimeter},
                   {"staircase_length", t.measures.staircase_length}};
  nlohmann::json sp = nlohmann::json::array();
  for (int p = 0; p < t.species(); ++p) {
    sp.push_back({{"T", matrix_json(t.T[p])},
                  {"D", matrix_json(t.D[p])},
                  {"F", matrix_json(t.F[p])},
                  {"T0", t.T0[p]},
                  {"D0", t.D0[p]},
                  {"F0", t.F0[p]},
                  {"A", t.A[p]},
                  {"B", t.B[p]},
                  {"D_asymmetry", t.D_asymmetry[p]}});
  }
  j["species"] = sp;
  nlohmann::json res = nlohmann::json::array();
  for (const auto& r : residuals) res.push_back({{"iterations", r.iterations}, {"relative_residual", r.relative_residual}});
  j["corrector_solves"] = res;
  j["warnings"] = t.warnings;
  return j;
}

inline EffectiveTensors tensors_from_json(const nlohmann::json& j) {
  EffectiveTensors t;
  try {
    t.K = matrix_from_json(j.at("K"));
    t.K0 = j.at("K0").get<double>();
    t.g_robin = j.at("g_robin").get<double>();
    const auto& m = j.at("measures");
    t.measures.pore_area = m.at("pore_area").get<double>();
    t.measures.perimeter = m.at("perimeter").get<double>();
    t.measures.robin_perimeter = m.at("robin_perimeter").get<double>();
    for (const auto& s : j.at("species")) {
      t.T.push_back(matrix_from_json(s.at("T")));
      t.D.push_back(matrix_from_json(s.at("D")));
      t.F.push_back(matrix_from_json(s.at("F")));
      t.T0.push_back(s.at("T0").get<double>());
      t.D0.push_back(s.at("D0").get<double>());
      t.F0.push_back(s.at("F0").get<double>());
      t.A.push_back(s.at("A").get<double>());
      t.B.push_back(s.at("B").get<double>());
      t.D_asymmetry.push_back(0.0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed tensor report: ") + e.what());
  }
  return t;
}

inline std::string tensors_text(const EffectiveTensors& t, const std::vector<KrylovReport>& residuals = {}) {
  return tensors_json(t, residuals).dump(2) + "\n";
}

}  // namespace perihom
