#include <gtest/gtest.h>

#include <chrono>
#include <numbers>
#include <random>

#include "perihom/cell_solver.hpp"

using namespace perihom;

namespace {

constexpr double kPi = std::numbers::pi;

DepositionParams no_deposition(int np) { return {std::vector<double>(np, 0.0), std::vector<double>(np, 0.0)}; }

// kappa = 1 + 0.5 sin(2 pi s), s the coordinate along `axis`
CellCoefficients layered(const UnitCell& cell, int axis) {
  auto c = CellCoefficients::uniform(cell.grid.cell_count(), 1, 1.0, 0.0, 1.0, 0.0);
  for (int k = 0; k < cell.grid.cell_count(); ++k) {
    const double s = axis == 0 ? cell.grid.x(cell.grid.ci(k)) : cell.grid.y(cell.grid.cj(k));
    c.kappa[k] = 1.0 + 0.5 * std::sin(2.0 * kPi * s);
  }
  c.diffusion[0] = c.kappa;
  return c;
}

// independent quadrature of the harmonic mean of 1 + 0.5 sin(2 pi s)
double harmonic_mean_oracle() {
  const int m = 200000;
  double s = 0.0;
  for (int k = 0; k < m; ++k) s += 1.0 / (1.0 + 0.5 * std::sin(2.0 * kPi * (k + 0.5) / m));
  return m / s;
}

}  // namespace

TEST(CellSolver, ConstantCoefficientsNoGrainGiveIdentity) {
  const auto cell = build_unit_cell(NoGrain{}, 32);
  const auto c = CellCoefficients::uniform(cell.grid.cell_count(), 2, 1.0, 0.3, 0.7, 0.2);
  const auto r = compute_effective_tensors(cell, c, no_deposition(2), 0.0);
  EXPECT_LT((r.tensors.K - Matrix2::Identity()).norm(), 1e-12);
  for (int p = 0; p < 2; ++p) {
    EXPECT_LT((r.tensors.D[p] - 0.7 * Matrix2::Identity()).norm(), 1e-12);
    EXPECT_LT((r.tensors.T[p] - 0.3 * Matrix2::Identity()).norm(), 1e-12);
    EXPECT_LT((r.tensors.F[p] - 0.2 * Matrix2::Identity()).norm(), 1e-12);
  }
  for (const auto& cor : r.correctors.theta)
    for (double v : cor.field) EXPECT_LT(std::abs(v), 1e-12);
}

TEST(CellSolver, LayeredMediumHarmonicAndArithmeticMeans) {
  const double harm = harmonic_mean_oracle();
  EXPECT_NEAR(harm, std::sqrt(0.75), 1e-9);
  const auto cell = build_unit_cell(NoGrain{}, 256);
  for (int axis : {0, 1}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = compute_effective_tensors(cell, layered(cell, axis), no_deposition(1), 0.0);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& K = r.tensors.K;
    EXPECT_NEAR(K(axis, axis), harm, 0.01 * harm);
    EXPECT_NEAR(K(1 - axis, 1 - axis), 1.0, 0.01);
    EXPECT_LT(std::abs(K(0, 1)), 1e-10);
    EXPECT_LT(secs, 30.0);
  }
}

TEST(CellSolver, DiluteDiscMatchesMaxwellBand) {
  const double f = 0.05;
  const double r = std::sqrt(f / kPi);
  const auto cell = build_unit_cell(Disc{{0.5, 0.5}, r}, 128);
  const auto c = CellCoefficients::uniform(cell.grid.cell_count(), 1, 1.0, 0.0, 1.0, 0.0);
  const auto t = compute_effective_tensors(cell, c, no_deposition(1), 0.0).tensors;
  const Matrix2 bulk = t.bulk_K();
  const double maxwell = (1.0 - f) / (1.0 + f);
  for (int i = 0; i < 2; ++i) {
    EXPECT_GE(bulk(i, i), 0.88);
    EXPECT_LE(bulk(i, i), 0.93);
    EXPECT_NEAR(bulk(i, i), maxwell, 0.01);
    EXPECT_LE(t.K(i, i), t.K0 + 1e-12);
  }
  EXPECT_LE(std::abs(t.K(0, 1)), 1e-3);
  EXPECT_NEAR(t.K(0, 0), t.K(1, 1), 1e-10);
}

TEST(CellSolver, TensorsSymmetricPositiveDefinite) {
  const auto cell = build_unit_cell(Disc{{0.45, 0.55}, 0.25}, 64);
  const auto c = CellCoefficients::uniform(cell.grid.cell_count(), 2, 1.5, 0.1, 0.4, 0.05);
  const auto t = compute_effective_tensors(cell, c, no_deposition(2), 0.0).tensors;
  EXPECT_EQ(t.K, t.K.transpose());
  EXPECT_GT(t.K.determinant(), 0.0);
  EXPECT_GT(t.K.trace(), 0.0);
  EXPECT_LT(t.K_asymmetry, 1e-6);
  for (int p = 0; p < 2; ++p) {
    EXPECT_EQ(t.D[p], t.D[p].transpose());
    EXPECT_GT(t.D[p].determinant(), 0.0);
  }
  EXPECT_TRUE(t.warnings.empty());
}

TEST(CellSolver, ScalesLinearlyWithCoefficient) {
  const auto cell = build_unit_cell(Disc{{0.5, 0.5}, 0.3}, 64);
  const auto one = CellCoefficients::uniform(cell.grid.cell_count(), 1, 1.0, 1.0, 1.0, 1.0);
  const auto three = CellCoefficients::uniform(cell.grid.cell_count(), 1, 3.0, 3.0, 3.0, 3.0);
  const auto a = compute_effective_tensors(cell, one, no_deposition(1), 0.0).tensors;
  const auto b = compute_effective_tensors(cell, three, no_deposition(1), 0.0).tensors;
  EXPECT_LT((b.K - 3.0 * a.K).norm(), 1e-8);
  EXPECT_LT((b.D[0] - 3.0 * a.D[0]).norm(), 1e-8);
  EXPECT_LT((b.T[0] - 3.0 * a.T[0]).norm(), 1e-8);
}

TEST(CellSolver, SymmetricGrainIsIsotropic) {
  const auto cell = build_unit_cell(Disc{{0.5, 0.5}, 0.3}, 64);
  const auto c = CellCoefficients::uniform(cell.grid.cell_count(), 1, 1.0, 0.0, 1.0, 0.0);
  const auto t = compute_effective_tensors(cell, c, no_deposition(1), 0.0).tensors;
  EXPECT_NEAR(t.K(0, 0), t.K(1, 1), 1e-10);
  EXPECT_LT(std::abs(t.K(0, 1)), 1e-10);
  EXPECT_LT(t.K(0, 0), 1.0);
}

TEST(CellSolver, RectangleAnisotropy) {
  // a grain elongated along x obstructs the y direction more
  const auto cell = build_unit_cell(Rectangle{0.1, 0.9, 0.4, 0.6}, 64);
  const auto c = CellCoefficients::uniform(cell.grid.cell_count(), 1, 1.0, 0.0, 1.0, 0.0);
  const auto t = compute_effective_tensors(cell, c, no_deposition(1), 0.0).tensors;
  EXPECT_GT(t.K(0, 0), t.K(1, 1));
  EXPECT_LT(t.K(0, 0), 1.0);
  EXPECT_LT(std::abs(t.K(0, 1)), 1e-10);
}

TEST(CellSolver, CheckerboardWithinVoigtReussBounds) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.2, 5.0);
  const auto cell = build_unit_cell(NoGrain{}, 32);
  for (int trial = 0; trial < 5; ++trial) {
    auto c = CellCoefficients::uniform(cell.grid.cell_count(), 1, 1.0, 0.0, 1.0, 0.0);
    // 4x4 blocks of 8x8 cells
    std::array<double, 16> block{};
    for (double& b : block) b = d(rng);
    double arith = 0.0, inv = 0.0;
    for (double b : block) {
      arith += b / 16.0;
      inv += 1.0 / (16.0 * b);
    }
    for (int k = 0; k < cell.grid.cell_count(); ++k)
      c.kappa[k] = block[(cell.grid.cj(k) / 8) * 4 + cell.grid.ci(k) / 8];
    c.diffusion[0] = c.kappa;
    const auto t = compute_effective_tensors(cell, c, no_deposition(1), 0.0).tensors;
    Eigen::SelfAdjointEigenSolver<Matrix2> es(t.K);
    EXPECT_GE(es.eigenvalues()(0), 1.0 / inv - 1e-8);
    EXPECT_LE(es.eigenvalues()(1), arith + 1e-8);
  }
}

TEST(CellSolver, ResolutionSequenceIsCauchy) {
  const auto c64 = build_unit_cell(Disc{{0.5, 0.5}, 0.25}, 64);
  const auto c128 = build_unit_cell(Disc{{0.5, 0.5}, 0.25}, 128);
  const auto c256 = build_unit_cell(Disc{{0.5, 0.5}, 0.25}, 256);
  auto k11 = [](const UnitCell& cell) {
    const auto c = CellCoefficients::uniform(cell.grid.cell_count(), 1, 1.0, 0.0, 1.0, 0.0);
    return compute_effective_tensors(cell, c, no_deposition(1), 0.0).tensors.K(0, 0);
  };
  const double a = k11(c64), b = k11(c128), e = k11(c256);
  EXPECT_LT(std::abs(e - b), std::abs(b - a));
  EXPECT_LT(std::abs(e - b), 0.01);
}

TEST(CellSolver, ExchangeAndRobinCoefficients) {
  const auto cell = build_unit_cell(Disc{{0.5, 0.5}, 0.25}, 64, 0.5);
  const auto c = CellCoefficients::uniform(cell.grid.cell_count(), 2, 1.0, 0.0, 1.0, 0.0);
  const DepositionParams dep{{1.0, 2.0}, {0.5, 0.25}};
  const auto t = compute_effective_tensors(cell, c, dep, 0.8).tensors;
  const double ratio = cell.measures.perimeter / cell.measures.pore_area;
  EXPECT_DOUBLE_EQ(t.exchange_ratio(), ratio);
  EXPECT_DOUBLE_EQ(t.A[1], 2.0 * ratio);
  EXPECT_DOUBLE_EQ(t.B[0], 0.5 * ratio);
  EXPECT_DOUBLE_EQ(t.g_robin, 0.8 * cell.measures.robin_perimeter / cell.measures.pore_area);
}

TEST(CellSolver, CorrectorsHaveZeroMean) {
  const auto cell = build_unit_cell(Disc{{0.4, 0.6}, 0.2}, 64);
  const auto c = CellCoefficients::uniform(cell.grid.cell_count(), 1, 1.0, 0.0, 1.0, 0.0);
  const auto cor = solve_correctors(c, cell);
  for (const auto& s : cor.theta) {
    EXPECT_NEAR(detail::pore_mean(s.field, cell), 0.0, 1e-12);
    EXPECT_LT(s.report.relative_residual, 1e-9);
  }
}

TEST(CellSolver, BrokenCorrectorIsRejected) {
  const auto cell = build_unit_cell(Disc{{0.5, 0.5}, 0.25}, 32);
  const auto c = CellCoefficients::uniform(cell.grid.cell_count(), 1, 1.0, 0.0, 1.0, 0.0);
  auto cor = solve_correctors(c, cell);
  for (int k : cell.grid.pore_cells()) cor.theta[0].field[k] += 0.2 * cell.grid.y(cell.grid.cj(k));
  EXPECT_THROW(assemble_tensors(cor, c, cell, no_deposition(1), 0.0), SolverError);
}

TEST(CellSolver, NonPositiveCoefficientRejected) {
  const auto cell = build_unit_cell(NoGrain{}, 16);
  auto c = CellCoefficients::uniform(cell.grid.cell_count(), 1, 1.0, 0.0, 1.0, 0.0);
  c.kappa[5] = 0.0;
  EXPECT_THROW(solve_correctors(c, cell), Error);
}
