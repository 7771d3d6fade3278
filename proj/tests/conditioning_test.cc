// Copyright 2026 The matchlp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "matchlp/conditioning.h"
#include "matchlp/objective.h"
#include "matchlp/projection.h"
#include "test_util.h"

namespace matchlp {
namespace {

// One destination, two sources: row (3, 4).
MatchingInstance RowThreeFour() {
  MatchingInstance inst;
  inst.a = MakeSparseBlockMatrix(1, 2, 1, {{0, 0, {3}}, {1, 0, {4}}});
  inst.b = {10};
  inst.c = {-1, -1};
  inst.projection.blocks = {BlockProjection::Box(0, 1), BlockProjection::Box(0, 1)};
  return inst;
}

TEST(RowNormalize, ThreeFourExample) {
  const auto [scaled, scaling] = RowNormalize(RowThreeFour());
  const auto dense = ToDense(scaled.a);
  EXPECT_NEAR(dense(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(dense(0, 1), 0.8, 1e-15);
  EXPECT_NEAR(scaled.b[0], 2.0, 1e-15);
  EXPECT_NEAR(scaling.d[0], 0.2, 1e-15);
  EXPECT_EQ(scaling.num_unscaled(), 0);
}

TEST(RowNormalize, UnitRowsUnchanged) {
  MatchingInstance inst;
  inst.a = MakeSparseBlockMatrix(2, 1, 2, {{0, 0, {1, -1}}, {0, 1, {1, 1}}});
  inst.b = {1, 2, 3, 4};
  inst.c = {0, 0};
  inst.projection.blocks = {BlockProjection::Simplex(1)};
  const auto [scaled, scaling] = RowNormalize(inst);
  EXPECT_EQ(scaled.a, inst.a);
  EXPECT_EQ(scaled.b, inst.b);
  for (Real d : scaling.d) EXPECT_EQ(d, 1);
}

TEST(RowNormalize, ZeroRowFlagged) {
  MatchingInstance inst;
  inst.a = MakeSparseBlockMatrix(1, 1, 2, {{0, 0, {2}}});
  inst.b = {4, 5};
  inst.c = {0};
  inst.projection.blocks = {BlockProjection::Box(0, 1)};
  const auto [scaled, scaling] = RowNormalize(inst);
  EXPECT_EQ(scaling.d[1], 1);
  EXPECT_EQ(scaling.unscaled[1], 1);
  EXPECT_EQ(scaling.unscaled[0], 0);
  EXPECT_EQ(scaled.b[1], 5);
  EXPECT_EQ(scaling.num_unscaled(), 1);
}

TEST(RowNormalize, DualMapsRoundTrip) {
  const auto [scaled, scaling] = RowNormalize(RowThreeFour());
  const std::vector<Real> lam{3};
  const auto down = ScaleDuals(scaling, lam);
  EXPECT_NEAR(UnscaleDuals(scaling, down)[0], 3, 1e-15);
  EXPECT_NEAR(UnscaleDuals(scaling, std::vector<Real>{1})[0], 0.2, 1e-15);
}

TEST(RowNormalizeProperties, UnitDiagonalAndFeasibility) {
  std::mt19937_64 rng(41);
  int agreements = 0;
  for (int trial = 0; trial < 20; ++trial) {
    MatchingInstance inst;
    inst.a = MakeSparseBlockMatrix(2, 8, 5, testing::RandomEdges(rng, 2, 8, 5, 0.4));
    inst.c.assign(static_cast<std::size_t>(inst.nnz()), 0);
    inst.b = testing::RandomVector(rng, static_cast<std::size_t>(inst.dual_dimension()), -1, 1);
    inst.projection.blocks.assign(8, BlockProjection::None());
    const auto [scaled, scaling] = RowNormalize(inst);

    const auto norms = RowNormsSquared(scaled.a);
    const auto original = RowNormsSquared(inst.a);
    for (std::size_t r = 0; r < norms.size(); ++r) {
      if (original[r] > 0) {
        EXPECT_NEAR(norms[r], 1.0, 1e-12);
        EXPECT_NEAR(scaling.d[r], 1 / std::sqrt(original[r]), 1e-12);
      } else {
        EXPECT_EQ(scaling.unscaled[r], 1);
      }
    }
    for (int sample = 0; sample < 50; ++sample) {
      const auto x = testing::RandomVector(rng, static_cast<std::size_t>(inst.nnz()), -1, 2);
      const auto ax = ApplyA(inst.a, PrimalBlocks(x));
      const auto sx = ApplyA(scaled.a, PrimalBlocks(x));
      bool feasible = true;
      bool feasible_scaled = true;
      for (std::size_t r = 0; r < ax.size(); ++r) {
        feasible = feasible && ax.values[r] <= inst.b[r];
        feasible_scaled = feasible_scaled && sx.values[r] <= scaled.b[r];
      }
      if (feasible == feasible_scaled) ++agreements;
    }
  }
  EXPECT_EQ(agreements, 1000);
}

TEST(RowNormalizeProperties, BoundaryPointsStayOnBoundary) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    MatchingInstance inst;
    inst.a = MakeSparseBlockMatrix(1, 6, 4, testing::RandomEdges(rng, 1, 6, 4, 0.5));
    inst.c.assign(static_cast<std::size_t>(inst.nnz()), 0);
    const auto x = testing::RandomVector(rng, static_cast<std::size_t>(inst.nnz()), 0, 1);
    const auto ax = ApplyA(inst.a, PrimalBlocks(x));
    inst.b = ax.values;  // every row tight
    inst.projection.blocks.assign(6, BlockProjection::None());
    const auto [scaled, scaling] = RowNormalize(inst);
    const auto sx = ApplyA(scaled.a, PrimalBlocks(x));
    for (std::size_t r = 0; r < sx.size(); ++r) {
      EXPECT_NEAR(sx.values[r], scaled.b[r], 1e-12 * (1 + std::abs(scaled.b[r])));
    }
  }
}

TEST(PrimalScale, IdentityIsNoOp) {
  std::mt19937_64 rng(43);
  const auto inst = testing::RandomInstance(rng, 2, 6, 4, 0.5);
  const auto scaled = PrimalScale(inst, IdentityPrimalScaling(inst.num_sources()));
  EXPECT_EQ(scaled.a, inst.a);
  EXPECT_EQ(scaled.c, inst.c);
  EXPECT_EQ(scaled.b, inst.b);
  EXPECT_EQ(scaled.projection.blocks, inst.projection.blocks);
}

TEST(PrimalScale, OneByOneExample) {
  MatchingInstance inst;
  inst.a = MakeSparseBlockMatrix(1, 1, 1, {{0, 0, {2}}});
  inst.b = {1};
  inst.c = {-1};
  inst.projection.blocks = {BlockProjection::Box(0, 1)};
  const auto scaled = PrimalScale(inst, PrimalScaling{{2}});
  EXPECT_EQ(scaled.a.family_values(0)[0], 1);
  EXPECT_EQ(scaled.c[0], -0.5);
  EXPECT_EQ(scaled.projection.blocks[0], BlockProjection::Box(0, 2));
  const auto x = UnscalePrimal(scaled.a, PrimalScaling{{2}}, std::vector<Real>{2});
  EXPECT_EQ(x[0], 1);
}

TEST(PrimalScale, SimplexCapScales) {
  MatchingInstance inst;
  inst.a = MakeSparseBlockMatrix(1, 1, 2, {{0, 0, {1}}, {0, 1, {1}}});
  inst.b = {1, 1};
  inst.c = {-1, -2};
  inst.projection.blocks = {BlockProjection::Simplex(1.5)};
  const auto scaled = PrimalScale(inst, PrimalScaling{{4}});
  EXPECT_EQ(scaled.projection.blocks[0], BlockProjection::Simplex(6));
}

TEST(PrimalScale, Errors) {
  std::mt19937_64 rng(44);
  const auto inst = testing::RandomInstance(rng, 1, 3, 2, 0.9);
  EXPECT_THROW(PrimalScale(inst, PrimalScaling{{1, 0, 1}}), ConfigError);
  EXPECT_THROW(PrimalScale(inst, PrimalScaling{{1, -2, 1}}), ConfigError);
  EXPECT_THROW(PrimalScale(inst, PrimalScaling{{1, 1}}), StructuralError);
}

TEST(PrimalScale, AutoUsesMedianMagnitude) {
  MatchingInstance inst;
  inst.a = MakeSparseBlockMatrix(1, 3, 3,
                                 {{0, 0, {1}}, {0, 1, {1}}, {0, 2, {1}}, {1, 0, {1}}});
  inst.b = {1, 1, 1};
  inst.c = {-1, -4, -10, 0};
  inst.projection.blocks = {BlockProjection::Simplex(1), BlockProjection::Box(0, 1),
                            BlockProjection::Box(0, 1)};
  const auto v = AutoPrimalScaling(inst);
  EXPECT_DOUBLE_EQ(v.v[0], 0.25);
  EXPECT_EQ(v.v[1], 1);  // zero median
  EXPECT_EQ(v.v[2], 1);  // no edges
}

TEST(PrimalScaleProperties, EquivalentToGeneralizedRegularizer) {
  std::mt19937_64 rng(45);
  std::uniform_real_distribution<double> scale_dist(0.2, 5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = testing::RandomInstance(rng, 1 + trial % 2, 8, 5, 0.6);
    PrimalScaling v;
    for (Index i = 0; i < inst.num_sources(); ++i) v.v.push_back(static_cast<Real>(scale_dist(rng)));
    const auto scaled = PrimalScale(inst, v);
    const auto lam = testing::RandomVector(rng, static_cast<std::size_t>(inst.dual_dimension()), 0, 2);
    const double gamma = 0.3;
    const auto z = PrimalCandidate(scaled, DualVector(lam), gamma);
    const auto x = UnscalePrimal(scaled.a, v, z.values);

    // Minimizer of c^T x + (gamma/2)||D_v x||^2 + lam^T A x over the original
    // blocks: v_i is constant per block, so each block is a plain projection
    // of the unconstrained minimizer.
    const auto atl = ApplyAt(inst.a, DualVector(lam));
    for (Index i = 0; i < inst.num_sources(); ++i) {
      const Index begin = inst.a.source_begin(i);
      const Index len = inst.a.slice_length(i);
      const double vi = v.v[static_cast<std::size_t>(i)];
      std::vector<Real> block(static_cast<std::size_t>(len));
      for (Index e = 0; e < len; ++e) {
        const auto idx = static_cast<std::size_t>(begin + e);
        block[static_cast<std::size_t>(e)] =
            static_cast<Real>(-(inst.c[idx] + atl.values[idx]) / (gamma * vi * vi));
      }
      const auto& spec = inst.projection.blocks[static_cast<std::size_t>(i)];
      if (spec.kind == ProjectionKind::kSimplex) {
        block = ProjectSimplex(block, spec.param0);
      } else if (spec.kind == ProjectionKind::kBox) {
        block = ProjectBox(block, spec.param0, spec.param1);
      }
      for (Index e = 0; e < len; ++e) {
        EXPECT_NEAR(x[static_cast<std::size_t>(begin + e)], block[static_cast<std::size_t>(e)], 1e-9);
      }
    }
  }
}

TEST(GershgorinBound, Examples) {
  EXPECT_NEAR(GershgorinBound(2, 0.1), 1.1 / 0.9, 1e-15);
  EXPECT_NEAR(GershgorinBound(2, 0.1), 1.2222, 1e-4);
  EXPECT_EQ(GershgorinBound(4, 0), 1);
  EXPECT_NEAR(GershgorinBound(3, 0.2), 2.3333, 1e-4);
  EXPECT_EQ(GershgorinBound(1, 0.9), 1);
}

TEST(GershgorinBound, VacuousIsConfigError) {
  EXPECT_THROW(GershgorinBound(3, 0.5), ConfigError);
  EXPECT_THROW(GershgorinBound(2, 1.0), ConfigError);
  EXPECT_THROW(GershgorinBound(2, -0.1), ConfigError);
  EXPECT_THROW(GershgorinBound(0, 0.1), ConfigError);
}

// Each eligible pair carries exactly one family, so cross-family rows are
// orthogonal in expectation and in every sample.
std::vector<double> OrthogonalSampler(std::mt19937_64& rng, Index m, Index num_dest) {
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  std::uniform_int_distribution<Index> family(0, m - 1);
  std::vector<double> block(static_cast<std::size_t>(m * num_dest), 0.0);
  for (Index j = 0; j < num_dest; ++j) {
    block[static_cast<std::size_t>(j * m + family(rng))] = mag(rng);
  }
  return block;
}

// Two families with correlation rho between their coefficients.
BlockSampler CorrelatedSampler(double rho) {
  return [rho](std::mt19937_64& rng, Index m, Index num_dest) {
    std::normal_distribution<double> normal(0, 1);
    std::vector<double> block(static_cast<std::size_t>(m * num_dest), 0.0);
    for (Index j = 0; j < num_dest; ++j) {
      const double shared = normal(rng);
      for (Index k = 0; k < m; ++k) {
        block[static_cast<std::size_t>(j * m + k)] =
            std::sqrt(rho) * shared + std::sqrt(1 - rho) * normal(rng);
      }
    }
    return block;
  };
}

TEST(EmpiricalConditionCheck, OrthogonalRowsGiveUnitKappa) {
  const auto report = EmpiricalConditionCheck(OrthogonalSampler, 2, 4, 2000, 50, 7);
  EXPECT_EQ(report.eta, 0);
  EXPECT_EQ(report.bound, 1);
  EXPECT_NEAR(report.kappa, 1, 0.05);
  EXPECT_LE(report.kappa, report.bound * 1.05);
}

TEST(EmpiricalConditionCheck, DiagonalWithinThreeSigma) {
  for (Index m : {Index{2}, Index{3}}) {
    const auto report = EmpiricalConditionCheck(CorrelatedSampler(0.1), m, 5, 300, 50, 11 + m);
    for (std::size_t r = 0; r < report.normalized_diag.size(); ++r) {
      EXPECT_GT(report.diag_sigma[r], 0);
      EXPECT_LE(std::abs(report.normalized_diag[r] - 1), 3 * report.diag_sigma[r]);
    }
  }
}

TEST(EmpiricalConditionCheck, CorrelatedPairMatchesEigenOracle) {
  const auto report = EmpiricalConditionCheck(CorrelatedSampler(0.15), 2, 3, 2000, 50, 5);
  EXPECT_NEAR(report.eta, 0.15, 0.02);
  EXPECT_TRUE(report.bound_applicable);
  EXPECT_NEAR(GershgorinBound(2, 0.15), 1.353, 1e-3);
  // Exact eigenvalues of [[1, 0.15], [0.15, 1]].
  Eigen::Matrix2d g;
  g << 1, 0.15, 0.15, 1;
  const auto ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(g).eigenvalues();
  EXPECT_LE(ev(1) / ev(0), 1.353);
  EXPECT_LE(report.kappa, report.bound * 1.05);
  EXPECT_LE(report.kappa, 1.353 * 1.05);
}

TEST(EmpiricalConditionCheck, Guards) {
  EXPECT_THROW(EmpiricalConditionCheck(OrthogonalSampler, 2, 2000, 10, 10, 1), StructuralError);
  EXPECT_THROW(EmpiricalConditionCheck(OrthogonalSampler, 2, 3, 10, 3, 1), ConfigError);
}

TEST(SpectralNormSquared, MatchesDenseSvd) {
  std::mt19937_64 rng(46);
  for (int trial = 0; trial < 30; ++trial) {
    const Index m = 1 + trial % 3;
    const auto a = MakeSparseBlockMatrix(m, 7, 6, testing::RandomEdges(rng, m, 7, 6, 0.5));
    const auto dense = ToDense(a);
    Eigen::MatrixXd mat(dense.rows, dense.cols);
    for (Index r = 0; r < dense.rows; ++r) {
      for (Index c = 0; c < dense.cols; ++c) mat(r, c) = dense(r, c);
    }
    const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(mat).singularValues()(0);
    EXPECT_NEAR(SpectralNormSquared(a), sigma * sigma, 1e-10 * (1 + sigma * sigma));
  }
}

}  // namespace
}  // namespace matchlp
