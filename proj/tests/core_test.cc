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

#include <cstring>
#include <random>

#include "matchlp/instance.h"
#include "matchlp/instance_io.h"
#include "matchlp/sparse_block_matrix.h"
#include "test_util.h"

namespace matchlp {
namespace {

using testing::DenseFromEdges;
using testing::RandomEdges;
using testing::RandomInstance;

SparseBlockMatrix ThreeEdgeMatrix() {
  return MakeSparseBlockMatrix(1, 2, 2, {{0, 0, {3}}, {0, 1, {1}}, {1, 1, {2}}});
}

TEST(ApplyA, SingleEntry) {
  const auto a = MakeSparseBlockMatrix(1, 1, 1, {{0, 0, {2}}});
  EXPECT_EQ(ApplyA(a, PrimalBlocks(std::vector<Real>{1})).values,
            std::vector<Real>{2});
}

TEST(ApplyA, IdentityPattern) {
  const auto a = MakeSparseBlockMatrix(1, 2, 2, {{0, 0, {1}}, {1, 1, {1}}});
  const auto y = ApplyA(a, PrimalBlocks(std::vector<Real>{0.3, 0.7}));
  EXPECT_EQ(y.values, (std::vector<Real>{0.3, 0.7}));
}

TEST(ApplyA, ThreeEdgesMatchesDenseOracle) {
  const auto a = ThreeEdgeMatrix();
  const auto y = ApplyA(a, PrimalBlocks(std::vector<Real>{1, 1, 1}));
  // Dense: rows [3 0 0 0; 0 1 0 2] (columns i*J + j), x expanded = [1,1,0,1].
  EXPECT_EQ(y.values, (std::vector<Real>{3, 3}));
}

TEST(ApplyA, LengthMismatchIsStructuralError) {
  const auto a = ThreeEdgeMatrix();
  EXPECT_THROW(ApplyA(a, PrimalBlocks(std::vector<Real>{1, 1})), StructuralError);
  EXPECT_THROW(ApplyAt(a, DualVector(std::vector<Real>{1})), StructuralError);
}

TEST(ApplyAt, Examples) {
  const auto single = MakeSparseBlockMatrix(1, 1, 1, {{0, 0, {2}}});
  EXPECT_EQ(ApplyAt(single, DualVector(std::vector<Real>{1})).values,
            std::vector<Real>{2});
  const auto a = ThreeEdgeMatrix();
  EXPECT_EQ(ApplyAt(a, DualVector(2)).values, (std::vector<Real>{0, 0, 0}));
  EXPECT_EQ(ApplyAt(a, DualVector(std::vector<Real>{1, 2})).values,
            (std::vector<Real>{3, 2, 4}));
}

TEST(ToDense, Examples) {
  const auto empty = MakeSparseBlockMatrix(1, 2, 2, {});
  const DenseMatrix d0 = ToDense(empty);
  EXPECT_EQ(d0.rows, 2);
  EXPECT_EQ(d0.cols, 4);
  for (double v : d0.data) EXPECT_EQ(v, 0.0);

  const DenseMatrix d1 = ToDense(MakeSparseBlockMatrix(1, 1, 1, {{0, 0, {5}}}));
  EXPECT_EQ(d1.data, std::vector<double>{5});

  // I = 2, J = 2, m = 1: [diag(a0), diag(a1)].
  const auto a = MakeSparseBlockMatrix(
      1, 2, 2, {{0, 0, {1}}, {0, 1, {2}}, {1, 0, {3}}, {1, 1, {4}}});
  const DenseMatrix d = ToDense(a);
  const std::vector<double> expected = {1, 0, 3, 0,  //
                                        0, 2, 0, 4};
  EXPECT_EQ(d.data, expected);
}

TEST(ToDense, GuardRefuses) {
  const auto a = MakeSparseBlockMatrix(1, 100, 100, {});
  EXPECT_THROW(ToDense(a, 1000), StructuralError);
}

TEST(SparseBlockMatrix, RejectsBrokenLayouts) {
  EXPECT_THROW(SparseBlockMatrix(1, 1, 2, {0, 2}, {1, 0}, {1, 1}), StructuralError);
  EXPECT_THROW(SparseBlockMatrix(1, 1, 2, {0, 1}, {0, 1}, {1, 1}), StructuralError);
  EXPECT_THROW(SparseBlockMatrix(1, 1, 2, {1, 1}, {}, {}), StructuralError);
  EXPECT_THROW(SparseBlockMatrix(1, 1, 2, {0, 1}, {2}, {1}), StructuralError);
  EXPECT_THROW(SparseBlockMatrix(2, 1, 2, {0, 1}, {0}, {1}), StructuralError);
  EXPECT_THROW(MakeSparseBlockMatrix(1, 1, 2, {{0, 1, {1}}, {0, 1, {2}}}),
               StructuralError);
}

TEST(SparseBlockMatrix, SliceSourcesRebases) {
  std::mt19937_64 rng(3);
  const auto a = MakeSparseBlockMatrix(2, 6, 4, RandomEdges(rng, 2, 6, 4, 0.6));
  const auto s = SliceSources(a, 2, 5);
  EXPECT_EQ(s.num_sources(), 3);
  EXPECT_EQ(s.nnz(), a.source_begin(5) - a.source_begin(2));
  for (Index i = 0; i < 3; ++i) {
    EXPECT_EQ(s.slice_length(i), a.slice_length(i + 2));
    for (Index e = 0; e < s.slice_length(i); ++e) {
      const Index se = s.source_begin(i) + e;
      const Index ae = a.source_begin(i + 2) + e;
      EXPECT_EQ(s.row_dest()[se], a.row_dest()[ae]);
      EXPECT_EQ(s.family_values(1)[se], a.family_values(1)[ae]);
    }
  }
}

TEST(CoreProperties, DenseOracleEquivalenceAndAdjoint) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const Index m = 1 + trial % 3;
    const Index num_src = 1 + static_cast<Index>(rng() % 12);
    const Index num_dest = 1 + static_cast<Index>(rng() % 8);
    const auto edges = RandomEdges(rng, m, num_src, num_dest, 0.5);
    const auto oracle = DenseFromEdges(m, num_src, num_dest, edges);
    const auto a = MakeSparseBlockMatrix(m, num_src, num_dest, edges);
    ASSERT_EQ(a.nnz(), static_cast<Index>(edges.size()));

    const auto x = testing::RandomVector(rng, static_cast<std::size_t>(a.nnz()), -1, 1);
    const auto lam = testing::RandomVector(rng, static_cast<std::size_t>(a.num_rows()), -1, 1);
    const DualVector ax = ApplyA(a, PrimalBlocks(x));
    const std::vector<double> dense_ax = oracle.Multiply(ExpandPrimal(a, x));
    EXPECT_LE(testing::MaxAbsDiff(std::vector<double>(ax.values.begin(), ax.values.end()),
                                  dense_ax),
              1e-12);

    const PrimalBlocks atl = ApplyAt(a, DualVector(lam));
    const std::vector<double> dense_atl =
        oracle.MultiplyTransposed(std::vector<double>(lam.begin(), lam.end()));
    EXPECT_LE(testing::MaxAbsDiff(ExpandPrimal(a, atl.values), dense_atl), 1e-12);

    double lhs = 0;
    double rhs = 0;
    for (std::size_t r = 0; r < lam.size(); ++r) lhs += ax.values[r] * lam[r];
    for (std::size_t e = 0; e < x.size(); ++e) rhs += x[e] * atl.values[e];
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(CoreProperties, NnzIndependentOfFamilyCount) {
  std::mt19937_64 rng(5);
  const auto edges = RandomEdges(rng, 3, 10, 7, 0.4);
  std::vector<Edge> one_family = edges;
  for (Edge& e : one_family) e.coefficients.resize(1);
  EXPECT_EQ(MakeSparseBlockMatrix(3, 10, 7, edges).nnz(),
            MakeSparseBlockMatrix(1, 10, 7, one_family).nnz());
}

TEST(InstanceIo, BinaryRoundTripIsBitExact) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    MatchingInstance inst = RandomInstance(rng, 1 + trial % 3, 9, 6, 0.5);
    inst.gamma0 = 0.0123;
    const auto bytes = SerializeInstance(inst);
    const MatchingInstance back = ParseInstance(bytes);
    EXPECT_EQ(back, inst);
    EXPECT_EQ(SerializeInstance(back), bytes);
  }
}

TEST(InstanceIo, HeaderLayout) {
  std::mt19937_64 rng(2);
  const MatchingInstance inst = RandomInstance(rng, 2, 3, 4, 0.7);
  const auto bytes = SerializeInstance(inst);
  ASSERT_GE(bytes.size(), 48u);
  EXPECT_EQ(std::memcmp(bytes.data(), "MLPI", 4), 0);
  EXPECT_EQ(bytes[4], 1);  // version, little-endian
  EXPECT_EQ(bytes[8], 2);  // m
  EXPECT_EQ(bytes[16], 3); // I
  EXPECT_EQ(bytes[24], 4); // J
  const std::size_t nnz = static_cast<std::size_t>(inst.nnz());
  const std::size_t expected = 48 + 8 * 4 + 4 * nnz + 8 * 2 * nnz + 8 * nnz +
                               8 * 2 * 4 + 3 * 17;
  EXPECT_EQ(bytes.size(), expected);
}

TEST(InstanceIo, RejectsMalformedInput) {
  std::mt19937_64 rng(4);
  const MatchingInstance inst = RandomInstance(rng, 1, 4, 3, 0.6);
  auto bytes = SerializeInstance(inst);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(ParseInstance(truncated), FormatError);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(ParseInstance(trailing), FormatError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(ParseInstance(magic), FormatError);
  auto version = bytes;
  version[4] = 2;
  EXPECT_THROW(ParseInstance(version), FormatError);
}

TEST(InstanceIo, BoxCutIsRejectedOnLoad) {
  std::mt19937_64 rng(8);
  MatchingInstance inst = RandomInstance(rng, 1, 3, 3, 0.6);
  inst.projection.blocks[1] = {ProjectionKind::kBoxCut, 0, 1};
  const auto bytes = SerializeInstance(inst);
  try {
    ParseInstance(bytes);
    FAIL() << "box_cut accepted";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("box_cut"), std::string::npos);
  }
  EXPECT_THROW(InstanceFromJson(InstanceToJson(inst)), FormatError);
  EXPECT_THROW(ValidateInstance(inst), FormatError);
}

TEST(InstanceIo, JsonSidecarMirrorsBinary) {
  std::mt19937_64 rng(9);
  const MatchingInstance inst = RandomInstance(rng, 2, 5, 4, 0.5);
  const auto doc = InstanceToJson(inst);
  EXPECT_EQ(doc.at("format"), "MLPI");
  EXPECT_EQ(InstanceFromJson(doc), inst);
  EXPECT_EQ(InstanceFromJson(nlohmann::json::parse(doc.dump())), inst);
}

TEST(Instance, CheckReportsViolations) {
  std::mt19937_64 rng(10);
  MatchingInstance inst = RandomInstance(rng, 1, 4, 3, 0.6);
  EXPECT_TRUE(CheckInstance(inst).empty());
  MatchingInstance bad = inst;
  bad.c.pop_back();
  EXPECT_FALSE(CheckInstance(bad).empty());
  bad = inst;
  bad.b[0] = std::numeric_limits<Real>::infinity();
  EXPECT_FALSE(CheckInstance(bad).empty());
  bad = inst;
  bad.projection.blocks[0] = BlockProjection::Simplex(0);
  EXPECT_FALSE(CheckInstance(bad).empty());
  bad = inst;
  bad.projection.blocks.pop_back();
  EXPECT_THROW(ValidateInstance(bad), StructuralError);
}

}  // namespace
}  // namespace matchlp
