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

#ifndef MATCHLP_SPARSE_BLOCK_MATRIX_H_
#define MATCHLP_SPARSE_BLOCK_MATRIX_H_

// Column-compressed storage for constraint matrices made of diagonal J x J
// blocks: row block k (one per constraint family) times column block i (one per
// source) is diagonal, so the whole matrix is described by the eligible
// (source, destination) pairs and one coefficient per pair and family.
//
// Logical shape is (m*J) x (I*J). Stored edge e = (i, j) contributes
// family_value(k, e) at logical position (k*J + j, i*J + j). Edges of source i
// live in [col_ptr[i], col_ptr[i+1]) with strictly increasing destinations.
// All families share one sparsity pattern; a family that does not touch an
// eligible pair stores an explicit zero.

#include <cstdint>
#include <span>
#include <vector>

#include "matchlp/types.h"

namespace matchlp {

class SparseBlockMatrix {
 public:
  SparseBlockMatrix() = default;

  // Validates every layout invariant and throws StructuralError on violation.
  // family_values is family-major: family k occupies [k*nnz, (k+1)*nnz).
  SparseBlockMatrix(Index num_families, Index num_sources,
                    Index num_destinations, std::vector<Index> col_ptr,
                    std::vector<std::int32_t> row_dest,
                    std::vector<Real> family_values);

  Index num_families() const { return num_families_; }
  Index num_sources() const { return num_sources_; }
  Index num_destinations() const { return num_destinations_; }
  Index nnz() const { return static_cast<Index>(row_dest_.size()); }
  Index num_rows() const { return num_families_ * num_destinations_; }
  Index num_cols() const { return num_sources_ * num_destinations_; }

  std::span<const Index> col_ptr() const { return col_ptr_; }
  std::span<const std::int32_t> row_dest() const { return row_dest_; }
  std::span<const Real> family_values(Index k) const {
    return std::span<const Real>(family_values_)
        .subspan(static_cast<std::size_t>(k * nnz()),
                 static_cast<std::size_t>(nnz()));
  }
  // All families, family-major.
  std::span<const Real> all_family_values() const { return family_values_; }

  Index source_begin(Index i) const { return col_ptr_[static_cast<std::size_t>(i)]; }
  Index source_end(Index i) const { return col_ptr_[static_cast<std::size_t>(i) + 1]; }
  Index slice_length(Index i) const { return source_end(i) - source_begin(i); }

  friend bool operator==(const SparseBlockMatrix&,
                         const SparseBlockMatrix&) = default;

 private:
  Index num_families_ = 0;
  Index num_sources_ = 0;
  Index num_destinations_ = 0;
  std::vector<Index> col_ptr_{0};
  std::vector<std::int32_t> row_dest_;
  std::vector<Real> family_values_;
};

// One eligible pair with its per-family coefficients.
struct Edge {
  Index source = 0;
  Index destination = 0;
  std::vector<Real> coefficients;  // one per family
};

// Builds the canonical layout from edges given in any order. Duplicate
// (source, destination) pairs are rejected.
SparseBlockMatrix MakeSparseBlockMatrix(Index num_families, Index num_sources,
                                        Index num_destinations,
                                        std::vector<Edge> edges);

// out[k*J + j] = sum over stored edges e = (i, j) of a_k(e) * x[e], summed in
// ascending source order. out is overwritten.
void ApplyA(const SparseBlockMatrix& a, std::span<const Real> x,
            std::span<Real> out);
DualVector ApplyA(const SparseBlockMatrix& a, const PrimalBlocks& x);

// out[e] = sum_k a_k(e) * lam[k*J + j(e)]. out is overwritten.
void ApplyAt(const SparseBlockMatrix& a, std::span<const Real> lam,
             std::span<Real> out);
PrimalBlocks ApplyAt(const SparseBlockMatrix& a, const DualVector& lam);

// Row-major dense expansion, for test oracles.
struct DenseMatrix {
  Index rows = 0;
  Index cols = 0;
  std::vector<double> data;

  double operator()(Index r, Index c) const {
    return data[static_cast<std::size_t>(r * cols + c)];
  }
};

inline constexpr Index kDefaultDenseLimit = 1'000'000;

// Expands to the logical (m*J) x (I*J) matrix. Throws StructuralError when the
// expansion would exceed max_entries.
DenseMatrix ToDense(const SparseBlockMatrix& a,
                    Index max_entries = kDefaultDenseLimit);

// Expands an edge-aligned primal vector to the full I*J coordinate vector.
std::vector<double> ExpandPrimal(const SparseBlockMatrix& a,
                                 std::span<const Real> x);

// Returns the sub-matrix over sources [begin, end), rebased to start at 0.
SparseBlockMatrix SliceSources(const SparseBlockMatrix& a, Index begin,
                               Index end);

}  // namespace matchlp

#endif  // MATCHLP_SPARSE_BLOCK_MATRIX_H_
