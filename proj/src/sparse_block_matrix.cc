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

#include "matchlp/sparse_block_matrix.h"

#include <algorithm>
#include <limits>
#include <string>
#include <tuple>
#include <utility>

namespace matchlp {

namespace {

std::string Describe(const char* what, Index got, Index want) {
  return std::string(what) + ": got " + std::to_string(got) + ", expected " +
         std::to_string(want);
}

}  // namespace

SparseBlockMatrix::SparseBlockMatrix(Index num_families, Index num_sources,
                                     Index num_destinations,
                                     std::vector<Index> col_ptr,
                                     std::vector<std::int32_t> row_dest,
                                     std::vector<Real> family_values)
    : num_families_(num_families),
      num_sources_(num_sources),
      num_destinations_(num_destinations),
      col_ptr_(std::move(col_ptr)),
      row_dest_(std::move(row_dest)),
      family_values_(std::move(family_values)) {
  if (num_families_ < 0 || num_sources_ < 0 || num_destinations_ < 0) {
    throw StructuralError("matrix dimensions must be nonnegative");
  }
  if (num_destinations_ > std::numeric_limits<std::int32_t>::max()) {
    throw StructuralError("num_destinations exceeds 32-bit index range");
  }
  if (static_cast<Index>(col_ptr_.size()) != num_sources_ + 1) {
    throw StructuralError(Describe("col_ptr length",
                                   static_cast<Index>(col_ptr_.size()),
                                   num_sources_ + 1));
  }
  if (col_ptr_.front() != 0) throw StructuralError("col_ptr[0] must be 0");
  if (col_ptr_.back() != nnz()) {
    throw StructuralError(Describe("col_ptr[I]", col_ptr_.back(), nnz()));
  }
  if (static_cast<Index>(family_values_.size()) != num_families_ * nnz()) {
    throw StructuralError(Describe("family_values length",
                                   static_cast<Index>(family_values_.size()),
                                   num_families_ * nnz()));
  }
  for (Index i = 0; i < num_sources_; ++i) {
    const Index begin = col_ptr_[static_cast<std::size_t>(i)];
    const Index end = col_ptr_[static_cast<std::size_t>(i) + 1];
    if (end < begin) throw StructuralError("col_ptr must be nondecreasing");
    for (Index e = begin; e < end; ++e) {
      const std::int32_t j = row_dest_[static_cast<std::size_t>(e)];
      if (j < 0 || j >= num_destinations_) {
        throw StructuralError("row_dest out of range at entry " +
                              std::to_string(e));
      }
      if (e > begin && row_dest_[static_cast<std::size_t>(e) - 1] >= j) {
        throw StructuralError(
            "row_dest must be strictly increasing within source " +
            std::to_string(i));
      }
    }
  }
}

SparseBlockMatrix MakeSparseBlockMatrix(Index num_families, Index num_sources,
                                        Index num_destinations,
                                        std::vector<Edge> edges) {
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.source, a.destination) <
           std::tie(b.source, b.destination);
  });
  const Index nnz = static_cast<Index>(edges.size());
  std::vector<Index> col_ptr(static_cast<std::size_t>(num_sources) + 1, 0);
  std::vector<std::int32_t> row_dest(static_cast<std::size_t>(nnz));
  std::vector<Real> values(static_cast<std::size_t>(num_families * nnz));
  for (Index e = 0; e < nnz; ++e) {
    const Edge& edge = edges[static_cast<std::size_t>(e)];
    if (edge.source < 0 || edge.source >= num_sources) {
      throw StructuralError("edge source out of range");
    }
    if (static_cast<Index>(edge.coefficients.size()) != num_families) {
      throw StructuralError("edge must carry one coefficient per family");
    }
    if (e > 0 && edges[static_cast<std::size_t>(e) - 1].source == edge.source &&
        edges[static_cast<std::size_t>(e) - 1].destination == edge.destination) {
      throw StructuralError("duplicate edge");
    }
    ++col_ptr[static_cast<std::size_t>(edge.source) + 1];
    row_dest[static_cast<std::size_t>(e)] =
        static_cast<std::int32_t>(edge.destination);
    for (Index k = 0; k < num_families; ++k) {
      values[static_cast<std::size_t>(k * nnz + e)] =
          edge.coefficients[static_cast<std::size_t>(k)];
    }
  }
  for (std::size_t i = 1; i < col_ptr.size(); ++i) col_ptr[i] += col_ptr[i - 1];
  return SparseBlockMatrix(num_families, num_sources, num_destinations,
                           std::move(col_ptr), std::move(row_dest),
                           std::move(values));
}

void ApplyA(const SparseBlockMatrix& a, std::span<const Real> x,
            std::span<Real> out) {
  if (static_cast<Index>(x.size()) != a.nnz()) {
    throw StructuralError(
        Describe("ApplyA x length", static_cast<Index>(x.size()), a.nnz()));
  }
  if (static_cast<Index>(out.size()) != a.num_rows()) {
    throw StructuralError(Describe("ApplyA output length",
                                   static_cast<Index>(out.size()),
                                   a.num_rows()));
  }
  std::fill(out.begin(), out.end(), Real(0));
  const Index nnz = a.nnz();
  const Index num_dest = a.num_destinations();
  const auto dest = a.row_dest();
  const auto values = a.all_family_values();
  // Edges are stored source-major, so a single forward sweep visits every
  // output row's contributions in ascending source order.
  for (Index k = 0; k < a.num_families(); ++k) {
    const Real* vk = values.data() + k * nnz;
    Real* outk = out.data() + k * num_dest;
    for (Index e = 0; e < nnz; ++e) {
      outk[dest[static_cast<std::size_t>(e)]] += vk[e] * x[static_cast<std::size_t>(e)];
    }
  }
}

DualVector ApplyA(const SparseBlockMatrix& a, const PrimalBlocks& x) {
  DualVector out(static_cast<std::size_t>(a.num_rows()));
  ApplyA(a, x.view(), out.view());
  return out;
}

void ApplyAt(const SparseBlockMatrix& a, std::span<const Real> lam,
             std::span<Real> out) {
  if (static_cast<Index>(lam.size()) != a.num_rows()) {
    throw StructuralError(Describe("ApplyAt lambda length",
                                   static_cast<Index>(lam.size()),
                                   a.num_rows()));
  }
  if (static_cast<Index>(out.size()) != a.nnz()) {
    throw StructuralError(Describe("ApplyAt output length",
                                   static_cast<Index>(out.size()), a.nnz()));
  }
  const Index nnz = a.nnz();
  const Index num_dest = a.num_destinations();
  const auto dest = a.row_dest();
  const auto values = a.all_family_values();
  std::fill(out.begin(), out.end(), Real(0));
  for (Index k = 0; k < a.num_families(); ++k) {
    const Real* vk = values.data() + k * nnz;
    const Real* lamk = lam.data() + k * num_dest;
    for (Index e = 0; e < nnz; ++e) {
      out[static_cast<std::size_t>(e)] += vk[e] * lamk[dest[static_cast<std::size_t>(e)]];
    }
  }
}

PrimalBlocks ApplyAt(const SparseBlockMatrix& a, const DualVector& lam) {
  PrimalBlocks out(static_cast<std::size_t>(a.nnz()));
  ApplyAt(a, lam.view(), out.view());
  return out;
}

DenseMatrix ToDense(const SparseBlockMatrix& a, Index max_entries) {
  const Index rows = a.num_rows();
  const Index cols = a.num_cols();
  if (rows != 0 && cols > max_entries / rows) {
    throw StructuralError("dense expansion of " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " exceeds limit of " +
                          std::to_string(max_entries) + " entries");
  }
  DenseMatrix dense{rows, cols,
                    std::vector<double>(static_cast<std::size_t>(rows * cols))};
  const Index num_dest = a.num_destinations();
  for (Index i = 0; i < a.num_sources(); ++i) {
    for (Index e = a.source_begin(i); e < a.source_end(i); ++e) {
      const Index j = a.row_dest()[static_cast<std::size_t>(e)];
      for (Index k = 0; k < a.num_families(); ++k) {
        const Index r = k * num_dest + j;
        const Index c = i * num_dest + j;
        dense.data[static_cast<std::size_t>(r * cols + c)] =
            a.family_values(k)[static_cast<std::size_t>(e)];
      }
    }
  }
  return dense;
}

std::vector<double> ExpandPrimal(const SparseBlockMatrix& a,
                                 std::span<const Real> x) {
  if (static_cast<Index>(x.size()) != a.nnz()) {
    throw StructuralError("ExpandPrimal: x is not edge-aligned");
  }
  std::vector<double> full(static_cast<std::size_t>(a.num_cols()), 0.0);
  for (Index i = 0; i < a.num_sources(); ++i) {
    for (Index e = a.source_begin(i); e < a.source_end(i); ++e) {
      full[static_cast<std::size_t>(i * a.num_destinations() +
                                    a.row_dest()[static_cast<std::size_t>(e)])] =
          x[static_cast<std::size_t>(e)];
    }
  }
  return full;
}

SparseBlockMatrix SliceSources(const SparseBlockMatrix& a, Index begin,
                               Index end) {
  if (begin < 0 || end < begin || end > a.num_sources()) {
    throw StructuralError("SliceSources: invalid source range");
  }
  const Index first = a.source_begin(begin);
  const Index last = a.source_begin(end);
  const Index nnz = last - first;
  std::vector<Index> col_ptr(static_cast<std::size_t>(end - begin) + 1);
  for (Index i = begin; i <= end; ++i) {
    col_ptr[static_cast<std::size_t>(i - begin)] = a.source_begin(i) - first;
  }
  std::vector<std::int32_t> dest(a.row_dest().begin() + first,
                                 a.row_dest().begin() + last);
  std::vector<Real> values;
  values.reserve(static_cast<std::size_t>(nnz * a.num_families()));
  for (Index k = 0; k < a.num_families(); ++k) {
    auto fk = a.family_values(k);
    values.insert(values.end(), fk.begin() + first, fk.begin() + last);
  }
  return SparseBlockMatrix(a.num_families(), end - begin, a.num_destinations(),
                           std::move(col_ptr), std::move(dest),
                           std::move(values));
}

}  // namespace matchlp
