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

#include "matchlp/projection.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <string>

namespace matchlp {

namespace {

void CheckCap(Real cap) {
  if (!(cap > 0) || !std::isfinite(cap)) {
    throw ConfigError("simplex cap must be positive and finite, got " +
                      std::to_string(cap));
  }
}

void CheckBounds(Real lo, Real hi) {
  if (!(lo <= hi)) {
    throw ConfigError("box bounds require lo <= hi, got [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

// Michelot's fixed-point iteration. Any theta at or below the optimum keeps
// the optimal support inside {v > theta}; both max(v) - cap and the mean shift
// of the positive entries qualify, so iteration starts from the larger one.
void ProjectSimplexRow(std::span<Real> row, Real cap) {
  Real sum = 0;
  Real top = 0;
  Index count = 0;
  bool nan = false;
  for (Real value : row) {
    nan |= value != value;
    const bool positive = value > 0;
    sum += positive ? value : Real(0);
    count += positive ? 1 : 0;
    top = std::max(top, value);
  }
  if (nan) throw ConfigError("simplex projection input is NaN");
  if (sum <= cap) {
    for (Real& value : row) value = std::max(value, Real(0));
    return;
  }
  Real theta = std::max((sum - cap) / static_cast<Real>(count), top - cap);
  count = static_cast<Index>(row.size()) + 1;
  for (;;) {
    Real next_sum = 0;
    Index next_count = 0;
    for (Real value : row) {
      const bool active = value > theta;
      next_sum += active ? value : Real(0);
      next_count += active ? 1 : 0;
    }
    if (next_count >= count) break;
    count = next_count;
    sum = next_sum;
    theta = (sum - cap) / static_cast<Real>(count);
  }
  for (Real& value : row) value = std::max(value - theta, Real(0));
}

}  // namespace

const char* ProjectionKindName(ProjectionKind kind) {
  switch (kind) {
    case ProjectionKind::kNone:
      return "none";
    case ProjectionKind::kSimplex:
      return "simplex";
    case ProjectionKind::kBox:
      return "box";
    case ProjectionKind::kBoxCut:
      return "box_cut";
  }
  return "unknown";
}

void ValidateBlockProjection(const BlockProjection& block) {
  switch (block.kind) {
    case ProjectionKind::kNone:
      return;
    case ProjectionKind::kSimplex:
      CheckCap(static_cast<Real>(block.param0));
      return;
    case ProjectionKind::kBox:
      if (!std::isfinite(block.param0) || !std::isfinite(block.param1)) {
        throw ConfigError("box bounds must be finite");
      }
      CheckBounds(static_cast<Real>(block.param0),
                  static_cast<Real>(block.param1));
      return;
    case ProjectionKind::kBoxCut:
      throw FormatError(
          "projection kind 'box_cut' is reserved but not supported");
  }
  throw FormatError("unknown projection kind tag " +
                    std::to_string(static_cast<int>(block.kind)));
}

void ProjectSimplexInPlace(std::span<Real> v, Real cap) {
  CheckCap(cap);
  ProjectSimplexRow(v, cap);
}

std::vector<Real> ProjectSimplex(std::span<const Real> v, Real cap) {
  std::vector<Real> out(v.begin(), v.end());
  ProjectSimplexInPlace(out, cap);
  return out;
}

void ProjectBoxInPlace(std::span<Real> v, Real lo, Real hi) {
  CheckBounds(lo, hi);
  for (Real& value : v) value = std::clamp(value, lo, hi);
}

std::vector<Real> ProjectBox(std::span<const Real> v, Real lo, Real hi) {
  std::vector<Real> out(v.begin(), v.end());
  ProjectBoxInPlace(out, lo, hi);
  return out;
}

void ProjectBlock(const BlockProjection& block, std::span<Real> v) {
  switch (block.kind) {
    case ProjectionKind::kNone:
      return;
    case ProjectionKind::kSimplex:
      ProjectSimplexInPlace(v, static_cast<Real>(block.param0));
      return;
    case ProjectionKind::kBox:
      ProjectBoxInPlace(v, static_cast<Real>(block.param0),
                        static_cast<Real>(block.param1));
      return;
    case ProjectionKind::kBoxCut:
      break;
  }
  throw FormatError(std::string("cannot project onto kind ") +
                    ProjectionKindName(block.kind));
}

BucketPlan MakeBucketPlan(std::span<const Index> slice_lengths) {
  BucketPlan plan;
  plan.slice_lengths.assign(slice_lengths.begin(), slice_lengths.end());
  std::vector<Bucket> by_level;
  for (std::size_t b = 0; b < slice_lengths.size(); ++b) {
    const Index s = slice_lengths[b];
    if (s < 0) throw StructuralError("slice lengths must be nonnegative");
    if (s == 0) continue;
    const int level = std::bit_width(static_cast<std::uint64_t>(s));
    if (by_level.size() < static_cast<std::size_t>(level)) {
      by_level.resize(static_cast<std::size_t>(level));
    }
    Bucket& bucket = by_level[static_cast<std::size_t>(level) - 1];
    bucket.members.push_back(static_cast<Index>(b));
    bucket.real_cells += s;
  }
  for (std::size_t t = 1; t <= by_level.size(); ++t) {
    Bucket& bucket = by_level[t - 1];
    if (bucket.members.empty()) continue;
    bucket.level = static_cast<int>(t);
    bucket.min_length = Index{1} << (t - 1);
    bucket.max_length = Index{1} << t;
    bucket.pad_width = bucket.max_length - 1;
    plan.buckets.push_back(std::move(bucket));
  }
  return plan;
}

std::vector<Index> SliceLengths(std::span<const Index> offsets) {
  std::vector<Index> lengths;
  if (offsets.empty()) return lengths;
  lengths.reserve(offsets.size() - 1);
  for (std::size_t b = 0; b + 1 < offsets.size(); ++b) {
    lengths.push_back(offsets[b + 1] - offsets[b]);
  }
  return lengths;
}

void BatchedProjectInPlace(std::span<Real> values,
                           std::span<const Index> offsets,
                           const ProjectionSpec& spec, const BucketPlan& plan) {
  const std::size_t num_blocks = offsets.empty() ? 0 : offsets.size() - 1;
  if (spec.blocks.size() != num_blocks) {
    throw StructuralError("projection spec has " +
                          std::to_string(spec.blocks.size()) +
                          " blocks, layout has " + std::to_string(num_blocks));
  }
  if (plan.slice_lengths.size() != num_blocks) {
    throw StructuralError("bucket plan was built for a different layout");
  }
  if (num_blocks > 0 && static_cast<std::size_t>(offsets.back()) != values.size()) {
    throw StructuralError("block offsets do not cover the value array");
  }
  // One pass per bucket. Members of a bucket share a padded width, but on the
  // host each member is projected in place over its live prefix, so padding
  // is never materialized.
  for (const Bucket& bucket : plan.buckets) {
    for (const Index b : bucket.members) {
      const Index begin = offsets[static_cast<std::size_t>(b)];
      const Index length = offsets[static_cast<std::size_t>(b) + 1] - begin;
      if (length != plan.slice_lengths[static_cast<std::size_t>(b)] ||
          length > bucket.pad_width) {
        throw StructuralError("bucket plan slice length mismatch at block " +
                              std::to_string(b));
      }
      const BlockProjection& block = spec.blocks[static_cast<std::size_t>(b)];
      std::span<Real> row = values.subspan(static_cast<std::size_t>(begin),
                                           static_cast<std::size_t>(length));
      switch (block.kind) {
        case ProjectionKind::kNone:
          break;
        case ProjectionKind::kSimplex:
          CheckCap(static_cast<Real>(block.param0));
          ProjectSimplexRow(row, static_cast<Real>(block.param0));
          break;
        case ProjectionKind::kBox:
          CheckBounds(static_cast<Real>(block.param0),
                      static_cast<Real>(block.param1));
          for (Real& value : row) {
            value = std::clamp(value, static_cast<Real>(block.param0),
                               static_cast<Real>(block.param1));
          }
          break;
        case ProjectionKind::kBoxCut:
          throw FormatError("cannot project onto kind box_cut");
      }
    }
  }
}

PrimalBlocks BatchedProject(const PrimalBlocks& values,
                            std::span<const Index> offsets,
                            const ProjectionSpec& spec, const BucketPlan& plan) {
  PrimalBlocks out = values;
  BatchedProjectInPlace(out.view(), offsets, spec, plan);
  return out;
}

PrimalBlocks SequentialProject(const PrimalBlocks& values,
                               std::span<const Index> offsets,
                               const ProjectionSpec& spec) {
  const std::size_t num_blocks = offsets.empty() ? 0 : offsets.size() - 1;
  if (spec.blocks.size() != num_blocks) {
    throw StructuralError("projection spec does not match block layout");
  }
  PrimalBlocks out = values;
  for (std::size_t b = 0; b < num_blocks; ++b) {
    std::span<Real> block(out.values.data() + offsets[b],
                          static_cast<std::size_t>(offsets[b + 1] - offsets[b]));
    ProjectBlock(spec.blocks[b], block);
  }
  return out;
}

}  // namespace matchlp
