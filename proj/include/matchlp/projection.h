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

#ifndef MATCHLP_PROJECTION_H_
#define MATCHLP_PROJECTION_H_

// Euclidean projections onto the per-source "simple" polytopes and the
// log-bucket planner that groups sources of similar slice length into dense,
// padded batches.

#include <cstdint>
#include <span>
#include <vector>

#include "matchlp/types.h"

namespace matchlp {

// Tag values are part of the on-disk format.
enum class ProjectionKind : std::uint8_t {
  kNone = 0,
  kSimplex = 1,  // {w >= 0, sum(w) <= cap}
  kBox = 2,      // {lo <= w <= hi}
  kBoxCut = 3,   // reserved; no projection algorithm, rejected on load
};

const char* ProjectionKindName(ProjectionKind kind);

struct BlockProjection {
  ProjectionKind kind = ProjectionKind::kNone;
  double param0 = 0.0;  // simplex: cap; box: lo
  double param1 = 0.0;  // box: hi

  static BlockProjection None() { return {}; }
  static BlockProjection Simplex(double cap) {
    return {ProjectionKind::kSimplex, cap, 0.0};
  }
  static BlockProjection Box(double lo, double hi) {
    return {ProjectionKind::kBox, lo, hi};
  }

  friend bool operator==(const BlockProjection&,
                         const BlockProjection&) = default;
};

// One projection descriptor per source block.
struct ProjectionSpec {
  std::vector<BlockProjection> blocks;

  static ProjectionSpec Uniform(Index num_sources, BlockProjection block) {
    return ProjectionSpec{std::vector<BlockProjection>(
        static_cast<std::size_t>(num_sources), block)};
  }
  Index size() const { return static_cast<Index>(blocks.size()); }

  friend bool operator==(const ProjectionSpec&, const ProjectionSpec&) = default;
};

// Throws ConfigError (or FormatError for box_cut) if a block descriptor is
// not usable: cap must be positive and finite, lo <= hi with finite bounds.
void ValidateBlockProjection(const BlockProjection& block);

// argmin ||w - v|| over {w >= 0, sum(w) <= cap}. Returns v unchanged when it is
// already feasible. Throws ConfigError on NaN input or cap <= 0.
std::vector<Real> ProjectSimplex(std::span<const Real> v, Real cap);
void ProjectSimplexInPlace(std::span<Real> v, Real cap);

// Componentwise clamp to [lo, hi]. Throws ConfigError when lo > hi.
std::vector<Real> ProjectBox(std::span<const Real> v, Real lo, Real hi);
void ProjectBoxInPlace(std::span<Real> v, Real lo, Real hi);

// Applies one block descriptor in place.
void ProjectBlock(const BlockProjection& block, std::span<Real> v);

struct Bucket {
  int level = 0;          // t: slice lengths lie in [2^(t-1), 2^t)
  Index min_length = 0;   // 2^(t-1)
  Index max_length = 0;   // 2^t, exclusive
  Index pad_width = 0;    // 2^t - 1: widest member
  std::vector<Index> members;  // block ids, ascending
  Index real_cells = 0;        // sum of member slice lengths

  Index padded_cells() const {
    return pad_width * static_cast<Index>(members.size());
  }
};

struct BucketPlan {
  std::vector<Bucket> buckets;  // ascending level; empty buckets omitted
  std::vector<Index> slice_lengths;

  Index launch_count() const { return static_cast<Index>(buckets.size()); }
};

// Groups nonempty slices by t = floor(log2(s)) + 1. Zero-length slices are
// skipped.
BucketPlan MakeBucketPlan(std::span<const Index> slice_lengths);

// Slice lengths of consecutive blocks delimited by offsets (length n+1).
std::vector<Index> SliceLengths(std::span<const Index> offsets);

// Projects each block [offsets[b], offsets[b+1]) of values according to
// spec.blocks[b], one bucket at a time. Output matches ProjectBlock applied
// block by block bit for bit.
void BatchedProjectInPlace(std::span<Real> values,
                           std::span<const Index> offsets,
                           const ProjectionSpec& spec, const BucketPlan& plan);
PrimalBlocks BatchedProject(const PrimalBlocks& values,
                            std::span<const Index> offsets,
                            const ProjectionSpec& spec, const BucketPlan& plan);

// Reference path: ProjectBlock on each block in turn.
PrimalBlocks SequentialProject(const PrimalBlocks& values,
                               std::span<const Index> offsets,
                               const ProjectionSpec& spec);

}  // namespace matchlp

#endif  // MATCHLP_PROJECTION_H_
