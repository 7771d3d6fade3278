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

#ifndef MATCHLP_INSTANCE_H_
#define MATCHLP_INSTANCE_H_

#include <string>
#include <vector>

#include "matchlp/projection.h"
#include "matchlp/sparse_block_matrix.h"
#include "matchlp/types.h"

namespace matchlp {

// min c^T x  s.t.  A x <= b,  x_i in C_i for every source block i.
struct MatchingInstance {
  SparseBlockMatrix a;
  std::vector<Real> b;  // length m*J, family-major
  std::vector<Real> c;  // one per stored edge, in A's edge order
  ProjectionSpec projection;
  double gamma0 = 0.01;

  Index num_families() const { return a.num_families(); }
  Index num_sources() const { return a.num_sources(); }
  Index num_destinations() const { return a.num_destinations(); }
  Index dual_dimension() const { return a.num_rows(); }
  Index nnz() const { return a.nnz(); }

  friend bool operator==(const MatchingInstance&,
                         const MatchingInstance&) = default;
};

// Returns one message per violated invariant; empty means valid.
std::vector<std::string> CheckInstance(const MatchingInstance& inst);

// Throws StructuralError/ConfigError/FormatError on the first violation.
void ValidateInstance(const MatchingInstance& inst);

// Restricts the instance to sources [begin, end). b is kept whole.
MatchingInstance SliceInstance(const MatchingInstance& inst, Index begin,
                               Index end);

}  // namespace matchlp

#endif  // MATCHLP_INSTANCE_H_
