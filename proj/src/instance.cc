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

#include "matchlp/instance.h"

#include <cmath>
#include <string>

namespace matchlp {

std::vector<std::string> CheckInstance(const MatchingInstance& inst) {
  std::vector<std::string> issues;
  if (static_cast<Index>(inst.c.size()) != inst.nnz()) {
    issues.push_back("c has " + std::to_string(inst.c.size()) +
                     " values, A has " + std::to_string(inst.nnz()) +
                     " stored edges");
  }
  if (static_cast<Index>(inst.b.size()) != inst.dual_dimension()) {
    issues.push_back("b has " + std::to_string(inst.b.size()) +
                     " values, expected m*J = " +
                     std::to_string(inst.dual_dimension()));
  }
  if (inst.projection.size() != inst.num_sources()) {
    issues.push_back("projection spec has " +
                     std::to_string(inst.projection.size()) +
                     " blocks, expected " + std::to_string(inst.num_sources()));
  }
  for (std::size_t r = 0; r < inst.b.size(); ++r) {
    if (!std::isfinite(inst.b[r])) {
      issues.push_back("b[" + std::to_string(r) + "] is not finite");
      break;
    }
  }
  for (std::size_t e = 0; e < inst.c.size(); ++e) {
    if (!std::isfinite(inst.c[e])) {
      issues.push_back("c[" + std::to_string(e) + "] is not finite");
      break;
    }
  }
  for (Real value : inst.a.all_family_values()) {
    if (!std::isfinite(value)) {
      issues.push_back("A has a non-finite coefficient");
      break;
    }
  }
  for (std::size_t i = 0; i < inst.projection.blocks.size(); ++i) {
    try {
      ValidateBlockProjection(inst.projection.blocks[i]);
    } catch (const std::exception& e) {
      issues.push_back("projection block " + std::to_string(i) + ": " +
                       e.what());
      break;
    }
  }
  if (!(inst.gamma0 > 0) || !std::isfinite(inst.gamma0)) {
    issues.push_back("gamma0 must be positive and finite");
  }
  return issues;
}

void ValidateInstance(const MatchingInstance& inst) {
  for (const BlockProjection& block : inst.projection.blocks) {
    if (block.kind == ProjectionKind::kBoxCut) ValidateBlockProjection(block);
  }
  const auto issues = CheckInstance(inst);
  if (!issues.empty()) throw StructuralError("invalid instance: " + issues.front());
}

MatchingInstance SliceInstance(const MatchingInstance& inst, Index begin,
                               Index end) {
  MatchingInstance out;
  out.a = SliceSources(inst.a, begin, end);
  const Index first = inst.a.source_begin(begin);
  const Index last = inst.a.source_begin(end);
  out.c.assign(inst.c.begin() + first, inst.c.begin() + last);
  out.b = inst.b;
  out.projection.blocks.assign(inst.projection.blocks.begin() + begin,
                               inst.projection.blocks.begin() + end);
  out.gamma0 = inst.gamma0;
  return out;
}

}  // namespace matchlp
