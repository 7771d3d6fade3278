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

#include "matchlp/objective.h"

#include <cmath>
#include <string>

#include "matchlp/summation.h"

namespace matchlp {

namespace {

void CheckGamma(Real gamma) {
  if (!(gamma > 0) || !std::isfinite(gamma)) {
    throw ConfigError("gamma must be positive and finite, got " +
                      std::to_string(gamma));
  }
}

void CheckDualLength(const MatchingInstance& inst, std::span<const Real> lam) {
  if (static_cast<Index>(lam.size()) != inst.dual_dimension()) {
    throw StructuralError("dual vector has length " + std::to_string(lam.size()) +
                          ", expected m*J = " +
                          std::to_string(inst.dual_dimension()));
  }
}

}  // namespace

void ComputePrimalCandidate(const MatchingInstance& inst, const BucketPlan& plan,
                            std::span<const Real> lam, Real gamma,
                            std::span<Real> x) {
  CheckGamma(gamma);
  CheckDualLength(inst, lam);
  if (static_cast<Index>(x.size()) != inst.nnz()) {
    throw StructuralError("primal buffer is not edge-aligned");
  }
  ApplyAt(inst.a, lam, x);
  for (std::size_t e = 0; e < x.size(); ++e) {
    x[e] = -(x[e] + inst.c[e]) / gamma;
  }
  BatchedProjectInPlace(x, inst.a.col_ptr(), inst.projection, plan);
}

PartialTerms ComputePartialTerms(const MatchingInstance& inst,
                                 const BucketPlan& plan,
                                 std::span<const Real> lam, Real gamma,
                                 std::span<Real> x) {
  ComputePrimalCandidate(inst, plan, lam, gamma, x);
  PartialTerms terms;
  terms.ax.resize(static_cast<std::size_t>(inst.dual_dimension()));
  ApplyA(inst.a, x, terms.ax);
  CompensatedSum linear;
  CompensatedSum squares;
  for (std::size_t e = 0; e < x.size(); ++e) {
    linear.Add(static_cast<double>(inst.c[e]) * x[e]);
    squares.Add(static_cast<double>(x[e]) * x[e]);
  }
  terms.linear_term = linear.Value();
  terms.reg_penalty = 0.5 * static_cast<double>(gamma) * squares.Value();
  return terms;
}

ObjectiveResult FinishObjective(std::span<const Real> b,
                                std::span<const Real> lam,
                                std::vector<Real> ax, double linear_term,
                                double reg_penalty) {
  if (ax.size() != b.size() || lam.size() != b.size()) {
    throw StructuralError("FinishObjective: dual dimension mismatch");
  }
  ObjectiveResult result;
  CompensatedSum multiplier;
  for (std::size_t r = 0; r < ax.size(); ++r) {
    ax[r] -= b[r];
    multiplier.Add(static_cast<double>(lam[r]) * ax[r]);
  }
  result.gradient = DualVector(std::move(ax));
  result.linear_term = linear_term;
  result.reg_penalty = reg_penalty;
  result.multiplier_term = multiplier.Value();
  CompensatedSum total;
  total.Add(linear_term);
  total.Add(reg_penalty);
  total.Add(result.multiplier_term);
  result.dual_value = total.Value();
  return result;
}

PrimalBlocks PrimalCandidate(const MatchingInstance& inst,
                             const DualVector& lam, Real gamma) {
  const BucketPlan plan = MakeBucketPlan(SliceLengths(inst.a.col_ptr()));
  PrimalBlocks x(static_cast<std::size_t>(inst.nnz()));
  ComputePrimalCandidate(inst, plan, lam.view(), gamma, x.view());
  return x;
}

ObjectiveResult Evaluate(const MatchingInstance& inst, const DualVector& lam,
                         Real gamma) {
  const BucketPlan plan = MakeBucketPlan(SliceLengths(inst.a.col_ptr()));
  PrimalBlocks x(static_cast<std::size_t>(inst.nnz()));
  PartialTerms terms = ComputePartialTerms(inst, plan, lam.view(), gamma, x.view());
  ObjectiveResult result =
      FinishObjective(inst.b, lam.view(), std::move(terms.ax),
                      terms.linear_term, terms.reg_penalty);
  result.primal = std::move(x);
  return result;
}

MatchingObjective::MatchingObjective(const MatchingInstance& inst)
    : inst_(inst), plan_(MakeBucketPlan(SliceLengths(inst.a.col_ptr()))) {}

ObjectiveResult MatchingObjective::Calculate(std::span<const Real> lam,
                                             Real gamma) {
  PrimalBlocks x(static_cast<std::size_t>(inst_.nnz()));
  PartialTerms terms = ComputePartialTerms(inst_, plan_, lam, gamma, x.view());
  ObjectiveResult result = FinishObjective(
      inst_.b, lam, std::move(terms.ax), terms.linear_term, terms.reg_penalty);
  result.primal = std::move(x);
  return result;
}

PrimalBlocks MatchingObjective::PrimalCandidate(std::span<const Real> lam,
                                                Real gamma) {
  PrimalBlocks x(static_cast<std::size_t>(inst_.nnz()));
  ComputePrimalCandidate(inst_, plan_, lam, gamma, x.view());
  return x;
}

}  // namespace matchlp
