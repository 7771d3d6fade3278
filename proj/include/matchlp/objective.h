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

#ifndef MATCHLP_OBJECTIVE_H_
#define MATCHLP_OBJECTIVE_H_

// Ridge-smoothed dual of the matching LP:
//
//   g(lam) = min_{x in C} c^T x + (gamma/2) ||x||^2 + lam^T (A x - b)
//
// The inner minimizer has the closed form x*(lam) = Proj_C(-(A^T lam + c)/gamma)
// and the dual gradient is A x*(lam) - b.

#include <span>
#include <vector>

#include "matchlp/instance.h"
#include "matchlp/projection.h"
#include "matchlp/types.h"

namespace matchlp {

struct ObjectiveResult {
  double dual_value = 0;       // g(lam)
  DualVector gradient;         // A x* - b
  PrimalBlocks primal;         // x*; left empty by objectives that shard x
  double reg_penalty = 0;      // (gamma/2) ||x*||^2
  double linear_term = 0;      // c^T x*
  double multiplier_term = 0;  // lam^T (A x* - b)
};

// What one set of sources contributes before the -b correction.
struct PartialTerms {
  std::vector<Real> ax;      // A x* over the local sources, length m*J
  double linear_term = 0;    // local c^T x*
  double reg_penalty = 0;    // local (gamma/2) ||x*||^2
};

// The contract between a problem formulation and the maximizer: given a dual
// point and a ridge parameter, return value, gradient, and primal candidate.
class ObjectiveFunction {
 public:
  virtual ~ObjectiveFunction() = default;

  virtual Index dual_dimension() const = 0;
  virtual ObjectiveResult Calculate(std::span<const Real> lam, Real gamma) = 0;

  // Primal candidate x*(lam) for the full problem.
  virtual PrimalBlocks PrimalCandidate(std::span<const Real> lam,
                                       Real gamma) = 0;

  // Invoked by the maximizer after every update with the new iterate pair.
  virtual void Publish(std::span<const Real> /*lam1*/,
                       std::span<const Real> /*lam2*/) {}
};

// Writes x*(lam) into x (edge-aligned). Throws ConfigError if gamma <= 0.
void ComputePrimalCandidate(const MatchingInstance& inst, const BucketPlan& plan,
                            std::span<const Real> lam, Real gamma,
                            std::span<Real> x);

// Primal candidate, objective pieces, and A x* for the instance's sources.
PartialTerms ComputePartialTerms(const MatchingInstance& inst,
                                 const BucketPlan& plan,
                                 std::span<const Real> lam, Real gamma,
                                 std::span<Real> x);

// Completes gradient and dual value from summed partials.
ObjectiveResult FinishObjective(std::span<const Real> b,
                                std::span<const Real> lam,
                                std::vector<Real> ax, double linear_term,
                                double reg_penalty);

PrimalBlocks PrimalCandidate(const MatchingInstance& inst,
                             const DualVector& lam, Real gamma);
ObjectiveResult Evaluate(const MatchingInstance& inst, const DualVector& lam,
                         Real gamma);

// Single-process objective over a whole instance. Keeps the bucket plan and
// reuses buffers between calls, so one object must not be shared between
// threads.
class MatchingObjective : public ObjectiveFunction {
 public:
  explicit MatchingObjective(const MatchingInstance& inst);

  Index dual_dimension() const override { return inst_.dual_dimension(); }
  ObjectiveResult Calculate(std::span<const Real> lam, Real gamma) override;
  PrimalBlocks PrimalCandidate(std::span<const Real> lam, Real gamma) override;

  const MatchingInstance& instance() const { return inst_; }

 private:
  const MatchingInstance& inst_;
  BucketPlan plan_;
};

}  // namespace matchlp

#endif  // MATCHLP_OBJECTIVE_H_
