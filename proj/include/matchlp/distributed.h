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

#ifndef MATCHLP_DISTRIBUTED_H_
#define MATCHLP_DISTRIBUTED_H_

// Column-sharded evaluation. Each of W long-lived workers owns a contiguous
// range of sources and computes its slice of x*(lam) and the partial A x*.
// Per iteration the workers exchange one sum-reduction (m*J partial products
// plus the two scalars c^T x and ||x||^2) and two broadcasts (lam1, lam2).
//
// With deterministic reduction every term is rounded to a power-of-two unit
// derived from an a-priori bound on the row sum, partial sums are exact
// integers, and the result does not depend on W. Set
// MATCHLP_DETERMINISTIC_REDUCTION=0 to use plain shard-ordered floating
// point sums instead. MATCHLP_PIN_WORKERS=1 pins worker w to core w mod N.

#include <barrier>
#include <exception>
#include <memory>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "matchlp/instance.h"
#include "matchlp/objective.h"
#include "matchlp/optimizer.h"
#include "matchlp/projection.h"
#include "matchlp/summation.h"
#include "matchlp/types.h"

namespace matchlp {

struct ShardRange {
  Index source_begin = 0;
  Index source_end = 0;
  Index nnz = 0;
};

struct ShardPlan {
  Index workers = 1;
  std::vector<ShardRange> shards;
  double balance = 1;  // max shard nnz / mean shard nnz
};

// Contiguous source ranges with balanced nnz. Every shard's nnz is at most
// ceil(nnz/W) + the largest single-source nnz. Throws ConfigError unless
// 1 <= W <= I.
ShardPlan PartitionColumns(std::span<const Index> col_ptr, Index workers);
ShardPlan PartitionColumns(const MatchingInstance& inst, Index workers);

// One worker's slice of the problem.
struct Shard {
  ShardRange range;
  Index edge_begin = 0;
  MatchingInstance local;
  BucketPlan plan;
};

Shard MakeShard(const MatchingInstance& inst, const ShardRange& range);

// Partial A x*, c^T x*, (gamma/2)||x*||^2 over the shard's sources; no -b.
PartialTerms LocalEvaluate(const Shard& shard, std::span<const Real> lam,
                           Real gamma);
PartialTerms LocalEvaluate(const Shard& shard, std::span<const Real> lam,
                           Real gamma, std::span<Real> x);

// Global a-priori bounds on sum |a_re x_e| per row and on the two scalars.
// Bounded blocks contribute static terms; unconstrained blocks use
// |x_e| <= (S_e ||lam||_inf + |c_e|) / gamma with S_e = sum_k |a_ke|.
struct ReductionBounds {
  std::vector<double> row_static;
  std::vector<double> row_lam;    // coefficient of ||lam||_inf / gamma
  std::vector<double> row_const;  // coefficient of 1 / gamma
  double linear_static = 0, linear_lam = 0, linear_const = 0;
  double square_static = 0, square_ss = 0, square_sc = 0, square_cc = 0;
};

ReductionBounds ComputeReductionBounds(const MatchingInstance& inst);

struct ReductionScales {
  std::vector<FixedPointScale> rows;
  FixedPointScale linear;
  FixedPointScale squares;
};

ReductionScales MakeReductionScales(const ReductionBounds& bounds,
                                    std::span<const Real> lam, Real gamma);

// Writes m*J row units followed by the c^T x and ||x||^2 units into out.
void LocalEvaluateQuantized(const Shard& shard, const ReductionScales& scales,
                            std::span<const Real> lam, Real gamma,
                            std::span<Real> x, std::span<double> out);

// Reads MATCHLP_DETERMINISTIC_REDUCTION; on unless set to 0, off or false.
bool DeterministicReductionEnabled();

class CommLedger {
 public:
  void RecordReduce(Index floats, Index scalars);
  void RecordBroadcast(Index floats);
  void RecordGather(Index floats);
  // Counters accumulated since the previous Take.
  CommCounters Take();
  const CommCounters& total() const { return total_; }

 private:
  CommCounters pending_;
  CommCounters total_;
};

// Shared-memory transport with the two collective verbs. Every rank must call
// each verb in the same order.
class InProcessCommunicator {
 public:
  explicit InProcessCommunicator(int size);

  int size() const { return size_; }
  void Barrier();
  // Root (rank 0) receives the elementwise sum over ranks in ascending rank
  // order. recv is only written on the root.
  void ReduceSum(int rank, std::span<const double> send, std::span<double> recv);
  // Copies the root's buffer into every other rank's buffer.
  void Broadcast(int rank, std::span<Real> buffer);

 private:
  int size_;
  std::barrier<> barrier_;
  std::vector<const double*> reduce_slots_;
  const Real* broadcast_source_ = nullptr;
};

class DistributedObjective : public ObjectiveFunction {
 public:
  DistributedObjective(const MatchingInstance& inst, Index workers,
                       bool deterministic);
  ~DistributedObjective() override;

  DistributedObjective(const DistributedObjective&) = delete;
  DistributedObjective& operator=(const DistributedObjective&) = delete;

  Index dual_dimension() const override { return dual_dimension_; }
  ObjectiveResult Calculate(std::span<const Real> lam, Real gamma) override;
  PrimalBlocks PrimalCandidate(std::span<const Real> lam, Real gamma) override;
  void Publish(std::span<const Real> lam1, std::span<const Real> lam2) override;

  const ShardPlan& plan() const { return plan_; }
  bool deterministic() const { return deterministic_; }
  CommCounters TakeComm() { return ledger_.Take(); }
  const CommLedger& ledger() const { return ledger_; }

 private:
  enum class Command { kEvaluate, kPublish, kSetPoint, kGather, kStop };

  struct Rank {
    Shard shard;
    std::vector<Real> lam1;
    std::vector<Real> lam2;
    std::vector<Real> x;
    std::vector<double> send;
    std::string error;
  };

  void WorkerLoop(int rank);
  void Post(Command command, Real gamma);
  void Execute(int rank, Command command, Real gamma);
  void EvaluateLocal(int rank, Real gamma);
  void CheckErrors();
  void SetPoint(std::span<const Real> lam);

  Index dual_dimension_ = 0;
  Index nnz_ = 0;
  std::vector<Real> b_;
  bool deterministic_ = true;
  ShardPlan plan_;
  ReductionBounds bounds_;
  std::vector<Rank> ranks_;
  InProcessCommunicator comm_;
  CommLedger ledger_;
  Command command_ = Command::kStop;
  Real command_gamma_ = 0;
  std::vector<double> reduced_;
  std::vector<Real> gathered_;
  std::vector<std::thread> threads_;
};

// PrepareProblem, then Maximize over a DistributedObjective with W workers.
SolveReport DistributedSolve(const MatchingInstance& inst,
                             const SolverConfig& config, Index workers);

}  // namespace matchlp

#endif  // MATCHLP_DISTRIBUTED_H_
