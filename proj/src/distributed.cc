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

#include "matchlp/distributed.h"

#include <pthread.h>
#include <sched.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace matchlp {

namespace {

// Boundary index in [lo, hi] whose prefix nnz is closest to goal; ties go to
// the smaller index.
Index ClosestBoundary(std::span<const Index> col_ptr, double goal, Index lo,
                      Index hi) {
  auto it = std::lower_bound(col_ptr.begin() + lo, col_ptr.begin() + hi + 1, goal,
                             [](Index v, double g) { return static_cast<double>(v) < g; });
  Index idx = std::min<Index>(it - col_ptr.begin(), hi);
  if (idx > lo) {
    const double below = goal - static_cast<double>(col_ptr[static_cast<std::size_t>(idx - 1)]);
    const double above = static_cast<double>(col_ptr[static_cast<std::size_t>(idx)]) - goal;
    if (below <= above) --idx;
  }
  return std::clamp(idx, lo, hi);
}

ShardPlan PlanFromCuts(std::span<const Index> col_ptr,
                       const std::vector<Index>& cuts) {
  ShardPlan plan;
  plan.workers = static_cast<Index>(cuts.size()) - 1;
  Index largest = 0;
  for (std::size_t w = 0; w + 1 < cuts.size(); ++w) {
    ShardRange range;
    range.source_begin = cuts[w];
    range.source_end = cuts[w + 1];
    range.nnz = col_ptr[static_cast<std::size_t>(cuts[w + 1])] -
                col_ptr[static_cast<std::size_t>(cuts[w])];
    largest = std::max(largest, range.nnz);
    plan.shards.push_back(range);
  }
  const double mean = static_cast<double>(col_ptr.back()) /
                      static_cast<double>(plan.workers);
  plan.balance = mean > 0 ? static_cast<double>(largest) / mean : 1.0;
  return plan;
}

void MaybePinThread(int rank) {
  const char* value = std::getenv("MATCHLP_PIN_WORKERS");
  if (value == nullptr || std::strcmp(value, "1") != 0) return;
  const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(static_cast<unsigned>(rank) % cores, &set);
  pthread_setaffinity_np(pthread_self(), sizeof(set), &set);
}

int CheckedWorkers(const MatchingInstance& inst, Index workers) {
  if (workers < 1 || workers > inst.num_sources()) {
    throw ConfigError("worker count " + std::to_string(workers) +
                      " must lie in [1, I = " +
                      std::to_string(inst.num_sources()) + "]");
  }
  return static_cast<int>(workers);
}

double BlockBound(const BlockProjection& block) {
  switch (block.kind) {
    case ProjectionKind::kSimplex:
      return std::abs(block.param0);
    case ProjectionKind::kBox:
      return std::max(std::abs(block.param0), std::abs(block.param1));
    default:
      return -1;
  }
}

// Rounding slack on top of the two bits of headroom in FixedPointScale.
constexpr double kBoundMargin = 1 + 1e-9;

}  // namespace

ShardPlan PartitionColumns(std::span<const Index> col_ptr, Index workers) {
  const Index num_sources = static_cast<Index>(col_ptr.size()) - 1;
  if (workers < 1 || workers > num_sources) {
    throw ConfigError("worker count " + std::to_string(workers) +
                      " must lie in [1, I = " + std::to_string(num_sources) +
                      "]");
  }
  const Index total = col_ptr.back();
  Index largest_source = 0;
  for (Index i = 0; i < num_sources; ++i) {
    largest_source = std::max(largest_source,
                              col_ptr[static_cast<std::size_t>(i + 1)] -
                                  col_ptr[static_cast<std::size_t>(i)]);
  }
  const Index limit = (total + workers - 1) / workers + largest_source;

  // Greedy: each shard aims at an equal share of what is left.
  std::vector<Index> cuts{0};
  for (Index w = 0; w + 1 < workers; ++w) {
    const Index begin = cuts.back();
    const Index shards_left = workers - w;
    const double share =
        static_cast<double>(total - col_ptr[static_cast<std::size_t>(begin)]) /
        static_cast<double>(shards_left);
    cuts.push_back(ClosestBoundary(
        col_ptr, static_cast<double>(col_ptr[static_cast<std::size_t>(begin)]) + share,
        begin + 1, num_sources - (shards_left - 1)));
  }
  cuts.push_back(num_sources);
  ShardPlan plan = PlanFromCuts(col_ptr, cuts);
  const bool within = std::all_of(plan.shards.begin(), plan.shards.end(),
                                  [&](const ShardRange& r) { return r.nnz <= limit; });
  if (within) return plan;

  // Fallback: cut at the boundaries nearest the global quantiles.
  cuts.assign(1, 0);
  for (Index w = 1; w < workers; ++w) {
    const double goal = static_cast<double>(total) * static_cast<double>(w) /
                        static_cast<double>(workers);
    cuts.push_back(ClosestBoundary(col_ptr, goal, cuts.back() + 1,
                                   num_sources - (workers - w)));
  }
  cuts.push_back(num_sources);
  return PlanFromCuts(col_ptr, cuts);
}

ShardPlan PartitionColumns(const MatchingInstance& inst, Index workers) {
  return PartitionColumns(inst.a.col_ptr(), workers);
}

Shard MakeShard(const MatchingInstance& inst, const ShardRange& range) {
  Shard shard;
  shard.range = range;
  shard.edge_begin = inst.a.source_begin(range.source_begin);
  shard.local = SliceInstance(inst, range.source_begin, range.source_end);
  shard.plan = MakeBucketPlan(SliceLengths(shard.local.a.col_ptr()));
  return shard;
}

PartialTerms LocalEvaluate(const Shard& shard, std::span<const Real> lam,
                           Real gamma, std::span<Real> x) {
  return ComputePartialTerms(shard.local, shard.plan, lam, gamma, x);
}

PartialTerms LocalEvaluate(const Shard& shard, std::span<const Real> lam,
                           Real gamma) {
  std::vector<Real> x(static_cast<std::size_t>(shard.local.nnz()));
  return LocalEvaluate(shard, lam, gamma, x);
}

ReductionBounds ComputeReductionBounds(const MatchingInstance& inst) {
  const SparseBlockMatrix& a = inst.a;
  const Index m = a.num_families();
  const Index num_dest = a.num_destinations();
  const Index nnz = a.nnz();
  ReductionBounds bounds;
  bounds.row_static.assign(static_cast<std::size_t>(a.num_rows()), 0.0);
  bounds.row_lam.assign(static_cast<std::size_t>(a.num_rows()), 0.0);
  bounds.row_const.assign(static_cast<std::size_t>(a.num_rows()), 0.0);
  const auto values = a.all_family_values();
  for (Index i = 0; i < a.num_sources(); ++i) {
    const double xb = BlockBound(inst.projection.blocks[static_cast<std::size_t>(i)]);
    for (Index e = a.source_begin(i); e < a.source_end(i); ++e) {
      const Index j = a.row_dest()[static_cast<std::size_t>(e)];
      const double c = std::abs(static_cast<double>(inst.c[static_cast<std::size_t>(e)]));
      double s = 0;
      for (Index k = 0; k < m; ++k) {
        s += std::abs(static_cast<double>(values[static_cast<std::size_t>(k * nnz + e)]));
      }
      for (Index k = 0; k < m; ++k) {
        const double abs_a =
            std::abs(static_cast<double>(values[static_cast<std::size_t>(k * nnz + e)]));
        const auto r = static_cast<std::size_t>(k * num_dest + j);
        if (xb >= 0) {
          bounds.row_static[r] += abs_a * xb;
        } else {
          bounds.row_lam[r] += abs_a * s;
          bounds.row_const[r] += abs_a * c;
        }
      }
      if (xb >= 0) {
        bounds.linear_static += c * xb;
        bounds.square_static += xb * xb;
      } else {
        bounds.linear_lam += c * s;
        bounds.linear_const += c * c;
        bounds.square_ss += s * s;
        bounds.square_sc += s * c;
        bounds.square_cc += c * c;
      }
    }
  }
  return bounds;
}

ReductionScales MakeReductionScales(const ReductionBounds& bounds,
                                    std::span<const Real> lam, Real gamma) {
  double lam_inf = 0;
  for (Real v : lam) lam_inf = std::max(lam_inf, std::abs(static_cast<double>(v)));
  const double g = gamma;
  ReductionScales scales;
  scales.rows.reserve(bounds.row_static.size());
  for (std::size_t r = 0; r < bounds.row_static.size(); ++r) {
    const double bound =
        bounds.row_static[r] + (lam_inf * bounds.row_lam[r] + bounds.row_const[r]) / g;
    scales.rows.emplace_back(bound * kBoundMargin);
  }
  scales.linear = FixedPointScale(
      (bounds.linear_static + (lam_inf * bounds.linear_lam + bounds.linear_const) / g) *
      kBoundMargin);
  scales.squares = FixedPointScale(
      (bounds.square_static +
       (lam_inf * lam_inf * bounds.square_ss + 2 * lam_inf * bounds.square_sc +
        bounds.square_cc) / (g * g)) *
      kBoundMargin);
  return scales;
}

void LocalEvaluateQuantized(const Shard& shard, const ReductionScales& scales,
                            std::span<const Real> lam, Real gamma,
                            std::span<Real> x, std::span<double> out) {
  const MatchingInstance& inst = shard.local;
  const SparseBlockMatrix& a = inst.a;
  const Index rows = a.num_rows();
  if (static_cast<Index>(out.size()) != rows + 2 ||
      static_cast<Index>(scales.rows.size()) != rows) {
    throw StructuralError("LocalEvaluateQuantized: buffer size mismatch");
  }
  ComputePrimalCandidate(inst, shard.plan, lam, gamma, x);
  thread_local std::vector<std::int64_t> units;
  units.assign(static_cast<std::size_t>(rows), 0);
  const Index num_dest = a.num_destinations();
  const auto dest = a.row_dest();
  for (Index k = 0; k < a.num_families(); ++k) {
    const auto values = a.family_values(k);
    const FixedPointScale* row_scale = scales.rows.data() + k * num_dest;
    std::int64_t* row_units = units.data() + k * num_dest;
    for (std::size_t e = 0; e < x.size(); ++e) {
      const std::int32_t j = dest[e];
      row_units[j] += row_scale[j].Quantize(static_cast<double>(values[e]) * x[e]);
    }
  }
  std::int64_t linear = 0;
  std::int64_t squares = 0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    const double xe = x[e];
    linear += scales.linear.Quantize(static_cast<double>(inst.c[e]) * xe);
    squares += scales.squares.Quantize(xe * xe);
  }
  for (Index r = 0; r < rows; ++r) {
    out[static_cast<std::size_t>(r)] = static_cast<double>(units[static_cast<std::size_t>(r)]);
  }
  out[static_cast<std::size_t>(rows)] = static_cast<double>(linear);
  out[static_cast<std::size_t>(rows) + 1] = static_cast<double>(squares);
}

bool DeterministicReductionEnabled() {
  const char* value = std::getenv("MATCHLP_DETERMINISTIC_REDUCTION");
  if (value == nullptr) return true;
  std::string text(value);
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return !(text == "0" || text == "off" || text == "false" || text == "no");
}

void CommLedger::RecordReduce(Index floats, Index scalars) {
  CommCounters c;
  c.reduce_ops = 1;
  c.floats_reduced = floats;
  c.scalar_reductions = scalars;
  c.bytes = (floats + scalars) * static_cast<Index>(sizeof(double));
  pending_ += c;
  total_ += c;
}

void CommLedger::RecordBroadcast(Index floats) {
  CommCounters c;
  c.broadcast_ops = 1;
  c.floats_broadcast = floats;
  c.bytes = floats * static_cast<Index>(sizeof(Real));
  pending_ += c;
  total_ += c;
}

void CommLedger::RecordGather(Index floats) {
  CommCounters c;
  c.bytes = floats * static_cast<Index>(sizeof(Real));
  pending_ += c;
  total_ += c;
}

CommCounters CommLedger::Take() {
  CommCounters out = pending_;
  pending_ = CommCounters{};
  return out;
}

InProcessCommunicator::InProcessCommunicator(int size)
    : size_(size), barrier_(size), reduce_slots_(static_cast<std::size_t>(size)) {}

void InProcessCommunicator::Barrier() { barrier_.arrive_and_wait(); }

void InProcessCommunicator::ReduceSum(int rank, std::span<const double> send,
                                      std::span<double> recv) {
  reduce_slots_[static_cast<std::size_t>(rank)] = send.data();
  Barrier();
  if (rank == 0) {
    for (std::size_t i = 0; i < send.size(); ++i) {
      double sum = reduce_slots_[0][i];
      for (int w = 1; w < size_; ++w) sum += reduce_slots_[static_cast<std::size_t>(w)][i];
      recv[i] = sum;
    }
  }
  Barrier();
}

void InProcessCommunicator::Broadcast(int rank, std::span<Real> buffer) {
  if (rank == 0) broadcast_source_ = buffer.data();
  Barrier();
  if (rank != 0) std::copy_n(broadcast_source_, buffer.size(), buffer.begin());
  Barrier();
}

DistributedObjective::DistributedObjective(const MatchingInstance& inst,
                                           Index workers, bool deterministic)
    : dual_dimension_(inst.dual_dimension()),
      nnz_(inst.nnz()),
      b_(inst.b),
      deterministic_(deterministic),
      plan_(PartitionColumns(inst, workers)),
      comm_(CheckedWorkers(inst, workers)) {
  if (deterministic_) bounds_ = ComputeReductionBounds(inst);
  ranks_.resize(plan_.shards.size());
  for (std::size_t w = 0; w < ranks_.size(); ++w) {
    Rank& rank = ranks_[w];
    rank.shard = MakeShard(inst, plan_.shards[w]);
    rank.lam1.assign(static_cast<std::size_t>(dual_dimension_), Real(0));
    rank.lam2.assign(static_cast<std::size_t>(dual_dimension_), Real(0));
    rank.x.assign(static_cast<std::size_t>(rank.shard.local.nnz()), Real(0));
    rank.send.assign(static_cast<std::size_t>(dual_dimension_) + 2, 0.0);
  }
  reduced_.assign(static_cast<std::size_t>(dual_dimension_) + 2, 0.0);
  // Setup: b to every worker, plus the reduction bounds when they are used.
  ledger_.RecordBroadcast(dual_dimension_);
  if (deterministic_) ledger_.RecordBroadcast(3 * dual_dimension_ + 7);
  MaybePinThread(0);
  for (std::size_t w = 1; w < ranks_.size(); ++w) {
    threads_.emplace_back([this, w] { WorkerLoop(static_cast<int>(w)); });
  }
}

DistributedObjective::~DistributedObjective() {
  Post(Command::kStop, 0);
  for (std::thread& t : threads_) t.join();
}

void DistributedObjective::WorkerLoop(int rank) {
  MaybePinThread(rank);
  while (true) {
    comm_.Barrier();
    const Command command = command_;
    const Real gamma = command_gamma_;
    if (command == Command::kStop) return;
    Execute(rank, command, gamma);
  }
}

void DistributedObjective::Post(Command command, Real gamma) {
  command_ = command;
  command_gamma_ = gamma;
  comm_.Barrier();
}

void DistributedObjective::EvaluateLocal(int rank, Real gamma) {
  Rank& self = ranks_[static_cast<std::size_t>(rank)];
  try {
    if (deterministic_) {
      const ReductionScales scales = MakeReductionScales(bounds_, self.lam2, gamma);
      LocalEvaluateQuantized(self.shard, scales, self.lam2, gamma, self.x, self.send);
    } else {
      PartialTerms terms = LocalEvaluate(self.shard, self.lam2, gamma, self.x);
      std::copy(terms.ax.begin(), terms.ax.end(), self.send.begin());
      self.send[static_cast<std::size_t>(dual_dimension_)] = terms.linear_term;
      self.send[static_cast<std::size_t>(dual_dimension_) + 1] = terms.reg_penalty;
    }
  } catch (const std::exception& e) {
    self.error = e.what();
    std::fill(self.send.begin(), self.send.end(), 0.0);
  }
}

void DistributedObjective::Execute(int rank, Command command, Real gamma) {
  Rank& self = ranks_[static_cast<std::size_t>(rank)];
  switch (command) {
    case Command::kEvaluate:
      EvaluateLocal(rank, gamma);
      comm_.ReduceSum(rank, self.send,
                      rank == 0 ? std::span<double>(reduced_) : std::span<double>());
      break;
    case Command::kPublish:
      comm_.Broadcast(rank, self.lam1);
      comm_.Broadcast(rank, self.lam2);
      break;
    case Command::kSetPoint:
      comm_.Broadcast(rank, self.lam2);
      break;
    case Command::kGather:
      try {
        ComputePrimalCandidate(self.shard.local, self.shard.plan, self.lam2,
                               gamma, self.x);
        std::copy(self.x.begin(), self.x.end(),
                  gathered_.begin() + self.shard.edge_begin);
      } catch (const std::exception& e) {
        self.error = e.what();
      }
      comm_.Barrier();
      break;
    case Command::kStop:
      break;
  }
}

void DistributedObjective::CheckErrors() {
  std::string message;
  for (std::size_t w = 0; w < ranks_.size(); ++w) {
    if (!ranks_[w].error.empty() && message.empty()) {
      message = "worker " + std::to_string(w) + " failed: " + ranks_[w].error;
    }
    ranks_[w].error.clear();
  }
  if (!message.empty()) throw std::runtime_error(message);
}

void DistributedObjective::SetPoint(std::span<const Real> lam) {
  if (static_cast<Index>(lam.size()) != dual_dimension_) {
    throw StructuralError("dual vector has length " + std::to_string(lam.size()) +
                          ", expected m*J = " + std::to_string(dual_dimension_));
  }
  std::vector<Real>& current = ranks_[0].lam2;
  if (std::equal(lam.begin(), lam.end(), current.begin())) return;
  std::copy(lam.begin(), lam.end(), current.begin());
  Post(Command::kSetPoint, 0);
  Execute(0, Command::kSetPoint, 0);
  ledger_.RecordBroadcast(dual_dimension_);
}

ObjectiveResult DistributedObjective::Calculate(std::span<const Real> lam,
                                                Real gamma) {
  if (!(gamma > 0) || !std::isfinite(gamma)) {
    throw ConfigError("gamma must be positive and finite, got " +
                      std::to_string(gamma));
  }
  SetPoint(lam);
  Post(Command::kEvaluate, gamma);
  Execute(0, Command::kEvaluate, gamma);
  ledger_.RecordReduce(dual_dimension_, 2);
  CheckErrors();
  const auto rows = static_cast<std::size_t>(dual_dimension_);
  std::vector<Real> ax(rows);
  double linear = 0;
  double reg = 0;
  if (deterministic_) {
    const ReductionScales scales = MakeReductionScales(bounds_, lam, gamma);
    for (std::size_t r = 0; r < rows; ++r) {
      ax[r] = static_cast<Real>(
          scales.rows[r].ToDouble(static_cast<std::int64_t>(reduced_[r])));
    }
    linear = scales.linear.ToDouble(static_cast<std::int64_t>(reduced_[rows]));
    reg = 0.5 * static_cast<double>(gamma) *
          scales.squares.ToDouble(static_cast<std::int64_t>(reduced_[rows + 1]));
  } else {
    for (std::size_t r = 0; r < rows; ++r) ax[r] = static_cast<Real>(reduced_[r]);
    linear = reduced_[rows];
    reg = reduced_[rows + 1];
  }
  return FinishObjective(b_, lam, std::move(ax), linear, reg);
}

PrimalBlocks DistributedObjective::PrimalCandidate(std::span<const Real> lam,
                                                   Real gamma) {
  if (!(gamma > 0) || !std::isfinite(gamma)) {
    throw ConfigError("gamma must be positive and finite, got " +
                      std::to_string(gamma));
  }
  SetPoint(lam);
  gathered_.assign(static_cast<std::size_t>(nnz_), Real(0));
  Post(Command::kGather, gamma);
  Execute(0, Command::kGather, gamma);
  ledger_.RecordGather(nnz_);
  CheckErrors();
  return PrimalBlocks(gathered_);
}

void DistributedObjective::Publish(std::span<const Real> lam1,
                                   std::span<const Real> lam2) {
  if (static_cast<Index>(lam1.size()) != dual_dimension_ ||
      static_cast<Index>(lam2.size()) != dual_dimension_) {
    throw StructuralError("Publish: dual length mismatch");
  }
  std::copy(lam1.begin(), lam1.end(), ranks_[0].lam1.begin());
  std::copy(lam2.begin(), lam2.end(), ranks_[0].lam2.begin());
  Post(Command::kPublish, 0);
  Execute(0, Command::kPublish, 0);
  ledger_.RecordBroadcast(dual_dimension_);
  ledger_.RecordBroadcast(dual_dimension_);
}

SolveReport DistributedSolve(const MatchingInstance& inst,
                             const SolverConfig& config, Index workers) {
  const PreparedProblem problem = PrepareProblem(inst, config);
  DistributedObjective objective(problem.instance, workers,
                                 DeterministicReductionEnabled());
  SolveReport report = Maximize(objective, config, problem,
                                [&objective] { return objective.TakeComm(); });
  report.distributed = true;
  report.workers = workers;
  FinishReport(problem, report);
  return report;
}

}  // namespace matchlp
