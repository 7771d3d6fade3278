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

#ifndef MATCHLP_OPTIMIZER_H_
#define MATCHLP_OPTIMIZER_H_

// Projected accelerated gradient ascent on the smoothed dual, with an adaptive
// step from a running Lipschitz estimate, gamma continuation, and the
// primal infeasibility diagnostic sqrt(2 L (g* - g)).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matchlp/conditioning.h"
#include "matchlp/instance.h"
#include "matchlp/objective.h"
#include "matchlp/types.h"

namespace matchlp {

struct GammaSchedule {
  enum class Kind { kFixed, kHalve };
  Kind kind = Kind::kFixed;
  Index period = 25;   // halve only
  double floor = 0.01; // halve only

  static GammaSchedule Fixed() { return {}; }
  static GammaSchedule Halve(Index period, double floor) {
    return {Kind::kHalve, period, floor};
  }
  // "fixed" or "halve:<period>:<floor>". Throws ConfigError.
  static GammaSchedule Parse(const std::string& text);
  std::string ToString() const;

  friend bool operator==(const GammaSchedule&, const GammaSchedule&) = default;
};

struct GammaPoint {
  double gamma = 0;
  double max_step_multiplier = 1;  // gamma / gamma0
};

// halve(p, f): gamma = max(gamma0 * 2^-floor(iter/p), f). fixed: gamma0.
GammaPoint EvaluateGammaSchedule(const GammaSchedule& schedule, double gamma0,
                                 Index iter);

enum class Preconditioner { kNone, kJacobi };
enum class PrimalScaleMode { kNone, kAuto, kFile };

struct SolverConfig {
  Index max_iterations = 1000;
  double initial_step_size = 1e-5;
  double max_step_size = 1e-3;
  std::optional<double> gamma0;  // the instance's gamma0 when unset
  GammaSchedule gamma_schedule;
  Preconditioner precondition = Preconditioner::kNone;
  PrimalScaleMode primal_scale = PrimalScaleMode::kNone;
  std::vector<Real> primal_scale_factors;  // kFile: one per source
  Index trace_stride = 1;
  std::optional<double> tolerance;    // on ||(grad g)_+||_inf
  std::optional<double> reference_g;  // enables bound_ref
  std::vector<Real> warm_start;       // original-row duals; empty = zeros
};

// Throws ConfigError for out-of-range settings.
void ValidateConfig(const SolverConfig& config);

struct SolverState {
  std::vector<Real> lam1;
  std::vector<Real> lam2;
  std::vector<Real> prev_point;  // previous lam2, for the Lipschitz estimate
  std::vector<Real> prev_grad;
  bool has_history = false;
  double step = 1e-5;
  double max_step = 1e-3;
  double gamma = 0.01;
  Index iteration = 0;
  Index momentum_k = 1;
};

SolverState InitialState(std::vector<Real> lam, const SolverConfig& config,
                         double gamma0);

// L = ||grad - prev_grad|| / ||point - prev_point||; min(1/L, max_step), or
// max_step when the points coincide or L = 0.
double EstimateStep(std::span<const Real> prev_point,
                    std::span<const Real> prev_grad,
                    std::span<const Real> point, std::span<const Real> grad,
                    double max_step);

// One ascent step from the gradient at state.lam2. Throws DivergenceError on
// a non-finite gradient.
SolverState AgdStep(const SolverState& state, std::span<const Real> gradient);

// Moves the state to a new gamma: scales the step and its cap by the ratio,
// drops the Lipschitz history and restarts momentum.
void TransitionGamma(SolverState& state, double gamma, double max_step);

// sqrt(2 L max(g_best - g, 0)).
double PrimalInfeasibilityBound(double g_best, double g_current, double L);

struct CommCounters {
  Index reduce_ops = 0;
  Index broadcast_ops = 0;
  Index floats_reduced = 0;
  Index floats_broadcast = 0;
  Index scalar_reductions = 0;
  Index bytes = 0;

  CommCounters& operator+=(const CommCounters& other);
  friend bool operator==(const CommCounters&, const CommCounters&) = default;
};

struct IterationRecord {
  Index iter = 0;
  double g = 0;
  double g_best = 0;
  double grad_norm = 0;
  double pos_grad_norm = 0;
  double pos_grad_inf = 0;
  double infeas_bound = 0;  // bound_ref when a reference is set, else bound_best
  double bound_best = 0;
  double bound_ref = 0;     // NaN without a reference
  double gamma = 0;
  double step = 0;
  double ms = 0;            // wall time of this iteration
  Index momentum_k = 1;
  CommCounters comm;
};

enum class TerminationReason { kMaxIterations, kTolerance, kDiverged };
const char* TerminationReasonName(TerminationReason reason);

struct SolveReport {
  std::vector<IterationRecord> records;
  IterationRecord last;       // final iteration, traced or not
  DualVector lam;             // original rows
  DualVector solver_lam;      // rows of the conditioned problem
  PrimalBlocks primal;        // original coordinates
  TerminationReason termination = TerminationReason::kMaxIterations;
  std::string diagnostic;
  Index iterations = 0;
  double final_gamma = 0;
  double best_g = 0;
  double total_ms = 0;
  double spectral_norm_sq = 0;  // of the conditioned A
  bool row_normalized = false;
  Index unscaled_rows = 0;
  bool primal_scaled = false;
  bool distributed = false;
  Index workers = 1;
  CommCounters comm_setup;
};

// The problem actually handed to the maximizer.
struct PreparedProblem {
  MatchingInstance instance;
  RowScaling rows;
  bool row_normalized = false;
  PrimalScaling primal;
  bool primal_scaled = false;
  double spectral_norm_sq = 0;
  std::vector<Real> initial_lam;
  double gamma0 = 0.01;
};

// Primal scaling first, then row normalization. Maps the warm start into the
// conditioned rows.
PreparedProblem PrepareProblem(const MatchingInstance& inst,
                               const SolverConfig& config);

// Runs the iteration loop on any objective. The report is in the solver's
// coordinates; FinishReport maps it back.
SolveReport Maximize(ObjectiveFunction& objective, const SolverConfig& config,
                     const PreparedProblem& problem,
                     const std::function<CommCounters()>& take_comm = {});

void FinishReport(const PreparedProblem& problem, SolveReport& report);

SolveReport Solve(const MatchingInstance& inst, const SolverConfig& config);

// Trace CSV. with_comm appends the per-iteration ledger columns.
inline constexpr const char* kTraceHeader =
    "iter,g,grad_norm,pos_grad_norm,infeas_bound,gamma,step,ms,comm_bytes";
inline constexpr const char* kCommHeader =
    "reduce_ops,broadcast_ops,floats_reduced,floats_broadcast,scalar_reductions";
std::string TraceCsv(const SolveReport& report, bool with_comm);

}  // namespace matchlp

#endif  // MATCHLP_OPTIMIZER_H_
