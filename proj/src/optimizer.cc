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

#include "matchlp/optimizer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "matchlp/summation.h"

namespace matchlp {

namespace {

double Norm2(std::span<const Real> v) {
  CompensatedSum sum;
  for (Real x : v) sum.Add(static_cast<double>(x) * x);
  return std::sqrt(sum.Value());
}

double DiffNorm2(std::span<const Real> a, std::span<const Real> b) {
  CompensatedSum sum;
  for (std::size_t r = 0; r < a.size(); ++r) {
    const double d = static_cast<double>(a[r]) - b[r];
    sum.Add(d * d);
  }
  return std::sqrt(sum.Value());
}

bool AllFinite(std::span<const Real> v) {
  return std::all_of(v.begin(), v.end(), [](Real x) { return std::isfinite(x); });
}

using Clock = std::chrono::steady_clock;

double MillisSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

GammaSchedule GammaSchedule::Parse(const std::string& text) {
  if (text == "fixed") return Fixed();
  const std::string prefix = "halve:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string rest = text.substr(prefix.size());
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      try {
        std::size_t used_p = 0;
        std::size_t used_f = 0;
        const std::string p = rest.substr(0, colon);
        const std::string f = rest.substr(colon + 1);
        const long long period = std::stoll(p, &used_p);
        const double floor = std::stod(f, &used_f);
        if (used_p == p.size() && used_f == f.size()) {
          GammaSchedule schedule = Halve(period, floor);
          if (period < 1 || !(floor > 0) || !std::isfinite(floor)) {
            throw ConfigError("gamma schedule needs period >= 1 and floor > 0: " + text);
          }
          return schedule;
        }
      } catch (const std::logic_error& e) {
        if (dynamic_cast<const ConfigError*>(&e) != nullptr) throw;
      }
    }
  }
  throw ConfigError("unrecognized gamma schedule '" + text +
                    "' (expected fixed or halve:<period>:<floor>)");
}

std::string GammaSchedule::ToString() const {
  if (kind == Kind::kFixed) return "fixed";
  std::ostringstream out;
  out.precision(17);
  out << "halve:" << period << ":" << floor;
  return out.str();
}

GammaPoint EvaluateGammaSchedule(const GammaSchedule& schedule, double gamma0,
                                 Index iter) {
  GammaPoint point{gamma0, 1.0};
  if (schedule.kind == GammaSchedule::Kind::kHalve) {
    const Index halvings = iter / schedule.period;
    point.gamma = std::max(
        std::ldexp(gamma0, -static_cast<int>(std::min<Index>(halvings, 2000))),
        schedule.floor);
    point.max_step_multiplier = point.gamma / gamma0;
  }
  return point;
}

void ValidateConfig(const SolverConfig& config) {
  if (config.max_iterations < 1) {
    throw ConfigError("max_iterations must be at least 1");
  }
  if (!(config.initial_step_size > 0) || !(config.max_step_size > 0) ||
      !std::isfinite(config.max_step_size) ||
      config.initial_step_size > config.max_step_size) {
    throw ConfigError("step sizes need 0 < initial_step_size <= max_step_size");
  }
  if (config.gamma0.has_value() &&
      (!(*config.gamma0 > 0) || !std::isfinite(*config.gamma0))) {
    throw ConfigError("gamma0 must be positive and finite");
  }
  if (config.gamma_schedule.kind == GammaSchedule::Kind::kHalve &&
      (config.gamma_schedule.period < 1 || !(config.gamma_schedule.floor > 0) ||
       !std::isfinite(config.gamma_schedule.floor))) {
    throw ConfigError("gamma schedule needs period >= 1 and floor > 0");
  }
  if (config.trace_stride < 1) throw ConfigError("trace stride must be >= 1");
  if (config.tolerance.has_value() && !(*config.tolerance >= 0)) {
    throw ConfigError("tolerance must be nonnegative");
  }
  if (config.primal_scale == PrimalScaleMode::kFile &&
      config.primal_scale_factors.empty()) {
    throw ConfigError("file primal scaling needs scale factors");
  }
}

SolverState InitialState(std::vector<Real> lam, const SolverConfig& config,
                         double gamma0) {
  SolverState state;
  for (Real& x : lam) x = std::max(x, Real(0));
  state.lam1 = lam;
  state.lam2 = std::move(lam);
  state.step = config.initial_step_size;
  state.max_step = config.max_step_size;
  state.gamma = gamma0;
  return state;
}

double EstimateStep(std::span<const Real> prev_point,
                    std::span<const Real> prev_grad,
                    std::span<const Real> point, std::span<const Real> grad,
                    double max_step) {
  const double dx = DiffNorm2(point, prev_point);
  if (dx == 0) return max_step;
  const double lipschitz = DiffNorm2(grad, prev_grad) / dx;
  if (!(lipschitz > 0)) return max_step;
  return std::min(1.0 / lipschitz, max_step);
}

SolverState AgdStep(const SolverState& state, std::span<const Real> gradient) {
  if (gradient.size() != state.lam2.size()) {
    throw StructuralError("AgdStep: gradient length mismatch");
  }
  if (!AllFinite(gradient)) {
    throw DivergenceError("non-finite dual gradient at iteration " +
                          std::to_string(state.iteration));
  }
  SolverState next;
  next.step = state.has_history
                  ? EstimateStep(state.prev_point, state.prev_grad, state.lam2,
                                 gradient, state.max_step)
                  : std::min(state.step, state.max_step);
  const double beta = static_cast<double>(state.momentum_k - 1) /
                      static_cast<double>(state.momentum_k + 2);
  const std::size_t n = state.lam2.size();
  next.lam1.resize(n);
  next.lam2.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double up = std::max(
        static_cast<double>(state.lam2[r]) + next.step * gradient[r], 0.0);
    next.lam1[r] = static_cast<Real>(up);
    next.lam2[r] = static_cast<Real>(
        std::max(up + beta * (up - static_cast<double>(state.lam1[r])), 0.0));
  }
  next.prev_point = state.lam2;
  next.prev_grad.assign(gradient.begin(), gradient.end());
  next.has_history = true;
  next.max_step = state.max_step;
  next.gamma = state.gamma;
  next.iteration = state.iteration + 1;
  next.momentum_k = state.momentum_k + 1;
  return next;
}

void TransitionGamma(SolverState& state, double gamma, double max_step) {
  const double ratio = gamma / state.gamma;
  state.step = std::min(state.step * ratio, max_step);
  state.max_step = max_step;
  state.gamma = gamma;
  state.has_history = false;
  state.prev_point.clear();
  state.prev_grad.clear();
  state.momentum_k = 1;
}

double PrimalInfeasibilityBound(double g_best, double g_current, double L) {
  return std::sqrt(2.0 * L * std::max(g_best - g_current, 0.0));
}

CommCounters& CommCounters::operator+=(const CommCounters& other) {
  reduce_ops += other.reduce_ops;
  broadcast_ops += other.broadcast_ops;
  floats_reduced += other.floats_reduced;
  floats_broadcast += other.floats_broadcast;
  scalar_reductions += other.scalar_reductions;
  bytes += other.bytes;
  return *this;
}

const char* TerminationReasonName(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::kMaxIterations:
      return "max_iterations";
    case TerminationReason::kTolerance:
      return "tolerance";
    case TerminationReason::kDiverged:
      return "diverged";
  }
  return "unknown";
}

PreparedProblem PrepareProblem(const MatchingInstance& inst,
                               const SolverConfig& config) {
  ValidateConfig(config);
  ValidateInstance(inst);
  PreparedProblem problem;
  problem.gamma0 = config.gamma0.value_or(inst.gamma0);
  if (!(problem.gamma0 > 0)) throw ConfigError("gamma0 must be positive");
  MatchingInstance work = inst;
  switch (config.primal_scale) {
    case PrimalScaleMode::kNone:
      problem.primal = IdentityPrimalScaling(inst.num_sources());
      break;
    case PrimalScaleMode::kAuto:
      problem.primal = AutoPrimalScaling(inst);
      problem.primal_scaled = true;
      break;
    case PrimalScaleMode::kFile:
      if (static_cast<Index>(config.primal_scale_factors.size()) !=
          inst.num_sources()) {
        throw ConfigError("primal scale file has " +
                          std::to_string(config.primal_scale_factors.size()) +
                          " factors, expected " +
                          std::to_string(inst.num_sources()));
      }
      problem.primal = PrimalScaling{config.primal_scale_factors};
      problem.primal_scaled = true;
      break;
  }
  if (problem.primal_scaled) work = PrimalScale(work, problem.primal);
  if (config.precondition == Preconditioner::kJacobi) {
    auto [normalized, rows] = RowNormalize(work);
    work = std::move(normalized);
    problem.rows = std::move(rows);
    problem.row_normalized = true;
  }
  problem.spectral_norm_sq = SpectralNormSquared(work.a);
  const auto dim = static_cast<std::size_t>(work.dual_dimension());
  if (config.warm_start.empty()) {
    problem.initial_lam.assign(dim, Real(0));
  } else {
    if (config.warm_start.size() != dim) {
      throw ConfigError("warm start has " +
                        std::to_string(config.warm_start.size()) +
                        " duals, expected " + std::to_string(dim));
    }
    if (!AllFinite(config.warm_start)) {
      throw ConfigError("warm start contains non-finite values");
    }
    problem.initial_lam = problem.row_normalized
                              ? ScaleDuals(problem.rows, config.warm_start)
                              : config.warm_start;
  }
  problem.instance = std::move(work);
  return problem;
}

SolveReport Maximize(ObjectiveFunction& objective, const SolverConfig& config,
                     const PreparedProblem& problem,
                     const std::function<CommCounters()>& take_comm) {
  ValidateConfig(config);
  if (static_cast<Index>(problem.initial_lam.size()) !=
      objective.dual_dimension()) {
    throw StructuralError("initial duals do not match the objective");
  }
  SolveReport report;
  report.spectral_norm_sq = problem.spectral_norm_sq;
  SolverState state = InitialState(problem.initial_lam, config, problem.gamma0);
  objective.Publish(state.lam1, state.lam2);
  if (take_comm) report.comm_setup += take_comm();

  const auto solve_start = Clock::now();
  double g_best = -std::numeric_limits<double>::infinity();
  bool final_is_lam2 = false;
  for (Index iter = 0; iter < config.max_iterations; ++iter) {
    const auto iter_start = Clock::now();
    const GammaPoint gp =
        EvaluateGammaSchedule(config.gamma_schedule, problem.gamma0, iter);
    if (gp.gamma != state.gamma) {
      TransitionGamma(state, gp.gamma,
                      config.max_step_size * gp.max_step_multiplier);
    }
    IterationRecord record;
    record.iter = iter;
    record.gamma = state.gamma;
    record.momentum_k = state.momentum_k;
    bool stop = false;
    try {
      ObjectiveResult result = objective.Calculate(state.lam2, state.gamma);
      record.g = result.dual_value;
      const auto grad = result.gradient.view();
      record.grad_norm = Norm2(grad);
      CompensatedSum pos;
      for (Real x : grad) {
        const double p = std::max(static_cast<double>(x), 0.0);
        pos.Add(p * p);
        record.pos_grad_inf = std::max(record.pos_grad_inf, p);
      }
      record.pos_grad_norm = std::sqrt(pos.Value());
      if (!std::isfinite(record.g) || !AllFinite(grad)) {
        throw DivergenceError("non-finite dual value or gradient at iteration " +
                              std::to_string(iter));
      }
      g_best = std::max(g_best, record.g);
      record.g_best = g_best;
      const double lipschitz = problem.spectral_norm_sq / state.gamma;
      record.bound_best = PrimalInfeasibilityBound(g_best, record.g, lipschitz);
      record.bound_ref =
          config.reference_g.has_value()
              ? PrimalInfeasibilityBound(*config.reference_g, record.g, lipschitz)
              : std::numeric_limits<double>::quiet_NaN();
      record.infeas_bound = config.reference_g.has_value() ? record.bound_ref
                                                           : record.bound_best;
      if (config.tolerance.has_value() && record.pos_grad_inf <= *config.tolerance) {
        report.termination = TerminationReason::kTolerance;
        record.step = state.step;
        final_is_lam2 = true;
        stop = true;
      } else {
        state = AgdStep(state, grad);
        record.step = state.step;
        objective.Publish(state.lam1, state.lam2);
      }
    } catch (const DivergenceError& e) {
      report.termination = TerminationReason::kDiverged;
      report.diagnostic = e.what();
      stop = true;
    }
    record.ms = MillisSince(iter_start);
    if (take_comm) record.comm = take_comm();
    report.iterations = iter + 1;
    report.last = record;
    if (iter % config.trace_stride == 0 || stop) report.records.push_back(record);
    if (stop) break;
  }
  report.total_ms = MillisSince(solve_start);
  report.final_gamma = state.gamma;
  report.best_g = g_best;
  const std::vector<Real>& final_lam = final_is_lam2 ? state.lam2 : state.lam1;
  report.solver_lam = DualVector(final_lam);
  if (report.termination != TerminationReason::kDiverged) {
    report.primal = objective.PrimalCandidate(final_lam, state.gamma);
    if (take_comm) report.comm_setup += take_comm();
  }
  return report;
}

void FinishReport(const PreparedProblem& problem, SolveReport& report) {
  report.row_normalized = problem.row_normalized;
  report.unscaled_rows = problem.row_normalized ? problem.rows.num_unscaled() : 0;
  report.primal_scaled = problem.primal_scaled;
  report.lam = problem.row_normalized
                   ? DualVector(UnscaleDuals(problem.rows, report.solver_lam.view()))
                   : report.solver_lam;
  if (problem.primal_scaled && report.primal.size() > 0) {
    report.primal = PrimalBlocks(
        UnscalePrimal(problem.instance.a, problem.primal, report.primal.view()));
  }
}

SolveReport Solve(const MatchingInstance& inst, const SolverConfig& config) {
  const PreparedProblem problem = PrepareProblem(inst, config);
  MatchingObjective objective(problem.instance);
  SolveReport report = Maximize(objective, config, problem);
  FinishReport(problem, report);
  return report;
}

std::string TraceCsv(const SolveReport& report, bool with_comm) {
  std::string out = kTraceHeader;
  if (with_comm) {
    out += ',';
    out += kCommHeader;
  }
  out += '\n';
  char line[512];
  for (const IterationRecord& r : report.records) {
    std::snprintf(line, sizeof(line),
                  "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%lld",
                  static_cast<long long>(r.iter), r.g, r.grad_norm,
                  r.pos_grad_norm, r.infeas_bound, r.gamma, r.step, r.ms,
                  static_cast<long long>(r.comm.bytes));
    out += line;
    if (with_comm) {
      std::snprintf(line, sizeof(line), ",%lld,%lld,%lld,%lld,%lld",
                    static_cast<long long>(r.comm.reduce_ops),
                    static_cast<long long>(r.comm.broadcast_ops),
                    static_cast<long long>(r.comm.floats_reduced),
                    static_cast<long long>(r.comm.floats_broadcast),
                    static_cast<long long>(r.comm.scalar_reductions));
      out += line;
    }
    out += '\n';
  }
  return out;
}

}  // namespace matchlp
