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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "matchlp/optimizer.h"
#include "test_util.h"

namespace matchlp {
namespace {

SolverState OneDimState(Real lam1, Real lam2, double step) {
  SolverConfig config;
  config.initial_step_size = step;
  SolverState state = InitialState({lam1}, config, 0.01);
  state.lam2 = {lam2};
  return state;
}

TEST(AgdStep, FixedPointAtZeroGradient) {
  const SolverState state = OneDimState(0.5, 0.5, 1e-5);
  const SolverState next = AgdStep(state, std::vector<Real>{0});
  EXPECT_EQ(next.lam1, state.lam1);
  EXPECT_EQ(next.lam2, state.lam2);
  EXPECT_EQ(next.iteration, state.iteration + 1);
}

TEST(AgdStep, FirstStepArithmetic) {
  const SolverState next = AgdStep(OneDimState(0, 0, 1e-5), std::vector<Real>{1});
  EXPECT_EQ(next.lam1[0], 1e-5);
  EXPECT_EQ(next.lam2[0], 1e-5);
  EXPECT_EQ(next.momentum_k, 2);
}

TEST(AgdStep, OrthantProjectionActive) {
  const SolverState next = AgdStep(OneDimState(0, 0, 1e-3), std::vector<Real>{-5});
  EXPECT_EQ(next.lam1[0], 0);
  EXPECT_EQ(next.lam2[0], 0);
}

TEST(AgdStep, MomentumCoefficient) {
  // k = 4: beta = 3/6.
  SolverState state = OneDimState(1, 2, 0.5);
  state.max_step = 1;
  state.momentum_k = 4;
  const SolverState next = AgdStep(state, std::vector<Real>{2});
  EXPECT_EQ(next.lam1[0], 3);
  EXPECT_EQ(next.lam2[0], 4);
}

TEST(AgdStep, NonFiniteGradientDiverges) {
  EXPECT_THROW(AgdStep(OneDimState(0, 0, 1e-5),
                       std::vector<Real>{std::numeric_limits<Real>::quiet_NaN()}),
               DivergenceError);
  EXPECT_THROW(AgdStep(OneDimState(0, 0, 1e-5), std::vector<Real>{1, 2}), StructuralError);
}

TEST(AgdStepProperties, IteratesStayNonnegative) {
  std::mt19937_64 rng(51);
  SolverConfig config;
  config.max_step_size = 0.5;
  config.initial_step_size = 0.5;
  SolverState state = InitialState(std::vector<Real>(20, 0), config, 0.1);
  for (int step = 0; step < 500; ++step) {
    state = AgdStep(state, testing::RandomVector(rng, 20, -3, 2));
    for (std::size_t r = 0; r < 20; ++r) {
      ASSERT_GE(state.lam1[r], 0);
      ASSERT_GE(state.lam2[r], 0);
    }
  }
}

TEST(EstimateStep, Examples) {
  const std::vector<Real> p0{0, 0};
  EXPECT_EQ(EstimateStep(p0, std::vector<Real>{0, 0}, std::vector<Real>{1, 0},
                         std::vector<Real>{10, 0}, 1e-3),
            1e-3);
  EXPECT_EQ(EstimateStep(p0, std::vector<Real>{0, 0}, std::vector<Real>{1e4, 0},
                         std::vector<Real>{1, 0}, 1e-3),
            1e-3);
  EXPECT_DOUBLE_EQ(EstimateStep(p0, std::vector<Real>{0, 0}, std::vector<Real>{1, 0},
                                std::vector<Real>{1e4, 0}, 1e-3),
                   1e-4);
  // Coincident points and zero curvature fall back to the cap.
  EXPECT_EQ(EstimateStep(p0, std::vector<Real>{1, 1}, p0, std::vector<Real>{5, 5}, 0.2), 0.2);
  EXPECT_EQ(EstimateStep(p0, std::vector<Real>{1, 1}, std::vector<Real>{3, 4},
                         std::vector<Real>{1, 1}, 0.2),
            0.2);
}

TEST(GammaSchedule, HalvingExamples) {
  const auto s = GammaSchedule::Halve(25, 0.01);
  EXPECT_EQ(EvaluateGammaSchedule(s, 0.16, 0).gamma, 0.16);
  EXPECT_EQ(EvaluateGammaSchedule(s, 0.16, 24).gamma, 0.16);
  EXPECT_EQ(EvaluateGammaSchedule(s, 0.16, 25).gamma, 0.08);
  EXPECT_EQ(EvaluateGammaSchedule(s, 0.16, 50).gamma, 0.04);
  EXPECT_EQ(EvaluateGammaSchedule(s, 0.16, 100).gamma, 0.01);
  EXPECT_EQ(EvaluateGammaSchedule(s, 0.16, 1000).gamma, 0.01);
  EXPECT_EQ(EvaluateGammaSchedule(s, 0.16, 25).max_step_multiplier, 0.5);
  const auto fixed = GammaSchedule::Fixed();
  for (Index it : {Index{0}, Index{7}, Index{10000}}) {
    EXPECT_EQ(EvaluateGammaSchedule(fixed, 0.03, it).gamma, 0.03);
    EXPECT_EQ(EvaluateGammaSchedule(fixed, 0.03, it).max_step_multiplier, 1);
  }
}

TEST(GammaSchedule, ParseRoundTrip) {
  EXPECT_EQ(GammaSchedule::Parse("fixed"), GammaSchedule::Fixed());
  EXPECT_EQ(GammaSchedule::Parse("halve:25:0.01"), GammaSchedule::Halve(25, 0.01));
  EXPECT_EQ(GammaSchedule::Parse(GammaSchedule::Halve(7, 0.125).ToString()),
            GammaSchedule::Halve(7, 0.125));
  for (const char* bad : {"", "halve", "halve:0:0.1", "halve:5:-1", "halve:x:0.1",
                          "halve:5:0.1x", "linear"}) {
    EXPECT_THROW(GammaSchedule::Parse(bad), ConfigError) << bad;
  }
}

TEST(GammaTransition, MaxStepScalesByGammaRatio) {
  const auto s = GammaSchedule::Halve(3, 0.001);
  const double gamma0 = 0.2;
  const double cap = 1e-3;
  SolverConfig config;
  SolverState state = InitialState({0, 0}, config, gamma0);
  state.has_history = true;
  state.momentum_k = 9;
  for (Index iter = 1; iter < 40; ++iter) {
    const GammaPoint gp = EvaluateGammaSchedule(s, gamma0, iter);
    if (gp.gamma == state.gamma) continue;
    const double old_max = state.max_step;
    const double old_gamma = state.gamma;
    TransitionGamma(state, gp.gamma, cap * gp.max_step_multiplier);
    EXPECT_NEAR(state.max_step / old_max, gp.gamma / old_gamma, 1e-15);
    EXPECT_EQ(state.momentum_k, 1);
    EXPECT_FALSE(state.has_history);
  }
}

TEST(PrimalInfeasibilityBound, Examples) {
  EXPECT_NEAR(PrimalInfeasibilityBound(1.02, 1.0, 100), 2.0, 1e-12);
  EXPECT_EQ(PrimalInfeasibilityBound(3, 3, 100), 0);
  EXPECT_EQ(PrimalInfeasibilityBound(1, 2, 100), 0);
}

TEST(ValidateConfig, RejectsBadValues) {
  const auto expect_bad = [](auto mutate) {
    SolverConfig config;
    mutate(config);
    EXPECT_THROW(ValidateConfig(config), ConfigError);
  };
  expect_bad([](SolverConfig& c) { c.max_iterations = 0; });
  expect_bad([](SolverConfig& c) { c.max_step_size = 0; });
  expect_bad([](SolverConfig& c) { c.initial_step_size = 1; });
  expect_bad([](SolverConfig& c) { c.gamma0 = -1.0; });
  expect_bad([](SolverConfig& c) { c.gamma_schedule = GammaSchedule::Halve(0, 0.1); });
  expect_bad([](SolverConfig& c) { c.trace_stride = 0; });
  expect_bad([](SolverConfig& c) { c.tolerance = -1.0; });
  expect_bad([](SolverConfig& c) { c.primal_scale = PrimalScaleMode::kFile; });
  EXPECT_NO_THROW(ValidateConfig(SolverConfig{}));
}

TEST(Solve, InactiveOneByOne) {
  MatchingInstance inst;
  inst.a = MakeSparseBlockMatrix(1, 1, 1, {{0, 0, {1}}});
  inst.b = {10};
  inst.c = {-0.3};
  inst.projection.blocks = {BlockProjection::Box(0, 1)};
  SolverConfig config;
  config.gamma0 = 0.5;
  config.max_iterations = 50;
  const auto report = Solve(inst, config);
  EXPECT_EQ(report.lam.values, std::vector<Real>{0});
  // clamp(-c / gamma) = clamp(0.6) = 0.6.
  EXPECT_DOUBLE_EQ(report.primal.values[0], 0.6);
  EXPECT_EQ(report.iterations, 50);
  EXPECT_EQ(report.termination, TerminationReason::kMaxIterations);
}

TEST(Solve, ToleranceStopsEarly) {
  MatchingInstance inst;
  inst.a = MakeSparseBlockMatrix(1, 1, 1, {{0, 0, {1}}});
  inst.b = {10};
  inst.c = {-0.3};
  inst.projection.blocks = {BlockProjection::Box(0, 1)};
  SolverConfig config;
  config.gamma0 = 0.5;
  config.tolerance = 0.0;
  config.trace_stride = 100;
  const auto report = Solve(inst, config);
  EXPECT_EQ(report.termination, TerminationReason::kTolerance);
  EXPECT_EQ(report.iterations, 1);
  ASSERT_EQ(report.records.size(), 1u);
}

SolverConfig RandomSolveConfig() {
  SolverConfig config;
  config.gamma0 = 0.1;
  config.max_step_size = 0.05;
  config.max_iterations = 400;
  return config;
}

TEST(SolveProperties, DeterministicAcrossRuns) {
  std::mt19937_64 rng(52);
  const auto inst = testing::RandomInstance(rng, 2, 40, 6, 0.4);
  const auto a = Solve(inst, RandomSolveConfig());
  const auto b = Solve(inst, RandomSolveConfig());
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    EXPECT_EQ(a.records[k].g, b.records[k].g);
    EXPECT_EQ(a.records[k].grad_norm, b.records[k].grad_norm);
    EXPECT_EQ(a.records[k].step, b.records[k].step);
  }
  EXPECT_EQ(a.lam.values, b.lam.values);
  EXPECT_EQ(a.primal.values, b.primal.values);
}

TEST(SolveProperties, BestSoFarMonotoneAndNonnegative) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = testing::RandomInstance(rng, 1 + trial % 2, 60, 8, 0.3);
    SolverConfig config;
    config.gamma0 = 0.1;
    config.max_iterations = 2000;
    if (trial % 2 == 1) config.precondition = Preconditioner::kJacobi;
    const auto report = Solve(inst, config);
    for (Real v : report.lam.values) EXPECT_GE(v, 0);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t start = 0; start < report.records.size(); start += 50) {
      const std::size_t end = std::min(start + 50, report.records.size());
      for (std::size_t k = start; k < end; ++k) {
        best = std::max(best, report.records[k].g);
        EXPECT_EQ(report.records[k].g_best, best);
        if (k > start) EXPECT_GE(report.records[k].g_best, report.records[k - 1].g_best);
      }
      if (start > 0) EXPECT_GE(report.records[end - 1].g_best, report.records[start - 1].g_best);
    }
  }
}

TEST(SolveProperties, InfeasibilityBoundShrinks) {
  std::mt19937_64 rng(54);
  const auto inst = testing::RandomInstance(rng, 1, 100, 10, 0.5, testing::KindMix::kSimplex);
  auto fine = RandomSolveConfig();
  fine.max_iterations = 20000;
  fine.trace_stride = 20000;
  const double g_ref = Solve(inst, fine).best_g;

  auto config = RandomSolveConfig();
  config.max_iterations = 500;
  config.reference_g = g_ref;
  const auto report = Solve(inst, config);
  ASSERT_GT(report.records.size(), 10u);
  EXPECT_LE(report.records.back().bound_ref, report.records[10].bound_ref);
  for (const auto& r : report.records) {
    EXPECT_LE(r.pos_grad_norm, r.bound_ref + 1e-9);
    EXPECT_EQ(r.infeas_bound, r.bound_ref);
  }
}

TEST(SolveProperties, TraceStrideRows) {
  std::mt19937_64 rng(55);
  const auto inst = testing::RandomInstance(rng, 1, 10, 3, 0.7);
  auto config = RandomSolveConfig();
  config.max_iterations = 100;
  config.trace_stride = 7;
  const auto report = Solve(inst, config);
  EXPECT_EQ(report.records.size(), 15u);
  const std::string csv = TraceCsv(report, false);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kTraceHeader);
  EXPECT_TRUE(std::isnan(report.records[0].bound_ref));
}

// Returns a NaN gradient from the given call onwards.
class PoisonedObjective : public ObjectiveFunction {
 public:
  explicit PoisonedObjective(int fail_at) : fail_at_(fail_at) {}
  Index dual_dimension() const override { return 1; }
  ObjectiveResult Calculate(std::span<const Real> lam, Real) override {
    ObjectiveResult r;
    r.gradient = DualVector(1, calls_++ >= fail_at_ ? std::numeric_limits<Real>::quiet_NaN() : 1);
    r.dual_value = lam[0];
    return r;
  }
  PrimalBlocks PrimalCandidate(std::span<const Real>, Real) override { return PrimalBlocks(1); }

 private:
  int fail_at_;
  int calls_ = 0;
};

TEST(Maximize, NonFiniteGradientReportsDiverged) {
  PoisonedObjective objective(3);
  PreparedProblem problem;
  problem.initial_lam = {0};
  problem.spectral_norm_sq = 1;
  SolverConfig config;
  config.max_iterations = 10;
  const auto report = Maximize(objective, config, problem);
  EXPECT_EQ(report.termination, TerminationReason::kDiverged);
  EXPECT_EQ(report.iterations, 4);
  EXPECT_FALSE(report.diagnostic.empty());
  EXPECT_EQ(std::string(TerminationReasonName(report.termination)), "diverged");
}

TEST(Maximize, ConfigErrorBeforeIterating) {
  PoisonedObjective objective(0);
  PreparedProblem problem;
  problem.initial_lam = {0};
  SolverConfig config;
  config.max_iterations = 0;
  EXPECT_THROW(Maximize(objective, config, problem), ConfigError);
}

TEST(Solve, WarmStartIsUsed) {
  std::mt19937_64 rng(56);
  const auto inst = testing::RandomInstance(rng, 1, 30, 5, 0.5);
  auto config = RandomSolveConfig();
  const auto cold = Solve(inst, config);
  config.warm_start = cold.lam.values;
  config.max_iterations = 1;
  const auto warm = Solve(inst, config);
  EXPECT_NEAR(warm.records[0].g, cold.records.back().g, 1e-3 * std::abs(cold.records.back().g) + 1e-6);
}

TEST(Solve, JacobiReportsOriginalRowDuals) {
  std::mt19937_64 rng(57);
  const auto inst = testing::RandomInstance(rng, 2, 30, 5, 0.5);
  auto config = RandomSolveConfig();
  config.precondition = Preconditioner::kJacobi;
  config.max_iterations = 50;
  const auto report = Solve(inst, config);
  EXPECT_TRUE(report.row_normalized);
  // g is invariant under the row scaling, so the final duals evaluate to
  // the same value on the original instance.
  const auto [scaled, scaling] = RowNormalize(inst);
  const double g_scaled = Evaluate(scaled, report.solver_lam, 0.1).dual_value;
  const double g_orig = Evaluate(inst, report.lam, 0.1).dual_value;
  EXPECT_NEAR(g_scaled, g_orig, 1e-10 * (1 + std::abs(g_orig)));
}

}  // namespace
}  // namespace matchlp
