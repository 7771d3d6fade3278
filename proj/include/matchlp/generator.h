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

#ifndef MATCHLP_GENERATOR_H_
#define MATCHLP_GENERATOR_H_

// Synthetic matching LPs: a sparse bipartite graph between I requests and J
// resources, lognormal values and coefficients, and capacities set just below
// the greedy per-request-argmax load so that some resource rows bind.
//
// Randomness comes from CounterRng, a keyed counter-mode generator. Every
// (phase, index) pair gets its own stream derived from the seed, so draws in
// one phase never shift the draws of another.

#include <cstdint>
#include <limits>
#include <vector>

#include "json.hpp"
#include "matchlp/instance.h"
#include "matchlp/types.h"

namespace matchlp {

// SplitMix64 finalizer over (key, counter). Satisfies
// UniformRandomBitGenerator, so it drives Boost.Random distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t phase, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

enum class RngPhase : std::uint64_t {
  kBreadth = 1,
  kDegree = 2,
  kRequests = 3,
  kValueScale = 4,
  kResponsiveness = 5,
  kNoise = 6,
  kCoefficientScale = 7,
  kCapacity = 8,
};

struct LogNormal {
  double mu = 0;
  double sigma = 1;
  friend bool operator==(const LogNormal&, const LogNormal&) = default;
};

struct GeneratorConfig {
  std::uint64_t seed = 0;
  Index num_sources = 1000;      // I, requests
  Index num_destinations = 10;   // J, resources
  double sparsity = 0.01;        // target nnz / (I J)
  double mean_degree = -1;       // nu; negative means sparsity * J
  Index num_families = 1;        // m; each family draws its own s_j
  LogNormal breadth{0, 1};
  LogNormal value_scale{0, 0.5};      // v_j
  LogNormal responsiveness{0, 0.5};   // u_i
  LogNormal noise{0, 0.25};           // eps_ij
  LogNormal coefficient_scale{0, 1};  // s_j
  double c_max = 10;
  double rho_lo = 0.5;
  double rho_hi = 1.0;
  double slack = 1e-3;
  double cap = 1;  // per-request simplex capacity
  double gamma0 = 0.01;

  double nu() const;
  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

// Throws ConfigError for non-finite parameters, sparsity outside (0, 1],
// c_max < 0, slack <= 0, or a bad rho range.
void ValidateGeneratorConfig(const GeneratorConfig& cfg);

struct GraphEdge {
  Index source = 0;
  Index destination = 0;
};

// Edges in canonical order (source ascending, then destination ascending).
std::vector<GraphEdge> SampleGraph(const GeneratorConfig& cfg);

// Resource selection probabilities p_j from normalized breadth draws.
std::vector<double> ResourceProbabilities(const GeneratorConfig& cfg);

struct EdgeValues {
  std::vector<double> c;  // value c_ij, in [0, c_max]
  std::vector<double> a;  // family-major: a[k * nnz + e] = s_j^(k) c_ij
};

EdgeValues AssignValues(const GeneratorConfig& cfg,
                        const std::vector<GraphEdge>& edges);

// Per-resource sum of each request's largest incident coefficient (ties go to
// the lowest destination). a is one family, edge-aligned.
std::vector<double> GreedyLoad(const std::vector<GraphEdge>& edges,
                               const std::vector<double>& a, Index num_sources,
                               Index num_destinations);

// b_j = rho_j (load_j + slack), rho_j ~ U[rho_lo, rho_hi]. family selects the
// random stream.
std::vector<double> Capacities(const std::vector<double>& load,
                               const GeneratorConfig& cfg, Index family = 0);

struct GeneratorStats {
  Index nnz = 0;
  double achieved_sparsity = 0;
  double mean_degree = 0;            // nnz / I
  double active_fraction = 0;        // share of rows with b < greedy load
  double mean_capacity_ratio = 0;    // mean of b / (load + slack)
  std::vector<double> load;          // family-major greedy loads
};

struct GeneratedInstance {
  MatchingInstance instance;
  GeneratorStats stats;
};

GeneratedInstance GenerateInstanceWithStats(const GeneratorConfig& cfg);

// Minimization form: c negated, simplex(cap) per request.
MatchingInstance GenerateInstance(const GeneratorConfig& cfg);

nlohmann::json GeneratorConfigToJson(const GeneratorConfig& cfg);
GeneratorConfig GeneratorConfigFromJson(const nlohmann::json& doc);
nlohmann::json GeneratorStatsToJson(const GeneratorStats& stats);

}  // namespace matchlp

#endif  // MATCHLP_GENERATOR_H_
