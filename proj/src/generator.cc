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

#include "matchlp/generator.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/random/lognormal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace matchlp {

namespace {

std::uint64_t SplitMix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CounterRng Stream(const GeneratorConfig& cfg, RngPhase phase, Index index) {
  return CounterRng(cfg.seed, static_cast<std::uint64_t>(phase),
                    static_cast<std::uint64_t>(index));
}

double Draw(CounterRng& rng, const LogNormal& p) {
  if (p.sigma == 0) return std::exp(p.mu);
  return boost::random::lognormal_distribution<double>(p.mu, p.sigma)(rng);
}

void CheckLogNormal(const LogNormal& p, const char* name) {
  if (!std::isfinite(p.mu) || !std::isfinite(p.sigma) || p.sigma < 0) {
    throw ConfigError(std::string("lognormal parameters for ") + name +
                      " must be finite with sigma >= 0");
  }
}

nlohmann::json LogNormalJson(const LogNormal& p) {
  return {{"mu", p.mu}, {"sigma", p.sigma}};
}

LogNormal LogNormalFromJson(const nlohmann::json& doc) {
  return LogNormal{doc.at("mu").get<double>(), doc.at("sigma").get<double>()};
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t phase,
                       std::uint64_t index)
    : key_(SplitMix64(SplitMix64(SplitMix64(seed) ^ phase) ^ index)) {}

CounterRng::result_type CounterRng::operator()() {
  return SplitMix64(key_ + 0x9e3779b97f4a7c15ULL * counter_++);
}

double GeneratorConfig::nu() const {
  return mean_degree >= 0 ? mean_degree
                          : sparsity * static_cast<double>(num_destinations);
}

void ValidateGeneratorConfig(const GeneratorConfig& cfg) {
  if (cfg.num_sources < 1 || cfg.num_destinations < 1 || cfg.num_families < 1) {
    throw ConfigError("generator needs I, J, m >= 1");
  }
  if (cfg.num_destinations > std::numeric_limits<std::int32_t>::max() ||
      cfg.num_sources > std::numeric_limits<Index>::max() / cfg.num_destinations) {
    throw ConfigError("I * J overflows the index range");
  }
  if (cfg.mean_degree < 0 && !(cfg.sparsity > 0 && cfg.sparsity <= 1)) {
    throw ConfigError("sparsity must lie in (0, 1]");
  }
  if (!std::isfinite(cfg.mean_degree) ||
      cfg.mean_degree > static_cast<double>(cfg.num_destinations)) {
    throw ConfigError("mean degree must be finite and at most J");
  }
  CheckLogNormal(cfg.breadth, "breadth");
  CheckLogNormal(cfg.value_scale, "value scale");
  CheckLogNormal(cfg.responsiveness, "responsiveness");
  CheckLogNormal(cfg.noise, "noise");
  CheckLogNormal(cfg.coefficient_scale, "coefficient scale");
  if (!(cfg.c_max >= 0) || !std::isfinite(cfg.c_max)) {
    throw ConfigError("c_max must be finite and nonnegative");
  }
  if (!(cfg.rho_lo > 0) || !(cfg.rho_lo <= cfg.rho_hi) || !std::isfinite(cfg.rho_hi)) {
    throw ConfigError("rho range needs 0 < lo <= hi");
  }
  if (!(cfg.slack > 0) || !std::isfinite(cfg.slack)) {
    throw ConfigError("slack must be positive");
  }
  if (!(cfg.cap > 0) || !std::isfinite(cfg.cap)) {
    throw ConfigError("simplex cap must be positive");
  }
  if (!(cfg.gamma0 > 0) || !std::isfinite(cfg.gamma0)) {
    throw ConfigError("gamma0 must be positive");
  }
}

std::vector<double> ResourceProbabilities(const GeneratorConfig& cfg) {
  const auto num_dest = static_cast<std::size_t>(cfg.num_destinations);
  std::vector<double> p(num_dest);
  double total = 0;
  for (std::size_t j = 0; j < num_dest; ++j) {
    CounterRng rng = Stream(cfg, RngPhase::kBreadth, static_cast<Index>(j));
    p[j] = Draw(rng, cfg.breadth);
    total += p[j];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<GraphEdge> SampleGraph(const GeneratorConfig& cfg) {
  ValidateGeneratorConfig(cfg);
  const Index num_src = cfg.num_sources;
  const Index num_dest = cfg.num_destinations;
  const double nu = cfg.nu();
  const std::vector<double> p = ResourceProbabilities(cfg);

  // Requests chosen by each resource, then regrouped by request.
  std::vector<std::vector<Index>> chosen(static_cast<std::size_t>(num_dest));
  std::vector<std::uint8_t> marked(static_cast<std::size_t>(num_src), 0);
  std::vector<Index> degree(static_cast<std::size_t>(num_src), 0);
  for (Index j = 0; j < num_dest; ++j) {
    const double mean = p[static_cast<std::size_t>(j)] *
                        static_cast<double>(num_src) * nu;
    Index k = 0;
    if (mean > 0) {
      CounterRng rng = Stream(cfg, RngPhase::kDegree, j);
      k = std::min<Index>(
          boost::random::poisson_distribution<Index, double>(mean)(rng), num_src);
    }
    // Floyd's sampling of k distinct requests.
    CounterRng rng = Stream(cfg, RngPhase::kRequests, j);
    auto& list = chosen[static_cast<std::size_t>(j)];
    list.reserve(static_cast<std::size_t>(k));
    for (Index r = num_src - k; r < num_src; ++r) {
      Index t = boost::random::uniform_int_distribution<Index>(0, r)(rng);
      if (marked[static_cast<std::size_t>(t)]) t = r;
      marked[static_cast<std::size_t>(t)] = 1;
      list.push_back(t);
    }
    for (Index t : list) {
      marked[static_cast<std::size_t>(t)] = 0;
      ++degree[static_cast<std::size_t>(t)];
    }
  }
  std::vector<Index> offset(static_cast<std::size_t>(num_src) + 1, 0);
  for (Index i = 0; i < num_src; ++i) {
    offset[static_cast<std::size_t>(i) + 1] =
        offset[static_cast<std::size_t>(i)] + degree[static_cast<std::size_t>(i)];
  }
  std::vector<GraphEdge> edges(static_cast<std::size_t>(offset.back()));
  std::vector<Index> fill(offset.begin(), offset.end() - 1);
  for (Index j = 0; j < num_dest; ++j) {
    for (Index i : chosen[static_cast<std::size_t>(j)]) {
      edges[static_cast<std::size_t>(fill[static_cast<std::size_t>(i)]++)] = {i, j};
    }
  }
  return edges;
}

EdgeValues AssignValues(const GeneratorConfig& cfg,
                        const std::vector<GraphEdge>& edges) {
  const Index num_dest = cfg.num_destinations;
  std::vector<double> v(static_cast<std::size_t>(num_dest));
  for (Index j = 0; j < num_dest; ++j) {
    CounterRng rng = Stream(cfg, RngPhase::kValueScale, j);
    v[static_cast<std::size_t>(j)] = Draw(rng, cfg.value_scale);
  }
  std::vector<double> u(static_cast<std::size_t>(cfg.num_sources));
  for (Index i = 0; i < cfg.num_sources; ++i) {
    CounterRng rng = Stream(cfg, RngPhase::kResponsiveness, i);
    u[static_cast<std::size_t>(i)] = Draw(rng, cfg.responsiveness);
  }
  std::vector<double> s(static_cast<std::size_t>(cfg.num_families * num_dest));
  for (Index r = 0; r < cfg.num_families * num_dest; ++r) {
    CounterRng rng = Stream(cfg, RngPhase::kCoefficientScale, r);
    s[static_cast<std::size_t>(r)] = Draw(rng, cfg.coefficient_scale);
  }
  const std::size_t nnz = edges.size();
  EdgeValues out;
  out.c.resize(nnz);
  out.a.resize(nnz * static_cast<std::size_t>(cfg.num_families));
  for (std::size_t e = 0; e < nnz; ++e) {
    const GraphEdge& edge = edges[e];
    CounterRng rng = Stream(cfg, RngPhase::kNoise,
                            edge.source * num_dest + edge.destination);
    const double value = v[static_cast<std::size_t>(edge.destination)] *
                         u[static_cast<std::size_t>(edge.source)] *
                         Draw(rng, cfg.noise);
    out.c[e] = std::min(value, cfg.c_max);
    for (Index k = 0; k < cfg.num_families; ++k) {
      out.a[static_cast<std::size_t>(k) * nnz + e] =
          s[static_cast<std::size_t>(k * num_dest + edge.destination)] * out.c[e];
    }
  }
  return out;
}

std::vector<double> GreedyLoad(const std::vector<GraphEdge>& edges,
                               const std::vector<double>& a, Index num_sources,
                               Index num_destinations) {
  if (a.size() < edges.size()) throw StructuralError("GreedyLoad: a is not edge-aligned");
  std::vector<double> best(static_cast<std::size_t>(num_sources), 0.0);
  std::vector<Index> best_dest(static_cast<std::size_t>(num_sources), -1);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto i = static_cast<std::size_t>(edges[e].source);
    const Index j = edges[e].destination;
    if (best_dest[i] < 0 || a[e] > best[i] || (a[e] == best[i] && j < best_dest[i])) {
      best[i] = a[e];
      best_dest[i] = j;
    }
  }
  std::vector<double> load(static_cast<std::size_t>(num_destinations), 0.0);
  for (Index i = 0; i < num_sources; ++i) {
    const Index j = best_dest[static_cast<std::size_t>(i)];
    if (j >= 0) load[static_cast<std::size_t>(j)] += best[static_cast<std::size_t>(i)];
  }
  return load;
}

std::vector<double> Capacities(const std::vector<double>& load,
                               const GeneratorConfig& cfg, Index family) {
  const auto num_dest = static_cast<Index>(load.size());
  std::vector<double> b(load.size());
  for (Index j = 0; j < num_dest; ++j) {
    double rho = cfg.rho_lo;
    if (cfg.rho_hi > cfg.rho_lo) {
      CounterRng rng = Stream(cfg, RngPhase::kCapacity, family * num_dest + j);
      rho = boost::random::uniform_real_distribution<double>(cfg.rho_lo, cfg.rho_hi)(rng);
    }
    b[static_cast<std::size_t>(j)] = rho * (load[static_cast<std::size_t>(j)] + cfg.slack);
  }
  return b;
}

GeneratedInstance GenerateInstanceWithStats(const GeneratorConfig& cfg) {
  ValidateGeneratorConfig(cfg);
  const std::vector<GraphEdge> edges = SampleGraph(cfg);
  const EdgeValues values = AssignValues(cfg, edges);
  const Index num_src = cfg.num_sources;
  const Index num_dest = cfg.num_destinations;
  const Index m = cfg.num_families;
  const std::size_t nnz = edges.size();

  std::vector<Index> col_ptr(static_cast<std::size_t>(num_src) + 1, 0);
  std::vector<std::int32_t> row_dest(nnz);
  for (std::size_t e = 0; e < nnz; ++e) {
    ++col_ptr[static_cast<std::size_t>(edges[e].source) + 1];
    row_dest[e] = static_cast<std::int32_t>(edges[e].destination);
  }
  for (std::size_t i = 0; i < static_cast<std::size_t>(num_src); ++i) {
    col_ptr[i + 1] += col_ptr[i];
  }
  std::vector<Real> family_values(values.a.begin(), values.a.end());

  GeneratedInstance out;
  MatchingInstance& inst = out.instance;
  GeneratorStats& stats = out.stats;
  inst.b.reserve(static_cast<std::size_t>(m * num_dest));
  double ratio_sum = 0;
  Index active = 0;
  for (Index k = 0; k < m; ++k) {
    const std::vector<double> a_k(values.a.begin() + static_cast<std::ptrdiff_t>(k * nnz),
                                  values.a.begin() + static_cast<std::ptrdiff_t>((k + 1) * nnz));
    const std::vector<double> load = GreedyLoad(edges, a_k, num_src, num_dest);
    const std::vector<double> b = Capacities(load, cfg, k);
    for (std::size_t j = 0; j < b.size(); ++j) {
      inst.b.push_back(static_cast<Real>(b[j]));
      ratio_sum += b[j] / (load[j] + cfg.slack);
      if (b[j] < load[j]) ++active;
    }
    stats.load.insert(stats.load.end(), load.begin(), load.end());
  }
  inst.a = SparseBlockMatrix(m, num_src, num_dest, std::move(col_ptr),
                             std::move(row_dest), std::move(family_values));
  inst.c.resize(nnz);
  for (std::size_t e = 0; e < nnz; ++e) inst.c[e] = static_cast<Real>(-values.c[e]);
  inst.projection = ProjectionSpec::Uniform(num_src, BlockProjection::Simplex(cfg.cap));
  inst.gamma0 = cfg.gamma0;

  const double rows = static_cast<double>(m * num_dest);
  stats.nnz = static_cast<Index>(nnz);
  stats.achieved_sparsity = static_cast<double>(nnz) /
                            (static_cast<double>(num_src) * static_cast<double>(num_dest));
  stats.mean_degree = static_cast<double>(nnz) / static_cast<double>(num_src);
  stats.active_fraction = static_cast<double>(active) / rows;
  stats.mean_capacity_ratio = ratio_sum / rows;
  return out;
}

MatchingInstance GenerateInstance(const GeneratorConfig& cfg) {
  return GenerateInstanceWithStats(cfg).instance;
}

nlohmann::json GeneratorConfigToJson(const GeneratorConfig& cfg) {
  return {
      {"seed", cfg.seed},
      {"sources", cfg.num_sources},
      {"destinations", cfg.num_destinations},
      {"sparsity", cfg.sparsity},
      {"mean_degree", cfg.mean_degree},
      {"families", cfg.num_families},
      {"breadth", LogNormalJson(cfg.breadth)},
      {"value_scale", LogNormalJson(cfg.value_scale)},
      {"responsiveness", LogNormalJson(cfg.responsiveness)},
      {"noise", LogNormalJson(cfg.noise)},
      {"coefficient_scale", LogNormalJson(cfg.coefficient_scale)},
      {"c_max", cfg.c_max},
      {"rho_lo", cfg.rho_lo},
      {"rho_hi", cfg.rho_hi},
      {"slack", cfg.slack},
      {"cap", cfg.cap},
      {"gamma0", cfg.gamma0},
  };
}

GeneratorConfig GeneratorConfigFromJson(const nlohmann::json& doc) {
  GeneratorConfig cfg;
  cfg.seed = doc.at("seed").get<std::uint64_t>();
  cfg.num_sources = doc.at("sources").get<Index>();
  cfg.num_destinations = doc.at("destinations").get<Index>();
  cfg.sparsity = doc.at("sparsity").get<double>();
  cfg.mean_degree = doc.at("mean_degree").get<double>();
  cfg.num_families = doc.at("families").get<Index>();
  cfg.breadth = LogNormalFromJson(doc.at("breadth"));
  cfg.value_scale = LogNormalFromJson(doc.at("value_scale"));
  cfg.responsiveness = LogNormalFromJson(doc.at("responsiveness"));
  cfg.noise = LogNormalFromJson(doc.at("noise"));
  cfg.coefficient_scale = LogNormalFromJson(doc.at("coefficient_scale"));
  cfg.c_max = doc.at("c_max").get<double>();
  cfg.rho_lo = doc.at("rho_lo").get<double>();
  cfg.rho_hi = doc.at("rho_hi").get<double>();
  cfg.slack = doc.at("slack").get<double>();
  cfg.cap = doc.at("cap").get<double>();
  cfg.gamma0 = doc.at("gamma0").get<double>();
  return cfg;
}

nlohmann::json GeneratorStatsToJson(const GeneratorStats& stats) {
  return {
      {"nnz", stats.nnz},
      {"achieved_sparsity", stats.achieved_sparsity},
      {"mean_degree", stats.mean_degree},
      {"active_fraction", stats.active_fraction},
      {"mean_capacity_ratio", stats.mean_capacity_ratio},
  };
}

}  // namespace matchlp
