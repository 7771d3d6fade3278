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

#include "matchlp/conditioning.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

namespace matchlp {

Index RowScaling::num_unscaled() const {
  return static_cast<Index>(std::count(unscaled.begin(), unscaled.end(), 1));
}

std::vector<double> RowNormsSquared(const SparseBlockMatrix& a) {
  std::vector<double> norms(static_cast<std::size_t>(a.num_rows()), 0.0);
  const Index nnz = a.nnz();
  const Index num_dest = a.num_destinations();
  for (Index k = 0; k < a.num_families(); ++k) {
    auto values = a.family_values(k);
    for (Index e = 0; e < nnz; ++e) {
      const double v = values[static_cast<std::size_t>(e)];
      norms[static_cast<std::size_t>(k * num_dest +
                                     a.row_dest()[static_cast<std::size_t>(e)])] += v * v;
    }
  }
  return norms;
}

std::pair<MatchingInstance, RowScaling> RowNormalize(
    const MatchingInstance& inst) {
  const SparseBlockMatrix& a = inst.a;
  const auto norms = RowNormsSquared(a);
  RowScaling scaling;
  scaling.d.resize(norms.size());
  scaling.unscaled.resize(norms.size());
  for (std::size_t r = 0; r < norms.size(); ++r) {
    if (norms[r] > 0) {
      scaling.d[r] = static_cast<Real>(1.0 / std::sqrt(norms[r]));
      scaling.unscaled[r] = 0;
    } else {
      scaling.d[r] = 1;
      scaling.unscaled[r] = 1;
    }
  }
  const Index nnz = a.nnz();
  const Index num_dest = a.num_destinations();
  std::vector<Real> values(a.all_family_values().begin(),
                           a.all_family_values().end());
  for (Index k = 0; k < a.num_families(); ++k) {
    for (Index e = 0; e < nnz; ++e) {
      values[static_cast<std::size_t>(k * nnz + e)] *=
          scaling.d[static_cast<std::size_t>(
              k * num_dest + a.row_dest()[static_cast<std::size_t>(e)])];
    }
  }
  MatchingInstance out;
  out.a = SparseBlockMatrix(a.num_families(), a.num_sources(), num_dest,
                            std::vector<Index>(a.col_ptr().begin(), a.col_ptr().end()),
                            std::vector<std::int32_t>(a.row_dest().begin(), a.row_dest().end()),
                            std::move(values));
  out.b = inst.b;
  for (std::size_t r = 0; r < out.b.size(); ++r) out.b[r] *= scaling.d[r];
  out.c = inst.c;
  out.projection = inst.projection;
  out.gamma0 = inst.gamma0;
  return {std::move(out), std::move(scaling)};
}

std::vector<Real> UnscaleDuals(const RowScaling& scaling,
                               std::span<const Real> scaled_lam) {
  if (scaled_lam.size() != scaling.d.size()) {
    throw StructuralError("UnscaleDuals: length mismatch");
  }
  std::vector<Real> lam(scaled_lam.size());
  for (std::size_t r = 0; r < lam.size(); ++r) lam[r] = scaling.d[r] * scaled_lam[r];
  return lam;
}

std::vector<Real> ScaleDuals(const RowScaling& scaling,
                             std::span<const Real> lam) {
  if (lam.size() != scaling.d.size()) {
    throw StructuralError("ScaleDuals: length mismatch");
  }
  std::vector<Real> scaled(lam.size());
  for (std::size_t r = 0; r < lam.size(); ++r) scaled[r] = lam[r] / scaling.d[r];
  return scaled;
}

PrimalScaling IdentityPrimalScaling(Index num_sources) {
  return PrimalScaling{std::vector<Real>(static_cast<std::size_t>(num_sources), 1)};
}

PrimalScaling AutoPrimalScaling(const MatchingInstance& inst) {
  PrimalScaling scaling = IdentityPrimalScaling(inst.num_sources());
  std::vector<double> magnitudes;
  for (Index i = 0; i < inst.num_sources(); ++i) {
    const Index begin = inst.a.source_begin(i);
    const Index end = inst.a.source_end(i);
    if (begin == end) continue;
    magnitudes.clear();
    for (Index e = begin; e < end; ++e) {
      magnitudes.push_back(std::abs(static_cast<double>(inst.c[static_cast<std::size_t>(e)])));
    }
    const std::size_t n = magnitudes.size();
    std::sort(magnitudes.begin(), magnitudes.end());
    const double median = n % 2 == 1
                              ? magnitudes[n / 2]
                              : 0.5 * (magnitudes[n / 2 - 1] + magnitudes[n / 2]);
    if (median > 0) {
      scaling.v[static_cast<std::size_t>(i)] =
          static_cast<Real>(std::clamp(1.0 / median, 1e-6, 1e6));
    }
  }
  return scaling;
}

MatchingInstance PrimalScale(const MatchingInstance& inst,
                             const PrimalScaling& scaling) {
  if (static_cast<Index>(scaling.v.size()) != inst.num_sources()) {
    throw StructuralError("primal scaling needs one factor per source block");
  }
  for (Real v : scaling.v) {
    if (!(v > 0) || !std::isfinite(v)) {
      throw ConfigError("primal scale factors must be positive and finite");
    }
  }
  const SparseBlockMatrix& a = inst.a;
  const Index nnz = a.nnz();
  std::vector<Real> values(a.all_family_values().begin(),
                           a.all_family_values().end());
  MatchingInstance out;
  out.c = inst.c;
  out.b = inst.b;
  out.gamma0 = inst.gamma0;
  out.projection = inst.projection;
  for (Index i = 0; i < a.num_sources(); ++i) {
    const Real v = scaling.v[static_cast<std::size_t>(i)];
    for (Index e = a.source_begin(i); e < a.source_end(i); ++e) {
      out.c[static_cast<std::size_t>(e)] /= v;
      for (Index k = 0; k < a.num_families(); ++k) {
        values[static_cast<std::size_t>(k * nnz + e)] /= v;
      }
    }
    BlockProjection& block = out.projection.blocks[static_cast<std::size_t>(i)];
    switch (block.kind) {
      case ProjectionKind::kSimplex:
        block.param0 *= v;
        break;
      case ProjectionKind::kBox:
        block.param0 *= v;
        block.param1 *= v;
        break;
      default:
        break;
    }
  }
  out.a = SparseBlockMatrix(a.num_families(), a.num_sources(),
                            a.num_destinations(),
                            std::vector<Index>(a.col_ptr().begin(), a.col_ptr().end()),
                            std::vector<std::int32_t>(a.row_dest().begin(), a.row_dest().end()),
                            std::move(values));
  return out;
}

std::vector<Real> UnscalePrimal(const SparseBlockMatrix& a,
                                const PrimalScaling& scaling,
                                std::span<const Real> z) {
  if (static_cast<Index>(z.size()) != a.nnz() ||
      static_cast<Index>(scaling.v.size()) != a.num_sources()) {
    throw StructuralError("UnscalePrimal: length mismatch");
  }
  std::vector<Real> x(z.begin(), z.end());
  for (Index i = 0; i < a.num_sources(); ++i) {
    for (Index e = a.source_begin(i); e < a.source_end(i); ++e) {
      x[static_cast<std::size_t>(e)] /= scaling.v[static_cast<std::size_t>(i)];
    }
  }
  return x;
}

double SpectralNormSquared(const SparseBlockMatrix& a) {
  const Index m = a.num_families();
  const Index num_dest = a.num_destinations();
  const Index nnz = a.nnz();
  if (m == 0 || nnz == 0) return 0.0;
  // gram[j][k][l] = sum over edges into j of a_k(e) a_l(e)
  std::vector<double> gram(static_cast<std::size_t>(num_dest * m * m), 0.0);
  const auto values = a.all_family_values();
  for (Index e = 0; e < nnz; ++e) {
    const Index j = a.row_dest()[static_cast<std::size_t>(e)];
    double* g = gram.data() + j * m * m;
    for (Index k = 0; k < m; ++k) {
      const double ak = values[static_cast<std::size_t>(k * nnz + e)];
      for (Index l = 0; l < m; ++l) {
        g[k * m + l] += ak * values[static_cast<std::size_t>(l * nnz + e)];
      }
    }
  }
  double best = 0.0;
  for (Index j = 0; j < num_dest; ++j) {
    if (m == 1) {
      best = std::max(best, gram[static_cast<std::size_t>(j)]);
      continue;
    }
    Eigen::Map<const Eigen::MatrixXd> block(gram.data() + j * m * m, m, m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block,
                                                          Eigen::EigenvaluesOnly);
    best = std::max(best, solver.eigenvalues().maxCoeff());
  }
  return best;
}

double GershgorinBound(Index m, double eta) {
  if (m < 1) throw ConfigError("GershgorinBound: m must be >= 1");
  if (!(eta >= 0) || !(eta < 1)) {
    throw ConfigError("GershgorinBound: eta must lie in [0, 1)");
  }
  const double spread = static_cast<double>(m - 1) * eta;
  if (spread >= 1) {
    throw ConfigError("GershgorinBound: (m-1)*eta >= 1, bound is vacuous");
  }
  return (1 + spread) / (1 - spread);
}

ConditionReport EmpiricalConditionCheck(const BlockSampler& sampler, Index m,
                                        Index num_destinations,
                                        Index num_sources, Index trials,
                                        std::uint64_t seed, Index max_rows) {
  const Index rows = m * num_destinations;
  if (m < 1 || num_destinations < 1 || num_sources < 1) {
    throw ConfigError("EmpiricalConditionCheck: sizes must be positive");
  }
  if (rows > max_rows) {
    throw StructuralError("EmpiricalConditionCheck: " + std::to_string(rows) +
                          " rows exceed the dense limit of " +
                          std::to_string(max_rows));
  }
  if (trials < 4) throw ConfigError("EmpiricalConditionCheck: need >= 4 trials");
  std::mt19937_64 rng(seed);
  const Index first_half = trials / 2;
  const Index second_half = trials - first_half;

  // Per-trial Gram matrices of the sampled A, split into two halves.
  Eigen::MatrixXd mean1 = Eigen::MatrixXd::Zero(rows, rows);
  Eigen::MatrixXd mean2 = Eigen::MatrixXd::Zero(rows, rows);
  Eigen::VectorXd diag_sq1 = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd diag_sq2 = Eigen::VectorXd::Zero(rows);
  Eigen::MatrixXd gram(rows, rows);
  for (Index t = 0; t < trials; ++t) {
    gram.setZero();
    for (Index i = 0; i < num_sources; ++i) {
      const auto block = sampler(rng, m, num_destinations);
      if (static_cast<Index>(block.size()) != rows) {
        throw StructuralError("sampler returned a block of the wrong size");
      }
      for (Index j = 0; j < num_destinations; ++j) {
        for (Index k = 0; k < m; ++k) {
          for (Index l = 0; l < m; ++l) {
            gram(k * num_destinations + j, l * num_destinations + j) +=
                block[static_cast<std::size_t>(j * m + k)] *
                block[static_cast<std::size_t>(j * m + l)];
          }
        }
      }
    }
    if (t < first_half) {
      mean1 += gram;
      diag_sq1 += gram.diagonal().cwiseAbs2();
    } else {
      mean2 += gram;
      diag_sq2 += gram.diagonal().cwiseAbs2();
    }
  }
  mean1 /= static_cast<double>(first_half);
  mean2 /= static_cast<double>(second_half);
  diag_sq1 /= static_cast<double>(first_half);
  diag_sq2 /= static_cast<double>(second_half);

  ConditionReport report;
  report.m = m;
  report.num_destinations = num_destinations;
  report.num_sources = num_sources;
  report.trials = trials;

  Eigen::VectorXd d_exp(rows);
  for (Index r = 0; r < rows; ++r) {
    d_exp(r) = mean1(r, r) > 0 ? 1.0 / std::sqrt(mean1(r, r)) : 1.0;
  }
  const Eigen::MatrixXd normalized = d_exp.asDiagonal() * mean2 * d_exp.asDiagonal();
  report.normalized_diag.resize(static_cast<std::size_t>(rows));
  report.diag_sigma.resize(static_cast<std::size_t>(rows));
  for (Index r = 0; r < rows; ++r) {
    const double ratio = normalized(r, r);
    const double var1 = std::max(0.0, diag_sq1(r) - mean1(r, r) * mean1(r, r));
    const double var2 = std::max(0.0, diag_sq2(r) - mean2(r, r) * mean2(r, r));
    // Delta-method standard error of mean2/mean1.
    const double rel1 = mean1(r, r) > 0 ? var1 / first_half / (mean1(r, r) * mean1(r, r)) : 0;
    const double rel2 = mean2(r, r) > 0 ? var2 / second_half / (mean2(r, r) * mean2(r, r)) : 0;
    const double sigma = ratio * std::sqrt(rel1 + rel2);
    report.normalized_diag[static_cast<std::size_t>(r)] = ratio;
    report.diag_sigma[static_cast<std::size_t>(r)] = sigma;
    const double z = sigma > 0 ? std::abs(ratio - 1.0) / sigma
                               : (std::abs(ratio - 1.0) > 1e-12 ? std::numeric_limits<double>::infinity() : 0.0);
    report.max_diag_z = std::max(report.max_diag_z, z);
  }
  for (Index r = 0; r < rows; ++r) {
    for (Index s = 0; s < rows; ++s) {
      if (r == s) continue;
      const double denom = std::sqrt(mean2(r, r) * mean2(s, s));
      if (denom > 0) report.eta = std::max(report.eta, std::abs(mean2(r, s)) / denom);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(normalized,
                                                        Eigen::EigenvaluesOnly);
  const double lo = solver.eigenvalues().minCoeff();
  const double hi = solver.eigenvalues().maxCoeff();
  report.kappa = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
  report.bound_applicable = static_cast<double>(m - 1) * report.eta < 1;
  report.bound = report.bound_applicable ? GershgorinBound(m, report.eta)
                                         : std::numeric_limits<double>::infinity();
  return report;
}

}  // namespace matchlp
