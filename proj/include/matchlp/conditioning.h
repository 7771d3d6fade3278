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

#ifndef MATCHLP_CONDITIONING_H_
#define MATCHLP_CONDITIONING_H_

// Pre-solve transforms: Jacobi row normalization (A' = D A, b' = D b with
// D = diag(1/||A_r||)), per-block primal scaling (z = v_i x on block i), and
// the Gershgorin certificate for the expected normalized Gram matrix.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "matchlp/instance.h"
#include "matchlp/types.h"

namespace matchlp {

struct RowScaling {
  std::vector<Real> d;                // one positive multiplier per row
  std::vector<std::uint8_t> unscaled; // 1 where the row had zero norm

  Index num_unscaled() const;
};

// Squared l2 norm of every row of A, accumulated in ascending source order.
std::vector<double> RowNormsSquared(const SparseBlockMatrix& a);

std::pair<MatchingInstance, RowScaling> RowNormalize(const MatchingInstance& inst);

// Maps duals of the row-normalized problem back to the original rows
// (lam = D lam') and vice versa.
std::vector<Real> UnscaleDuals(const RowScaling& scaling,
                               std::span<const Real> scaled_lam);
std::vector<Real> ScaleDuals(const RowScaling& scaling,
                             std::span<const Real> lam);

struct PrimalScaling {
  std::vector<Real> v;  // one positive factor per source block
};

PrimalScaling IdentityPrimalScaling(Index num_sources);

// v_i = 1 / median |c_e| over block i, clamped to [1e-6, 1e6]. Blocks with no
// edges or an all-zero median keep v_i = 1.
PrimalScaling AutoPrimalScaling(const MatchingInstance& inst);

// Instance over z = D_v x: c' = c / v, A' = A / v, simplex cap -> v cap,
// box [lo, hi] -> [v lo, v hi]. Throws ConfigError for nonpositive factors.
MatchingInstance PrimalScale(const MatchingInstance& inst,
                             const PrimalScaling& scaling);

// x = D_v^{-1} z.
std::vector<Real> UnscalePrimal(const SparseBlockMatrix& a,
                                const PrimalScaling& scaling,
                                std::span<const Real> z);

// ||A||_2^2, exactly. Rows of different destinations have disjoint support,
// so A A^T is block diagonal with one m x m Gram block per destination.
double SpectralNormSquared(const SparseBlockMatrix& a);

// (1 + (m-1) eta) / (1 - (m-1) eta). Throws ConfigError when (m-1) eta >= 1
// or eta is outside [0, 1).
double GershgorinBound(Index m, double eta);

// Draws one source block: returns J*m coefficients laid out [j][k]. A zero
// coefficient for every family marks the pair ineligible.
using BlockSampler =
    std::function<std::vector<double>(std::mt19937_64& rng, Index m, Index J)>;

struct ConditionReport {
  Index m = 0;
  Index num_destinations = 0;
  Index num_sources = 0;
  Index trials = 0;
  std::vector<double> normalized_diag;  // diag(D_exp E[A A^T] D_exp)
  std::vector<double> diag_sigma;       // Monte-Carlo standard error
  double max_diag_z = 0;                // max |diag - 1| / sigma
  double eta = 0;                       // measured cross-row correlation
  double kappa = 0;                     // condition number of the normalized Gram
  double bound = 0;                     // GershgorinBound(m, eta); inf if vacuous
  bool bound_applicable = false;
};

// Samples A with i.i.d. blocks. D_exp comes from the first half of the trials
// and the Gram expectation from the second half, so the diagonal check is a
// genuine out-of-sample test. Throws StructuralError when the dense Gram for
// m*J rows would exceed max_rows.
ConditionReport EmpiricalConditionCheck(const BlockSampler& sampler, Index m,
                                        Index num_destinations,
                                        Index num_sources, Index trials,
                                        std::uint64_t seed,
                                        Index max_rows = 2000);

}  // namespace matchlp

#endif  // MATCHLP_CONDITIONING_H_
