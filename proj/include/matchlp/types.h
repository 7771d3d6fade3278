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

#ifndef MATCHLP_TYPES_H_
#define MATCHLP_TYPES_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace matchlp {

#if defined(MATCHLP_REAL_FLOAT)
using Real = float;
#else
using Real = double;
#endif

using Index = std::int64_t;

// Thrown when array lengths or layouts disagree (e.g. x not edge-aligned to A).
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown for invalid parameters: nonpositive gamma, lo > hi, bad schedules.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when an instance file is malformed or uses an unsupported feature.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when iterates become non-finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dual iterate, family-major: entry k*J + j belongs to family k, destination j.
struct DualVector {
  std::vector<Real> values;

  DualVector() = default;
  explicit DualVector(std::size_t n, Real fill = Real(0)) : values(n, fill) {}
  explicit DualVector(std::vector<Real> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  std::span<const Real> view() const { return values; }
  std::span<Real> view() { return values; }
};

// Edge-aligned primal vector: one value per stored edge of A, in A's order.
struct PrimalBlocks {
  std::vector<Real> values;

  PrimalBlocks() = default;
  explicit PrimalBlocks(std::size_t n, Real fill = Real(0)) : values(n, fill) {}
  explicit PrimalBlocks(std::vector<Real> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  std::span<const Real> view() const { return values; }
  std::span<Real> view() { return values; }
};

}  // namespace matchlp

#endif  // MATCHLP_TYPES_H_
