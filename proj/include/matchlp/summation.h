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

#ifndef MATCHLP_SUMMATION_H_
#define MATCHLP_SUMMATION_H_

#include <cmath>
#include <cstdint>
#include <span>

namespace matchlp {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void Add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }
  double Value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// Fixed-point quantization used for reductions whose result must not depend
// on how the terms are partitioned. Every term is rounded to an integer
// multiple of a power-of-two unit chosen from an a-priori bound B on the sum
// of |terms|, with two bits of headroom, so partial sums stay below 2^53 units
// and any double addition of partials is exact.
class FixedPointScale {
 public:
  FixedPointScale() = default;
  explicit FixedPointScale(double abs_bound) {
    if (abs_bound > 0 && std::isfinite(abs_bound)) {
      int exponent = 0;
      std::frexp(abs_bound, &exponent);  // abs_bound <= 2^exponent
      unit_ = std::ldexp(1.0, exponent - 50);
      inv_unit_ = std::ldexp(1.0, 50 - exponent);
    }
  }

  std::int64_t Quantize(double term) const {
    return static_cast<std::int64_t>(std::nearbyint(term * inv_unit_));
  }
  double ToDouble(std::int64_t units) const {
    return static_cast<double>(units) * unit_;
  }
  double unit() const { return unit_; }

 private:
  double unit_ = 1.0;
  double inv_unit_ = 1.0;
};

}  // namespace matchlp

#endif  // MATCHLP_SUMMATION_H_
