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

#ifndef MATCHLP_INSTANCE_IO_H_
#define MATCHLP_INSTANCE_IO_H_

// "MLPI v1" instance container. All integers and floats are little-endian;
// floats are always stored as IEEE-754 binary64.
//
//   offset  field
//   0       magic "MLPI"
//   4       u32 version (= 1)
//   8       u64 m, u64 I, u64 J, u64 nnz
//   40      f64 gamma0
//   48      u64 col_ptr[I + 1]
//           u32 row_dest[nnz]
//           f64 family_values[m][nnz]
//           f64 c[nnz]
//           f64 b[m * J]
//           I records of { u8 kind, f64 param0, f64 param1 }
//
// The JSON sidecar variant carries the same fields under the same names.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "matchlp/instance.h"
#include "json.hpp"

namespace matchlp {

inline constexpr std::uint32_t kMlpiVersion = 1;

std::vector<std::uint8_t> SerializeInstance(const MatchingInstance& inst);

// Throws FormatError for bad magic, version, truncation, trailing bytes, or a
// reserved projection kind; StructuralError for layout violations.
MatchingInstance ParseInstance(const std::vector<std::uint8_t>& bytes);

nlohmann::json InstanceToJson(const MatchingInstance& inst);
MatchingInstance InstanceFromJson(const nlohmann::json& doc);

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    const std::vector<std::uint8_t>& bytes);

// Binary when the file starts with the MLPI magic, JSON otherwise.
MatchingInstance ReadInstanceFile(const std::filesystem::path& path);
// ".json" extension selects the sidecar variant.
void WriteInstanceFile(const std::filesystem::path& path,
                       const MatchingInstance& inst);

// Dual vectors as text, one value per line, 17 significant digits.
std::vector<Real> ReadDualFile(const std::filesystem::path& path);
void WriteDualFile(const std::filesystem::path& path,
                   const std::vector<Real>& lam);

}  // namespace matchlp

#endif  // MATCHLP_INSTANCE_IO_H_
