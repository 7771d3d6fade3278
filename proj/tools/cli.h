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

#ifndef MATCHLP_TOOLS_CLI_H_
#define MATCHLP_TOOLS_CLI_H_

// Command-line front end: generate, solve, compare, validate.
//
// Exit codes: 0 success, 2 usage error, 3 invalid configuration, 4 the solve
// diverged, 5 invalid instance or I/O failure. Output files are staged next
// to their targets and renamed only after every output has been written, so
// a failing command leaves nothing behind.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "matchlp/optimizer.h"

namespace matchlp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitDiverged = 4;
inline constexpr int kExitInstance = 5;

inline constexpr const char* kArtifactVersion = "1.0.0";

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

std::string Sha256Hex(const std::string& data);
std::string Sha256Hex(const std::vector<std::uint8_t>& data);

// Writes every file or none.
void WriteFilesAtomically(
    const std::vector<std::pair<std::filesystem::path, std::string>>& files);

struct Trace {
  std::vector<Index> iter;
  std::vector<double> g;
  std::vector<double> gamma;
};

// Reads the iter, g and (if present) gamma columns of a trace CSV.
Trace ReadTrace(const std::filesystem::path& path);

// First traced iteration from which |g - g_hat| <= threshold * |g_hat| holds
// for every later row; nullopt if the last row is still outside.
std::optional<Index> IterationsToThreshold(const Trace& trace, double g_hat,
                                           double rel_threshold);

nlohmann::json SolverConfigToJson(const SolverConfig& config);

}  // namespace matchlp::cli

#endif  // MATCHLP_TOOLS_CLI_H_
