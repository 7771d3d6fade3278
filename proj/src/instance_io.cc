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

#include "matchlp/instance_io.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace matchlp {

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
T ToLittle(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    std::reverse(bytes, bytes + sizeof(T));
    std::memcpy(&value, bytes, sizeof(T));
  }
  return value;
}

class Writer {
 public:
  template <typename T>
  void Put(T value) {
    value = ToLittle(value);
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void PutMagic() { bytes_.insert(bytes_.end(), {'M', 'L', 'P', 'I'}); }
  std::vector<std::uint8_t> Take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T Get(const char* field) {
    if (bytes_.size() - pos_ < sizeof(T)) {
      throw FormatError(std::string("MLPI: truncated while reading ") + field);
    }
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return ToLittle(value);
  }
  // Guards allocations against corrupted counts.
  void Require(std::uint64_t count, std::size_t width, const char* field) {
    if (width != 0 && count > (bytes_.size() - pos_) / width) {
      throw FormatError(std::string("MLPI: truncated ") + field + " array");
    }
  }
  bool AtEnd() const { return pos_ == bytes_.size(); }
  std::size_t position() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

Index CheckedCount(std::uint64_t value, const char* field) {
  if (value > static_cast<std::uint64_t>(std::numeric_limits<Index>::max() / 16)) {
    throw FormatError(std::string("MLPI: ") + field + " out of range");
  }
  return static_cast<Index>(value);
}

}  // namespace

std::vector<std::uint8_t> SerializeInstance(const MatchingInstance& inst) {
  const SparseBlockMatrix& a = inst.a;
  Writer w;
  w.PutMagic();
  w.Put<std::uint32_t>(kMlpiVersion);
  w.Put<std::uint64_t>(static_cast<std::uint64_t>(a.num_families()));
  w.Put<std::uint64_t>(static_cast<std::uint64_t>(a.num_sources()));
  w.Put<std::uint64_t>(static_cast<std::uint64_t>(a.num_destinations()));
  w.Put<std::uint64_t>(static_cast<std::uint64_t>(a.nnz()));
  w.Put<double>(inst.gamma0);
  for (Index p : a.col_ptr()) w.Put<std::uint64_t>(static_cast<std::uint64_t>(p));
  for (std::int32_t j : a.row_dest()) w.Put<std::uint32_t>(static_cast<std::uint32_t>(j));
  for (Real v : a.all_family_values()) w.Put<double>(static_cast<double>(v));
  for (Real v : inst.c) w.Put<double>(static_cast<double>(v));
  for (Real v : inst.b) w.Put<double>(static_cast<double>(v));
  for (const BlockProjection& block : inst.projection.blocks) {
    w.Put<std::uint8_t>(static_cast<std::uint8_t>(block.kind));
    w.Put<double>(block.param0);
    w.Put<double>(block.param1);
  }
  return w.Take();
}

MatchingInstance ParseInstance(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "MLPI", 4) != 0) {
    throw FormatError("MLPI: bad magic");
  }
  Reader r(bytes);
  for (int k = 0; k < 4; ++k) r.Get<std::uint8_t>("magic");
  const auto version = r.Get<std::uint32_t>("version");
  if (version != kMlpiVersion) {
    throw FormatError("MLPI: unsupported version " + std::to_string(version));
  }
  const Index m = CheckedCount(r.Get<std::uint64_t>("m"), "m");
  const Index num_sources = CheckedCount(r.Get<std::uint64_t>("I"), "I");
  const Index num_dest = CheckedCount(r.Get<std::uint64_t>("J"), "J");
  const Index nnz = CheckedCount(r.Get<std::uint64_t>("nnz"), "nnz");
  MatchingInstance inst;
  inst.gamma0 = r.Get<double>("gamma0");

  r.Require(static_cast<std::uint64_t>(num_sources) + 1, 8, "col_ptr");
  std::vector<Index> col_ptr(static_cast<std::size_t>(num_sources) + 1);
  for (Index& p : col_ptr) p = CheckedCount(r.Get<std::uint64_t>("col_ptr"), "col_ptr");
  r.Require(static_cast<std::uint64_t>(nnz), 4, "row_dest");
  std::vector<std::int32_t> row_dest(static_cast<std::size_t>(nnz));
  for (std::int32_t& j : row_dest) {
    const auto raw = r.Get<std::uint32_t>("row_dest");
    if (raw > static_cast<std::uint32_t>(std::numeric_limits<std::int32_t>::max())) {
      throw FormatError("MLPI: row_dest out of range");
    }
    j = static_cast<std::int32_t>(raw);
  }
  r.Require(static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(nnz), 8,
            "family_values");
  std::vector<Real> values(static_cast<std::size_t>(m * nnz));
  for (Real& v : values) v = static_cast<Real>(r.Get<double>("family_values"));
  r.Require(static_cast<std::uint64_t>(nnz), 8, "c");
  inst.c.resize(static_cast<std::size_t>(nnz));
  for (Real& v : inst.c) v = static_cast<Real>(r.Get<double>("c"));
  r.Require(static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(num_dest),
            8, "b");
  inst.b.resize(static_cast<std::size_t>(m * num_dest));
  for (Real& v : inst.b) v = static_cast<Real>(r.Get<double>("b"));
  r.Require(static_cast<std::uint64_t>(num_sources), 17, "projection");
  inst.projection.blocks.resize(static_cast<std::size_t>(num_sources));
  for (BlockProjection& block : inst.projection.blocks) {
    const auto tag = r.Get<std::uint8_t>("projection kind");
    if (tag > static_cast<std::uint8_t>(ProjectionKind::kBoxCut)) {
      throw FormatError("MLPI: unknown projection kind tag " + std::to_string(tag));
    }
    block.kind = static_cast<ProjectionKind>(tag);
    block.param0 = r.Get<double>("projection param0");
    block.param1 = r.Get<double>("projection param1");
  }
  if (!r.AtEnd()) {
    throw FormatError("MLPI: " + std::to_string(bytes.size() - r.position()) +
                      " trailing bytes");
  }
  inst.a = SparseBlockMatrix(m, num_sources, num_dest, std::move(col_ptr),
                             std::move(row_dest), std::move(values));
  ValidateInstance(inst);
  return inst;
}

nlohmann::json InstanceToJson(const MatchingInstance& inst) {
  const SparseBlockMatrix& a = inst.a;
  nlohmann::json doc;
  doc["format"] = "MLPI";
  doc["version"] = kMlpiVersion;
  doc["m"] = a.num_families();
  doc["I"] = a.num_sources();
  doc["J"] = a.num_destinations();
  doc["nnz"] = a.nnz();
  doc["gamma0"] = inst.gamma0;
  doc["col_ptr"] = std::vector<Index>(a.col_ptr().begin(), a.col_ptr().end());
  doc["row_dest"] =
      std::vector<std::int32_t>(a.row_dest().begin(), a.row_dest().end());
  auto families = nlohmann::json::array();
  for (Index k = 0; k < a.num_families(); ++k) {
    auto fk = a.family_values(k);
    families.push_back(std::vector<double>(fk.begin(), fk.end()));
  }
  doc["family_values"] = std::move(families);
  doc["c"] = std::vector<double>(inst.c.begin(), inst.c.end());
  doc["b"] = std::vector<double>(inst.b.begin(), inst.b.end());
  auto blocks = nlohmann::json::array();
  for (const BlockProjection& block : inst.projection.blocks) {
    blocks.push_back({{"kind", ProjectionKindName(block.kind)},
                      {"param0", block.param0},
                      {"param1", block.param1}});
  }
  doc["projection"] = std::move(blocks);
  return doc;
}

MatchingInstance InstanceFromJson(const nlohmann::json& doc) {
  try {
    if (doc.value("format", std::string()) != "MLPI") {
      throw FormatError("JSON instance: missing format tag \"MLPI\"");
    }
    if (doc.at("version").get<std::uint32_t>() != kMlpiVersion) {
      throw FormatError("JSON instance: unsupported version");
    }
    const Index m = doc.at("m").get<Index>();
    const Index num_sources = doc.at("I").get<Index>();
    const Index num_dest = doc.at("J").get<Index>();
    const Index nnz = doc.at("nnz").get<Index>();
    std::vector<Real> values;
    const auto& families = doc.at("family_values");
    if (static_cast<Index>(families.size()) != m) {
      throw FormatError("JSON instance: family_values must have m arrays");
    }
    for (const auto& fk : families) {
      auto row = fk.get<std::vector<double>>();
      if (static_cast<Index>(row.size()) != nnz) {
        throw FormatError("JSON instance: family array length != nnz");
      }
      values.insert(values.end(), row.begin(), row.end());
    }
    MatchingInstance inst;
    inst.gamma0 = doc.at("gamma0").get<double>();
    inst.a = SparseBlockMatrix(m, num_sources, num_dest,
                               doc.at("col_ptr").get<std::vector<Index>>(),
                               doc.at("row_dest").get<std::vector<std::int32_t>>(),
                               std::move(values));
    auto c = doc.at("c").get<std::vector<double>>();
    auto b = doc.at("b").get<std::vector<double>>();
    inst.c.assign(c.begin(), c.end());
    inst.b.assign(b.begin(), b.end());
    for (const auto& entry : doc.at("projection")) {
      const std::string kind = entry.at("kind").get<std::string>();
      BlockProjection block;
      if (kind == "none") {
        block.kind = ProjectionKind::kNone;
      } else if (kind == "simplex") {
        block.kind = ProjectionKind::kSimplex;
      } else if (kind == "box") {
        block.kind = ProjectionKind::kBox;
      } else if (kind == "box_cut") {
        block.kind = ProjectionKind::kBoxCut;
      } else {
        throw FormatError("JSON instance: unknown projection kind '" + kind + "'");
      }
      block.param0 = entry.value("param0", 0.0);
      block.param1 = entry.value("param1", 0.0);
      inst.projection.blocks.push_back(block);
    }
    ValidateInstance(inst);
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("JSON instance: ") + e.what());
  }
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw FormatError("cannot open " + path.string());
  const std::streamoff size = in.tellg();
  if (size < 0) throw FormatError("cannot size " + path.string());
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw FormatError("read failed for " + path.string());
  return bytes;
}

void WriteFileBytes(const std::filesystem::path& path,
                    const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

MatchingInstance ReadInstanceFile(const std::filesystem::path& path) {
  auto bytes = ReadFileBytes(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "MLPI", 4) == 0) {
    return ParseInstance(bytes);
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + " is neither MLPI binary nor JSON: " +
                      e.what());
  }
  return InstanceFromJson(doc);
}

void WriteInstanceFile(const std::filesystem::path& path,
                       const MatchingInstance& inst) {
  if (path.extension() == ".json") {
    const std::string text = InstanceToJson(inst).dump(1);
    WriteFileBytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
  } else {
    WriteFileBytes(path, SerializeInstance(inst));
  }
}

std::vector<Real> ReadDualFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<Real> lam;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t used = 0;
    double value = 0;
    try {
      value = std::stod(line, &used);
    } catch (const std::exception&) {
      throw FormatError("dual file " + path.string() + ": bad line '" + line + "'");
    }
    lam.push_back(static_cast<Real>(value));
  }
  return lam;
}

void WriteDualFile(const std::filesystem::path& path,
                   const std::vector<Real>& lam) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << std::setprecision(17);
  for (Real v : lam) out << static_cast<double>(v) << '\n';
}

}  // namespace matchlp
