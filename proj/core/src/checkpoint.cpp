#include "seasoncast/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "seasoncast/config_io.hpp"
#include "seasoncast/error.hpp"

namespace seasoncast {
namespace {

constexpr char kMagic[8] = {'S', 'C', 'C', 'K', 'P', 'T', '0', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <typename T>
  void put(T value) {
    out_.write(reinterpret_cast<const char*>(&value), sizeof value);
  }
  void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}
  template <typename T>
  T get() {
    T value{};
    bytes(&value, sizeof value);
    return value;
  }
  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw Error(ErrorCode::ParseError, "truncated checkpoint " + path_);
    }
  }
  // Guards allocations against corrupt length fields.
  std::uint64_t length(std::uint64_t limit, const char* what) {
    const auto n = get<std::uint64_t>();
    if (n > limit) {
      throw Error(ErrorCode::ParseError, std::string("implausible ") + what + " length in " + path_);
    }
    return n;
  }

 private:
  std::istream& in_;
  std::string path_;
};

}  // namespace

Checkpoint make_checkpoint(const LrlSnnModel& model, std::uint64_t seed) {
  Checkpoint c;
  c.kind = CheckpointKind::LrlSnn;
  c.seed = seed;
  c.config = model.config();
  c.config_hash = config_hash(c.config);
  for (auto t : model.parameters()) {
    c.tensors.emplace_back(t.begin(), t.end());
  }
  return c;
}

Checkpoint make_baseline_checkpoint(BaselineKind kind, const ModelConfig& config, std::uint64_t seed) {
  Checkpoint c;
  c.kind = kind == BaselineKind::Persistence ? CheckpointKind::Persistence : CheckpointKind::SeasonalNaive;
  c.seed = seed;
  c.config = config;
  c.config_hash = config_hash(config);
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  Writer w(out);
  const std::string json = to_json(checkpoint.config);
  w.bytes(kMagic, sizeof kMagic);
  w.put(Checkpoint::kVersion);
  w.put(checkpoint.config_hash);
  w.put(checkpoint.seed);
  w.put(static_cast<std::uint32_t>(checkpoint.kind));
  w.put(static_cast<std::uint64_t>(json.size()));
  w.bytes(json.data(), json.size());
  w.put(static_cast<std::uint64_t>(checkpoint.tensors.size()));
  for (const auto& t : checkpoint.tensors) {
    w.put(static_cast<std::uint64_t>(t.size()));
    w.bytes(t.data(), t.size() * sizeof(double));
  }
  out.flush();
  if (!out) {
    throw Error(ErrorCode::IoError, "failed writing " + path.string());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  Reader r(in, path.string());
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorCode::ParseError, "not a checkpoint: " + path.string());
  }
  const auto version = r.get<std::uint32_t>();
  if (version != Checkpoint::kVersion) {
    throw Error(ErrorCode::ParseError, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  c.config_hash = r.get<std::uint64_t>();
  c.seed = r.get<std::uint64_t>();
  const auto kind = r.get<std::uint32_t>();
  if (kind > 2) {
    throw Error(ErrorCode::ParseError, "unknown checkpoint kind " + std::to_string(kind));
  }
  c.kind = static_cast<CheckpointKind>(kind);
  std::string json(r.length(std::uint64_t{1} << 24, "config"), '\0');
  r.bytes(json.data(), json.size());
  c.config = model_config_from_json(json);
  if (config_hash(c.config) != c.config_hash) {
    throw Error(ErrorCode::ConfigMismatch, "config hash mismatch in " + path.string());
  }
  const auto count = r.length(std::uint64_t{1} << 20, "tensor count");
  c.tensors.resize(count);
  for (auto& t : c.tensors) {
    t.resize(r.length(std::uint64_t{1} << 32, "tensor"));
    r.bytes(t.data(), t.size() * sizeof(double));
  }
  return c;
}

LrlSnnModel model_from_checkpoint(const Checkpoint& checkpoint, const ModelConfig* expected) {
  if (checkpoint.kind != CheckpointKind::LrlSnn) {
    throw Error(ErrorCode::ConfigMismatch, "checkpoint holds a baseline, not a trained model");
  }
  if (expected != nullptr && config_hash(*expected) != checkpoint.config_hash) {
    throw Error(ErrorCode::ConfigMismatch,
                "checkpoint config " + hex64(checkpoint.config_hash) + " differs from " + hex64(config_hash(*expected)));
  }
  LrlSnnModel model(checkpoint.config, 0);
  auto params = model.parameters();
  if (params.size() != checkpoint.tensors.size()) {
    throw Error(ErrorCode::ConfigMismatch, "checkpoint has " + std::to_string(checkpoint.tensors.size()) +
                                               " tensors, model expects " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != checkpoint.tensors[i].size()) {
      throw Error(ErrorCode::ConfigMismatch, "tensor " + std::to_string(i) + " has the wrong size");
    }
    std::copy(checkpoint.tensors[i].begin(), checkpoint.tensors[i].end(), params[i].begin());
  }
  return model;
}

BaselineKind baseline_of(CheckpointKind kind) {
  switch (kind) {
    case CheckpointKind::Persistence:
      return BaselineKind::Persistence;
    case CheckpointKind::SeasonalNaive:
      return BaselineKind::SeasonalNaive;
    case CheckpointKind::LrlSnn:
      break;
  }
  throw Error(ErrorCode::ConfigMismatch, "checkpoint holds a trained model, not a baseline");
}

}  // namespace seasoncast
