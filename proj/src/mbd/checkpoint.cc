// Copyright 2026 The mbdtg Authors.
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

#include "mbdtg/mbd/checkpoint.h"

#include <cstring>

#include "json.hpp"
#include "mbdtg/checksum.h"
#include "mbdtg/error.h"

namespace mbdtg::mbd {
namespace {

constexpr char kMagic[] = "MBDTGCKPT";
constexpr size_t kMagicSize = sizeof(kMagic) - 1;
constexpr size_t kDigestSize = 64;

static_assert(sizeof(double) == 8, "checkpoints store float64");

template <typename T>
void Put(std::string *out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out->append(bytes, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    T value;
    std::memcpy(&value, Take(sizeof(T)).data(), sizeof(T));
    return value;
  }

  std::string_view Take(size_t n) {
    if (n > bytes_.size() - offset_) {
      throw Error(ErrorCode::kMalformed, "checkpoint truncated");
    }
    std::string_view out = bytes_.substr(offset_, n);
    offset_ += n;
    return out;
  }

  bool done() const { return offset_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  size_t offset_ = 0;
};

}  // namespace

std::string SerializeCheckpoint(const Model &model) {
  const ModelConfig &c = model.config();
  nlohmann::ordered_json header;
  header["config"] = {{"vocab_size", c.vocab_size},         {"embed_dim", c.embed_dim},
                      {"hidden_dim", c.hidden_dim},         {"feature_dim", c.feature_dim},
                      {"max_position", c.max_position},     {"encoder_layers", c.encoder_layers},
                      {"branch_layers", c.branch_layers},   {"dropout", c.dropout},
                      {"init_range", c.init_range},
                      {"seed", c.seed}};
  header["words"] = model.words().words();
  header["keys"] = model.keys().words();
  const std::string header_text = header.dump();

  std::string out(kMagic, kMagicSize);
  Put<uint32_t>(&out, kCheckpointVersion);
  Put<uint64_t>(&out, header_text.size());
  out += header_text;
  const ParameterStore &params = model.params();
  Put<uint64_t>(&out, params.size());
  for (size_t p = 0; p < params.size(); ++p) {
    const Parameter &param = params.at(static_cast<int>(p));
    Put<uint64_t>(&out, param.name.size());
    out += param.name;
    Put<uint64_t>(&out, static_cast<uint64_t>(param.value.rows()));
    Put<uint64_t>(&out, static_cast<uint64_t>(param.value.cols()));
    for (Eigen::Index i = 0; i < param.value.size(); ++i) Put<double>(&out, param.value(i));
  }
  out += Sha256Hex(out);
  return out;
}

std::unique_ptr<Model> ParseCheckpoint(const std::string &bytes) {
  if (bytes.size() < kMagicSize + kDigestSize || bytes.compare(0, kMagicSize, kMagic) != 0) {
    throw Error(ErrorCode::kMalformed, "not a checkpoint");
  }
  const std::string_view body(bytes.data(), bytes.size() - kDigestSize);
  if (Sha256Hex(body) != bytes.substr(bytes.size() - kDigestSize)) {
    throw Error(ErrorCode::kChecksum, "checkpoint checksum mismatch");
  }
  Reader in(body);
  in.Take(kMagicSize);
  const uint32_t version = in.Get<uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersion,
                "unsupported checkpoint version " + std::to_string(version));
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in.Take(in.Get<uint64_t>()));
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kMalformed, std::string("checkpoint header: ") + e.what());
  }
  ModelConfig config;
  try {
    const auto &c = header.at("config");
    config.vocab_size = c.at("vocab_size").get<int>();
    config.embed_dim = c.at("embed_dim").get<int>();
    config.hidden_dim = c.at("hidden_dim").get<int>();
    config.feature_dim = c.at("feature_dim").get<int>();
    config.max_position = c.at("max_position").get<int>();
    config.encoder_layers = c.at("encoder_layers").get<int>();
    config.branch_layers = c.at("branch_layers").get<int>();
    config.dropout = c.at("dropout").get<double>();
    config.init_range = c.at("init_range").get<double>();
    config.seed = c.at("seed").get<uint64_t>();
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kMalformed, std::string("checkpoint config: ") + e.what());
  }
  auto model = std::make_unique<Model>(
      config, Vocabulary(header.at("words").get<std::vector<std::string>>()),
      Vocabulary(header.at("keys").get<std::vector<std::string>>()));
  ParameterStore &params = model->params();
  const uint64_t count = in.Get<uint64_t>();
  if (count != params.size()) throw Error(ErrorCode::kMalformed, "checkpoint tensor count");
  for (uint64_t p = 0; p < count; ++p) {
    const std::string name(in.Take(in.Get<uint64_t>()));
    const int id = params.Find(name);
    if (id < 0) throw Error(ErrorCode::kMalformed, "unknown checkpoint tensor " + name);
    Matrix &value = params.at(id).value;
    const uint64_t rows = in.Get<uint64_t>();
    const uint64_t cols = in.Get<uint64_t>();
    if (rows != static_cast<uint64_t>(value.rows()) || cols != static_cast<uint64_t>(value.cols())) {
      throw Error(ErrorCode::kMalformed, "shape mismatch for checkpoint tensor " + name);
    }
    for (Eigen::Index i = 0; i < value.size(); ++i) value(i) = in.Get<double>();
  }
  if (!in.done()) throw Error(ErrorCode::kMalformed, "trailing bytes in checkpoint");
  return model;
}

void SaveCheckpoint(const Model &model, const std::string &path) {
  WriteFile(path, SerializeCheckpoint(model));
}

std::unique_ptr<Model> LoadCheckpoint(const std::string &path) {
  return ParseCheckpoint(ReadFile(path));
}

}  // namespace mbdtg::mbd
