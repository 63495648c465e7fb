#include "dreamer/dynamics/checkpoint.hpp"

#include <json.hpp>

#include <map>

namespace dreamer::dynamics {

namespace {

constexpr char kMagic[8] = {'D', 'R', 'M', 'C', 'K', 'P', 'T', '1'};

}  // namespace

binary::Bytes encode_checkpoint(const ModelConfig& cfg, const ModelWeights<float>& weights) {
  weights.validate(cfg);
  binary::Bytes data;
  nlohmann::json table = nlohmann::json::array();
  weights.for_each_tensor([&](const std::string& name, const auto& t) {
    using T = std::decay_t<decltype(t)>;
    nlohmann::json shape = T::ColsAtCompileTime == 1 ? nlohmann::json{t.rows()} : nlohmann::json{t.rows(), t.cols()};
    table.push_back({{"name", name}, {"shape", shape}, {"offset", data.size()}});
    for (Eigen::Index i = 0; i < t.size(); ++i) binary::put_f32(data, t.data()[i]);
  });
  const nlohmann::json header = {
      {"format", "dreamer-checkpoint"}, {"version", 1}, {"dtype", "f32le"},
      {"config", model_config_to_json(cfg)}, {"tensors", table}};
  const std::string text = header.dump();

  binary::Bytes out(std::begin(kMagic), std::end(kMagic));
  binary::put_le<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  binary::Reader reader(bytes, "checkpoint");
  const auto magic = reader.take(sizeof(kMagic));
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) throw FormatError("checkpoint: bad magic");
  const auto header_len = reader.get<std::uint64_t>();
  if (header_len > reader.remaining()) throw FormatError("checkpoint: truncated header");
  const auto header_bytes = reader.take(static_cast<std::size_t>(header_len));
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_bytes.begin(), header_bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: malformed header: ") + e.what());
  }
  if (header.value("dtype", "") != "f32le") throw FormatError("checkpoint: unsupported dtype");
  if (!header.contains("config") || !header.contains("tensors") || !header["tensors"].is_array())
    throw FormatError("checkpoint: header lacks config or tensor table");

  Checkpoint ck;
  ck.config = model_config_from_json(header["config"]);
  const std::size_t data_start = reader.position();

  std::map<std::string, nlohmann::json> table;
  for (const auto& entry : header["tensors"]) table[entry.at("name").get<std::string>()] = entry;

  ModelWeights<float>& w = ck.weights;
  w.factor_embeddings.resize(static_cast<std::size_t>(ck.config.vocab.factors()));
  w.blocks.resize(static_cast<std::size_t>(ck.config.layers));
  std::size_t used = 0;
  w.for_each_tensor([&](const std::string& name, auto& t) {
    using T = std::decay_t<decltype(t)>;
    const auto it = table.find(name);
    if (it == table.end()) throw FormatError("checkpoint: missing tensor " + name);
    const auto& shape = it->second.at("shape");
    Eigen::Index rows = 0;
    Eigen::Index cols = 1;
    if constexpr (T::ColsAtCompileTime == 1) {
      if (shape.size() != 1) throw FormatError("checkpoint: tensor " + name + " should be 1-D");
      rows = shape[0].get<Eigen::Index>();
      t.resize(rows);
    } else {
      if (shape.size() != 2) throw FormatError("checkpoint: tensor " + name + " should be 2-D");
      rows = shape[0].get<Eigen::Index>();
      cols = shape[1].get<Eigen::Index>();
      t.resize(rows, cols);
    }
    if (rows < 0 || cols < 0) throw FormatError("checkpoint: negative shape for " + name);
    reader.seek(data_start + it->second.at("offset").get<std::size_t>());
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = reader.get_f32();
    ++used;
  });
  if (used != table.size()) throw FormatError("checkpoint: unexpected extra tensors");
  try {
    w.validate(ck.config);
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg, const ModelWeights<float>& weights) {
  binary::write_file(path, encode_checkpoint(cfg, weights));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(binary::read_file(path)); }

Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  Checkpoint ck = load_checkpoint(path);
  if (model_config_to_json(ck.config) != model_config_to_json(expected))
    throw FormatError("checkpoint config does not match the expected model config");
  return ck;
}

}  // namespace dreamer::dynamics
