// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include "mlstm/checkpoint.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <nlohmann/json.hpp>

#include "mlstm/error.hpp"

namespace mlstm {

namespace {

using nlohmann::json;

constexpr std::array<std::uint8_t, 8> kMagic{'M', 'L', 'S', 'T', 'M', 'C', 'K', 'P'};
constexpr std::size_t kPrefixSize = 8 + 4 + 8;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int k = 0; k < width; ++k) v |= static_cast<std::uint64_t>(bytes[offset + k]) << (8 * k);
  return v;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
    crc = crc32(crc, bytes.data() + offset, chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

json model_to_json(const ModelConfig& c) {
  return json{{"vocab_size", c.vocab_size},
              {"embed_dim", c.embed_dim},
              {"hidden_dim", c.hidden_dim},
              {"num_layers", c.num_layers},
              {"cells", c.cells},
              {"strategy", std::string(to_string(c.strategy))},
              {"o_thr", c.output_threshold},
              {"dropout_rate", c.dropout_rate},
              {"init_scale", c.init_scale},
              {"cell_init", std::string(to_string(c.cell_init))},
              {"jitter_scale", c.jitter_scale},
              {"seed", c.seed}};
}

ModelConfig model_from_json(const json& j) {
  ModelConfig c;
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.num_layers = j.at("num_layers").get<std::size_t>();
  c.cells = j.at("cells").get<std::size_t>();
  c.strategy = parse_selection_kind(j.at("strategy").get<std::string>());
  c.output_threshold = j.at("o_thr").get<double>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.init_scale = j.at("init_scale").get<double>();
  c.cell_init = parse_cell_init(j.at("cell_init").get<std::string>());
  c.jitter_scale = j.at("jitter_scale").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json train_to_json(const TrainConfig& c) {
  return json{{"initial_lr", c.initial_lr}, {"lr_decay", c.lr_decay},
              {"epochs_to_wait", c.epochs_to_wait}, {"min_reduction", c.min_reduction},
              {"min_lr", c.min_lr}, {"clip_norm", c.clip_norm},
              {"batch_size", c.batch_size}, {"unroll", c.unroll},
              {"max_epochs", c.max_epochs}, {"seed", c.seed}};
}

TrainConfig train_from_json(const json& j) {
  TrainConfig c;
  c.initial_lr = j.at("initial_lr").get<double>();
  c.lr_decay = j.at("lr_decay").get<double>();
  c.epochs_to_wait = j.at("epochs_to_wait").get<std::size_t>();
  c.min_reduction = j.at("min_reduction").get<double>();
  c.min_lr = j.at("min_lr").get<double>();
  c.clip_norm = j.at("clip_norm").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.unroll = j.at("unroll").get<std::size_t>();
  c.max_epochs = j.at("max_epochs").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  require(ckpt.model.vocab_size == ckpt.vocab.size(), ErrorKind::invalid_argument,
          "checkpoint: vocabulary size does not match the model");
  json tensors = json::array();
  std::size_t total = 0;
  for_each_tensor(ckpt.params, [&](const std::string& name, std::span<const double> v) {
    tensors.push_back(json{{"name", name}, {"count", v.size()}});
    total += v.size();
  });
  json meta{{"epoch", ckpt.meta.epoch}};
  // JSON has no NaN; a missing perplexity is stored as null.
  meta["valid_ppl"] = std::isfinite(ckpt.meta.valid_perplexity) ? json(ckpt.meta.valid_perplexity) : json(nullptr);
  const json header{{"model", model_to_json(ckpt.model)},
                    {"train", train_to_json(ckpt.train)},
                    {"meta", meta},
                    {"vocab", ckpt.vocab.tokens()},
                    {"tensors", tensors}};
  const std::string text = header.dump();

  std::vector<std::uint8_t> out;
  out.reserve(kPrefixSize + text.size() + 8 + 8 * total + 4);
  for (std::uint8_t b : kMagic) out.push_back(b);
  put_u32(out, kCheckpointVersion);
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  put_u64(out, total);
  for_each_tensor(ckpt.params, [&](const std::string&, std::span<const double> v) {
    for (double x : v) put_u64(out, std::bit_cast<std::uint64_t>(x));
  });
  put_u32(out, crc32_of(out));
  return out;
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= kPrefixSize && std::equal(kMagic.begin(), kMagic.end(), bytes.begin()),
          ErrorKind::corrupt, "checkpoint: not an mlstm checkpoint (bad magic or truncated)");
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 8, 4));
  require(version == kCheckpointVersion, ErrorKind::version_mismatch,
          "checkpoint: format version " + std::to_string(version) + ", expected " +
              std::to_string(kCheckpointVersion));
  require(bytes.size() >= kPrefixSize + 4, ErrorKind::corrupt, "checkpoint: truncated");
  const std::size_t body = bytes.size() - 4;
  const auto stored_crc = static_cast<std::uint32_t>(get_le(bytes, body, 4));
  require(stored_crc == crc32_of(bytes.first(body)), ErrorKind::corrupt,
          "checkpoint: checksum mismatch (truncated or damaged file)");

  const std::uint64_t header_len = get_le(bytes, 12, 8);
  require(header_len <= body - kPrefixSize && body - kPrefixSize - header_len >= 8, ErrorKind::corrupt,
          "checkpoint: header length out of range");
  const std::size_t tensor_offset = kPrefixSize + header_len;
  const std::uint64_t total = get_le(bytes, tensor_offset, 8);
  require(total == (body - tensor_offset - 8) / 8 && (body - tensor_offset - 8) % 8 == 0,
          ErrorKind::corrupt, "checkpoint: tensor payload size mismatch");

  Checkpoint ckpt;
  try {
    const auto* text = reinterpret_cast<const char*>(bytes.data() + kPrefixSize);
    const json header = json::parse(text, text + header_len);
    ckpt.model = model_from_json(header.at("model"));
    ckpt.train = train_from_json(header.at("train"));
    const json& meta = header.at("meta");
    ckpt.meta.epoch = meta.at("epoch").get<std::size_t>();
    if (!meta.at("valid_ppl").is_null()) ckpt.meta.valid_perplexity = meta.at("valid_ppl").get<double>();
    ckpt.vocab = Vocabulary::from_tokens(header.at("vocab").get<std::vector<std::string>>());
    ckpt.model.validate();

    ckpt.params = ModelParams::zeros(ckpt.model);
    const json& table = header.at("tensors");
    std::size_t index = 0;
    std::size_t offset = tensor_offset + 8;
    for_each_tensor(ckpt.params, [&](const std::string& name, std::span<double> v) {
      require(index < table.size() && table[index].at("name").get<std::string>() == name &&
                  table[index].at("count").get<std::size_t>() == v.size(),
              ErrorKind::corrupt, "checkpoint: tensor table does not match the configuration at " + name);
      for (double& x : v) {
        x = std::bit_cast<double>(get_le(bytes, offset, 8));
        offset += 8;
      }
      ++index;
    });
    require(index == table.size() && offset == body, ErrorKind::corrupt,
            "checkpoint: tensor table has unexpected entries");
  } catch (const json::exception& e) {
    fail(ErrorKind::corrupt, std::string("checkpoint: malformed header: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::corrupt) throw;
    fail(ErrorKind::corrupt, std::string("checkpoint: invalid contents: ") + e.what());
  }
  require(ckpt.model.vocab_size == ckpt.vocab.size(), ErrorKind::corrupt,
          "checkpoint: vocabulary size does not match the model");
  return ckpt;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = serialize_checkpoint(checkpoint);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::io, "cannot write checkpoint '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorKind::io, "failed writing checkpoint '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorKind::io, "cannot move checkpoint into place at '" + path.string() + "': " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open checkpoint '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace mlstm
