#pragma once

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "attrex/model.hpp"
#include "attrex/training.hpp"

namespace attrex {

// Checkpoint layout: 8-byte magic, u32 format version, u64 header length, a
// JSON header (config, vocabulary, predicates, tensor manifest, provenance),
// then raw little-endian doubles per tensor in manifest order, optionally
// followed by Adam moment vectors in the same order. Round trips are
// bit-exact.

inline constexpr char kCkptMagic[8] = {'A', 'T', 'R', 'X', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCkptVersion = 1;

namespace detail {

inline void write_raw(std::ostream& out, const void* data, std::size_t bytes) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

inline void read_raw(std::istream& in, void* data, std::size_t bytes, const std::string& what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes)
    throw DataError("checkpoint truncated while reading " + what);
}

inline nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"d_hdd", c.d_hdd},
          {"hops", c.hops},
          {"n_predicates", c.n_predicates},
          {"word_dim", c.word_dim},
          {"char_dim", c.char_dim},
          {"trigger_threshold", c.trigger_threshold},
          {"max_decode_len", c.max_decode_len},
          {"lambda", c.lambda},
          {"finetune_embeddings", c.finetune_embeddings}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.d_hdd = j.at("d_hdd").get<int>();
  c.hops = j.at("hops").get<int>();
  c.n_predicates = j.at("n_predicates").get<int>();
  c.word_dim = j.at("word_dim").get<int>();
  c.char_dim = j.at("char_dim").get<int>();
  c.trigger_threshold = j.at("trigger_threshold").get<double>();
  c.max_decode_len = j.at("max_decode_len").get<int>();
  c.lambda = j.at("lambda").get<double>();
  c.finetune_embeddings = j.at("finetune_embeddings").get<bool>();
  return c;
}

}  // namespace detail

inline void save_model(const Model& model, const std::string& path,
                       const nlohmann::json& provenance = nlohmann::json::object(),
                       const AdamState* adam = nullptr) {
  // tensor_refs needs mutable access but we only read through it.
  ModelParams& params = const_cast<ModelParams&>(model.params);
  auto refs = tensor_refs(params);

  nlohmann::json header;
  header["config"] = detail::config_to_json(model.params.config);
  header["vocab"] = model.vocab.payload_tokens();
  header["predicates"] = model.predicates.names();
  header["provenance"] = provenance;
  nlohmann::json manifest = nlohmann::json::array();
  for (const auto& r : refs)
    manifest.push_back({{"name", r.name}, {"rows", r.rows}, {"cols", r.cols}});
  header["tensors"] = manifest;
  header["adam_t"] = adam ? adam->t : -1;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  const std::string header_str = header.dump();
  detail::write_raw(out, kCkptMagic, sizeof(kCkptMagic));
  detail::write_raw(out, &kCkptVersion, sizeof(kCkptVersion));
  const std::uint64_t hlen = header_str.size();
  detail::write_raw(out, &hlen, sizeof(hlen));
  detail::write_raw(out, header_str.data(), header_str.size());
  for (const auto& r : refs)
    detail::write_raw(out, r.data, static_cast<std::size_t>(r.size()) * sizeof(double));
  if (adam) {
    for (std::size_t i = 0; i < refs.size(); ++i) {
      detail::write_raw(out, adam->m[i].data(), adam->m[i].size() * sizeof(double));
      detail::write_raw(out, adam->v[i].data(), adam->v[i].size() * sizeof(double));
    }
  }
  if (!out) throw DataError("write failed for checkpoint: " + path);
}

struct LoadedModel {
  Model model;
  AdamState adam;
  bool has_adam = false;
  nlohmann::json provenance;
};

inline LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[sizeof(kCkptMagic)];
  detail::read_raw(in, magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kCkptMagic, sizeof(magic)) != 0)
    throw DataError("not a checkpoint file: " + path);
  std::uint32_t version = 0;
  detail::read_raw(in, &version, sizeof(version), "version");
  if (version != kCkptVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  std::uint64_t hlen = 0;
  detail::read_raw(in, &hlen, sizeof(hlen), "header length");
  std::string header_str(hlen, '\0');
  detail::read_raw(in, header_str.data(), hlen, "header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt checkpoint header: " + std::string(e.what()));
  }

  LoadedModel loaded;
  ModelConfig cfg = detail::config_from_json(header.at("config"));
  loaded.model.vocab = Vocabulary::from_tokens(header.at("vocab").get<std::vector<std::string>>());
  loaded.model.predicates =
      PredicateVocabulary(header.at("predicates").get<std::vector<std::string>>());
  loaded.provenance = header.value("provenance", nlohmann::json::object());
  loaded.model.params = ModelParams::shaped(cfg, loaded.model.vocab.size());

  auto refs = tensor_refs(loaded.model.params);
  const auto& manifest = header.at("tensors");
  if (manifest.size() != refs.size()) throw DataError("checkpoint tensor manifest mismatch");
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& entry = manifest[i];
    if (entry.at("name").get<std::string>() != refs[i].name ||
        entry.at("rows").get<Eigen::Index>() != refs[i].rows ||
        entry.at("cols").get<Eigen::Index>() != refs[i].cols)
      throw DataError("checkpoint tensor mismatch at " + refs[i].name);
    detail::read_raw(in, refs[i].data, static_cast<std::size_t>(refs[i].size()) * sizeof(double),
                     refs[i].name);
  }

  const long adam_t = header.value("adam_t", -1l);
  if (adam_t >= 0) {
    loaded.has_adam = true;
    loaded.adam.t = adam_t;
    for (const auto& r : refs) {
      Eigen::VectorXd m(r.size()), v(r.size());
      detail::read_raw(in, m.data(), static_cast<std::size_t>(r.size()) * sizeof(double),
                       r.name + " adam.m");
      detail::read_raw(in, v.data(), static_cast<std::size_t>(r.size()) * sizeof(double),
                       r.name + " adam.v");
      loaded.adam.m.push_back(std::move(m));
      loaded.adam.v.push_back(std::move(v));
    }
  }
  return loaded;
}

}  // namespace attrex
