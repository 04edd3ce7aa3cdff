// SPDX-License-Identifier: Apache-2.0
//
// Flat checkpoint container: a directory holding meta.json (tensor and
// mask indices), tensors.bin (little-endian float32, concatenated in index
// order) and masks.bin (one byte per element). Round trips are bit-exact;
// that is what makes rewinding reproducible across process boundaries.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mirl/pruning.hpp"
#include "mirl/store.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoint container assumes a little-endian host");

namespace mirl {

using json = nlohmann::json;

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

inline std::string digest_of_json(const json& j) { return hex64(fnv1a64(j.dump())); }

struct CheckpointData {
  int version = 1;
  std::string config_digest;
  int round = 0;
  json seeds = json::object();
  NamedTensorStore<float> theta0;
  NamedTensorStore<float> theta;
  SparsityMask mask;
};

namespace detail {

inline void write_file(const std::filesystem::path& p, const void* data, std::size_t bytes) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!f) throw std::runtime_error("short write to " + p.string());
}

inline std::vector<char> read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary | std::ios::ate);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  const std::streamsize n = f.tellg();
  f.seekg(0);
  std::vector<char> buf(static_cast<std::size_t>(n));
  f.read(buf.data(), n);
  if (!f) throw std::runtime_error("short read from " + p.string());
  return buf;
}

inline json tensor_index_entry(const std::string& ns, const ParamEntry<float>& e, std::size_t offset) {
  return json{{"name", ns + "/" + e.name},
              {"dtype", "f32"},
              {"shape", e.tensor.shape},
              {"offset", offset},
              {"prunable", e.prunable},
              {"output_layer", e.output_layer}};
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& dir, const CheckpointData& ckpt) {
  std::filesystem::create_directories(dir);

  json tensors = json::array();
  std::vector<float> blob;
  blob.reserve(ckpt.theta0.total_params() + ckpt.theta.total_params());
  for (const auto* store : {&ckpt.theta0, &ckpt.theta}) {
    const std::string ns = store == &ckpt.theta0 ? "theta0" : "theta";
    for (const auto& e : store->entries()) {
      tensors.push_back(detail::tensor_index_entry(ns, e, blob.size() * sizeof(float)));
      blob.insert(blob.end(), e.tensor.values.begin(), e.tensor.values.end());
    }
  }

  json masks = json::array();
  std::vector<std::uint8_t> mask_blob;
  mask_blob.reserve(ckpt.mask.total());
  for (const auto& e : ckpt.mask.entries()) {
    masks.push_back(json{{"name", e.name}, {"offset", mask_blob.size()}, {"length", e.keep.size()}});
    mask_blob.insert(mask_blob.end(), e.keep.begin(), e.keep.end());
  }

  json meta{{"version", ckpt.version}, {"config_digest", ckpt.config_digest}, {"round", ckpt.round},
            {"seeds", ckpt.seeds},     {"tensors", tensors},                 {"masks", masks}};

  const std::string meta_str = meta.dump(2);
  detail::write_file(dir / "meta.json", meta_str.data(), meta_str.size());
  detail::write_file(dir / "tensors.bin", blob.data(), blob.size() * sizeof(float));
  detail::write_file(dir / "masks.bin", mask_blob.data(), mask_blob.size());
}

inline CheckpointData load_checkpoint(const std::filesystem::path& dir) {
  const auto meta_buf = detail::read_file(dir / "meta.json");
  const json meta = json::parse(meta_buf.begin(), meta_buf.end());
  const auto blob = detail::read_file(dir / "tensors.bin");
  const auto mask_blob = detail::read_file(dir / "masks.bin");

  CheckpointData ckpt;
  ckpt.version = meta.at("version").get<int>();
  ckpt.config_digest = meta.at("config_digest").get<std::string>();
  ckpt.round = meta.at("round").get<int>();
  ckpt.seeds = meta.value("seeds", json::object());

  std::size_t expected_offset = 0;
  for (const auto& t : meta.at("tensors")) {
    const std::string full = t.at("name").get<std::string>();
    const auto slash = full.find('/');
    require(slash != std::string::npos, "checkpoint tensor name without namespace: " + full);
    const std::string ns = full.substr(0, slash);
    const std::string name = full.substr(slash + 1);
    const auto shape = t.at("shape").get<std::vector<int>>();
    const std::size_t offset = t.at("offset").get<std::size_t>();
    require(offset == expected_offset, "checkpoint tensor offsets are not contiguous at " + full);
    const std::size_t count = numel(shape);
    require(offset + count * sizeof(float) <= blob.size(), "checkpoint tensor " + full + " exceeds tensors.bin");
    std::vector<float> vals(count);
    std::memcpy(vals.data(), blob.data() + offset, count * sizeof(float));
    expected_offset = offset + count * sizeof(float);

    NamedTensorStore<float>& store = ns == "theta0" ? ckpt.theta0 : ckpt.theta;
    require(ns == "theta0" || ns == "theta", "unknown tensor namespace: " + ns);
    store.add(name, Tensor<float>(shape, std::move(vals)), t.at("prunable").get<bool>(),
              t.at("output_layer").get<bool>());
  }
  require(expected_offset == blob.size(), "tensors.bin has trailing bytes");

  std::size_t expected_mask = 0;
  for (const auto& m : meta.at("masks")) {
    SparsityMask::Entry e;
    e.name = m.at("name").get<std::string>();
    const std::size_t offset = m.at("offset").get<std::size_t>();
    const std::size_t length = m.at("length").get<std::size_t>();
    require(offset == expected_mask, "checkpoint mask offsets are not contiguous at " + e.name);
    require(offset + length <= mask_blob.size(), "mask " + e.name + " exceeds masks.bin");
    e.keep.assign(mask_blob.begin() + static_cast<std::ptrdiff_t>(offset),
                  mask_blob.begin() + static_cast<std::ptrdiff_t>(offset + length));
    expected_mask = offset + length;
    ckpt.mask.entries().push_back(std::move(e));
  }
  require(expected_mask == mask_blob.size(), "masks.bin has trailing bytes");
  return ckpt;
}

}  // namespace mirl
