// SPDX-License-Identifier: Apache-2.0
//
// Prompt-conditioned four-level encoder-decoder restoration network at
// desk scale. Features are extracted by a 3x3 convolution, encoded with
// channel-doubling stride-2 convolutions down to H/8 x W/8 x 8*base, then
// decoded with nearest-2x upsampling, skip fusion and prompt blocks.
//
// A prompt block generates an adaptive prompt from N learnable components
// weighted by softmax(conv1x1(GAP(features))) and injects it by channel
// concatenation, a transformer-substitute block (channel attention +
// feed-forward, both residual) and 1x1/3x3 convolutions.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "mirl/graph.hpp"
#include "mirl/ops.hpp"
#include "mirl/rng.hpp"
#include "mirl/store.hpp"

namespace mirl {

struct ModelConfig {
  static constexpr int kLevels = 4;

  int base_dim = 8;
  int blocks_per_level = 1;
  int n_prompts = 3;
  std::vector<int> prompt_levels = {0, 1, 2};   // decoder levels, 0 = full resolution
  std::vector<int> prompt_spatial = {8, 8, 8};  // aligned with prompt_levels
  bool global_residual = true;

  std::array<int, kLevels> level_dims() const {
    return {base_dim, 2 * base_dim, 4 * base_dim, 8 * base_dim};
  }

  bool has_prompt(int level) const {
    for (int l : prompt_levels)
      if (l == level) return true;
    return false;
  }

  int prompt_spatial_at(int level) const {
    for (std::size_t i = 0; i < prompt_levels.size(); ++i)
      if (prompt_levels[i] == level) return prompt_spatial[i];
    throw std::invalid_argument("no prompt block at level " + std::to_string(level));
  }

  void validate() const {
    require(base_dim >= 2, "base_dim must be >= 2");
    require(blocks_per_level >= 1, "blocks_per_level must be >= 1");
    require(n_prompts >= 1, "n_prompts must be >= 1");
    require(prompt_levels.size() == prompt_spatial.size(), "prompt_levels and prompt_spatial must align");
    for (std::size_t i = 0; i < prompt_levels.size(); ++i) {
      require(prompt_levels[i] >= 0 && prompt_levels[i] < kLevels - 1, "prompt levels must be decoder levels 0..2");
      require(prompt_spatial[i] >= 1, "prompt_spatial must be positive");
      for (std::size_t j = i + 1; j < prompt_levels.size(); ++j)
        require(prompt_levels[i] != prompt_levels[j], "duplicate prompt level");
    }
    const auto dims = level_dims();
    for (int l = 1; l < kLevels; ++l) require(dims[l] > dims[l - 1], "level dims must increase");
  }
};

enum class ParamKind { ConvKernel, Bias, PromptComponents };

struct ParamSpec {
  std::string name;
  std::vector<int> shape;
  ParamKind kind = ParamKind::ConvKernel;
  bool prunable = false;
  bool output_layer = false;
};

namespace detail {

inline void plan_conv(std::vector<ParamSpec>& out, const std::string& name, int k, int cin, int cout,
                      bool output_layer = false) {
  out.push_back(ParamSpec{name + ".kernel", {k, k, cin, cout}, ParamKind::ConvKernel, true, output_layer});
  out.push_back(ParamSpec{name + ".bias", {cout}, ParamKind::Bias, false, false});
}

inline void plan_block(std::vector<ParamSpec>& out, const std::string& prefix, int c) {
  const int cr = std::max(1, c / 2);
  plan_conv(out, prefix + ".attn_reduce", 1, c, cr);
  plan_conv(out, prefix + ".attn_expand", 1, cr, c);
  plan_conv(out, prefix + ".ffn_in", 1, c, 2 * c);
  plan_conv(out, prefix + ".ffn_out", 1, 2 * c, c);
}

}  // namespace detail

// Canonical parameter enumeration; construction order here defines the
// order of masks, serialization and gradient buffers.
inline std::vector<ParamSpec> plan_params(const ModelConfig& cfg) {
  cfg.validate();
  const auto dims = cfg.level_dims();
  std::vector<ParamSpec> out;

  detail::plan_conv(out, "embed", 3, 3, cfg.base_dim);
  for (int l = 0; l < ModelConfig::kLevels; ++l) {
    for (int b = 0; b < cfg.blocks_per_level; ++b)
      detail::plan_block(out, "enc" + std::to_string(l) + ".block" + std::to_string(b), dims[static_cast<std::size_t>(l)]);
    if (l < ModelConfig::kLevels - 1)
      detail::plan_conv(out, "down" + std::to_string(l), 3, dims[static_cast<std::size_t>(l)], dims[static_cast<std::size_t>(l) + 1]);
  }
  for (int l = ModelConfig::kLevels - 2; l >= 0; --l) {
    const int c = dims[static_cast<std::size_t>(l)];
    detail::plan_conv(out, "up" + std::to_string(l), 3, dims[static_cast<std::size_t>(l) + 1], c);
    detail::plan_conv(out, "fuse" + std::to_string(l), 1, 2 * c, c);
    if (cfg.has_prompt(l)) {
      const std::string p = "prompt" + std::to_string(l);
      const int ps = cfg.prompt_spatial_at(l);
      out.push_back(ParamSpec{p + ".components", {cfg.n_prompts, ps, ps, c}, ParamKind::PromptComponents, false, false});
      detail::plan_conv(out, p + ".gen_weights", 1, c, cfg.n_prompts);
      detail::plan_conv(out, p + ".gen_refine", 3, c, c);
      detail::plan_block(out, p + ".pim_block", 2 * c);
      detail::plan_conv(out, p + ".pim_proj", 1, 2 * c, c);
      detail::plan_conv(out, p + ".pim_refine", 3, c, c);
    }
    for (int b = 0; b < cfg.blocks_per_level; ++b)
      detail::plan_block(out, "dec" + std::to_string(l) + ".block" + std::to_string(b), c);
  }
  detail::plan_conv(out, "head", 3, cfg.base_dim, 3, /*output_layer=*/true);
  return out;
}

class MicroPromptNet {
 public:
  MicroPromptNet() = default;

  // Kernels are fan-in scaled uniform, biases zero, prompt components
  // U(-0.5, 0.5). Identical seeds give bit-identical stores.
  static MicroPromptNet init(const ModelConfig& cfg, std::uint64_t seed) {
    MicroPromptNet net;
    net.cfg_ = cfg;
    rng::Engine eng(seed);
    for (const ParamSpec& spec : plan_params(cfg)) {
      Tensor<float> t(spec.shape);
      switch (spec.kind) {
        case ParamKind::ConvKernel: {
          const double fan_in = static_cast<double>(spec.shape[0]) * spec.shape[1] * spec.shape[2];
          const double bound = std::sqrt(1.0 / fan_in);
          for (auto& v : t.values) v = static_cast<float>(eng.uniform(-bound, bound));
          break;
        }
        case ParamKind::Bias:
          break;  // zeros
        case ParamKind::PromptComponents:
          for (auto& v : t.values) v = static_cast<float>(eng.uniform(-0.5, 0.5));
          break;
      }
      net.params_.add(spec.name, std::move(t), spec.prunable, spec.output_layer);
    }
    return net;
  }

  static MicroPromptNet from_store(const ModelConfig& cfg, NamedTensorStore<float> store) {
    const auto plan = plan_params(cfg);
    require(plan.size() == store.size(), "store has " + std::to_string(store.size()) + " parameters, architecture needs " + std::to_string(plan.size()));
    for (std::size_t i = 0; i < plan.size(); ++i) {
      const auto& e = store.entry(i);
      require(e.name == plan[i].name && e.tensor.shape == plan[i].shape,
              "parameter " + std::to_string(i) + " (" + e.name + ") does not match the architecture plan");
      require(e.prunable == plan[i].prunable && e.output_layer == plan[i].output_layer,
              "parameter roles for " + e.name + " do not match the architecture plan");
    }
    MicroPromptNet net;
    net.cfg_ = cfg;
    net.params_ = std::move(store);
    return net;
  }

  const ModelConfig& config() const { return cfg_; }
  NamedTensorStore<float>& params() { return params_; }
  const NamedTensorStore<float>& params() const { return params_; }

 private:
  ModelConfig cfg_;
  NamedTensorStore<float> params_;
};

// Ordered view over (name, tensor, prunable, output_layer).
inline const std::vector<ParamEntry<float>>& enumerate_params(const MicroPromptNet& net) {
  return net.params().entries();
}

struct ParamVars {
  std::vector<std::pair<std::string, Var>> items;
  std::unordered_map<std::string, std::size_t> index;

  Var operator[](const std::string& name) const {
    auto it = index.find(name);
    require(it != index.end(), "forward pass references unknown parameter: " + name);
    return items[it->second].second;
  }
};

template <typename T>
ParamVars bind_params(Graph<T>& g, const NamedTensorStore<T>& store, bool requires_grad) {
  ParamVars pv;
  pv.items.reserve(store.size());
  for (const auto& e : store.entries()) {
    pv.index[e.name] = pv.items.size();
    pv.items.emplace_back(e.name, g.leaf(e.tensor, requires_grad));
  }
  return pv;
}

struct BlockVars {
  Var attn_reduce_k, attn_reduce_b, attn_expand_k, attn_expand_b;
  Var ffn_in_k, ffn_in_b, ffn_out_k, ffn_out_b;

  static BlockVars at(const ParamVars& pv, const std::string& prefix) {
    return BlockVars{pv[prefix + ".attn_reduce.kernel"], pv[prefix + ".attn_reduce.bias"],
                     pv[prefix + ".attn_expand.kernel"], pv[prefix + ".attn_expand.bias"],
                     pv[prefix + ".ffn_in.kernel"],      pv[prefix + ".ffn_in.bias"],
                     pv[prefix + ".ffn_out.kernel"],     pv[prefix + ".ffn_out.bias"]};
  }
};

// Transformer substitute: residual channel attention followed by a
// residual feed-forward expansion, shape preserving.
template <typename T>
Var transformer_block(Graph<T>& g, Var f, const BlockVars& p) {
  Var s = global_avg_pool(g, f);
  s = conv2d(g, s, p.attn_reduce_k, p.attn_reduce_b, 1, 0);
  s = activation(g, s, Act::Relu);
  s = conv2d(g, s, p.attn_expand_k, p.attn_expand_b, 1, 0);
  Var gate = activation(g, s, Act::Sigmoid);
  Var f1 = add(g, f, channel_gate(g, f, gate));
  Var h = conv2d(g, f1, p.ffn_in_k, p.ffn_in_b, 1, 0);
  h = activation(g, h, Act::Gelu);
  h = conv2d(g, h, p.ffn_out_k, p.ffn_out_b, 1, 0);
  return add(g, f1, h);
}

struct PromptGenVars {
  Var weights_k, weights_b, refine_k, refine_b;

  static PromptGenVars at(const ParamVars& pv, const std::string& prefix) {
    return PromptGenVars{pv[prefix + ".gen_weights.kernel"], pv[prefix + ".gen_weights.bias"],
                         pv[prefix + ".gen_refine.kernel"], pv[prefix + ".gen_refine.bias"]};
  }
};

// Prompt generation: softmax-weighted mix of learnable components,
// resized to the feature grid and refined by a 3x3 convolution.
template <typename T>
Var generate_prompt(Graph<T>& g, Var features, Var components, const PromptGenVars& p) {
  const Tensor<T>& f = g.value(features);
  const Tensor<T>& pc = g.value(components);
  require(pc.rank() == 4, "prompt components must be [N,h,w,C]");
  require(pc.dim(3) == f.dim(2), "prompt components carry " + std::to_string(pc.dim(3)) + " channels, features " + std::to_string(f.dim(2)));
  const int n = pc.dim(0);
  Var logits = conv2d(g, global_avg_pool(g, features), p.weights_k, p.weights_b, 1, 0);
  require(g.value(logits).dim(2) == n, "prompt weight head emits " + std::to_string(g.value(logits).dim(2)) + " weights for " + std::to_string(n) + " components");
  Var w = softmax_vec(g, reshape(g, logits, {n}));
  Var mixed = weighted_sum(g, w, components);
  Var sized = resize_bilinear(g, mixed, f.dim(0), f.dim(1));
  return conv2d(g, sized, p.refine_k, p.refine_b, 1, 1);
}

struct PromptInjectVars {
  BlockVars block;
  Var proj_k, proj_b, refine_k, refine_b;

  static PromptInjectVars at(const ParamVars& pv, const std::string& prefix) {
    return PromptInjectVars{BlockVars::at(pv, prefix + ".pim_block"),
                            pv[prefix + ".pim_proj.kernel"], pv[prefix + ".pim_proj.bias"],
                            pv[prefix + ".pim_refine.kernel"], pv[prefix + ".pim_refine.bias"]};
  }
};

// Prompt interaction: concat along channels, transformer-substitute block,
// then 1x1 and 3x3 convolutions back to the feature width.
template <typename T>
Var inject_prompt(Graph<T>& g, Var prompt, Var features, const PromptInjectVars& p) {
  Var fc = concat_channels(g, features, prompt);
  Var t = transformer_block(g, fc, p.block);
  t = conv2d(g, t, p.proj_k, p.proj_b, 1, 0);
  return conv2d(g, t, p.refine_k, p.refine_b, 1, 1);
}

template <typename T>
Var embed(Graph<T>& g, Var image, Var kernel, Var bias) {
  const Tensor<T>& img = g.value(image);
  require(img.rank() == 3 && img.dim(2) == 3, "embed: image must be [H,W,3], got " + shape_str(img.shape));
  require(img.dim(0) % 8 == 0 && img.dim(1) % 8 == 0,
          "embed: image is " + shape_str(img.shape) + "; pad so H and W are divisible by 8");
  return conv2d(g, image, kernel, bias, 1, 1);
}

template <typename T>
Var build_forward(Graph<T>& g, const ModelConfig& cfg, const ParamVars& pv, Var image) {
  const auto dims = cfg.level_dims();
  (void)dims;
  Var f = embed(g, image, pv["embed.kernel"], pv["embed.bias"]);

  std::array<Var, ModelConfig::kLevels - 1> skips;
  for (int l = 0; l < ModelConfig::kLevels; ++l) {
    for (int b = 0; b < cfg.blocks_per_level; ++b)
      f = transformer_block(g, f, BlockVars::at(pv, "enc" + std::to_string(l) + ".block" + std::to_string(b)));
    if (l < ModelConfig::kLevels - 1) {
      skips[static_cast<std::size_t>(l)] = f;
      const std::string d = "down" + std::to_string(l);
      f = conv2d(g, f, pv[d + ".kernel"], pv[d + ".bias"], 2, 1);
    }
  }

  for (int l = ModelConfig::kLevels - 2; l >= 0; --l) {
    const std::string u = "up" + std::to_string(l);
    f = upsample_nearest2x(g, f);
    f = conv2d(g, f, pv[u + ".kernel"], pv[u + ".bias"], 1, 1);
    f = concat_channels(g, f, skips[static_cast<std::size_t>(l)]);
    const std::string fu = "fuse" + std::to_string(l);
    f = conv2d(g, f, pv[fu + ".kernel"], pv[fu + ".bias"], 1, 0);
    if (cfg.has_prompt(l)) {
      const std::string p = "prompt" + std::to_string(l);
      Var prompt = generate_prompt(g, f, pv[p + ".components"], PromptGenVars::at(pv, p));
      f = inject_prompt(g, prompt, f, PromptInjectVars::at(pv, p));
    }
    for (int b = 0; b < cfg.blocks_per_level; ++b)
      f = transformer_block(g, f, BlockVars::at(pv, "dec" + std::to_string(l) + ".block" + std::to_string(b)));
  }

  Var out = conv2d(g, f, pv["head.kernel"], pv["head.bias"], 1, 1);
  if (cfg.global_residual) out = add(g, out, image);
  return out;
}

// Forward-only evaluation on a throwaway graph.
inline Tensor<float> forward_eval(const MicroPromptNet& net, const Tensor<float>& image, bool clamp = false) {
  Graph<float> g;
  ParamVars pv = bind_params(g, net.params(), false);
  Var out = build_forward(g, net.config(), pv, g.constant(image));
  Tensor<float> result = g.value(out);
  return clamp ? clamp01(std::move(result)) : result;
}

}  // namespace mirl
