// SPDX-License-Identifier: Apache-2.0
//
// Synthetic data: procedural clean images and parametric degradations
// (Gaussian noise on the 8-bit scale, additive rain streaks, atmospheric
// scattering haze), plus aligned cropping, flip augmentation, duplication
// balancing and PNG directory ingestion. Everything is a pure function of
// (inputs, seed).
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mirl/png_io.hpp"
#include "mirl/rng.hpp"
#include "mirl/tensor.hpp"

namespace mirl {

enum class Task { Derain, Dehaze, Denoise };

inline std::string task_name(Task t) {
  switch (t) {
    case Task::Derain: return "derain";
    case Task::Dehaze: return "dehaze";
    default: return "denoise";
  }
}

inline Task task_from_name(const std::string& s) {
  if (s == "derain") return Task::Derain;
  if (s == "dehaze") return Task::Dehaze;
  if (s == "denoise") return Task::Denoise;
  throw std::invalid_argument("unknown task: " + s);
}

struct DegradationSpec {
  enum class Kind { Noise, Rain, Haze };

  Kind kind = Kind::Noise;
  double noise_sigma = 25.0;  // std-dev on the 8-bit scale
  int rain_count = 12;
  double rain_length = 12.0;
  double rain_angle_deg = 70.0;
  double rain_intensity = 0.35;
  double haze_airlight = 0.85;      // in [0,1]
  double haze_transmission = 0.6;   // in (0,1]
  std::uint64_t seed = 0;

  Task task() const {
    switch (kind) {
      case Kind::Rain: return Task::Derain;
      case Kind::Haze: return Task::Dehaze;
      default: return Task::Denoise;
    }
  }

  void validate() const {
    switch (kind) {
      case Kind::Noise:
        require(noise_sigma >= 0.0, "noise sigma must be non-negative");
        break;
      case Kind::Rain:
        require(rain_count >= 0 && rain_length > 0 && rain_intensity >= 0, "bad rain spec");
        break;
      case Kind::Haze:
        require(haze_transmission > 0.0 && haze_transmission <= 1.0, "haze transmission must be in (0,1]");
        require(haze_airlight >= 0.0 && haze_airlight <= 1.0, "haze airlight must be in [0,1]");
        break;
    }
  }
};

struct ImagePair {
  Tensor<float> degraded;
  Tensor<float> clean;
  Task task = Task::Denoise;
  std::string source;
  DegradationSpec spec;
  std::uint64_t aug_seed = 0;
};

struct Dataset {
  std::vector<ImagePair> pairs;
  std::string split;  // train | val | test
};

// Procedural clean images: per-channel offsets near mid-gray, an oriented
// linear gradient, a couple of sinusoids, smooth Gaussian blobs and a few
// sharp-edged rectangles, clamped to [0,1].
inline std::vector<Tensor<float>> gen_clean(int n, int size, std::uint64_t seed) {
  require(n >= 0, "image count must be non-negative");
  require(size >= 8 && size % 8 == 0, "image size must be a positive multiple of 8");
  std::vector<Tensor<float>> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int idx = 0; idx < n; ++idx) {
    rng::Engine eng(rng::mix({seed, 0x636C65616EULL, static_cast<std::uint64_t>(idx)}));
    Tensor<float> img({size, size, 3});

    double base[3], grad_amp[3];
    for (int c = 0; c < 3; ++c) base[c] = 0.5 + eng.uniform(-0.08, 0.08);
    const double gtheta = eng.uniform(0.0, 6.2831853);
    for (int c = 0; c < 3; ++c) grad_amp[c] = eng.uniform(-0.25, 0.25);

    struct Wave { double freq, phase, theta, amp[3]; };
    std::vector<Wave> waves(2);
    for (auto& wv : waves) {
      wv.freq = eng.uniform(0.5, 3.0) * 6.2831853 / size;
      wv.phase = eng.uniform(0.0, 6.2831853);
      wv.theta = eng.uniform(0.0, 6.2831853);
      const double a = eng.uniform(0.05, 0.18);
      for (int c = 0; c < 3; ++c) wv.amp[c] = a * eng.uniform(0.7, 1.0);
    }

    struct Blob { double cx, cy, s2, amp[3]; };
    std::vector<Blob> blobs(static_cast<std::size_t>(eng.uniform_int(2, 4)));
    for (auto& bl : blobs) {
      bl.cx = eng.uniform(0.0, size);
      bl.cy = eng.uniform(0.0, size);
      const double s = eng.uniform(0.08, 0.25) * size;
      bl.s2 = 2.0 * s * s;
      const double a = eng.uniform(-0.3, 0.35);
      for (int c = 0; c < 3; ++c) bl.amp[c] = a * eng.uniform(0.6, 1.0);
    }

    struct Rect { int x0, x1, y0, y1; double amp[3]; };
    std::vector<Rect> rects(static_cast<std::size_t>(eng.uniform_int(1, 3)));
    for (auto& rc : rects) {
      int a = static_cast<int>(eng.uniform_int(0, size - 1)), b = static_cast<int>(eng.uniform_int(0, size - 1));
      rc.x0 = std::min(a, b);
      rc.x1 = std::max(a, b) + 1;
      a = static_cast<int>(eng.uniform_int(0, size - 1));
      b = static_cast<int>(eng.uniform_int(0, size - 1));
      rc.y0 = std::min(a, b);
      rc.y1 = std::max(a, b) + 1;
      const double d = eng.uniform(-0.3, 0.3);
      for (int c = 0; c < 3; ++c) rc.amp[c] = d * eng.uniform(0.7, 1.0);
    }

    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double gproj = (x * std::cos(gtheta) + y * std::sin(gtheta)) / size;
        for (int c = 0; c < 3; ++c) {
          double v = base[c] + grad_amp[c] * gproj;
          for (const auto& wv : waves)
            v += wv.amp[c] * std::sin(wv.freq * (x * std::cos(wv.theta) + y * std::sin(wv.theta)) + wv.phase);
          for (const auto& bl : blobs) {
            const double dx = x - bl.cx, dy = y - bl.cy;
            v += bl.amp[c] * std::exp(-(dx * dx + dy * dy) / bl.s2);
          }
          for (const auto& rc : rects)
            if (x >= rc.x0 && x < rc.x1 && y >= rc.y0 && y < rc.y1) v += rc.amp[c];
          img.at(y, x, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

inline ImagePair degrade(const Tensor<float>& clean, const DegradationSpec& spec) {
  spec.validate();
  require(clean.rank() == 3 && clean.dim(2) == 3, "degrade: clean image must be [H,W,3]");
  const int H = clean.dim(0), W = clean.dim(1);

  ImagePair pair;
  pair.clean = clean;
  pair.task = spec.task();
  pair.spec = spec;
  pair.aug_seed = rng::mix({spec.seed, 0x617567ULL});
  Tensor<float> deg = clean;
  rng::Engine eng(spec.seed);

  switch (spec.kind) {
    case DegradationSpec::Kind::Noise: {
      const double s = spec.noise_sigma / 255.0;
      for (auto& v : deg.values) v = static_cast<float>(std::clamp(v + eng.normal(0.0, s), 0.0, 1.0));
      break;
    }
    case DegradationSpec::Kind::Rain: {
      for (int k = 0; k < spec.rain_count; ++k) {
        const double x0 = eng.uniform(-0.2 * W, 1.2 * W);
        const double y0 = eng.uniform(-0.2 * H, 1.2 * H);
        const double ang = (spec.rain_angle_deg + eng.uniform(-6.0, 6.0)) * 3.14159265358979323846 / 180.0;
        const double len = spec.rain_length * eng.uniform(0.7, 1.3);
        const double inten = spec.rain_intensity * eng.uniform(0.6, 1.0);
        const double dx = std::cos(ang), dy = std::sin(ang);
        for (double t = 0.0; t <= len; t += 0.5) {
          const int xi = static_cast<int>(std::lround(x0 + t * dx));
          const int yi = static_cast<int>(std::lround(y0 + t * dy));
          if (xi < 0 || xi >= W || yi < 0 || yi >= H) continue;
          for (int c = 0; c < 3; ++c) deg.at(yi, xi, c) = static_cast<float>(deg.at(yi, xi, c) + inten * 0.5);
        }
      }
      for (auto& v : deg.values) v = std::clamp(v, 0.0f, 1.0f);
      break;
    }
    case DegradationSpec::Kind::Haze: {
      const float t = static_cast<float>(spec.haze_transmission);
      const float a = static_cast<float>(spec.haze_airlight);
      for (auto& v : deg.values) v = std::clamp(v * t + a * (1.0f - t), 0.0f, 1.0f);
      break;
    }
  }
  pair.degraded = std::move(deg);
  return pair;
}

struct CropResult {
  ImagePair pair;
  int dy = 0;
  int dx = 0;
};

// Same seeded offset applied to both images.
inline CropResult crop_patch(const ImagePair& in, int patch, std::uint64_t seed) {
  const int H = in.clean.dim(0), W = in.clean.dim(1);
  require(patch >= 8 && patch % 8 == 0, "patch must be a positive multiple of 8");
  require(patch <= H && patch <= W, "patch " + std::to_string(patch) + " larger than image " + shape_str(in.clean.shape));

  rng::Engine eng(seed);
  CropResult out;
  out.dy = H == patch ? 0 : static_cast<int>(eng.uniform_int(0, H - patch));
  out.dx = W == patch ? 0 : static_cast<int>(eng.uniform_int(0, W - patch));
  out.pair = in;
  auto crop = [&](const Tensor<float>& src) {
    Tensor<float> dst({patch, patch, 3});
    for (int y = 0; y < patch; ++y)
      for (int x = 0; x < patch; ++x)
        for (int c = 0; c < 3; ++c) dst.at(y, x, c) = src.at(y + out.dy, x + out.dx, c);
    return dst;
  };
  out.pair.degraded = crop(in.degraded);
  out.pair.clean = crop(in.clean);
  return out;
}

// Horizontal and vertical flips, each applied with probability 1/2,
// identically to both images.
inline ImagePair augment_flip(const ImagePair& in, std::uint64_t seed) {
  rng::Engine eng(seed);
  const bool fh = eng.uniform() < 0.5;
  const bool fv = eng.uniform() < 0.5;
  if (!fh && !fv) return in;
  const int H = in.clean.dim(0), W = in.clean.dim(1);
  ImagePair out = in;
  auto flip = [&](const Tensor<float>& src) {
    Tensor<float> dst(src.shape);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        for (int c = 0; c < 3; ++c) dst.at(y, x, c) = src.at(fv ? H - 1 - y : y, fh ? W - 1 - x : x, c);
    return dst;
  };
  out.degraded = flip(in.degraded);
  out.clean = flip(in.clean);
  return out;
}

// Equalises source sizes by whole-copy repetition plus seeded sampling for
// the remainder; duplicates get fresh augmentation seeds so they diverge
// under augment_flip.
inline Dataset balance_duplicate(const std::vector<Dataset>& sources, std::uint64_t seed) {
  require(!sources.empty(), "balance_duplicate: no sources");
  std::size_t target = 0;
  for (const auto& d : sources) {
    require(!d.pairs.empty(), "balance_duplicate: empty source");
    target = std::max(target, d.pairs.size());
  }
  Dataset out;
  out.split = sources.front().split;
  for (std::size_t si = 0; si < sources.size(); ++si) {
    const auto& src = sources[si].pairs;
    const std::size_t copies = target / src.size();
    const std::size_t rem = target % src.size();
    std::uint64_t dup = 0;
    for (std::size_t k = 0; k < copies; ++k) {
      for (const auto& p : src) {
        out.pairs.push_back(p);
        if (k > 0) out.pairs.back().aug_seed = rng::mix({seed, static_cast<std::uint64_t>(si), dup++, p.aug_seed});
      }
    }
    if (rem > 0) {
      std::vector<std::size_t> idx(src.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      rng::Engine eng(rng::mix({seed, 0x62616CULL, static_cast<std::uint64_t>(si)}));
      eng.shuffle(idx.begin(), idx.end());
      for (std::size_t i = 0; i < rem; ++i) {
        out.pairs.push_back(src[idx[i]]);
        out.pairs.back().aug_seed = rng::mix({seed, static_cast<std::uint64_t>(si), dup++, src[idx[i]].aug_seed});
      }
    }
  }
  return out;
}

// Loads `<stem>_clean.png` / `<stem>_degraded.png` pairs from a directory.
// Unpaired files are skipped with a warning; size mismatches within a pair
// are an error.
inline Dataset load_png_dir(const std::filesystem::path& dir, Task task, std::vector<std::string>* warnings = nullptr) {
  Dataset out;
  if (!std::filesystem::exists(dir)) return out;
  std::map<std::string, std::pair<std::filesystem::path, std::filesystem::path>> stems;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
    const std::string stem = entry.path().stem().string();
    if (stem.ends_with("_clean"))
      stems[stem.substr(0, stem.size() - 6)].first = entry.path();
    else if (stem.ends_with("_degraded"))
      stems[stem.substr(0, stem.size() - 9)].second = entry.path();
    else if (warnings)
      warnings->push_back("ignoring " + entry.path().filename().string() + ": no _clean/_degraded suffix");
  }
  for (const auto& [stem, files] : stems) {
    if (files.first.empty() || files.second.empty()) {
      if (warnings) warnings->push_back("skipping unpaired image set '" + stem + "'");
      continue;
    }
    ImagePair p;
    p.clean = load_image_png(files.first);
    p.degraded = load_image_png(files.second);
    require(p.clean.shape == p.degraded.shape,
            "pair size mismatch: " + files.first.string() + " vs " + files.second.string());
    p.task = task;
    p.source = stem;
    p.aug_seed = rng::mix({0x6C6F6164ULL, static_cast<std::uint64_t>(std::hash<std::string>{}(stem))});
    out.pairs.push_back(std::move(p));
  }
  return out;
}

}  // namespace mirl
