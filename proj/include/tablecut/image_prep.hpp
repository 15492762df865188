// Copyright 2026 The tablecut Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tablecut/image.hpp"

namespace tablecut {

// Interleaved 8-bit raster with 1, 3 (RGB) or 4 (RGBA) channels.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> bytes;
};

// BT.601 luminance; alpha is ignored. Single-channel input passes through.
inline GrayImage to_grayscale(const Raster& in) {
  if (in.channels != 1 && in.channels != 3 && in.channels != 4)
    throw InputFormatError("unsupported channel count " + std::to_string(in.channels));
  const std::size_t n = static_cast<std::size_t>(in.width) * static_cast<std::size_t>(in.height);
  if (in.bytes.size() != n * static_cast<std::size_t>(in.channels))
    throw InputFormatError("raster byte count does not match its dimensions");
  if (in.channels == 1) return GrayImage(in.width, in.height, in.bytes);
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = &in.bytes[i * static_cast<std::size_t>(in.channels)];
    const double lum = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    out[i] = static_cast<std::uint8_t>(std::clamp<long>(round_half_up(lum), 0, 255));
  }
  return GrayImage(in.width, in.height, std::move(out));
}

inline GrayImage to_grayscale(const GrayImage& in) { return in; }

namespace detail {

struct Tap {
  int index;
  double weight;
};

// Per-output-sample source taps: area averaging when shrinking, bilinear when
// enlarging, identity when the length is unchanged.
inline std::vector<std::vector<Tap>> resample_taps(int src, int dst) {
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(dst));
  if (src == dst) {
    for (int i = 0; i < dst; ++i) taps[static_cast<std::size_t>(i)] = {{i, 1.0}};
    return taps;
  }
  const double ratio = static_cast<double>(src) / dst;
  if (dst < src) {
    for (int i = 0; i < dst; ++i) {
      const double lo = i * ratio;
      const double hi = (i + 1) * ratio;
      auto& t = taps[static_cast<std::size_t>(i)];
      for (int s = static_cast<int>(std::floor(lo)); s < static_cast<int>(std::ceil(hi)) && s < src; ++s) {
        const double w = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
        if (w > 1e-12) t.push_back({s, w / ratio});
      }
    }
  } else {
    for (int i = 0; i < dst; ++i) {
      const double pos = std::clamp((i + 0.5) * ratio - 0.5, 0.0, static_cast<double>(src - 1));
      const int s0 = static_cast<int>(std::floor(pos));
      const int s1 = std::min(s0 + 1, src - 1);
      const double f = pos - s0;
      auto& t = taps[static_cast<std::size_t>(i)];
      t.push_back({s0, 1.0 - f});
      if (s1 != s0 && f > 0.0) t.push_back({s1, f});
    }
  }
  return taps;
}

}  // namespace detail

// Separable resample to an arbitrary size.
inline GrayImage resample(const GrayImage& img, int new_width, int new_height) {
  if (img.empty()) throw DegenerateInput("cannot resample an empty image");
  if (new_width < 1 || new_height < 1) throw DegenerateInput("resample target must be at least 1x1");
  if (new_width == img.width() && new_height == img.height()) return img;
  const auto tx = detail::resample_taps(img.width(), new_width);
  const auto ty = detail::resample_taps(img.height(), new_height);
  std::vector<double> tmp(static_cast<std::size_t>(new_width) * img.height());
  for (int y = 0; y < img.height(); ++y) {
    const auto row = img.row(y);
    for (int x = 0; x < new_width; ++x) {
      double acc = 0;
      for (const auto& t : tx[static_cast<std::size_t>(x)]) acc += t.weight * row[static_cast<std::size_t>(t.index)];
      tmp[static_cast<std::size_t>(y) * new_width + x] = acc;
    }
  }
  GrayImage out(new_width, new_height);
  for (int y = 0; y < new_height; ++y)
    for (int x = 0; x < new_width; ++x) {
      double acc = 0;
      for (const auto& t : ty[static_cast<std::size_t>(y)])
        acc += t.weight * tmp[static_cast<std::size_t>(t.index) * new_width + x];
      out(x, y) = static_cast<std::uint8_t>(std::clamp<long>(round_half_up(acc), 0, 255));
    }
  return out;
}

// Mapping between original-image and working-image coordinates.
// original = (working - pad_top) * scale, per axis (x has no padding).
struct ScaleMap {
  double scale_x = 1.0;
  double scale_y = 1.0;
  int pad_top = 0;
  int pad_bottom = 0;

  int to_working_x(double x) const { return round_px(x / scale_x); }
  int to_working_y(double y) const { return round_px(y / scale_y) + pad_top; }
  int to_original_x(double x) const { return round_px(x * scale_x); }
  int to_original_y(double y) const { return round_px((y - pad_top) * scale_y); }

  bool operator==(const ScaleMap&) const = default;
};

struct PreparedImage {
  GrayImage image;
  ScaleMap scale;
};

inline constexpr int kWorkingWidth = 800;
inline constexpr int kStripHeight = 64;
inline constexpr int kStripStride = 32;
inline constexpr int kStripContext = 16;  // rows above/below the inner window
inline constexpr int kBandHeight = 8;
inline constexpr int kBandsPerStrip = 4;

inline PreparedImage resize_to_width(const GrayImage& img, int target_width = kWorkingWidth) {
  if (img.width() < 1 || img.height() < 1) throw DegenerateInput("image must be at least 1x1");
  if (target_width < 1) throw DegenerateInput("target width must be positive");
  if (img.width() == target_width) return {img, ScaleMap{}};
  const double factor = static_cast<double>(target_width) / img.width();
  const int h = std::max(1, round_px(img.height() * factor));
  ScaleMap map;
  map.scale_x = static_cast<double>(img.width()) / target_width;
  map.scale_y = static_cast<double>(img.height()) / h;
  return {resample(img, target_width, h), map};
}

// White border above and below; the pad is recorded in the returned map.
inline PreparedImage pad_vertical(const GrayImage& img, int pad = kStripContext, ScaleMap map = {}) {
  if (pad < 0) throw DegenerateInput("pad must be non-negative");
  map.pad_top += pad;
  map.pad_bottom += pad;
  if (pad == 0) return {img, map};
  GrayImage out(img.width(), img.height() + 2 * pad, kWhite);
  for (int y = 0; y < img.height(); ++y) {
    auto src = img.row(y);
    std::copy(src.begin(), src.end(), out.row(y + pad).begin());
  }
  return {std::move(out), map};
}

struct Strip {
  int origin_y = 0;
  GrayImage pixels;

  int inner_begin() const noexcept { return origin_y + kStripContext; }
  int inner_end() const noexcept { return origin_y + kStripContext + 2 * kStripContext; }
};

// Height after white extension so that strips at stride 32 fit exactly.
inline int strip_extended_height(int height) {
  if (height <= kStripHeight) return kStripHeight;
  const int extra = height - kStripHeight;
  return kStripHeight + (extra + kStripStride - 1) / kStripStride * kStripStride;
}

inline std::vector<Strip> slice_strips(const GrayImage& img) {
  const int h = strip_extended_height(img.height());
  std::vector<Strip> strips;
  for (int origin = 0; origin + kStripHeight <= h; origin += kStripStride) {
    GrayImage s(img.width(), kStripHeight, kWhite);
    for (int y = 0; y < kStripHeight; ++y) {
      if (origin + y >= img.height()) break;
      auto src = img.row(origin + y);
      std::copy(src.begin(), src.end(), s.row(y).begin());
    }
    strips.push_back({origin, std::move(s)});
  }
  return strips;
}

// Counter-clockwise quarter turn: the top edge becomes the left edge.
template <typename T>
Plane<T> rotate_ccw(const Plane<T>& img) {
  Plane<T> out(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out(y, img.width() - 1 - x) = img(x, y);
  return out;
}

}  // namespace tablecut
