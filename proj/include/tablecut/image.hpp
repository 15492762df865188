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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tablecut {

// Error hierarchy. Every failure the library reports derives from Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputFormatError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// Round-half-up, used for every pixel-coordinate computation in the library.
inline long round_half_up(double v) { return static_cast<long>(std::floor(v + 0.5)); }

inline int round_px(double v) { return static_cast<int>(round_half_up(v)); }

// Dense row-major 2-D array. Images, gradient fields and masks are all planes.
template <typename T>
class Plane {
 public:
  using value_type = T;

  Plane() = default;
  Plane(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0) throw DegenerateInput("negative plane dimensions");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Plane(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw DegenerateInput("pixel count does not match width x height");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  // Replicated-edge access.
  const T& clamped(int x, int y) const {
    return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
  }

  std::span<T> row(int y) {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }
  std::span<const T> row(int y) const {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool operator==(const Plane&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using GrayImage = Plane<std::uint8_t>;
using Field = Plane<float>;
using Mask = Plane<std::uint8_t>;

inline constexpr std::uint8_t kWhite = 255;
inline constexpr std::uint8_t kBlack = 0;

// Inclusive index interval.
struct Interval {
  int first = 0;
  int last = 0;
  int length() const noexcept { return last - first + 1; }
  bool operator==(const Interval&) const = default;
};

// Axis-aligned box with inclusive pixel bounds.
struct Box {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const noexcept { return x_max - x_min + 1; }
  int height() const noexcept { return y_max - y_min + 1; }
  long long area() const noexcept {
    if (x_max < x_min || y_max < y_min) return 0;
    return static_cast<long long>(width()) * height();
  }
  bool valid() const noexcept { return x_min <= x_max && y_min <= y_max; }
  bool contains(int x, int y) const noexcept {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
  bool contains(const Box& o) const noexcept {
    return o.x_min >= x_min && o.x_max <= x_max && o.y_min >= y_min && o.y_max <= y_max;
  }
  // Shared pixels; touching-but-disjoint boxes do not overlap.
  bool overlaps(const Box& o) const noexcept {
    return std::max(x_min, o.x_min) <= std::min(x_max, o.x_max) &&
           std::max(y_min, o.y_min) <= std::min(y_max, o.y_max);
  }
  Box united(const Box& o) const noexcept {
    return {std::min(x_min, o.x_min), std::min(y_min, o.y_min), std::max(x_max, o.x_max),
            std::max(y_max, o.y_max)};
  }
  Box intersected(const Box& o) const noexcept {
    return {std::max(x_min, o.x_min), std::max(y_min, o.y_min), std::min(x_max, o.x_max),
            std::min(y_max, o.y_max)};
  }
  Box clamped_to(int width, int height) const noexcept {
    return {std::clamp(x_min, 0, width - 1), std::clamp(y_min, 0, height - 1),
            std::clamp(x_max, 0, width - 1), std::clamp(y_max, 0, height - 1)};
  }

  bool operator==(const Box&) const = default;
  auto operator<=>(const Box&) const = default;
};

template <typename T>
Plane<T> crop(const Plane<T>& src, const Box& box) {
  const Box b = box.clamped_to(src.width(), src.height());
  Plane<T> out(b.width(), b.height());
  for (int y = 0; y < out.height(); ++y) {
    auto s = src.row(b.y_min + y).subspan(static_cast<std::size_t>(b.x_min), static_cast<std::size_t>(b.width()));
    std::copy(s.begin(), s.end(), out.row(y).begin());
  }
  return out;
}

template <typename T>
void fill_box(Plane<T>& img, const Box& box, T value) {
  const Box b = box.clamped_to(img.width(), img.height());
  if (!box.valid() || box.x_max < 0 || box.y_max < 0 || box.x_min >= img.width() || box.y_min >= img.height())
    return;
  for (int y = b.y_min; y <= b.y_max; ++y)
    for (int x = b.x_min; x <= b.x_max; ++x) img(x, y) = value;
}

// Fraction of pixels darker than `threshold`.
inline double ink_fraction(const GrayImage& img, const Box& box, int threshold = 128) {
  const Box b = box.clamped_to(img.width(), img.height());
  long long ink = 0;
  for (int y = b.y_min; y <= b.y_max; ++y)
    for (int x = b.x_min; x <= b.x_max; ++x) ink += img(x, y) < threshold;
  const long long total = b.area();
  return total == 0 ? 0.0 : static_cast<double>(ink) / static_cast<double>(total);
}

// Bounding box of pixels darker than `threshold`, or nullopt-like invalid box.
inline Box ink_bounds(const GrayImage& img, int threshold = 128) {
  Box b{img.width(), img.height(), -1, -1};
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (img(x, y) < threshold) {
        b.x_min = std::min(b.x_min, x);
        b.y_min = std::min(b.y_min, y);
        b.x_max = std::max(b.x_max, x);
        b.y_max = std::max(b.y_max, y);
      }
  return b;
}

}  // namespace tablecut
