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
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "tablecut/image_prep.hpp"

namespace tablecut {

class IoError : public Error {
 public:
  using Error::Error;
};

// Decodes any format OpenCV reads into an RGB(A) or gray raster.
inline Raster decode_raster(const std::vector<std::uint8_t>& encoded, const std::string& what = "image") {
  if (encoded.empty()) throw InputFormatError(what + ": empty file");
  cv::Mat m = cv::imdecode(encoded, cv::IMREAD_UNCHANGED);
  if (m.empty()) throw InputFormatError(what + ": not a decodable image");
  if (m.depth() != CV_8U) {
    cv::Mat scaled;
    const double f = m.depth() == CV_16U ? 1.0 / 257.0 : 1.0;
    m.convertTo(scaled, CV_8U, f);
    m = scaled;
  }
  Raster r;
  r.width = m.cols;
  r.height = m.rows;
  r.channels = m.channels();
  if (r.channels == 3) cv::cvtColor(m, m, cv::COLOR_BGR2RGB);
  else if (r.channels == 4) cv::cvtColor(m, m, cv::COLOR_BGRA2RGBA);
  else if (r.channels != 1) throw InputFormatError(what + ": unsupported channel count " + std::to_string(r.channels));
  if (!m.isContinuous()) m = m.clone();
  r.bytes.assign(m.data, m.data + m.total() * m.elemSize());
  return r;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError(path.string() + ": " + ec.message());
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  std::FILE* f = std::fopen(path.string().c_str(), "rb");
  if (!f) throw IoError(path.string() + ": cannot open");
  const std::size_t got = bytes.empty() ? 0 : std::fread(bytes.data(), 1, bytes.size(), f);
  std::fclose(f);
  if (got != bytes.size()) throw IoError(path.string() + ": short read");
  return bytes;
}

inline GrayImage load_gray(const std::filesystem::path& path) {
  return to_grayscale(decode_raster(read_file_bytes(path), path.string()));
}

inline std::vector<std::uint8_t> encode_png(const GrayImage& img) {
  const cv::Mat m(img.height(), img.width(), CV_8UC1, const_cast<std::uint8_t*>(img.data().data()));
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", m, out)) throw IoError("PNG encoding failed");
  return out;
}

// Interleaved RGB, 3 bytes per pixel.
struct ColorImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  ColorImage() = default;
  explicit ColorImage(const GrayImage& g) : width(g.width()), height(g.height()), rgb(g.size() * 3) {
    for (std::size_t i = 0; i < g.size(); ++i) rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = g.data()[i];
  }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    auto* p = &rgb[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3];
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
};

inline std::vector<std::uint8_t> encode_png(const ColorImage& img) {
  cv::Mat m(img.height, img.width, CV_8UC3, const_cast<std::uint8_t*>(img.rgb.data()));
  cv::Mat bgr;
  cv::cvtColor(m, bgr, cv::COLOR_RGB2BGR);
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", bgr, out)) throw IoError("PNG encoding failed");
  return out;
}

inline void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw IoError(path.string() + ": cannot open for writing");
  const std::size_t put = bytes.empty() ? 0 : std::fwrite(bytes.data(), 1, bytes.size(), f);
  const bool closed = std::fclose(f) == 0;
  if (put != bytes.size() || !closed) throw IoError(path.string() + ": write failed");
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

inline void save_png(const std::filesystem::path& path, const GrayImage& img) { write_file_bytes(path, encode_png(img)); }
inline void save_png(const std::filesystem::path& path, const ColorImage& img) { write_file_bytes(path, encode_png(img)); }

}  // namespace tablecut
