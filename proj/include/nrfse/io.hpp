#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <openssl/evp.h>

#include "nrfse/error.hpp"
#include "nrfse/video.hpp"

namespace nrfse::io {

enum class PixelFormat { Gray8, Yuv420 };

inline PixelFormat parse_pixel_format(std::string_view name) {
  if (name == "gray" || name == "gray8") return PixelFormat::Gray8;
  if (name == "yuv420" || name == "yuv420p") return PixelFormat::Yuv420;
  fail(ErrorCode::Config, "unknown pixel format '" + std::string(name) + "'");
}

inline std::string_view pixel_format_name(PixelFormat f) {
  return f == PixelFormat::Gray8 ? "gray" : "yuv420";
}

inline std::size_t frame_bytes(int width, int height, PixelFormat format) {
  const std::size_t luma = static_cast<std::size_t>(width) * height;
  if (format == PixelFormat::Gray8) return luma;
  return luma + 2 * static_cast<std::size_t>((width + 1) / 2) * ((height + 1) / 2);
}

/// Reads the luma plane of up to `max_frames` frames (0 = all) of a raw
/// planar 8-bit file.
inline VideoVolume read_raw_video(const std::filesystem::path& path, int width,
                                  int height, int max_frames, PixelFormat format) {
  require(width >= 1 && height >= 1, ErrorCode::Config,
          "raw video needs positive width and height");
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  const std::size_t per_frame = frame_bytes(width, height, format);
  int available = static_cast<int>(bytes / per_frame);
  require(available >= 1, ErrorCode::Io,
          "'" + path.string() + "' holds no complete frame");
  const int frames = max_frames > 0 ? std::min(available, max_frames) : available;

  VideoVolume out(width, height, frames);
  std::vector<unsigned char> buf(per_frame);
  for (int t = 0; t < frames; ++t) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(per_frame));
    if (!in) fail(ErrorCode::Io, "short read from '" + path.string() + "'");
    auto f = out.frame(t);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = buf[i];
  }
  return out;
}

inline unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 255.0)));
}

/// Writes rounded 8-bit luma; yuv420 output gets neutral chroma planes.
inline void write_raw_video(const std::filesystem::path& path, const VideoVolume& video,
                            PixelFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot create '" + path.string() + "'");
  const std::size_t per_frame = frame_bytes(video.width(), video.height(), format);
  std::vector<unsigned char> buf(per_frame, 128);
  for (int t = 0; t < video.frames(); ++t) {
    const auto f = video.frame(t);
    for (std::size_t i = 0; i < f.size(); ++i) buf[i] = to_byte(f[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(per_frame));
  }
  if (!out) fail(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

// Expands a printf-style frame pattern such as "frame_%04d.pgm".
inline std::string frame_path(const std::string& pattern, int index) {
  const int n = std::snprintf(nullptr, 0, pattern.c_str(), index);
  require(n >= 0, ErrorCode::Config, "bad frame pattern '" + pattern + "'");
  std::string out(static_cast<std::size_t>(n) + 1, '\0');
  std::snprintf(out.data(), out.size(), pattern.c_str(), index);
  out.resize(static_cast<std::size_t>(n));
  return out;
}

/// Reads consecutive graymaps from `pattern`, starting at `first`, until a
/// file is missing or `max_frames` (0 = unbounded) frames were read.
inline VideoVolume read_pgm_sequence(const std::string& pattern, int first,
                                     int max_frames) {
  std::vector<cv::Mat> frames;
  for (int i = first; max_frames <= 0 || static_cast<int>(frames.size()) < max_frames; ++i) {
    const std::string p = frame_path(pattern, i);
    if (!std::filesystem::exists(p)) break;
    cv::Mat img = cv::imread(p, cv::IMREAD_GRAYSCALE);
    require(!img.empty(), ErrorCode::Io, "cannot decode '" + p + "'");
    require(frames.empty() || img.size() == frames.front().size(),
            ErrorCode::DimensionMismatch, "frame size changes at '" + p + "'");
    frames.push_back(std::move(img));
  }
  require(!frames.empty(), ErrorCode::Io,
          "no frames found for pattern '" + pattern + "'");
  VideoVolume out(frames.front().cols, frames.front().rows,
                  static_cast<int>(frames.size()));
  for (int t = 0; t < out.frames(); ++t)
    for (int y = 0; y < out.height(); ++y) {
      const auto* row = frames[static_cast<std::size_t>(t)].ptr<unsigned char>(y);
      for (int x = 0; x < out.width(); ++x) out(x, y, t) = row[x];
    }
  return out;
}

inline void write_pgm_sequence(const std::string& pattern, int first,
                               const VideoVolume& video) {
  for (int t = 0; t < video.frames(); ++t) {
    cv::Mat img(video.height(), video.width(), CV_8U);
    for (int y = 0; y < video.height(); ++y) {
      auto* row = img.ptr<unsigned char>(y);
      for (int x = 0; x < video.width(); ++x) row[x] = to_byte(video(x, y, t));
    }
    const std::string p = frame_path(pattern, first + t);
    require(cv::imwrite(p, img), ErrorCode::Io, "cannot write '" + p + "'");
  }
}

/// Lowercase hex SHA-256 of a file.
inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  require(ctx != nullptr, ErrorCode::Io, "digest context allocation failed");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

}  // namespace nrfse::io
