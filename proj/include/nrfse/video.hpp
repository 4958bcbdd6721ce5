#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nrfse/error.hpp"

namespace nrfse {

/// Dense x-fastest, then y, then t storage of a scalar field over a sequence.
template <typename T>
class Volume {
 public:
  using value_type = T;

  Volume() = default;

  Volume(int width, int height, int frames, T fill = T{})
      : width_(width), height_(height), frames_(frames) {
    require(width >= 1 && height >= 1 && frames >= 1,
            ErrorCode::InvalidArgument, "volume dimensions must be >= 1");
    data_.assign(static_cast<std::size_t>(width) * height * frames, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int frames() const noexcept { return frames_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t frame_size() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(int x, int y, int t) const noexcept {
    return (static_cast<std::size_t>(t) * height_ + y) * width_ + x;
  }

  bool contains(int x, int y, int t) const noexcept {
    return x >= 0 && y >= 0 && t >= 0 && x < width_ && y < height_ &&
           t < frames_;
  }

  T& operator()(int x, int y, int t) noexcept { return data_[index(x, y, t)]; }
  const T& operator()(int x, int y, int t) const noexcept {
    return data_[index(x, y, t)];
  }

  std::span<T> frame(int t) noexcept {
    return {data_.data() + static_cast<std::size_t>(t) * frame_size(),
            frame_size()};
  }
  std::span<const T> frame(int t) const noexcept {
    return {data_.data() + static_cast<std::size_t>(t) * frame_size(),
            frame_size()};
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  template <typename U>
  bool same_shape(const Volume<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height() &&
           frames_ == other.frames();
  }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int frames_ = 0;
  std::vector<T> data_;
};

using VideoVolume = Volume<double>;
using FlagVolume = Volume<std::uint8_t>;

inline void clamp_samples(VideoVolume& volume) {
  for (double& v : volume.values()) v = std::clamp(v, 0.0, 255.0);
}

/// Binary sensor mask. The pattern is stored once and repeated over all
/// frames, so temporal constancy holds by construction.
class SamplingMask {
 public:
  SamplingMask() = default;

  SamplingMask(int width, int height, int frames,
               std::vector<std::uint8_t> pattern)
      : width_(width), height_(height), frames_(frames),
        pattern_(std::move(pattern)) {
    require(width >= 1 && height >= 1 && frames >= 1,
            ErrorCode::InvalidArgument, "mask dimensions must be >= 1");
    require(pattern_.size() == static_cast<std::size_t>(width) * height,
            ErrorCode::DimensionMismatch, "mask pattern size != width * height");
    for (auto& bit : pattern_) bit = bit ? 1 : 0;
  }

  static SamplingMask filled(int width, int height, int frames, bool value) {
    return SamplingMask(
        width, height, frames,
        std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height,
                                  value ? 1 : 0));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int frames() const noexcept { return frames_; }

  bool operator()(int x, int y, int /*t*/ = 0) const noexcept {
    return pattern_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }

  std::span<const std::uint8_t> pattern() const noexcept { return pattern_; }

  template <typename T>
  bool matches(const Volume<T>& volume) const noexcept {
    return width_ == volume.width() && height_ == volume.height() &&
           frames_ == volume.frames();
  }

  std::size_t count() const noexcept {
    std::size_t per_frame = 0;
    for (auto bit : pattern_) per_frame += bit;
    return per_frame * static_cast<std::size_t>(frames_);
  }

  double density() const noexcept {
    return static_cast<double>(count()) /
           (static_cast<double>(pattern_.size()) * frames_);
  }

  // True when every disjoint 2x2 block holds exactly one active pixel.
  bool one_per_quad() const noexcept {
    if (width_ % 2 != 0 || height_ % 2 != 0) return false;
    for (int y = 0; y < height_; y += 2) {
      for (int x = 0; x < width_; x += 2) {
        int n = (*this)(x, y) + (*this)(x + 1, y) + (*this)(x, y + 1) +
                (*this)(x + 1, y + 1);
        if (n != 1) return false;
      }
    }
    return true;
  }

  friend bool operator==(const SamplingMask&, const SamplingMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int frames_ = 0;
  std::vector<std::uint8_t> pattern_;
};

}  // namespace nrfse
