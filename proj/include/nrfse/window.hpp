#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nrfse/error.hpp"
#include "nrfse/params.hpp"
#include "nrfse/video.hpp"

namespace nrfse {

struct BlockOrigin {
  int x = 0;
  int y = 0;
  int t = 0;

  friend bool operator==(const BlockOrigin&, const BlockOrigin&) = default;
};

enum class Area : std::uint8_t { Support, Loss, Reconstructed, Outside };

struct WindowShape {
  int width = 0;   // M
  int height = 0;  // N
  int frames = 0;  // P

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(width) * height * frames;
  }
  std::size_t index(int m, int n, int p) const noexcept {
    return (static_cast<std::size_t>(p) * height + n) * width + m;
  }

  friend bool operator==(const WindowShape&, const WindowShape&) = default;
};

/// Extrapolation volume around one loss block: values and area labels.
struct ExtrapolationWindow {
  BlockOrigin origin;  // volume coordinates of window voxel (0, 0, 0)
  WindowShape shape;
  std::vector<double> values;
  std::vector<Area> labels;

  double value(int m, int n, int p) const { return values[shape.index(m, n, p)]; }
  Area label(int m, int n, int p) const { return labels[shape.index(m, n, p)]; }

  std::size_t count(Area area) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), area));
  }
};

inline WindowShape window_shape(const BlockExtent& extent, const FseParams& fse) {
  return {extent.width + 2 * fse.border, extent.height + 2 * fse.border,
          extent.frames + 2 * fse.temporal_border()};
}

/// Cuts the window centred on the block at `block` with extent `extent`.
/// Voxels outside the sequence are labelled Outside and carry value 0.
inline ExtrapolationWindow extract_window(const VideoVolume& volume,
                                          const SamplingMask& mask,
                                          const FlagVolume& recon_flags,
                                          BlockOrigin block,
                                          const BlockExtent& extent,
                                          const FseParams& fse) {
  require(mask.matches(volume) && recon_flags.same_shape(volume),
          ErrorCode::DimensionMismatch,
          "volume, mask and reconstruction flags differ in shape");
  require(extent.width >= 1 && extent.height >= 1 && extent.frames >= 1,
          ErrorCode::InvalidArgument, "block extent must be positive");
  require(volume.contains(block.x, block.y, block.t) &&
              volume.contains(block.x + extent.width - 1,
                              block.y + extent.height - 1,
                              block.t + extent.frames - 1),
          ErrorCode::InvalidArgument, "block lies outside the volume");

  ExtrapolationWindow window;
  window.shape = window_shape(extent, fse);
  window.origin = {block.x - fse.border, block.y - fse.border,
                   block.t - fse.temporal_border()};
  window.values.assign(window.shape.size(), 0.0);
  window.labels.assign(window.shape.size(), Area::Outside);

  const auto& s = window.shape;
  for (int p = 0; p < s.frames; ++p) {
    const int t = window.origin.t + p;
    if (t < 0 || t >= volume.frames()) continue;
    for (int n = 0; n < s.height; ++n) {
      const int y = window.origin.y + n;
      if (y < 0 || y >= volume.height()) continue;
      for (int m = 0; m < s.width; ++m) {
        const int x = window.origin.x + m;
        if (x < 0 || x >= volume.width()) continue;
        const std::size_t i = s.index(m, n, p);
        if (mask(x, y, t)) {
          window.labels[i] = Area::Support;
          window.values[i] = volume(x, y, t);
        } else if (recon_flags(x, y, t)) {
          window.labels[i] = Area::Reconstructed;
          window.values[i] = volume(x, y, t);
        } else {
          window.labels[i] = Area::Loss;
        }
      }
    }
  }
  return window;
}

/// Writes the model into the loss voxels of the central block.
/// Returns the number of voxels written.
inline std::size_t insert_block(VideoVolume& volume, FlagVolume& recon_flags,
                                const ExtrapolationWindow& window,
                                std::span<const double> model,
                                const BlockExtent& extent) {
  const auto& s = window.shape;
  require(model.size() == s.size(), ErrorCode::DimensionMismatch,
          "model size differs from window size");
  require(recon_flags.same_shape(volume), ErrorCode::DimensionMismatch,
          "reconstruction flags differ in shape from volume");
  require(extent.width <= s.width && extent.height <= s.height &&
              extent.frames <= s.frames,
          ErrorCode::DimensionMismatch, "block extent exceeds window");

  const int m0 = (s.width - extent.width) / 2;
  const int n0 = (s.height - extent.height) / 2;
  const int p0 = (s.frames - extent.frames) / 2;
  std::size_t written = 0;
  for (int p = p0; p < p0 + extent.frames; ++p) {
    for (int n = n0; n < n0 + extent.height; ++n) {
      for (int m = m0; m < m0 + extent.width; ++m) {
        const std::size_t i = s.index(m, n, p);
        if (window.labels[i] != Area::Loss) continue;
        const int x = window.origin.x + m;
        const int y = window.origin.y + n;
        const int t = window.origin.t + p;
        volume(x, y, t) = std::clamp(model[i], 0.0, 255.0);
        recon_flags(x, y, t) = 1;
        ++written;
      }
    }
  }
  return written;
}

}  // namespace nrfse
