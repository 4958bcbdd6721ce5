#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/video/tracking.hpp>

#include "nrfse/error.hpp"
#include "nrfse/params.hpp"
#include "nrfse/video.hpp"
#include "nrfse/weighting.hpp"

namespace nrfse {

/// Read-only view of one frame, x fastest.
struct FrameView {
  int width = 0;
  int height = 0;
  std::span<const double> samples;

  static FrameView of(const VideoVolume& volume, int t) {
    return {volume.width(), volume.height(), volume.frame(t)};
  }
};

/// Dense per-pixel displacement between two frames.
struct VectorField {
  int width = 0;
  int height = 0;
  std::vector<float> vx;
  std::vector<float> vy;

  VectorField() = default;
  VectorField(int w, int h)
      : width(w), height(h),
        vx(static_cast<std::size_t>(w) * h, 0.0f),
        vy(static_cast<std::size_t>(w) * h, 0.0f) {}

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width + x;
  }
};

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

struct MotionVector {
  double x = 0.0;
  double y = 0.0;
};

// Intersection of r with [0, width) x [0, height).
inline Rect clip_rect(const Rect& r, int width, int height) {
  const int x0 = std::max(r.x, 0);
  const int y0 = std::max(r.y, 0);
  const int x1 = std::min(r.x + r.width, width);
  const int y1 = std::min(r.y + r.height, height);
  return {x0, y0, std::max(x1 - x0, 0), std::max(y1 - y0, 0)};
}

/// Fills every unsampled pixel from the nearest sample to the left, right,
/// above and below it in the same frame, weighted by inverse distance.
/// Sampled pixels are copied unchanged.
inline VideoVolume bilinear_init(const VideoVolume& sampled,
                                 const SamplingMask& mask) {
  require(mask.matches(sampled), ErrorCode::DimensionMismatch,
          "mask and volume differ in shape");
  const int w = sampled.width();
  const int h = sampled.height();
  require(mask.count() > 0, ErrorCode::InvalidArgument,
          "frame has no available samples");

  // Nearest sampled coordinate in each axis direction, -1 when none.
  const std::size_t npix = static_cast<std::size_t>(w) * h;
  std::vector<int> left(npix, -1), right(npix, -1), up(npix, -1), down(npix, -1);
  for (int y = 0; y < h; ++y) {
    int last = -1;
    for (int x = 0; x < w; ++x) {
      left[static_cast<std::size_t>(y) * w + x] = last;
      if (mask(x, y)) last = x;
    }
    last = -1;
    for (int x = w - 1; x >= 0; --x) {
      right[static_cast<std::size_t>(y) * w + x] = last;
      if (mask(x, y)) last = x;
    }
  }
  for (int x = 0; x < w; ++x) {
    int last = -1;
    for (int y = 0; y < h; ++y) {
      up[static_cast<std::size_t>(y) * w + x] = last;
      if (mask(x, y)) last = y;
    }
    last = -1;
    for (int y = h - 1; y >= 0; --y) {
      down[static_cast<std::size_t>(y) * w + x] = last;
      if (mask(x, y)) last = y;
    }
  }

  VideoVolume out = sampled;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask(x, y)) continue;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      struct Tap { int x, y; double weight; };
      Tap taps[4];
      int ntaps = 0;
      if (left[i] >= 0) taps[ntaps++] = {left[i], y, 1.0 / (x - left[i])};
      if (right[i] >= 0) taps[ntaps++] = {right[i], y, 1.0 / (right[i] - x)};
      if (up[i] >= 0) taps[ntaps++] = {x, up[i], 1.0 / (y - up[i])};
      if (down[i] >= 0) taps[ntaps++] = {x, down[i], 1.0 / (down[i] - y)};

      if (ntaps == 0) {
        // No sample on this row or column: take the closest sample anywhere.
        long best = std::numeric_limits<long>::max();
        for (int yy = 0; yy < h; ++yy)
          for (int xx = 0; xx < w; ++xx) {
            if (!mask(xx, yy)) continue;
            const long d = static_cast<long>(xx - x) * (xx - x) +
                           static_cast<long>(yy - y) * (yy - y);
            if (d < best) {
              best = d;
              taps[0] = {xx, yy, 1.0};
            }
          }
        ntaps = 1;
      }

      double wsum = 0.0;
      for (int k = 0; k < ntaps; ++k) wsum += taps[k].weight;
      for (int t = 0; t < sampled.frames(); ++t) {
        double acc = 0.0;
        for (int k = 0; k < ntaps; ++k)
          acc += taps[k].weight * sampled(taps[k].x, taps[k].y, t);
        out(x, y, t) = acc / wsum;
      }
    }
  }
  return out;
}

/// Dense Farneback flow from frame_a to frame_b: the content at (x, y) in
/// frame_a is found near (x + vx, y + vy) in frame_b.
inline VectorField estimate_flow(const FrameView& frame_a, const FrameView& frame_b,
                                 const FlowParams& params) {
  params.validate();
  require(frame_a.width == frame_b.width && frame_a.height == frame_b.height,
          ErrorCode::DimensionMismatch, "flow frames differ in size");
  const int neighbourhood = 2 * params.poly_radius + 1;
  require(frame_a.width >= neighbourhood && frame_a.height >= neighbourhood,
          ErrorCode::InvalidArgument,
          "frame smaller than the polynomial expansion neighbourhood");

  auto to_mat = [](const FrameView& f) {
    cv::Mat m(f.height, f.width, CV_32F);
    for (int y = 0; y < f.height; ++y) {
      auto* row = m.ptr<float>(y);
      for (int x = 0; x < f.width; ++x)
        row[x] = static_cast<float>(f.samples[static_cast<std::size_t>(y) * f.width + x]);
    }
    return m;
  };

  const cv::Mat a = to_mat(frame_a);
  const cv::Mat b = to_mat(frame_b);
  cv::Mat flow;
  cv::calcOpticalFlowFarneback(a, b, flow, 0.5, params.levels,
                               2 * params.window_radius + 1,
                               params.iterations_per_level, params.poly_radius,
                               params.smoothing_sigma, 0);

  VectorField field(frame_a.width, frame_a.height);
  for (int y = 0; y < field.height; ++y) {
    const auto* row = flow.ptr<cv::Vec2f>(y);
    for (int x = 0; x < field.width; ++x) {
      field.vx[field.index(x, y)] = row[x][0];
      field.vy[field.index(x, y)] = row[x][1];
    }
  }
  return field;
}

/// Mean vector over a rectangle of the field.
inline MotionVector slice_average(const VectorField& field, const Rect& rect) {
  require(rect.width > 0 && rect.height > 0, ErrorCode::InvalidArgument,
          "empty averaging rectangle");
  require(rect.x >= 0 && rect.y >= 0 && rect.x + rect.width <= field.width &&
              rect.y + rect.height <= field.height,
          ErrorCode::InvalidArgument, "averaging rectangle outside field");
  double sx = 0.0;
  double sy = 0.0;
  for (int y = rect.y; y < rect.y + rect.height; ++y)
    for (int x = rect.x; x < rect.x + rect.width; ++x) {
      sx += field.vx[field.index(x, y)];
      sy += field.vy[field.index(x, y)];
    }
  const double n = static_cast<double>(rect.width) * rect.height;
  return {sx / n, sy / n};
}

/// Forward flows between adjacent frames (t -> t + 1), computed on first use.
/// Each pair is estimated once on full frames; concurrent readers are safe.
class FlowCache {
 public:
  FlowCache(VideoVolume interpolated, FlowParams params)
      : frames_(std::move(interpolated)), params_(params),
        pairs_(static_cast<std::size_t>(std::max(frames_.frames() - 1, 0))),
        once_(std::make_unique<std::once_flag[]>(pairs_.size() + 1)) {
    params_.validate();
  }

  /// Cache over precomputed pair fields; fields[t] maps frame t to t + 1.
  static FlowCache from_fields(int width, int height,
                               std::vector<VectorField> fields) {
    const int frames = static_cast<int>(fields.size()) + 1;
    FlowCache cache(VideoVolume(width, height, frames), FlowParams{});
    for (std::size_t t = 0; t < fields.size(); ++t) {
      require(fields[t].width == width && fields[t].height == height,
              ErrorCode::DimensionMismatch, "flow field size mismatch");
      std::call_once(cache.once_[t], [&] {
        cache.pairs_[t] = std::move(fields[t]);
      });
    }
    return cache;
  }

  int frames() const noexcept { return frames_.frames(); }
  int width() const noexcept { return frames_.width(); }
  int height() const noexcept { return frames_.height(); }

  const VectorField& pair(int t) const {
    require(t >= 0 && static_cast<std::size_t>(t) < pairs_.size(),
            ErrorCode::InvalidArgument, "flow pair index out of range");
    std::call_once(once_[static_cast<std::size_t>(t)], [&] {
      pairs_[static_cast<std::size_t>(t)] =
          estimate_flow(FrameView::of(frames_, t), FrameView::of(frames_, t + 1),
                        params_);
    });
    return pairs_[static_cast<std::size_t>(t)];
  }

 private:
  VideoVolume frames_;
  FlowParams params_;
  mutable std::vector<VectorField> pairs_;
  std::unique_ptr<std::once_flag[]> once_;
};

/// Per-slice displacement of the window content relative to `center_frame`.
///
/// Slice p covers frame center_frame + p - (P - 1) / 2. Adjacent forward
/// flows are averaged over `rect` and summed outward from the centre, with
/// negated sign for slices before the centre. Slices outside the sequence
/// and the centre slice get zero motion.
inline SliceMotion window_motion(const FlowCache& flows, int center_frame,
                                 const Rect& rect, int frames_in_window) {
  require(frames_in_window >= 1 && frames_in_window % 2 == 1,
          ErrorCode::InvalidArgument, "temporal window must be odd");
  require(center_frame >= 0 && center_frame < flows.frames(),
          ErrorCode::InvalidArgument, "centre frame out of range");
  const int half = (frames_in_window - 1) / 2;
  SliceMotion motion = SliceMotion::zero(frames_in_window);

  MotionVector acc;
  for (int d = 1; d <= half && center_frame + d < flows.frames(); ++d) {
    const MotionVector v = slice_average(flows.pair(center_frame + d - 1), rect);
    acc.x += v.x;
    acc.y += v.y;
    motion.vx[static_cast<std::size_t>(half + d)] = acc.x;
    motion.vy[static_cast<std::size_t>(half + d)] = acc.y;
  }
  acc = {};
  for (int d = 1; d <= half && center_frame - d >= 0; ++d) {
    const MotionVector v = slice_average(flows.pair(center_frame - d), rect);
    acc.x -= v.x;
    acc.y -= v.y;
    motion.vx[static_cast<std::size_t>(half - d)] = acc.x;
    motion.vy[static_cast<std::size_t>(half - d)] = acc.y;
  }
  return motion;
}

inline SliceMotion window_motion(const VideoVolume& interpolated, int center_frame,
                                 const Rect& rect, int frames_in_window,
                                 const FlowParams& params) {
  FlowCache cache(interpolated, params);
  return window_motion(cache, center_frame, rect, frames_in_window);
}

// Flow dump: "FLOW <w> <h>\n" then row-major (vx, vy) float32 pairs.
inline void write_flow(std::ostream& os, const VectorField& field) {
  os << "FLOW " << field.width << ' ' << field.height << '\n';
  std::vector<float> interleaved(field.vx.size() * 2);
  for (std::size_t i = 0; i < field.vx.size(); ++i) {
    interleaved[2 * i] = field.vx[i];
    interleaved[2 * i + 1] = field.vy[i];
  }
  os.write(reinterpret_cast<const char*>(interleaved.data()),
           static_cast<std::streamsize>(interleaved.size() * sizeof(float)));
  if (!os) fail(ErrorCode::Io, "failed writing flow field");
}

inline VectorField read_flow(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) fail(ErrorCode::Io, "empty flow file");
  std::istringstream hs(header);
  std::string magic;
  int w = 0, h = 0;
  hs >> magic >> w >> h;
  require(hs && magic == "FLOW" && w > 0 && h > 0, ErrorCode::Io,
          "malformed flow header");
  VectorField field(w, h);
  std::vector<float> interleaved(field.vx.size() * 2);
  is.read(reinterpret_cast<char*>(interleaved.data()),
          static_cast<std::streamsize>(interleaved.size() * sizeof(float)));
  require(static_cast<std::size_t>(is.gcount()) ==
              interleaved.size() * sizeof(float),
          ErrorCode::Io, "flow file truncated");
  for (std::size_t i = 0; i < field.vx.size(); ++i) {
    field.vx[i] = interleaved[2 * i];
    field.vy[i] = interleaved[2 * i + 1];
  }
  return field;
}

}  // namespace nrfse
