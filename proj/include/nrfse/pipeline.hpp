#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "nrfse/error.hpp"
#include "nrfse/fse.hpp"
#include "nrfse/motion.hpp"
#include "nrfse/params.hpp"
#include "nrfse/sampling.hpp"
#include "nrfse/video.hpp"
#include "nrfse/weighting.hpp"
#include "nrfse/window.hpp"

namespace nrfse {

enum class Mode { Bilinear, Fse2D, Fse3D, Fse3DMcw };

inline std::string_view mode_name(Mode mode) noexcept {
  switch (mode) {
    case Mode::Bilinear: return "bilinear";
    case Mode::Fse2D: return "fse2d";
    case Mode::Fse3D: return "fse3d";
    case Mode::Fse3DMcw: return "fse3d-mcw";
  }
  return "unknown";
}

inline Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::Bilinear, Mode::Fse2D, Mode::Fse3D, Mode::Fse3DMcw})
    if (mode_name(m) == name) return m;
  fail(ErrorCode::Config, "unknown mode '" + std::string(name) + "'");
}

struct ReconstructionConfig {
  Mode mode = Mode::Fse3DMcw;
  FseParams fse{};
  WeightParams weight{};
  FlowParams flow{};
  std::vector<std::uint64_t> mask_seeds{1, 2, 3};
  int threads = 1;

  /// FSE parameters actually used; 2-D extrapolation is the one-slice case.
  FseParams effective_fse() const {
    FseParams p = fse;
    if (mode == Mode::Fse2D) {
      p.block.frames = 1;
      p.temporal_window = 1;
    }
    return p;
  }

  void validate() const {
    effective_fse().validate();
    weight.validate();
    if (mode == Mode::Fse3DMcw) {
      flow.validate();
      require(fse.block.frames == 1, ErrorCode::InvalidArgument,
              "motion compensated weighting needs single-frame blocks");
    }
    require(threads >= 1, ErrorCode::InvalidArgument, "threads must be >= 1");
  }
};

struct ScheduledBlock {
  BlockOrigin origin;
  BlockExtent extent;
  std::size_t support = 0;    // mask-true voxels inside the window footprint
  std::size_t footprint = 0;  // window voxels inside the sequence
};

struct BlockSchedule {
  std::vector<ScheduledBlock> blocks;
};

struct FrameRange {
  int first = 0;
  int count = 0;
};

/// Tiles frames [range.first, range.first + range.count) into loss blocks
/// (a smaller rim block where the frame size is not a multiple of the block
/// size) and orders them by decreasing share of sampled voxels in their
/// window footprint. Equal shares keep raster order (t, y, x).
inline BlockSchedule schedule_blocks(const SamplingMask& mask, FrameRange range,
                                     const FseParams& fse) {
  fse.validate();
  require(range.first >= 0 && range.count >= 0 &&
              range.first + range.count <= mask.frames(),
          ErrorCode::InvalidArgument, "frame range outside the mask");
  const int W = mask.width();
  const int H = mask.height();

  // Summed-area table of the (temporally constant) mask pattern.
  std::vector<std::size_t> sat(static_cast<std::size_t>(W + 1) * (H + 1), 0);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      sat[static_cast<std::size_t>(y + 1) * (W + 1) + x + 1] =
          mask(x, y) + sat[static_cast<std::size_t>(y) * (W + 1) + x + 1] +
          sat[static_cast<std::size_t>(y + 1) * (W + 1) + x] -
          sat[static_cast<std::size_t>(y) * (W + 1) + x];
  auto count_in = [&](int x0, int y0, int x1, int y1) -> std::size_t {
    x0 = std::clamp(x0, 0, W), x1 = std::clamp(x1, 0, W);
    y0 = std::clamp(y0, 0, H), y1 = std::clamp(y1, 0, H);
    if (x1 <= x0 || y1 <= y0) return 0;
    auto at = [&](int x, int y) { return sat[static_cast<std::size_t>(y) * (W + 1) + x]; };
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
  };

  const int tb = fse.temporal_border();
  BlockSchedule schedule;
  for (int t = range.first; t < range.first + range.count; t += fse.block.frames) {
    const int bt = std::min(fse.block.frames, range.first + range.count - t);
    for (int y = 0; y < H; y += fse.block.height) {
      const int bh = std::min(fse.block.height, H - y);
      for (int x = 0; x < W; x += fse.block.width) {
        const int bw = std::min(fse.block.width, W - x);
        ScheduledBlock b;
        b.origin = {x, y, t};
        b.extent = {bw, bh, bt};
        const int x0 = std::max(x - fse.border, 0);
        const int y0 = std::max(y - fse.border, 0);
        const int x1 = std::min(x + bw + fse.border, W);
        const int y1 = std::min(y + bh + fse.border, H);
        const int t0 = std::max(t - tb, 0);
        const int t1 = std::min(t + bt + tb, mask.frames());
        const auto slices = static_cast<std::size_t>(t1 - t0);
        b.footprint = static_cast<std::size_t>(x1 - x0) * (y1 - y0) * slices;
        b.support = count_in(x0, y0, x1, y1) * slices;
        schedule.blocks.push_back(b);
      }
    }
  }
  std::stable_sort(schedule.blocks.begin(), schedule.blocks.end(),
                   [](const ScheduledBlock& a, const ScheduledBlock& b) {
                     return a.support * b.footprint > b.support * a.footprint;
                   });
  return schedule;
}

namespace detail {

struct Box {
  int x0, y0, t0, x1, y1, t1;  // half-open

  bool intersects(const Box& o) const noexcept {
    return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1 && t0 < o.t1 &&
           o.t0 < t1;
  }
};

inline Box block_box(const ScheduledBlock& b) {
  return {b.origin.x, b.origin.y, b.origin.t, b.origin.x + b.extent.width,
          b.origin.y + b.extent.height, b.origin.t + b.extent.frames};
}

inline Box window_box(const ScheduledBlock& b, const FseParams& fse) {
  const int tb = fse.temporal_border();
  return {b.origin.x - fse.border, b.origin.y - fse.border, b.origin.t - tb,
          b.origin.x + b.extent.width + fse.border,
          b.origin.y + b.extent.height + fse.border,
          b.origin.t + b.extent.frames + tb};
}

}  // namespace detail

/// Groups the schedule into batches that can run concurrently. A block lands
/// one batch after the latest earlier block whose written block overlaps its
/// window or whose window overlaps its block. Every dependent pair therefore
/// keeps its schedule order, and the result equals sequential processing.
inline std::vector<std::vector<std::size_t>> plan_batches(const BlockSchedule& schedule,
                                                          const FseParams& fse,
                                                          int width, int height,
                                                          int frames) {
  const int gx = (width + fse.block.width - 1) / fse.block.width;
  const int gy = (height + fse.block.height - 1) / fse.block.height;
  const int gt = (frames + fse.block.frames - 1) / fse.block.frames;
  std::vector<int> level_at(static_cast<std::size_t>(gx) * gy * gt, -1);
  std::vector<std::size_t> slot_of(level_at.size(), 0);
  auto cell = [&](int cx, int cy, int ct) {
    return (static_cast<std::size_t>(ct) * gy + cy) * gx + cx;
  };
  const int rx = (fse.border + fse.block.width - 1) / fse.block.width + 1;
  const int ry = (fse.border + fse.block.height - 1) / fse.block.height + 1;
  const int rt = (fse.temporal_border() + fse.block.frames - 1) / fse.block.frames + 1;

  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < schedule.blocks.size(); ++i) {
    const auto& b = schedule.blocks[i];
    const int cx = b.origin.x / fse.block.width;
    const int cy = b.origin.y / fse.block.height;
    const int ct = b.origin.t / fse.block.frames;
    const detail::Box bb = detail::block_box(b);
    const detail::Box bw = detail::window_box(b, fse);
    int level = 0;
    for (int t = std::max(ct - rt, 0); t <= std::min(ct + rt, gt - 1); ++t)
      for (int y = std::max(cy - ry, 0); y <= std::min(cy + ry, gy - 1); ++y)
        for (int x = std::max(cx - rx, 0); x <= std::min(cx + rx, gx - 1); ++x) {
          const std::size_t c = cell(x, y, t);
          if (level_at[c] < 0) continue;
          const auto& a = schedule.blocks[slot_of[c]];
          if (detail::block_box(a).intersects(bw) ||
              detail::window_box(a, fse).intersects(bb))
            level = std::max(level, level_at[c] + 1);
        }
    const std::size_t c = cell(cx, cy, ct);
    level_at[c] = level;
    slot_of[c] = i;
    if (batches.size() <= static_cast<std::size_t>(level)) batches.resize(level + 1);
    batches[static_cast<std::size_t>(level)].push_back(i);
  }
  return batches;
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(threads, 1));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i = next++; i < count && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < std::min(workers, count); ++w) pool.emplace_back(work);
  work();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

struct ReconstructionStats {
  std::size_t blocks = 0;
  std::size_t batches = 0;
  std::size_t empty_support_blocks = 0;
  std::size_t iterations = 0;
};

/// Reconstructs every unsampled pixel of `sampled`. Sampled pixels pass
/// through unchanged. For Fse3DMcw, `flows` may supply precomputed pair
/// flows; otherwise they are estimated on the bilinear initialisation.
inline VideoVolume reconstruct(const VideoVolume& sampled, const SamplingMask& mask,
                               const ReconstructionConfig& config,
                               const FlowCache* flows = nullptr,
                               ReconstructionStats* stats = nullptr) {
  config.validate();
  require(mask.matches(sampled), ErrorCode::DimensionMismatch,
          "mask and sequence differ in shape");

  if (config.mode == Mode::Bilinear) return bilinear_init(sampled, mask);

  const FseParams fse = config.effective_fse();
  std::optional<FlowCache> own_flows;
  if (config.mode == Mode::Fse3DMcw && flows == nullptr) {
    own_flows.emplace(bilinear_init(sampled, mask), config.flow);
    flows = &*own_flows;
  }
  if (config.mode == Mode::Fse3DMcw) {
    require(flows->width() == sampled.width() && flows->height() == sampled.height() &&
                flows->frames() == sampled.frames(),
            ErrorCode::DimensionMismatch, "flow cache differs in shape");
  }

  VideoVolume volume = apply_mask(sampled, mask);
  FlagVolume recon(sampled.width(), sampled.height(), sampled.frames(), 0);

  const BlockSchedule schedule = schedule_blocks(mask, {0, sampled.frames()}, fse);
  const auto batches =
      plan_batches(schedule, fse, sampled.width(), sampled.height(), sampled.frames());

  std::atomic<std::size_t> empty{0}, iterations{0};
  for (const auto& batch : batches) {
    detail::parallel_for(batch.size(), config.threads, [&](std::size_t j) {
      const ScheduledBlock& b = schedule.blocks[batch[j]];
      const ExtrapolationWindow window =
          extract_window(volume, mask, recon, b.origin, b.extent, fse);
      bool has_loss = false;
      for (int t = 0; t < b.extent.frames && !has_loss; ++t)
        for (int y = 0; y < b.extent.height && !has_loss; ++y)
          for (int x = 0; x < b.extent.width && !has_loss; ++x)
            has_loss = !mask(b.origin.x + x, b.origin.y + y, b.origin.t + t);
      if (!has_loss) return;

      WeightVolume weights;
      if (config.mode == Mode::Fse3DMcw) {
        const Rect rect = clip_rect({window.origin.x, window.origin.y,
                                     window.shape.width, window.shape.height},
                                    sampled.width(), sampled.height());
        const int center = b.origin.t + (b.extent.frames - 1) / 2;
        weights = build_weight_volume(
            window, window_motion(*flows, center, rect, window.shape.frames),
            config.weight);
      } else {
        weights = build_weight_volume(window, config.weight);
      }
      const FseResult model = generate_model(window, weights, fse);
      if (model.empty_support) ++empty;
      iterations += static_cast<std::size_t>(model.iterations);
      insert_block(volume, recon, window, model.model, b.extent);
    });
  }

  for (int t = 0; t < volume.frames(); ++t)
    for (int y = 0; y < volume.height(); ++y)
      for (int x = 0; x < volume.width(); ++x)
        require(mask(x, y, t) || recon(x, y, t), ErrorCode::InvalidArgument,
                "pixel left unreconstructed");

  if (stats) {
    stats->blocks = schedule.blocks.size();
    stats->batches = batches.size();
    stats->empty_support_blocks = empty;
    stats->iterations = iterations;
  }
  return volume;
}

}  // namespace nrfse
