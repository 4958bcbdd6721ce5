#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nrfse/error.hpp"
#include "nrfse/video.hpp"

namespace nrfse {

struct MaskSeed {
  std::uint64_t value = 0;
};

/// Quarter-density sensor mask: each 2x2 block keeps one pixel, picked
/// uniformly at random. Blocks are visited in raster order and each draw
/// takes the top two bits of a mt19937_64 output, which is bit-exact across
/// standard library implementations.
inline SamplingMask generate_quadrant_mask(int width, int height, int frames,
                                           MaskSeed seed) {
  require(width >= 2 && height >= 2 && frames >= 1, ErrorCode::InvalidArgument,
          "mask dimensions too small");
  require(width % 2 == 0 && height % 2 == 0, ErrorCode::InvalidArgument,
          "mask width and height must be even");

  std::mt19937_64 engine(seed.value);
  std::vector<std::uint8_t> pattern(static_cast<std::size_t>(width) * height, 0);
  for (int by = 0; by < height; by += 2) {
    for (int bx = 0; bx < width; bx += 2) {
      const auto quadrant = static_cast<int>(engine() >> 62);
      const int x = bx + (quadrant & 1);
      const int y = by + (quadrant >> 1);
      pattern[static_cast<std::size_t>(y) * width + x] = 1;
    }
  }
  return SamplingMask(width, height, frames, std::move(pattern));
}

/// Pointwise product of sequence and mask; unsampled positions become 0.
inline VideoVolume apply_mask(const VideoVolume& volume, const SamplingMask& mask) {
  require(mask.matches(volume), ErrorCode::DimensionMismatch,
          "mask and volume differ in shape");
  VideoVolume out(volume.width(), volume.height(), volume.frames(), 0.0);
  for (int t = 0; t < volume.frames(); ++t)
    for (int y = 0; y < volume.height(); ++y)
      for (int x = 0; x < volume.width(); ++x)
        if (mask(x, y, t)) out(x, y, t) = volume(x, y, t);
  return out;
}

// Mask file: "NRMASK <w> <h> <frames>\n" followed by w*h bytes '0'/'1' of
// frame 0 in row-major order.
inline void write_mask(std::ostream& os, const SamplingMask& mask) {
  os << "NRMASK " << mask.width() << ' ' << mask.height() << ' '
     << mask.frames() << '\n';
  std::string bits(mask.pattern().size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (mask.pattern()[i]) bits[i] = '1';
  os.write(bits.data(), static_cast<std::streamsize>(bits.size()));
  if (!os) fail(ErrorCode::Io, "failed writing mask");
}

inline SamplingMask read_mask(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) fail(ErrorCode::Io, "empty mask file");
  std::istringstream hs(header);
  std::string magic;
  int width = 0, height = 0, frames = 0;
  hs >> magic >> width >> height >> frames;
  require(hs && magic == "NRMASK", ErrorCode::Io, "malformed mask header");
  require(width >= 1 && height >= 1 && frames >= 1, ErrorCode::Io,
          "mask header has invalid dimensions");

  std::string bits(static_cast<std::size_t>(width) * height, '\0');
  is.read(bits.data(), static_cast<std::streamsize>(bits.size()));
  require(static_cast<std::size_t>(is.gcount()) == bits.size(), ErrorCode::Io,
          "mask file truncated");
  std::vector<std::uint8_t> pattern(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    require(bits[i] == '0' || bits[i] == '1', ErrorCode::Io,
            "mask body must contain only '0' and '1'");
    pattern[i] = bits[i] == '1';
  }
  return SamplingMask(width, height, frames, std::move(pattern));
}

}  // namespace nrfse
