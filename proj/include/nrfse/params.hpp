#pragma once

#include <string>

#include "nrfse/error.hpp"

namespace nrfse {

struct BlockExtent {
  int width = 4;
  int height = 4;
  int frames = 1;

  friend bool operator==(const BlockExtent&, const BlockExtent&) = default;
};

// Grid of the discrete Fourier basis used for model generation.
struct FftSize {
  int width = 32;
  int height = 32;
  int frames = 32;

  friend bool operator==(const FftSize&, const FftSize&) = default;
};

/// Parameters of frequency selective extrapolation.
///
/// A loss block of `block` samples is extended by `border` pixels on every
/// spatial side and by (temporal_window - block.frames) / 2 frames on each
/// temporal side to form the extrapolation window.
struct FseParams {
  BlockExtent block{};
  int border = 14;
  FftSize fft{};
  int temporal_window = 5;
  double gamma = 0.5;
  int max_iterations = 100;
  double min_gain = 0.0;

  int temporal_border() const { return (temporal_window - block.frames) / 2; }

  void validate() const {
    require(block.width >= 1 && block.height >= 1 && block.frames >= 1,
            ErrorCode::InvalidArgument, "block extent must be positive");
    require(border >= 0, ErrorCode::InvalidArgument, "border must be >= 0");
    require(temporal_window >= block.frames &&
                (temporal_window - block.frames) % 2 == 0,
            ErrorCode::InvalidArgument,
            "temporal_window must be block.frames plus an even count");
    require(gamma > 0.0 && gamma <= 1.0, ErrorCode::InvalidArgument,
            "gamma must lie in (0, 1]");
    require(max_iterations >= 0, ErrorCode::InvalidArgument,
            "max_iterations must be >= 0");
    require(min_gain >= 0.0, ErrorCode::InvalidArgument, "min_gain must be >= 0");
    require(fft.width >= block.width + 2 * border &&
                fft.height >= block.height + 2 * border,
            ErrorCode::InvalidArgument,
            "spatial fft size must cover block + 2 * border");
    require(fft.frames >= temporal_window, ErrorCode::InvalidArgument,
            "temporal fft size must cover the temporal window");
  }
};

struct WeightParams {
  double rho_hat = 0.7;
  double delta = 0.5;

  void validate() const {
    require(rho_hat > 0.0 && rho_hat < 1.0, ErrorCode::InvalidArgument,
            "rho_hat must lie in (0, 1)");
    require(delta >= 0.0 && delta <= 1.0, ErrorCode::InvalidArgument,
            "delta must lie in [0, 1]");
  }
};

// Farneback flow settings. poly_radius is the half-width of the polynomial
// expansion neighbourhood, window_radius the half-width of the averaging window.
struct FlowParams {
  int levels = 3;
  int window_radius = 7;
  int iterations_per_level = 3;
  int poly_radius = 5;
  double smoothing_sigma = 1.1;

  void validate() const {
    require(levels >= 1 && window_radius >= 1 && iterations_per_level >= 1 &&
                poly_radius >= 1 && smoothing_sigma > 0.0,
            ErrorCode::InvalidArgument, "flow parameters must be positive");
  }
};

}  // namespace nrfse
