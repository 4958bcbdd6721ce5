#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "nrfse/error.hpp"
#include "nrfse/params.hpp"
#include "nrfse/window.hpp"

namespace nrfse {

/// Averaged displacement of each temporal slice relative to the centre frame.
struct SliceMotion {
  std::vector<double> vx;
  std::vector<double> vy;

  static SliceMotion zero(int frames) {
    return {std::vector<double>(static_cast<std::size_t>(frames), 0.0),
            std::vector<double>(static_cast<std::size_t>(frames), 0.0)};
  }

  int size() const noexcept { return static_cast<int>(vx.size()); }
};

struct WeightVolume {
  WindowShape shape;
  std::vector<double> w;

  double at(int m, int n, int p) const { return w[shape.index(m, n, p)]; }
};

namespace detail {

inline double decay(double rho_hat, double dx, double dy, double dt) {
  return std::pow(rho_hat, std::sqrt(dx * dx + dy * dy + dt * dt));
}

}  // namespace detail

// rho_hat to the power of the distance from the window centre.
inline double rho_static(int m, int n, int p, const WindowShape& shape,
                         const WeightParams& params) {
  const double dx = m - (shape.width - 1) / 2.0;
  const double dy = n - (shape.height - 1) / 2.0;
  const double dt = p - (shape.frames - 1) / 2.0;
  return detail::decay(params.rho_hat, dx, dy, dt);
}

// Same decay, with the spatial centre of slice p moved by the slice motion.
// The temporal term is never shifted.
inline double rho_mc(int m, int n, int p, const WindowShape& shape,
                     const SliceMotion& motion, const WeightParams& params) {
  const double dx = m - (shape.width - 1) / 2.0;
  const double dy = n - (shape.height - 1) / 2.0;
  const double dt = p - (shape.frames - 1) / 2.0;
  return detail::decay(params.rho_hat, dx - motion.vx[p], dy - motion.vy[p], dt);
}

namespace detail {

template <typename Rho>
WeightVolume build_weights(const ExtrapolationWindow& window,
                           const WeightParams& params, Rho rho) {
  params.validate();
  const auto& s = window.shape;
  require(window.labels.size() == s.size(), ErrorCode::DimensionMismatch,
          "window labels not populated");
  WeightVolume out{s, std::vector<double>(s.size(), 0.0)};
  for (int p = 0; p < s.frames; ++p)
    for (int n = 0; n < s.height; ++n)
      for (int m = 0; m < s.width; ++m) {
        const std::size_t i = s.index(m, n, p);
        switch (window.labels[i]) {
          case Area::Support: out.w[i] = rho(m, n, p); break;
          case Area::Reconstructed: out.w[i] = params.delta * rho(m, n, p); break;
          case Area::Loss:
          case Area::Outside: break;
        }
      }
  return out;
}

}  // namespace detail

/// Static weighting: rho on support, delta * rho on reconstructed voxels,
/// zero on loss and outside voxels.
inline WeightVolume build_weight_volume(const ExtrapolationWindow& window,
                                        const WeightParams& params) {
  return detail::build_weights(window, params, [&](int m, int n, int p) {
    return rho_static(m, n, p, window.shape, params);
  });
}

/// Motion compensated weighting: the decay maximum of slice p follows
/// (motion.vx[p], motion.vy[p]).
inline WeightVolume build_weight_volume(const ExtrapolationWindow& window,
                                        const SliceMotion& motion,
                                        const WeightParams& params) {
  require(motion.size() == window.shape.frames &&
              motion.vy.size() == motion.vx.size(),
          ErrorCode::DimensionMismatch, "slice motion length != window frames");
  return detail::build_weights(window, params, [&](int m, int n, int p) {
    return rho_mc(m, n, p, window.shape, motion, params);
  });
}

}  // namespace nrfse
