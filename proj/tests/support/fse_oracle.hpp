#pragma once

// Spatial-domain matching pursuit over the same Fourier basis as the
// frequency-domain model generator. Everything is evaluated explicitly:
// basis functions, weighted inner products and the residual. Slow, and
// only meant for small windows in tests.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "nrfse/fse.hpp"

namespace nrfse::fixtures {

inline std::vector<double> oracle_matching_pursuit(const ExtrapolationWindow& window,
                                                   const WeightVolume& weights,
                                                   const FseParams& params) {
  using C = std::complex<double>;
  const WindowShape& s = window.shape;
  const int Mf = params.fft.width;
  const int Nf = params.fft.height;
  const int Pf = params.fft.frames;
  const std::size_t voxels = s.size();

  std::vector<double> model(voxels, 0.0);
  double weight_sum = 0.0;
  for (double w : weights.w) weight_sum += w;
  if (weight_sum <= 0.0) return model;

  std::vector<double> residual(voxels);
  for (std::size_t i = 0; i < voxels; ++i)
    residual[i] = weights.w[i] > 0.0 ? window.values[i] : 0.0;

  // phi_k(m, n, p) = exp(2 pi i (u m / Mf + v n / Nf + w p / Pf)), built as a
  // product of per-axis exponentials.
  auto axis_table = [](int period, int extent) {
    std::vector<C> table(static_cast<std::size_t>(period) * extent);
    for (int f = 0; f < period; ++f)
      for (int x = 0; x < extent; ++x) {
        const double phase = 2.0 * std::numbers::pi * f * x / period;
        table[static_cast<std::size_t>(f) * extent + x] = {std::cos(phase), std::sin(phase)};
      }
    return table;
  };
  const auto ex = axis_table(Mf, s.width);
  const auto ey = axis_table(Nf, s.height);
  const auto et = axis_table(Pf, s.frames);
  auto basis = [&](int u, int v, int w, int m, int n, int p) {
    return ex[static_cast<std::size_t>(u) * s.width + m] *
           ey[static_cast<std::size_t>(v) * s.height + n] *
           et[static_cast<std::size_t>(w) * s.frames + p];
  };

  for (int it = 0; it < params.max_iterations; ++it) {
    double best = -1.0;
    int bu = 0, bv = 0, bw = 0;
    C best_proj;
    for (int w = 0; w < Pf; ++w)
      for (int u = 0; u < Mf; ++u)
        for (int v = 0; v < Nf; ++v) {
          C proj{};
          for (int p = 0; p < s.frames; ++p)
            for (int n = 0; n < s.height; ++n)
              for (int m = 0; m < s.width; ++m) {
                const std::size_t i = s.index(m, n, p);
                if (weights.w[i] == 0.0) continue;
                proj += weights.w[i] * residual[i] * std::conj(basis(u, v, w, m, n, p));
              }
          if (std::norm(proj) > best) {
            best = std::norm(proj);
            bu = u, bv = v, bw = w;
            best_proj = proj;
          }
        }
    if (best <= 0.0) break;

    const C coeff = params.gamma * best_proj / weight_sum;
    const bool self_conjugate = (2 * bu) % Mf == 0 && (2 * bv) % Nf == 0 &&
                                (2 * bw) % Pf == 0;
    for (int p = 0; p < s.frames; ++p)
      for (int n = 0; n < s.height; ++n)
        for (int m = 0; m < s.width; ++m) {
          const C phi = basis(bu, bv, bw, m, n, p);
          const double step = self_conjugate ? (coeff * phi).real()
                                             : 2.0 * (coeff * phi).real();
          const std::size_t i = s.index(m, n, p);
          model[i] += step;
          residual[i] -= step;
        }
  }
  return model;
}

}  // namespace nrfse::fixtures
