#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nrfse/error.hpp"
#include "nrfse/fft.hpp"
#include "nrfse/params.hpp"
#include "nrfse/weighting.hpp"
#include "nrfse/window.hpp"

namespace nrfse {

/// Frequency grid of the Fourier basis. Bins are stored [w][u][v] with v
/// fastest, where u runs along window columns (m), v along rows (n) and w
/// along slices (p). Storage order therefore equals lexicographic (w, u, v).
struct SpectralGrid {
  int frames = 1;  // Pf
  int width = 1;   // Mf
  int height = 1;  // Nf

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(frames) * width * height;
  }
  std::size_t index(int w, int u, int v) const noexcept {
    return (static_cast<std::size_t>(w) * width + u) * height + v;
  }
  int w_of(std::size_t i) const noexcept {
    return static_cast<int>(i / (static_cast<std::size_t>(width) * height));
  }
  int u_of(std::size_t i) const noexcept {
    return static_cast<int>((i / height) % width);
  }
  int v_of(std::size_t i) const noexcept { return static_cast<int>(i % height); }

  // Bin of the complex conjugate basis function.
  std::size_t conjugate(std::size_t i) const noexcept {
    return index((frames - w_of(i)) % frames, (width - u_of(i)) % width,
                 (height - v_of(i)) % height);
  }
};

/// Grid used for a window. A single-slice window makes every temporal
/// frequency identical on its support, so the temporal axis collapses to 1.
inline SpectralGrid spectral_grid(const WindowShape& shape, const FftSize& fft) {
  require(fft.width >= shape.width && fft.height >= shape.height &&
              fft.frames >= shape.frames,
          ErrorCode::InvalidArgument, "fft size smaller than window");
  return {shape.frames == 1 ? 1 : fft.frames, fft.width, fft.height};
}

// Run of bins [index(w, u, 0), index(w, u, v_end)) holding one member of
// every conjugate pair: the one with the smaller storage index.
struct SpectralRow {
  int w = 0;
  int u = 0;
  int v_end = 0;
};

inline std::vector<SpectralRow> canonical_rows(const SpectralGrid& g) {
  std::vector<SpectralRow> rows;
  for (int w = 0; w < g.frames; ++w) {
    const int wc = (g.frames - w) % g.frames;
    if (w > wc) continue;
    for (int u = 0; u < g.width; ++u) {
      const int uc = (g.width - u) % g.width;
      if (w == wc && u > uc) continue;
      const int v_end = (w == wc && u == uc) ? std::min(g.height / 2 + 1, g.height)
                                             : g.height;
      rows.push_back({w, u, v_end});
    }
  }
  return rows;
}

inline double energy(const Complex& c) noexcept {
  return c.real() * c.real() + c.imag() * c.imag();
}

/// Complex spectrum stored as separate real and imaginary planes.
struct SplitSpectrum {
  std::vector<double> re;
  std::vector<double> im;

  SplitSpectrum() = default;
  explicit SplitSpectrum(std::span<const Complex> values)
      : re(values.size()), im(values.size()) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      re[i] = values[i].real();
      im[i] = values[i].imag();
    }
  }

  std::size_t size() const noexcept { return re.size(); }
  Complex operator[](std::size_t i) const { return {re[i], im[i]}; }

  std::vector<Complex> to_complex() const {
    std::vector<Complex> out(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) out[i] = {re[i], im[i]};
    return out;
  }
};

/// Frequency-domain state of one model generation.
///
/// The residual spectrum of a real signal is conjugate symmetric, so only
/// the bins listed in `rows` are kept current; residual_spectrum() restores
/// the mirrored half.
struct SpectralState {
  SpectralGrid grid;
  std::vector<SpectralRow> rows;
  SplitSpectrum residual;             // DFT of w * (f - g), canonical half
  SplitSpectrum weight;               // DFT of w
  std::vector<Complex> coefficients;  // model expansion coefficients
  double weight_sum = 0.0;            // W(0)
};

namespace detail {

// Forces exact conjugate symmetry X(-k) = conj(X(k)) on a spectrum of a real
// signal, so that paired bins always compare equal in magnitude.
inline void symmetrize(std::vector<Complex>& spectrum, const SpectralGrid& grid) {
  for (int w = 0; w < grid.frames; ++w) {
    const int wc = (grid.frames - w) % grid.frames;
    for (int u = 0; u < grid.width; ++u) {
      const int uc = (grid.width - u) % grid.width;
      for (int v = 0; v < grid.height; ++v) {
        const int vc = (grid.height - v) % grid.height;
        const std::size_t i = grid.index(w, u, v);
        const std::size_t j = grid.index(wc, uc, vc);
        if (j == i) {
          spectrum[i] = {spectrum[i].real(), 0.0};
        } else if (i < j) {
          const Complex a = 0.5 * (spectrum[i] + std::conj(spectrum[j]));
          spectrum[i] = a;
          spectrum[j] = std::conj(a);
        }
      }
    }
  }
}

// Zero-padded [p][m][n] layout of a window field on the grid.
inline std::vector<Complex> embed(const WindowShape& shape, const SpectralGrid& grid,
                                  std::span<const double> field) {
  std::vector<Complex> out(grid.size(), Complex{});
  for (int p = 0; p < shape.frames; ++p)
    for (int n = 0; n < shape.height; ++n)
      for (int m = 0; m < shape.width; ++m)
        out[grid.index(p, m, n)] = field[shape.index(m, n, p)];
  return out;
}

inline int wrap(int value, int period) noexcept {
  const int r = value % period;
  return r < 0 ? r + period : r;
}

// r[v] -= q * a[v + off_a] (+ conj(q) * b[v + off_b]) for v in [lo, hi),
// on split real/imaginary rows.
template <bool Pair>
inline void subtract_shifted(double* __restrict rr, double* __restrict ri,
                             const double* ar, const double* ai, std::ptrdiff_t off_a,
                             const double* br, const double* bi, std::ptrdiff_t off_b,
                             double qr, double qi, int lo, int hi) {
  for (std::ptrdiff_t v = lo; v < hi; ++v) {
    const double xr = ar[v + off_a], xi = ai[v + off_a];
    double re = qr * xr - qi * xi;
    double im = qr * xi + qi * xr;
    if constexpr (Pair) {
      const double yr = br[v + off_b], yi = bi[v + off_b];
      re = re + (qr * yr + qi * yi);
      im = im + (qr * yi - qi * yr);
    }
    rr[v] -= re;
    ri[v] -= im;
  }
}

}  // namespace detail

inline SpectralState prepare_spectra(const ExtrapolationWindow& window,
                                     const WeightVolume& weights,
                                     const FftSize& fft) {
  const auto& shape = window.shape;
  require(weights.shape == shape && weights.w.size() == shape.size() &&
              window.values.size() == shape.size(),
          ErrorCode::DimensionMismatch, "weights and window differ in shape");

  SpectralState state;
  state.grid = spectral_grid(shape, fft);
  const auto& g = state.grid;
  state.rows = canonical_rows(g);

  std::vector<double> weighted(shape.size(), 0.0);
  for (std::size_t i = 0; i < weighted.size(); ++i)
    if (weights.w[i] != 0.0) weighted[i] = weights.w[i] * window.values[i];

  auto residual = detail::embed(shape, g, weighted);
  auto weight = detail::embed(shape, g, weights.w);
  Fft3d::execute(residual, g.frames, g.width, g.height, Fft3d::Direction::Forward);
  Fft3d::execute(weight, g.frames, g.width, g.height, Fft3d::Direction::Forward);
  detail::symmetrize(residual, g);
  detail::symmetrize(weight, g);
  state.residual = SplitSpectrum(residual);
  state.weight = SplitSpectrum(weight);
  state.coefficients.assign(g.size(), Complex{});
  state.weight_sum = state.weight.re[0];
  return state;
}

/// Full residual spectrum, with non-canonical bins mirrored from their pair.
inline std::vector<Complex> residual_spectrum(const SpectralState& state) {
  std::vector<Complex> full = state.residual.to_complex();
  const auto& g = state.grid;
  for (const auto& row : state.rows)
    for (int v = 0; v < row.v_end; ++v) {
      const std::size_t i = g.index(row.w, row.u, v);
      full[g.conjugate(i)] = std::conj(full[i]);
    }
  return full;
}

/// Bin with the largest |R(k)|^2. Exact ties resolve to the first bin in
/// storage order, i.e. the lexicographically smallest (w, u, v).
inline std::size_t select_basis(std::span<const Complex> spectrum) {
  std::size_t best = 0;
  double best_energy = -1.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double e = energy(spectrum[i]);
    if (e > best_energy) {
      best_energy = e;
      best = i;
    }
  }
  return best;
}

inline std::size_t select_basis(const SplitSpectrum& spectrum) {
  std::size_t best = 0;
  double best_energy = -1.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double e = spectrum.re[i] * spectrum.re[i] + spectrum.im[i] * spectrum.im[i];
    if (e > best_energy) {
      best_energy = e;
      best = i;
    }
  }
  return best;
}

struct CoefficientUpdate {
  Complex increment;           // added to coefficient k (conjugate added at -k)
  bool self_conjugate = false;
  std::size_t next_best = 0;   // select_basis of the updated residual
  double next_energy = 0.0;    // |R(next_best)|^2
};

/// Adds gamma * R(k) / W(0) to coefficient k and its conjugate partner, and
/// removes the matching weighted basis contribution from the residual
/// spectrum, which is a copy of W shifted to k (and to -k).
inline CoefficientUpdate update_coefficient(SpectralState& state, std::size_t k,
                                            double gamma) {
  require(state.weight_sum > 0.0, ErrorCode::EmptySupport,
          "weight volume is empty");
  const auto& g = state.grid;
  require(k < g.size(), ErrorCode::InvalidArgument, "basis index out of range");
  std::size_t kc = g.conjugate(k);
  if (kc < k) std::swap(k, kc);  // the residual is kept on the canonical bin

  CoefficientUpdate result;
  result.self_conjugate = kc == k;
  Complex q = gamma * (state.residual[k] / state.weight_sum);
  if (result.self_conjugate) q = {q.real(), 0.0};
  result.increment = q;
  state.coefficients[k] += q;
  if (!result.self_conjugate) state.coefficients[kc] += std::conj(q);

  const double qr = q.real();
  const double qi = q.imag();
  const int kw = g.w_of(k), ku = g.u_of(k), kv = g.v_of(k);
  const double* Wr = state.weight.re.data();
  const double* Wi = state.weight.im.data();
  double* Rr = state.residual.re.data();
  double* Ri = state.residual.im.data();

  double best_energy = -1.0;
  std::size_t best = 0;
  for (const auto& row : state.rows) {
    const std::size_t base = g.index(row.w, row.u, 0);
    const std::size_t ia = g.index(detail::wrap(row.w - kw, g.frames),
                                   detail::wrap(row.u - ku, g.width), 0);
    const std::size_t ib = g.index(detail::wrap(row.w + kw, g.frames),
                                   detail::wrap(row.u + ku, g.width), 0);
    double* rr = Rr + base;
    double* ri = Ri + base;
    // Split [0, v_end) where v - kv or v + kv wraps around the row.
    const int cut_a = std::min(kv, row.v_end);
    const int cut_b = std::min(g.height - kv, row.v_end);
    const int segs[4] = {0, std::min(cut_a, cut_b), std::max(cut_a, cut_b), row.v_end};
    for (int s = 0; s < 3; ++s) {
      const int v0 = segs[s], v1 = segs[s + 1];
      if (v0 >= v1) continue;
      const std::ptrdiff_t off_a = v0 < kv ? g.height - kv : -kv;
      const std::ptrdiff_t off_b = v0 < g.height - kv ? kv : kv - g.height;
      if (result.self_conjugate)
        detail::subtract_shifted<false>(rr, ri, Wr + ia, Wi + ia, off_a, Wr + ib,
                                        Wi + ib, off_b, qr, qi, v0, v1);
      else
        detail::subtract_shifted<true>(rr, ri, Wr + ia, Wi + ia, off_a, Wr + ib,
                                       Wi + ib, off_b, qr, qi, v0, v1);
    }
    for (int v = 0; v < row.v_end; ++v) {
      const double e = rr[v] * rr[v] + ri[v] * ri[v];
      if (e > best_energy) {
        best_energy = e;
        best = base + static_cast<std::size_t>(v);
      }
    }
  }
  result.next_best = best;
  result.next_energy = best_energy;
  return result;
}

struct FseResult {
  std::vector<double> model;  // window layout, real part of the model
  int iterations = 0;
  bool empty_support = false;
  double max_imaginary = 0.0;  // largest |Im g| over window voxels
};

/// Iteratively approximates the weighted window by Fourier basis functions
/// and returns the model over the window. Runs until max_iterations, until
/// the best bin's energy reduction drops below min_gain, or until the
/// weighted residual vanishes. An all-zero weight volume yields a zero model
/// with empty_support set.
inline FseResult generate_model(const ExtrapolationWindow& window,
                                const WeightVolume& weights,
                                const FseParams& params) {
  require(params.gamma > 0.0 && params.gamma <= 1.0, ErrorCode::InvalidArgument,
          "gamma must lie in (0, 1]");
  require(params.max_iterations >= 0, ErrorCode::InvalidArgument,
          "max_iterations must be >= 0");
  const auto& shape = window.shape;
  FseResult result;
  result.model.assign(shape.size(), 0.0);

  require(weights.w.size() == shape.size(), ErrorCode::DimensionMismatch,
          "weights and window differ in shape");
  if (std::none_of(weights.w.begin(), weights.w.end(),
                   [](double v) { return v > 0.0; })) {
    result.empty_support = true;
    return result;
  }

  SpectralState state = prepare_spectra(window, weights, params.fft);
  const auto& g = state.grid;

  std::size_t k = select_basis(state.residual);
  double energy = nrfse::energy(state.residual[k]);
  for (int it = 0; it < params.max_iterations; ++it) {
    if (energy <= 0.0) break;
    const bool self = g.conjugate(k) == k;
    const double gain = (self ? 1.0 : 2.0) * energy / state.weight_sum;
    if (gain < params.min_gain) break;
    const CoefficientUpdate up = update_coefficient(state, k, params.gamma);
    k = up.next_best;
    energy = up.next_energy;
    ++result.iterations;
  }

  Fft3d::execute(state.coefficients, g.frames, g.width, g.height,
                 Fft3d::Direction::Backward);
  for (int p = 0; p < shape.frames; ++p)
    for (int n = 0; n < shape.height; ++n)
      for (int m = 0; m < shape.width; ++m) {
        const Complex v = state.coefficients[g.index(p, m, n)];
        result.model[shape.index(m, n, p)] = v.real();
        result.max_imaginary = std::max(result.max_imaginary, std::abs(v.imag()));
      }
  return result;
}

}  // namespace nrfse
