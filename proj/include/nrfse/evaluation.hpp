#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nrfse/error.hpp"
#include "nrfse/pipeline.hpp"
#include "nrfse/sampling.hpp"
#include "nrfse/video.hpp"

namespace nrfse {

namespace detail {

inline double psnr_from_mse(double sum_sq, std::size_t n) {
  require(n > 0, ErrorCode::InvalidArgument, "psnr over zero samples");
  const double mse = sum_sq / static_cast<double>(n);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace detail

/// 10 log10(255^2 / MSE) over every sample of every frame.
inline double psnr(const VideoVolume& reference, const VideoVolume& test) {
  require(reference.same_shape(test), ErrorCode::DimensionMismatch,
          "psnr operands differ in shape");
  double sum_sq = 0.0;
  const auto a = reference.values();
  const auto b = test.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum_sq += d * d;
  }
  return detail::psnr_from_mse(sum_sq, a.size());
}

// PSNR restricted to positions the mask did not sample.
inline double psnr_loss_only(const VideoVolume& reference, const VideoVolume& test,
                             const SamplingMask& mask) {
  require(reference.same_shape(test) && mask.matches(reference),
          ErrorCode::DimensionMismatch, "psnr operands differ in shape");
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (int t = 0; t < reference.frames(); ++t)
    for (int y = 0; y < reference.height(); ++y)
      for (int x = 0; x < reference.width(); ++x) {
        if (mask(x, y, t)) continue;
        const double d = reference(x, y, t) - test(x, y, t);
        sum_sq += d * d;
        ++n;
      }
  return detail::psnr_from_mse(sum_sq, n);
}

// Rounds to the nearest 8-bit level, as written to an output file.
inline VideoVolume quantize8(const VideoVolume& volume) {
  VideoVolume out = volume;
  for (double& v : out.values()) v = std::round(std::clamp(v, 0.0, 255.0));
  return out;
}

struct BenchInput {
  std::string name;
  std::function<VideoVolume()> load;
};

struct BenchCell {
  std::string sequence;
  Mode mode = Mode::Bilinear;
  std::uint64_t seed = 0;
  double psnr_db = 0.0;
  double psnr_loss_db = 0.0;
  double runtime_s = 0.0;
};

struct BenchReport {
  std::vector<std::string> sequences;  // in input order, loaded successfully
  std::vector<Mode> modes;
  std::vector<BenchCell> cells;
  std::vector<std::string> missing;  // "name: reason"

  std::vector<double> values(const std::string& sequence, Mode mode) const {
    std::vector<double> out;
    for (const auto& c : cells)
      if (c.sequence == sequence && c.mode == mode) out.push_back(c.psnr_db);
    return out;
  }

  // Mean over mask seeds of one (sequence, mode) cell.
  double average(const std::string& sequence, Mode mode) const {
    const auto v = values(sequence, mode);
    require(!v.empty(), ErrorCode::InvalidArgument, "no values for bench cell");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  }

  // Mean over sequences of the per-sequence averages.
  double overall(Mode mode) const {
    require(!sequences.empty(), ErrorCode::InvalidArgument, "empty report");
    double s = 0.0;
    for (const auto& seq : sequences) s += average(seq, mode);
    return s / static_cast<double>(sequences.size());
  }
};

struct BenchProgress {
  std::function<void(const BenchCell&)> on_cell;
};

/// Samples each sequence under every seed, reconstructs with every mode and
/// scores the 8-bit result against the original. Sequences that fail to
/// load are listed in `missing` and skipped.
inline BenchReport run_benchmark(const std::vector<BenchInput>& inputs,
                                 const std::vector<Mode>& modes,
                                 const std::vector<std::uint64_t>& seeds,
                                 const ReconstructionConfig& base,
                                 const BenchProgress& progress = {}) {
  require(!modes.empty() && !seeds.empty(), ErrorCode::InvalidArgument,
          "benchmark needs at least one mode and one seed");
  BenchReport report;
  report.modes = modes;
  for (const auto& input : inputs) {
    VideoVolume original;
    try {
      original = input.load();
    } catch (const std::exception& e) {
      report.missing.push_back(input.name + ": " + e.what());
      continue;
    }
    report.sequences.push_back(input.name);
    for (std::uint64_t seed : seeds) {
      const SamplingMask mask = generate_quadrant_mask(
          original.width(), original.height(), original.frames(), MaskSeed{seed});
      const VideoVolume sampled = apply_mask(original, mask);
      for (Mode mode : modes) {
        ReconstructionConfig config = base;
        config.mode = mode;
        const auto start = std::chrono::steady_clock::now();
        const VideoVolume out = quantize8(reconstruct(sampled, mask, config));
        const auto stop = std::chrono::steady_clock::now();
        BenchCell cell{input.name, mode, seed, psnr(original, out),
                       psnr_loss_only(original, out, mask),
                       std::chrono::duration<double>(stop - start).count()};
        if (progress.on_cell) progress.on_cell(cell);
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

inline void write_csv(std::ostream& os, const BenchReport& report) {
  os << "sequence,mode,seed,psnr_db,runtime_s\n";
  for (const auto& c : report.cells) {
    os << c.sequence << ',' << mode_name(c.mode) << ',' << c.seed << ','
       << std::setprecision(10) << c.psnr_db << ',' << std::setprecision(6)
       << c.runtime_s << '\n';
  }
}

/// Table with one row per sequence, one column per mode and an average row.
inline void write_table(std::ostream& os, const BenchReport& report) {
  std::size_t name_w = std::string("Average").size();
  for (const auto& s : report.sequences) name_w = std::max(name_w, s.size());
  const int col_w = 14;

  os << std::left << std::setw(static_cast<int>(name_w)) << "Sequence";
  for (Mode m : report.modes)
    os << " | " << std::right << std::setw(col_w) << mode_name(m);
  os << '\n' << std::string(name_w, '-');
  for (std::size_t i = 0; i < report.modes.size(); ++i)
    os << "-+-" << std::string(col_w, '-');
  os << '\n';

  auto cell = [&](double db) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << db << " dB";
    return s.str();
  };
  for (const auto& seq : report.sequences) {
    os << std::left << std::setw(static_cast<int>(name_w)) << seq;
    for (Mode m : report.modes)
      os << " | " << std::right << std::setw(col_w) << cell(report.average(seq, m));
    os << '\n';
  }
  if (!report.sequences.empty()) {
    os << std::left << std::setw(static_cast<int>(name_w)) << "Average";
    for (Mode m : report.modes)
      os << " | " << std::right << std::setw(col_w) << cell(report.overall(m));
    os << '\n';
  }
  for (const auto& m : report.missing) os << "missing: " << m << '\n';
}

}  // namespace nrfse
