#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "nrfse/error.hpp"

namespace nrfse {

using Complex = std::complex<double>;

/// In-place complex 3-D DFT backed by FFTW. Plans are created once per shape
/// and direction under a lock and shared; executing a plan on caller-owned
/// buffers is thread safe. Planning uses FFTW_ESTIMATE, so a given shape
/// always runs the same codelets and produces bit-identical output.
///
/// Arrays are indexed [d0][d1][d2] with d2 fastest. Forward is unnormalised
/// with exponent sign -1, backward is unnormalised with sign +1.
class Fft3d {
 public:
  enum class Direction { Forward, Backward };

  static void execute(std::span<Complex> data, int d0, int d1, int d2,
                      Direction dir) {
    require(data.size() == static_cast<std::size_t>(d0) * d1 * d2,
            ErrorCode::DimensionMismatch, "fft buffer size mismatch");
    fftw_plan plan = plan_for(d0, d1, d2, dir);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, ptr, ptr);
  }

 private:
  static fftw_plan plan_for(int d0, int d1, int d2, Direction dir) {
    static std::mutex mutex;
    static std::map<std::tuple<int, int, int, bool>, fftw_plan> plans;
    std::lock_guard lock(mutex);
    const auto key = std::make_tuple(d0, d1, d2, dir == Direction::Forward);
    if (auto it = plans.find(key); it != plans.end()) return it->second;

    std::vector<Complex> scratch(static_cast<std::size_t>(d0) * d1 * d2);
    auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_3d(
        d0, d1, d2, ptr, ptr, dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    require(plan != nullptr, ErrorCode::InvalidArgument, "fftw planning failed");
    plans.emplace(key, plan);
    return plan;
  }
};

}  // namespace nrfse
