#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "nrfse/error.hpp"
#include "nrfse/video.hpp"

namespace nrfse::synthetic {

/// Random texture: smoothed noise at two scales plus a scatter of sharp-edged
/// discs and bars, normalised to roughly [16, 240].
inline cv::Mat texture(int width, int height, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<float> noise(0.0f, 1.0f);
  auto smooth_noise = [&](double sigma) {
    cv::Mat m(height, width, CV_32F);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) m.at<float>(y, x) = noise(engine);
    cv::GaussianBlur(m, m, cv::Size(0, 0), sigma, sigma, cv::BORDER_REFLECT);
    cv::normalize(m, m, -1.0, 1.0, cv::NORM_MINMAX);
    return m;
  };
  cv::Mat img = 0.6 * smooth_noise(6.0) + 0.4 * smooth_noise(1.5);

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int shapes = std::max(4, width * height / 1500);
  for (int i = 0; i < shapes; ++i) {
    const cv::Point c(static_cast<int>(uni(engine) * width),
                      static_cast<int>(uni(engine) * height));
    const double level = uni(engine) * 2.0 - 1.0;
    if (i % 2 == 0) {
      cv::circle(img, c, 3 + static_cast<int>(uni(engine) * 8), cv::Scalar(level),
                 cv::FILLED, cv::LINE_8);
    } else {
      const cv::Point d(static_cast<int>(uni(engine) * 24) - 12,
                        static_cast<int>(uni(engine) * 24) - 12);
      cv::line(img, c, c + d, cv::Scalar(level), 2, cv::LINE_8);
    }
  }
  cv::normalize(img, img, 16.0, 240.0, cv::NORM_MINMAX);
  return img;
}

/// Sequence of a texture translated by (vx, vy) whole pixels per frame.
inline VideoVolume translating_texture(int width, int height, int frames, int vx,
                                       int vy, std::uint64_t seed) {
  require(width >= 1 && height >= 1 && frames >= 1, ErrorCode::InvalidArgument,
          "synthetic sequence dimensions must be positive");
  const int span_x = std::abs(vx) * (frames - 1);
  const int span_y = std::abs(vy) * (frames - 1);
  const cv::Mat canvas = texture(width + span_x, height + span_y, seed);

  VideoVolume out(width, height, frames);
  for (int t = 0; t < frames; ++t) {
    // Content moves by +v per frame, so the crop moves by -v.
    const int ox = vx >= 0 ? span_x - vx * t : -vx * t;
    const int oy = vy >= 0 ? span_y - vy * t : -vy * t;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        out(x, y, t) = std::round(canvas.at<float>(oy + y, ox + x));
  }
  return out;
}

inline VideoVolume static_texture(int width, int height, int frames,
                                  std::uint64_t seed) {
  return translating_texture(width, height, frames, 0, 0, seed);
}

}  // namespace nrfse::synthetic
