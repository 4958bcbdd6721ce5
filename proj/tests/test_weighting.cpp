#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nrfse/weighting.hpp"
#include "support/generators.hpp"

using namespace nrfse;

namespace {

ExtrapolationWindow uniform_window(WindowShape s, Area a) {
  ExtrapolationWindow w;
  w.shape = s;
  w.values.assign(s.size(), 100.0);
  w.labels.assign(s.size(), a);
  return w;
}

const WeightParams kParams{};  // rho_hat 0.7, delta 0.5
const WindowShape kShape{29, 29, 5};

}  // namespace

TEST(RhoStatic, CentreIsOne) {
  EXPECT_EQ(rho_static(14, 14, 2, kShape, kParams), 1.0);
}

TEST(RhoStatic, UnitDistanceIsRhoHat) {
  EXPECT_DOUBLE_EQ(rho_static(15, 14, 2, kShape, kParams), 0.7);
  EXPECT_DOUBLE_EQ(rho_static(14, 13, 2, kShape, kParams), 0.7);
  EXPECT_DOUBLE_EQ(rho_static(14, 14, 3, kShape, kParams), 0.7);
}

TEST(RhoStatic, DiagonalNeighbour) {
  // 0.7 ** sqrt(2), evaluated independently.
  EXPECT_NEAR(rho_static(15, 15, 2, kShape, kParams), 0.6038590053932679, 1e-12);
  EXPECT_NEAR(rho_static(13, 14, 1, kShape, kParams), 0.6038590053932679, 1e-12);
}

TEST(RhoStatic, EvenWidthCentreIsBetweenVoxels) {
  const WindowShape s{32, 32, 1};
  EXPECT_DOUBLE_EQ(rho_static(15, 15, 0, s, kParams), rho_static(16, 16, 0, s, kParams));
  EXPECT_NEAR(rho_static(16, 16, 0, s, kParams), std::pow(0.7, std::sqrt(0.5)), 1e-15);
}

TEST(RhoMc, ZeroMotionEqualsStatic) {
  const auto zero = SliceMotion::zero(kShape.frames);
  for (int p = 0; p < kShape.frames; ++p)
    for (int n = 0; n < kShape.height; ++n)
      for (int m = 0; m < kShape.width; ++m)
        ASSERT_EQ(rho_mc(m, n, p, kShape, zero, kParams), rho_static(m, n, p, kShape, kParams));
}

TEST(RhoMc, IntegerShiftTranslatesStatic) {
  auto motion = SliceMotion::zero(kShape.frames);
  motion.vx[1] = 2.0;
  for (int n = 0; n < kShape.height; ++n)
    for (int m = 0; m + 2 < kShape.width; ++m)
      EXPECT_EQ(rho_mc(m + 2, n, 1, kShape, motion, kParams),
                rho_static(m, n, 1, kShape, kParams));
}

TEST(RhoMc, PureTemporalOffsetAtShiftedCentre) {
  const WindowShape s{32, 32, 7};
  auto motion = SliceMotion::zero(7);
  motion.vx[0] = 2.5;
  motion.vy[0] = -1.5;
  // Centre (15.5, 15.5) moves to (18, 14); slice 0 is 3 frames from the centre.
  EXPECT_NEAR(rho_mc(18, 14, 0, s, motion, kParams), 0.343, 1e-12);
}

TEST(RhoMc, FractionalShiftIsExact) {
  auto motion = SliceMotion::zero(kShape.frames);
  motion.vx[2] = 0.25;
  EXPECT_NEAR(rho_mc(14, 14, 2, kShape, motion, kParams), std::pow(0.7, 0.25), 1e-15);
}

TEST(BuildWeights, LossVoxelIsZero) {
  auto w = uniform_window(kShape, Area::Support);
  w.labels[kShape.index(14, 14, 2)] = Area::Loss;
  w.labels[kShape.index(0, 0, 0)] = Area::Outside;
  const auto wv = build_weight_volume(w, kParams);
  EXPECT_EQ(wv.at(14, 14, 2), 0.0);
  EXPECT_EQ(wv.at(0, 0, 0), 0.0);
}

TEST(BuildWeights, ReconstructedCentreIsDelta) {
  auto w = uniform_window(kShape, Area::Support);
  w.labels[kShape.index(14, 14, 2)] = Area::Reconstructed;
  EXPECT_EQ(build_weight_volume(w, kParams).at(14, 14, 2), 0.5);
}

TEST(BuildWeights, AllSupportIsPointwiseRho) {
  const auto w = uniform_window(kShape, Area::Support);
  const auto wv = build_weight_volume(w, SliceMotion::zero(kShape.frames), kParams);
  for (int p = 0; p < kShape.frames; ++p)
    for (int n = 0; n < kShape.height; ++n)
      for (int m = 0; m < kShape.width; ++m)
        ASSERT_EQ(wv.at(m, n, p), rho_static(m, n, p, kShape, kParams));
}

TEST(BuildWeights, RejectsWrongMotionLength) {
  const auto w = uniform_window(kShape, Area::Support);
  EXPECT_THROW(build_weight_volume(w, SliceMotion::zero(3), kParams), Error);
}

TEST(BuildWeights, RejectsInvalidParameters) {
  const auto w = uniform_window(kShape, Area::Support);
  EXPECT_THROW(build_weight_volume(w, WeightParams{1.0, 0.5}), Error);
  EXPECT_THROW(build_weight_volume(w, WeightParams{0.7, 1.5}), Error);
}

// Property tests over seeded random windows.

TEST(WeightProperties, ZeroMotionEquivalenceIsExact) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const WindowShape s{1 + static_cast<int>(rng() % 33), 1 + static_cast<int>(rng() % 33),
                        1 + 2 * static_cast<int>(rng() % 4)};
    const auto w = fixtures::random_window(s, 0.5, rng);
    const auto a = build_weight_volume(w, kParams);
    const auto b = build_weight_volume(w, SliceMotion::zero(s.frames), kParams);
    ASSERT_EQ(a.w, b.w);
  }
}

TEST(WeightProperties, PositiveExactlyOnSupportAndReconstructed) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> shift(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const WindowShape s{8 + static_cast<int>(rng() % 25), 8 + static_cast<int>(rng() % 25),
                        1 + 2 * static_cast<int>(rng() % 3)};
    auto w = fixtures::random_window(s, 0.4, rng);
    for (auto& l : w.labels)
      if (rng() % 10 == 0) l = Area::Outside;
    SliceMotion motion = SliceMotion::zero(s.frames);
    for (int p = 0; p < s.frames; ++p) motion.vx[p] = shift(rng), motion.vy[p] = shift(rng);
    const auto wv = build_weight_volume(w, motion, kParams);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const bool used = w.labels[i] == Area::Support || w.labels[i] == Area::Reconstructed;
      ASSERT_EQ(wv.w[i] > 0.0, used);
    }
  }
}

TEST(WeightProperties, MonotoneDecayOnSupport) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const WindowShape s{5 + static_cast<int>(rng() % 28), 5 + static_cast<int>(rng() % 28),
                        1 + 2 * static_cast<int>(rng() % 3)};
    const auto w = uniform_window(s, Area::Support);
    const auto wv = build_weight_volume(w, kParams);
    std::vector<std::pair<double, double>> pts;  // (distance^2, weight)
    for (int p = 0; p < s.frames; ++p)
      for (int n = 0; n < s.height; ++n)
        for (int m = 0; m < s.width; ++m) {
          const double dx = m - (s.width - 1) / 2.0, dy = n - (s.height - 1) / 2.0,
                       dt = p - (s.frames - 1) / 2.0;
          pts.emplace_back(dx * dx + dy * dy + dt * dt, wv.at(m, n, p));
        }
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i) ASSERT_LE(pts[i].second, pts[i - 1].second);
  }
}

TEST(WeightProperties, IntegerShiftCovariance) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const WindowShape s{10 + static_cast<int>(rng() % 23), 10 + static_cast<int>(rng() % 23),
                        1 + 2 * static_cast<int>(rng() % 3)};
    const auto w = uniform_window(s, Area::Support);
    SliceMotion motion = SliceMotion::zero(s.frames);
    for (int p = 0; p < s.frames; ++p) {
      motion.vx[p] = static_cast<int>(rng() % 7) - 3;
      motion.vy[p] = static_cast<int>(rng() % 7) - 3;
    }
    const auto mc = build_weight_volume(w, motion, kParams);
    const auto st = build_weight_volume(w, kParams);
    for (int p = 0; p < s.frames; ++p)
      for (int n = 0; n < s.height; ++n)
        for (int m = 0; m < s.width; ++m) {
          const int ms = m - static_cast<int>(motion.vx[p]);
          const int ns = n - static_cast<int>(motion.vy[p]);
          if (ms < 0 || ns < 0 || ms >= s.width || ns >= s.height) continue;
          ASSERT_EQ(mc.at(m, n, p), st.at(ms, ns, p));
        }
  }
}

TEST(WeightProperties, ArgmaxFollowsShiftedCentre) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shift(-6.0, 6.0);
  for (int trial = 0; trial < 100; ++trial) {
    const WindowShape s{32, 32, 5};
    const auto w = uniform_window(s, Area::Support);
    SliceMotion motion = SliceMotion::zero(s.frames);
    for (int p = 0; p < s.frames; ++p) motion.vx[p] = shift(rng), motion.vy[p] = shift(rng);
    const auto wv = build_weight_volume(w, motion, kParams);
    for (int p = 0; p < s.frames; ++p) {
      int bm = 0, bn = 0;
      for (int n = 0; n < s.height; ++n)
        for (int m = 0; m < s.width; ++m)
          if (wv.at(m, n, p) > wv.at(bm, bn, p)) bm = m, bn = n;
      const double cx = (s.width - 1) / 2.0 + motion.vx[p];
      const double cy = (s.height - 1) / 2.0 + motion.vy[p];
      EXPECT_EQ(bm, static_cast<int>(std::lround(cx)));
      EXPECT_EQ(bn, static_cast<int>(std::lround(cy)));
    }
  }
}
