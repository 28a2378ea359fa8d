#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fsorelay/turbulence.hpp"

using namespace fsorelay;

namespace {

constexpr double kLambda = 1550e-9;
const double kK = 2.0 * std::numbers::pi / kLambda;

double d_over_r0(double cn2, double d = 5000.0) {
  return 38e-3 / coherence_length({cn2, d, kK, GaussianBeamParams{19e-3, kLambda}});
}

}  // namespace

TEST(Turbulence, ReferenceApertureRatios) {
  EXPECT_NEAR(d_over_r0(2e-14) / 1.093, 1.0, 0.01);
  EXPECT_NEAR(d_over_r0(5e-14) / 1.895, 1.0, 0.01);
  EXPECT_NEAR(d_over_r0(1e-13) / 2.872, 1.0, 0.01);
}

TEST(Turbulence, Cn2ScalingLaw) {
  EXPECT_NEAR(d_over_r0(5e-14) / d_over_r0(1e-14), std::pow(5.0, 0.6), 1e-9);
}

TEST(Turbulence, CoherenceLengthDecreasesWithStrengthDistanceAndWavenumber) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double cn2 = 1e-14 * u(rng), d = 2000.0 * u(rng), k = kK * u(rng), s = 1.0 + u(rng);
    const GaussianBeamParams beam{19e-3, kLambda};
    const double base = coherence_length({cn2, d, k, beam});
    EXPECT_LT(coherence_length({cn2 * s, d, k, beam}), base);
    EXPECT_LT(coherence_length({cn2, d * s, k, beam}), base);
    EXPECT_LT(coherence_length({cn2, d, k * s, beam}), base);
  }
}

TEST(Turbulence, ZeroCn2GivesInfiniteR0AndFlatScreen) {
  const double r0 = coherence_length({0.0, 5000.0, kK, {}});
  EXPECT_TRUE(std::isinf(r0));
  const auto s = generate_screen(r0, GridSpec{256, 1e-3}, 3);
  for (double v : s.phase) ASSERT_EQ(v, 0.0);
}

TEST(Turbulence, NegativeCn2Rejected) { EXPECT_THROW(coherence_length({-1e-14, 5000.0, kK, {}}), Error); }

TEST(Turbulence, ScreensAreDeterministic) {
  const GridSpec g{256, 1e-3};
  const auto a = generate_screen_pair(0.05, g, 42, 3);
  const auto b = generate_screen_pair(0.05, g, 42, 3);
  EXPECT_EQ(a.first.phase, b.first.phase);
  EXPECT_EQ(a.second.phase, b.second.phase);
  const auto c = generate_screen(0.05, g, 43, 3);
  EXPECT_NE(a.first.phase, c.phase);
}

TEST(Turbulence, ScreenAmplitudeScalesAsR0ToMinusFiveSixths) {
  const GridSpec g{256, 1e-3};
  const auto a = generate_screen(0.02, g, 5);
  const auto b = generate_screen(0.04, g, 5);
  const double ratio = std::pow(2.0, -5.0 / 6.0);
  for (std::size_t i = 0; i < a.phase.size(); i += 97) EXPECT_NEAR(b.phase[i], ratio * a.phase[i], 1e-9);
}

TEST(Turbulence, FftScreenHasZeroMean) {
  const GridSpec g{256, 1e-3};
  const auto s = generate_screen(0.05, g, 11);
  double mean = 0.0, ms = 0.0;
  for (double v : s.phase) {
    mean += v;
    ms += v * v;
  }
  mean /= double(s.phase.size());
  ms /= double(s.phase.size());
  EXPECT_LT(std::abs(mean), 1e-9 * std::sqrt(ms));
}

TEST(Turbulence, R0OutsideTheGridIsRejected) {
  const GridSpec g{256, 1e-3};
  for (double r0 : {2e-3, 0.1}) {
    try {
      (void)generate_screen(r0, g, 1);
      FAIL() << "expected r0_out_of_range for " << r0;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::r0_out_of_range);
    }
  }
}

TEST(Turbulence, ApplyScreenKeepsPowerAndAdds) {
  const GridSpec g{256, 1e-3};
  const auto [a, b] = generate_screen_pair(0.05, g, 9);
  ComplexField u(g);
  for (std::size_t i = 0; i < u.samples.size(); ++i) u.samples[i] = cdouble(1.0 + 0.001 * double(i % 17), 0.5);
  const double p = field_power(u);
  const auto ua = apply_screen(u, a);
  EXPECT_NEAR(field_power(ua), p, 1e-12 * p);
  PhaseScreen sum = a;
  for (std::size_t i = 0; i < sum.phase.size(); ++i) sum.phase[i] += b.phase[i];
  const auto two = apply_screen(ua, b);
  const auto once = apply_screen(u, sum);
  for (std::size_t i = 0; i < u.samples.size(); i += 101) EXPECT_LT(std::abs(two.samples[i] - once.samples[i]), 1e-12);
  PhaseScreen zero = a;
  std::fill(zero.phase.begin(), zero.phase.end(), 0.0);
  EXPECT_EQ(apply_screen(u, zero).samples, u.samples);
}

// Ensemble structure function against 6.88 (r / r0)^{5/3}.
TEST(Turbulence, StructureFunctionMatchesKolmogorov) {
  const GridSpec g{256, 1e-3};
  const double r0 = 0.05;
  const int n = g.n_points;
  const int lag_lo = 10, lag_hi = 40;
  std::vector<double> sum(lag_hi + 1, 0.0);
  std::vector<double> count(lag_hi + 1, 0.0);
  const ScreenSynthesizer synth(g);
  const double scale = std::pow(r0, -5.0 / 6.0);
  for (int draw = 0; draw < 500; ++draw) {
    auto [a, b] = synth.unit_pair(std::uint64_t(1000 + draw), 3);
    for (const auto* s : {&a, &b}) {
      for (int iy = 0; iy < n; iy += 4)
        for (int ix = 0; ix + lag_hi < n; ix += 2)
          for (int lag = lag_lo; lag <= lag_hi; lag += 5) {
            const double dx = scale * ((*s)[std::size_t(iy) * n + ix + lag] - (*s)[std::size_t(iy) * n + ix]);
            const double dy = scale * ((*s)[std::size_t(ix + lag) * n + iy] - (*s)[std::size_t(ix) * n + iy]);
            sum[lag] += dx * dx + dy * dy;
            count[lag] += 2.0;
          }
    }
  }
  std::vector<double> lx, ly;
  for (int lag = lag_lo; lag <= lag_hi; lag += 5) {
    const double r = lag * g.spacing;
    const double d = sum[lag] / count[lag];
    const double theory = 6.88 * std::pow(r / r0, 5.0 / 3.0);
    EXPECT_NEAR(d / theory, 1.0, 0.10) << "r = " << r;
    lx.push_back(std::log(r));
    ly.push_back(std::log(d));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(lx.size());
  my /= double(ly.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  EXPECT_GE(slope, 1.55);
  EXPECT_LE(slope, 1.78);
}
