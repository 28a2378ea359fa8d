#include <gtest/gtest.h>

#include <cmath>

#include "fsorelay/amplifier.hpp"

using namespace fsorelay;

namespace {
AmplifierConfig amp(GainMode mode = GainMode::fixed, double nsp = 1.4, int m = 3) {
  AmplifierConfig a;
  a.gain_mode = mode;
  a.nsp = nsp;
  a.mode_count = m;
  return a;
}
}  // namespace

TEST(Amplifier, HandEvaluatedGain) {
  const SystemParams p;
  const double hv = 6.626e-34 * 299792458.0 / 1550e-9;
  const double a = 1.4 * hv * 125e9;
  const double Pt = 1e-3, alpha = 0.05, Pb = 20e-9;
  const double expected = (Pt + 3 * a) / (Pt * alpha + 3 * Pb + 3 * a);
  EXPECT_NEAR(fixed_gain(alpha, Pt, Pb, amp(), p) / expected, 1.0, 1e-12);
}

TEST(Amplifier, UnitChannelWithoutNoiseGivesUnitGain) {
  EXPECT_NEAR(fixed_gain(1.0, 2e-3, 0.0, amp(GainMode::fixed, 0.0)), 1.0, 1e-15);
}

TEST(Amplifier, ConstantChannelMakesBothModesAgree) {
  for (double alpha : {1e-4, 0.01, 0.3})
    EXPECT_DOUBLE_EQ(fixed_gain(alpha, 1e-3, 20e-9, amp()), variable_gain(alpha, 1e-3, 20e-9, amp()));
}

TEST(Amplifier, GainFallsWithChannel) {
  double last = INFINITY;
  for (double alpha : {1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
    const double g = variable_gain(alpha, 1e-3, 20e-9, amp());
    EXPECT_LT(g, last);
    last = g;
  }
}

TEST(Amplifier, OutputPowerEqualsTarget) {
  const SystemParams p;
  const double a = p.ase_power_per_mode(1.4);
  const double Pt = 1e-3, alpha = 0.02;
  const double G = variable_gain(alpha, Pt, p.Pb, amp(), p);
  // Relay output counted as G (Pt alpha + M Pb + M a) minus the carried ASE term.
  const double out = G * (Pt * alpha + 3 * p.Pb + 3 * a) - 3 * a;
  EXPECT_NEAR(out / Pt, 1.0, 1e-12);
}

TEST(Amplifier, RejectsNonPositiveInputs) {
  EXPECT_THROW(fixed_gain(0.0, 1e-3, 0.0, amp()), Error);
  EXPECT_THROW(fixed_gain(0.1, 0.0, 0.0, amp()), Error);
  AmplifierConfig bad = amp();
  bad.mdg_db = -1.0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Amplifier, MdgRatioAndNormalization) {
  const double G = 120.0, Pb = 20e-9, a = 1e-8;
  const std::vector<double> pin = {3e-4, 1e-5, 2e-5};
  const auto g = mode_gains(G, 10.0 * std::log10(2.0), pin, Pb, a);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_NEAR(g[0] / g[1], 2.0, 1e-12);
  EXPECT_NEAR(g[1], g[2], 1e-12);
  const double uniform = relay_output_power({G, G, G}, pin, Pb, a);
  EXPECT_NEAR(relay_output_power(g, pin, Pb, a) / uniform, 1.0, 1e-9);
  const auto flat = mode_gains(G, 0.0, pin, Pb, a);
  for (double v : flat) EXPECT_EQ(v, G);
}

TEST(Amplifier, EnsembleMdgUsesAverageInput) {
  FadingEnsemble e;
  for (double v : {0.2, 0.4}) {
    FadingState s;
    s.relay_modes = 2;
    s.dest_modes = 1;
    s.h1 = {cdouble(v, 0.0), cdouble(0.1, 0.0)};
    s.h2 = {1.0, 1.0};
    s.refresh_alpha1();
    e.states.push_back(s);
  }
  const double Pt = 1e-3;
  const auto g = mode_gains(50.0, 3.0, e, Pt, 20e-9, 1e-8);
  const std::vector<double> pin = {Pt * (0.04 + 0.16) / 2.0, Pt * 0.01};
  EXPECT_EQ(g, mode_gains(50.0, 3.0, pin, 20e-9, 1e-8));
}
