#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "fsorelay/channel.hpp"
#include "fsorelay/error.hpp"
#include "fsorelay/params.hpp"
#include "fsorelay/parallel.hpp"
#include "fsorelay/receiver.hpp"
#include "fsorelay/rng.hpp"

namespace fsorelay {

struct OracleConfig {
  int M = 1000;  // tones per side; spacing Bo / (2M)
  int n_realizations = 400;
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const {
    require(M >= 16, ErrorCode::config_invalid, "oracle needs M >= 16");
    require(n_realizations >= 8, ErrorCode::insufficient_realizations, "oracle needs at least 8 realizations");
  }
};

struct OracleEstimate {
  NoiseBudget mean;
  NoiseBudget se;  // standard errors of the estimated entries
  int realizations = 0;
};

namespace detail {

enum Source : int { sig = 0, relay_bg = 1, ase = 2, dest_bg = 3 };
inline constexpr int kSources = 4;
inline constexpr int pair_slot(int a, int b) { return a <= b ? a * kSources + b : b * kSources + a; }
inline constexpr int kPairSlots = kSources * kSources;

struct RealizationMoments {
  // Per unordered source pair: sum_{k != 0} w_k |c_k|^2 and the DC coefficient.
  std::array<double, kPairSlots> ac{};
  std::array<double, kPairSlots> dc{};
  double ac_on = 0.0, dc_on = 0.0;
  double ac_off = 0.0, dc_off = 0.0;
};

}  // namespace detail

/// Direct simulation of the discrete-tone field model. Every noise source is
/// a comb of 2M+1 tones across Bo with independent uniform phases per
/// (tone, relay mode, destination mode); the relayed signal is one tone at
/// the carrier. The detected current R sum_n |E_n|^2 is expanded into beat
/// coefficients c_k at multiples of the tone spacing, low-pass filtered by a
/// brick wall at Be (half weight on the edge bin), and split by source pair.
/// Variances are time averages of the AC part plus the spread of the DC
/// coefficient across realizations.
inline OracleEstimate simulate_budget(double x, double Pt, const FadingState& state, const std::vector<double>& gains,
                                      const SystemParams& p, const OracleConfig& cfg) {
  using namespace detail;
  cfg.validate();
  p.validate();
  require(gains.size() == state.relay_modes, ErrorCode::invalid_argument, "one gain per relay mode");

  const int M = cfg.M;
  const int L = 2 * M + 1;
  const double dnu = p.Bo / (2.0 * M);
  const double k_edge = p.Be / dnu;
  const int K = int(std::floor(k_edge + 0.5));
  std::vector<double> w(K + 1);
  for (int k = 0; k <= K; ++k) w[k] = std::clamp(k_edge - k + 0.5, 0.0, 1.0);

  const double R = responsivity(p);
  const double hv = p.photon_energy();
  const double Nb = p.Nb();
  std::vector<double> N0(gains.size());
  for (std::size_t m = 0; m < gains.size(); ++m) N0[m] = p.nsp * std::max(gains[m] - 1.0, 0.0) * hv;
  const auto S = relayed_signal(state, gains);
  const std::size_t Nd = state.dest_modes, Mr = state.relay_modes;

  std::vector<RealizationMoments> moments(cfg.n_realizations);
  parallel_for(std::size_t(cfg.n_realizations), cfg.threads, [&](std::size_t r) {
    std::mt19937_64 rng(derive_seed(cfg.seed, Stream::oracle, r));
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    // Beat coefficients summed over destination modes, per ordered pair (a, b)
    // and per k in [-K, K].
    std::vector<cdouble> c(std::size_t(kSources) * kSources * (2 * K + 1));
    auto C = [&](int a, int b, int k) -> cdouble& { return c[(std::size_t(a) * kSources + b) * (2 * K + 1) + (k + K)]; };
    std::array<std::vector<cdouble>, kSources> tone;
    for (auto& t : tone) t.assign(L, cdouble{});

    for (std::size_t n = 0; n < Nd; ++n) {
      for (auto& t : tone) std::fill(t.begin(), t.end(), cdouble{});
      tone[sig][M] = std::sqrt(2.0 * x * Pt) * S[n];
      for (std::size_t m = 0; m < Mr; ++m) {
        const double h = std::abs(state.H2(m, n));
        const double a_br = std::sqrt(2.0 * Nb * dnu * gains[m]) * h;
        const double a_ase = std::sqrt(2.0 * N0[m] * dnu) * h;
        for (int l = 0; l < L; ++l) {
          tone[relay_bg][l] += std::polar(a_br, phase(rng));
          tone[ase][l] += std::polar(a_ase, phase(rng));
        }
      }
      const double a_bd = std::sqrt(2.0 * Nb * dnu);
      for (int l = 0; l < L; ++l) tone[dest_bg][l] = std::polar(a_bd, phase(rng));

      for (int a = 0; a < kSources; ++a) {
        for (int b = 0; b < kSources; ++b) {
          for (int k = -K; k <= K; ++k) {
            cdouble acc{};
            const int lo = std::max(0, -k), hi = std::min(L, L - k);
            if (b == sig) {
              acc = (M + k >= 0 && M + k < L) ? tone[a][M + k] * std::conj(tone[sig][M]) : cdouble{};
            } else if (a == sig) {
              acc = (M - k >= 0 && M - k < L) ? tone[sig][M] * std::conj(tone[b][M - k]) : cdouble{};
            } else {
              const cdouble* ta = tone[a].data();
              const cdouble* tb = tone[b].data();
              for (int l = lo; l < hi; ++l) acc += ta[l + k] * std::conj(tb[l]);
            }
            C(a, b, k) += 0.5 * R * acc;
          }
        }
      }
    }

    RealizationMoments mom;
    for (int a = 0; a < kSources; ++a) {
      for (int b = a; b < kSources; ++b) {
        const int slot = pair_slot(a, b);
        double ac = 0.0;
        for (int k = -K; k <= K; ++k) {
          if (k == 0) continue;
          const cdouble v = a == b ? C(a, a, k) : C(a, b, k) + C(b, a, k);
          ac += w[std::abs(k)] * std::norm(v);
        }
        mom.ac[slot] = ac;
        mom.dc[slot] = (a == b ? C(a, a, 0) : C(a, b, 0) + C(b, a, 0)).real();
      }
    }
    for (int k = -K; k <= K; ++k) {
      cdouble on{}, off{};
      for (int a = 0; a < kSources; ++a)
        for (int b = 0; b < kSources; ++b) {
          on += C(a, b, k);
          if (a != sig && b != sig) off += C(a, b, k);
        }
      if (k == 0) {
        mom.dc_on = on.real();
        mom.dc_off = off.real();
      } else {
        mom.ac_on += w[std::abs(k)] * std::norm(on);
        mom.ac_off += w[std::abs(k)] * std::norm(off);
      }
    }
    moments[r] = mom;
  });

  const double n = double(cfg.n_realizations);
  struct Stat {
    double mean, se;
  };
  // Variance estimate = E[ac] + Var(dc); SE combines the sample SE of ac with
  // the large-sample SE of a sample variance.
  auto variance_of = [&](auto ac_of, auto dc_of) {
    double ma = 0.0, md = 0.0;
    for (const auto& m : moments) {
      ma += ac_of(m);
      md += dc_of(m);
    }
    ma /= n;
    md /= n;
    double va = 0.0, vd = 0.0, m4 = 0.0;
    for (const auto& m : moments) {
      va += (ac_of(m) - ma) * (ac_of(m) - ma);
      const double d2 = (dc_of(m) - md) * (dc_of(m) - md);
      vd += d2;
      m4 += d2 * d2;
    }
    va /= (n - 1.0);
    vd /= (n - 1.0);
    m4 /= n;
    const double se_vd = std::sqrt(std::max(m4 - vd * vd, 0.0) / n);
    return Stat{ma + vd, std::sqrt(va / n + se_vd * se_vd)};
  };
  auto mean_of = [&](auto f) {
    double s = 0.0, s2 = 0.0;
    for (const auto& m : moments) s += f(m);
    s /= n;
    for (const auto& m : moments) s2 += (f(m) - s) * (f(m) - s);
    return Stat{s, std::sqrt(s2 / (n - 1.0) / n)};
  };
  auto pair_var = [&](int a, int b) {
    const int slot = pair_slot(a, b);
    return variance_of([slot](const RealizationMoments& m) { return m.ac[slot]; },
                       [slot](const RealizationMoments& m) { return m.dc[slot]; });
  };
  auto pair_dc = [&](int a) {
    const int slot = pair_slot(a, a);
    return mean_of([slot](const RealizationMoments& m) { return m.dc[slot]; });
  };

  OracleEstimate est;
  est.realizations = cfg.n_realizations;
  auto put = [](double& mean_field, double& se_field, Stat s) {
    mean_field = s.mean;
    se_field = s.se;
  };
  put(est.mean.I_s, est.se.I_s, pair_dc(sig));
  put(est.mean.I_bxb_r, est.se.I_bxb_r, pair_dc(relay_bg));
  put(est.mean.I_bxb_d, est.se.I_bxb_d, pair_dc(dest_bg));
  put(est.mean.I_ASExASE, est.se.I_ASExASE, pair_dc(ase));
  put(est.mean.var_bxb_r, est.se.var_bxb_r, pair_var(relay_bg, relay_bg));
  put(est.mean.var_bxb_d, est.se.var_bxb_d, pair_var(dest_bg, dest_bg));
  put(est.mean.var_b_rxd, est.se.var_b_rxd, pair_var(relay_bg, dest_bg));
  put(est.mean.var_ASExASE, est.se.var_ASExASE, pair_var(ase, ase));
  put(est.mean.var_sxb_r, est.se.var_sxb_r, pair_var(sig, relay_bg));
  put(est.mean.var_sxb_d, est.se.var_sxb_d, pair_var(sig, dest_bg));
  put(est.mean.var_sxASE, est.se.var_sxASE, pair_var(sig, ase));
  {
    const int s1 = pair_slot(relay_bg, ase), s2 = pair_slot(dest_bg, ase);
    put(est.mean.var_bxASE, est.se.var_bxASE,
        variance_of([=](const RealizationMoments& m) { return m.ac[s1] + m.ac[s2]; },
                    [=](const RealizationMoments& m) { return m.dc[s1] + m.dc[s2]; }));
  }

  const double I_dc = est.mean.I_dc();
  est.mean.var_shot_off = 2.0 * p.q * I_dc * p.Be;
  est.mean.var_shot_on = est.mean.var_shot_off + 2.0 * p.q * est.mean.I_s * p.Be;
  est.mean.var_th = thermal_variance(p);
  const Stat off = variance_of([](const RealizationMoments& m) { return m.ac_off; },
                               [](const RealizationMoments& m) { return m.dc_off; });
  const Stat on = variance_of([](const RealizationMoments& m) { return m.ac_on; },
                              [](const RealizationMoments& m) { return m.dc_on; });
  est.mean.var_off = off.mean + est.mean.var_shot_off + est.mean.var_th;
  est.mean.var_on = on.mean + est.mean.var_shot_on + est.mean.var_th;
  est.se.var_off = off.se;
  est.se.var_on = on.se;
  return est;
}

/// Random relay state for oracle comparisons: complex Gaussian couplings of
/// modest magnitude, not tied to any propagation geometry.
inline FadingState random_test_state(std::uint64_t seed, std::size_t relay_modes, std::size_t dest_modes) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FadingState st;
  st.seed = seed;
  st.relay_modes = relay_modes;
  st.dest_modes = dest_modes;
  for (std::size_t m = 0; m < relay_modes; ++m) st.h1.push_back(0.2 * cdouble(normal(rng), normal(rng)));
  for (std::size_t i = 0; i < relay_modes * dest_modes; ++i) st.h2.push_back(0.25 * cdouble(normal(rng), normal(rng)));
  st.refresh_alpha1();
  return st;
}

}  // namespace fsorelay
