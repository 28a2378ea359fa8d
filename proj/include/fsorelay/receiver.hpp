#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fsorelay/amplifier.hpp"
#include "fsorelay/channel.hpp"
#include "fsorelay/error.hpp"
#include "fsorelay/format.hpp"
#include "fsorelay/params.hpp"
#include "fsorelay/parallel.hpp"
#include "fsorelay/rng.hpp"

namespace fsorelay {

/// Constants in the mode-summed beat terms.
///   consistent: what square-law detection of the field model produces.
///     Self-beat of a mode mixture scales as (sum g h^2)^2 and every
///     cross-beat between independent sources carries a factor 2.
///   as_printed: the bracket sum g^2 h^4 + 4 sum_{i!=j} g_i g_j h_i^2 h_j^2
///     and factor-4 cross-beats.
enum class BeatConvention { consistent, as_printed };

inline const char* to_string(BeatConvention c) noexcept {
  return c == BeatConvention::consistent ? "consistent" : "as-printed";
}

struct NoiseBudget {
  double I_s = 0.0;
  double I_bxb_r = 0.0;
  double I_bxb_d = 0.0;
  double I_ASExASE = 0.0;
  double var_bxb_r = 0.0;
  double var_bxb_d = 0.0;
  double var_b_rxd = 0.0;
  double var_ASExASE = 0.0;
  double var_sxb_r = 0.0;
  double var_sxb_d = 0.0;
  double var_sxASE = 0.0;
  double var_bxASE = 0.0;
  double var_shot_off = 0.0;
  double var_shot_on = 0.0;
  double var_th = 0.0;
  double var_off = 0.0;
  double var_on = 0.0;

  double I_dc() const noexcept { return I_bxb_r + I_bxb_d + I_ASExASE; }
  double I_off() const noexcept { return I_dc(); }
  double I_on() const noexcept { return I_dc() + I_s; }
};

/// Coherent relayed signal amplitude in every destination mode:
/// S_n = sum_m H1_m sqrt(g_m) H2_mn.
inline std::vector<cdouble> relayed_signal(const FadingState& state, const std::vector<double>& gains) {
  require(gains.size() == state.relay_modes, ErrorCode::invalid_argument, "one gain per relay mode");
  std::vector<cdouble> S(state.dest_modes);
  for (std::size_t n = 0; n < state.dest_modes; ++n)
    for (std::size_t m = 0; m < state.relay_modes; ++m) S[n] += state.h1[m] * std::sqrt(gains[m]) * state.H2(m, n);
  return S;
}

struct SignalCurrent {
  std::vector<double> per_mode;
  double total = 0.0;
};

inline SignalCurrent signal_current(double x, double Pt, const FadingState& state, const std::vector<double>& gains,
                                    const SystemParams& p) {
  require(x == 0.0 || x == 2.0, ErrorCode::invalid_argument, "OOK symbol must be 0 or 2");
  const double R = responsivity(p);
  SignalCurrent out;
  for (const auto& s : relayed_signal(state, gains)) {
    out.per_mode.push_back(R * x * Pt * std::norm(s));
    out.total += out.per_mode.back();
  }
  return out;
}

/// All direct currents and noise variances at the destination for OOK
/// symbol x. Per-mode ASE density is N0_m = nsp (g_m - 1) h nu (clipped at 0).
/// var_off excludes every signal term; var_on adds them for this x.
inline NoiseBudget noise_budget(double x, double Pt, const FadingState& state, const std::vector<double>& gains,
                                const SystemParams& p, BeatConvention conv = BeatConvention::consistent) {
  require(gains.size() == state.relay_modes, ErrorCode::invalid_argument, "one gain per relay mode");
  const double R = responsivity(p);
  const double Nb = p.Nb();
  const double K = 2.0 * p.Be * p.Bo - p.Be * p.Be;
  const double hv = p.photon_energy();
  const double cross = conv == BeatConvention::consistent ? 2.0 : 4.0;
  const double quartic = conv == BeatConvention::consistent ? 1.0 : 4.0;

  std::vector<double> N0(gains.size());
  for (std::size_t m = 0; m < gains.size(); ++m) N0[m] = p.nsp * std::max(gains[m] - 1.0, 0.0) * hv;

  const auto S = relayed_signal(state, gains);
  NoiseBudget b;
  for (std::size_t n = 0; n < state.dest_modes; ++n) {
    double HG = 0.0, HA = 0.0;
    double HG2 = 0.0, HA2 = 0.0;  // diagonal parts of the squared mode sums
    for (std::size_t m = 0; m < state.relay_modes; ++m) {
      const double h2 = std::norm(state.H2(m, n));
      HG += gains[m] * h2;
      HA += N0[m] * h2;
      HG2 += gains[m] * gains[m] * h2 * h2;
      HA2 += N0[m] * N0[m] * h2 * h2;
    }
    const double HGx = HG * HG - HG2;
    const double HAx = HA * HA - HA2;

    const double Ps = x * Pt * std::norm(S[n]);
    b.I_s += R * Ps;
    b.I_bxb_r += R * Nb * p.Bo * HG;
    b.I_bxb_d += R * Nb * p.Bo;
    b.I_ASExASE += R * p.Bo * HA;

    b.var_bxb_r += R * R * Nb * Nb * (HG2 + quartic * HGx) * K;
    b.var_bxb_d += R * R * Nb * Nb * K;
    b.var_b_rxd += cross * R * R * Nb * Nb * HG * K;
    b.var_ASExASE += R * R * (HA2 + quartic * HAx) * K;
    b.var_bxASE += cross * R * R * HA * (Nb + Nb * HG) * K;

    b.var_sxb_r += 4.0 * R * R * Ps * Nb * HG * p.Be;
    b.var_sxb_d += 4.0 * R * R * Ps * Nb * p.Be;
    b.var_sxASE += 4.0 * R * R * Ps * HA * p.Be;
  }
  b.var_shot_off = 2.0 * p.q * b.I_dc() * p.Be;
  b.var_shot_on = b.var_shot_off + 2.0 * p.q * b.I_s * p.Be;
  b.var_th = thermal_variance(p);
  b.var_off = b.var_th + b.var_shot_off + b.var_bxb_r + b.var_bxb_d + b.var_b_rxd + b.var_ASExASE + b.var_bxASE;
  b.var_on = b.var_off + 2.0 * p.q * b.I_s * p.Be + b.var_sxb_r + b.var_sxb_d + b.var_sxASE;
  return b;
}

inline double q_factor(const NoiseBudget& b) {
  const double s_on = std::sqrt(b.var_on), s_off = std::sqrt(b.var_off);
  require(s_on > 0.0 && s_off > 0.0, ErrorCode::invalid_argument, "noise variances must be positive");
  return (b.I_on() - b.I_off()) / (s_on + s_off);
}

/// Gaussian approximation with the two-sigma threshold; `b` must be the
/// budget for x = 2.
inline double ber_state_gaussian(const NoiseBudget& b) { return 0.5 * std::erfc(q_factor(b) / std::sqrt(2.0)); }

inline double gaussian_threshold(const NoiseBudget& b) {
  const double s_on = std::sqrt(b.var_on), s_off = std::sqrt(b.var_off);
  return (s_off * b.I_on() + s_on * b.I_off()) / (s_on + s_off);
}

/// Bit-level estimate: random equiprobable OOK bits, Gaussian current per
/// bit with the symbol's mean and variance, decided against the Gaussian
/// threshold.
inline double ber_state_montecarlo(const NoiseBudget& b, std::uint64_t n_bits, std::uint64_t seed) {
  require(n_bits >= 100000, ErrorCode::invalid_argument, "bit-level BER needs at least 1e5 bits");
  const double th = gaussian_threshold(b);
  const double s_on = std::sqrt(b.var_on), s_off = std::sqrt(b.var_off);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uint64_t errors = 0;
  for (std::uint64_t i = 0; i < n_bits; ++i) {
    const bool one = (rng() >> 63) != 0;
    const double z = normal(rng);
    if (one) {
      if (b.I_on() + s_on * z < th) ++errors;
    } else {
      if (b.I_off() + s_off * z >= th) ++errors;
    }
  }
  return double(errors) / double(n_bits);
}

struct BerOptions {
  BeatConvention convention = BeatConvention::consistent;
  std::uint64_t mc_bits = 0;  // 0 = Gaussian closed form
  std::uint64_t mc_seed = 0;
  int threads = 1;
};

/// Relay gains for every state of an ensemble at one transmit power.
inline std::vector<std::vector<double>> ensemble_gains(const FadingEnsemble& ensemble, double Pt,
                                                       const SystemParams& p, AmplifierConfig amp) {
  require(!ensemble.states.empty(), ErrorCode::invalid_argument, "empty ensemble");
  amp.mode_count = int(ensemble.states.front().relay_modes);
  const double a = p.ase_power_per_mode(amp.nsp);
  std::vector<std::vector<double>> out(ensemble.size());
  if (amp.gain_mode == GainMode::fixed) {
    const double G = fixed_gain(ensemble.mean_alpha1(), Pt, p.Pb, amp, p);
    const auto g = mode_gains(G, amp.mdg_db, ensemble, Pt, p.Pb, a);
    for (auto& v : out) v = g;
  } else {
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
      const auto& st = ensemble.states[i];
      const double G = variable_gain(st.alpha1, Pt, p.Pb, amp, p);
      out[i] = mode_gains(G, amp.mdg_db, st, Pt, p.Pb, a);
    }
  }
  return out;
}

/// Per-state BER at one transmit power, in state order.
inline std::vector<double> state_bers(const FadingEnsemble& ensemble, double Pt, const SystemParams& p,
                                      const AmplifierConfig& amp, const BerOptions& opt = {}) {
  const auto gains = ensemble_gains(ensemble, Pt, p, amp);
  std::vector<double> out(ensemble.size());
  auto one = [&](std::size_t i) {
    const auto b = noise_budget(2.0, Pt, ensemble.states[i], gains[i], p, opt.convention);
    out[i] = opt.mc_bits > 0 ? ber_state_montecarlo(b, opt.mc_bits, derive_seed(opt.mc_seed, Stream::bits, i))
                             : ber_state_gaussian(b);
  };
  if (opt.mc_bits > 0) {
    parallel_for(ensemble.size(), opt.threads, one);
  } else {
    for (std::size_t i = 0; i < ensemble.size(); ++i) one(i);
  }
  return out;
}

inline double ensemble_ber(const FadingEnsemble& ensemble, double Pt, const SystemParams& p,
                           const AmplifierConfig& amp, const BerOptions& opt = {}) {
  const auto v = state_bers(ensemble, Pt, p, amp, opt);
  double s = 0.0;
  for (double b : v) s += b;
  return s / double(v.size());
}

inline std::vector<std::pair<std::string, double>> budget_fields(const NoiseBudget& b) {
  return {{"I_s", b.I_s},
          {"I_bxb_r", b.I_bxb_r},
          {"I_bxb_d", b.I_bxb_d},
          {"I_ASExASE", b.I_ASExASE},
          {"var_bxb_r", b.var_bxb_r},
          {"var_bxb_d", b.var_bxb_d},
          {"var_b_rxd", b.var_b_rxd},
          {"var_ASExASE", b.var_ASExASE},
          {"var_sxb_r", b.var_sxb_r},
          {"var_sxb_d", b.var_sxb_d},
          {"var_sxASE", b.var_sxASE},
          {"var_bxASE", b.var_bxASE},
          {"var_shot_off", b.var_shot_off},
          {"var_shot_on", b.var_shot_on},
          {"var_th", b.var_th},
          {"var_off", b.var_off},
          {"var_on", b.var_on}};
}

/// Debug dump of one budget as a flat JSON object.
inline void write_budget_json(std::ostream& os, const NoiseBudget& b) {
  os << "{";
  bool first = true;
  for (const auto& [k, v] : budget_fields(b)) {
    os << (first ? "" : ", ") << '"' << k << "\": " << format_double(v);
    first = false;
  }
  os << "}\n";
}

}  // namespace fsorelay
