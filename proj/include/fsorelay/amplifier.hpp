#pragma once

#include <cmath>
#include <vector>

#include "fsorelay/channel.hpp"
#include "fsorelay/error.hpp"
#include "fsorelay/params.hpp"

namespace fsorelay {

enum class GainMode { fixed, variable };

inline const char* to_string(GainMode g) noexcept { return g == GainMode::fixed ? "fixed" : "variable"; }

struct AmplifierConfig {
  double nsp = 1.4;
  int mode_count = 3;
  GainMode gain_mode = GainMode::fixed;
  double mdg_db = 0.0;
  double Pr = 0.0;  // <= 0: Pr = Pt

  void validate() const {
    require(nsp >= 0.0, ErrorCode::config_invalid, "nsp must be non-negative");
    require(mode_count >= 1, ErrorCode::config_invalid, "mode count must be positive");
    require(mdg_db >= 0.0, ErrorCode::config_invalid, "MDG must be non-negative");
  }
};

namespace detail {

inline double gain_formula(double alpha, double Pt, double Pb, const AmplifierConfig& cfg, const SystemParams& p) {
  require(Pt > 0.0, ErrorCode::invalid_argument, "transmit power must be positive");
  require(alpha > 0.0, ErrorCode::invalid_argument, "channel gain must be positive");
  const double M = cfg.mode_count;
  const double a = p.ase_power_per_mode(cfg.nsp);
  const double Pr = cfg.Pr > 0.0 ? cfg.Pr : Pt;
  return (Pr + M * a) / (Pt * alpha + M * Pb + M * a);
}

}  // namespace detail

/// Gain holding the ensemble-average relay output at Pr.
inline double fixed_gain(double mean_alpha1, double Pt, double Pb, const AmplifierConfig& cfg,
                         const SystemParams& p = {}) {
  return detail::gain_formula(mean_alpha1, Pt, Pb, cfg, p);
}

/// Gain holding the instantaneous relay output at Pr.
inline double variable_gain(double alpha1, double Pt, double Pb, const AmplifierConfig& cfg,
                            const SystemParams& p = {}) {
  return detail::gain_formula(alpha1, Pt, Pb, cfg, p);
}

/// Relay output power counted the same way as the gain formulas:
/// G * (signal + M Pb + M nsp h nu Bo).
inline double relay_output_power(const std::vector<double>& gains, const std::vector<double>& input_signal_power,
                                 double Pb, double ase_per_mode) {
  double out = 0.0;
  for (std::size_t m = 0; m < gains.size(); ++m) out += gains[m] * (input_signal_power[m] + Pb + ase_per_mode);
  return out;
}

/// Per-mode gains under mode-dependent gain. LP01 (index 0) gets
/// 10^(mdg/10) times the gain of every higher mode; the vector is then
/// scaled so the relay output power for `input_signal_power` equals what the
/// uniform gain G would give.
inline std::vector<double> mode_gains(double G, double mdg_db, const std::vector<double>& input_signal_power,
                                      double Pb, double ase_per_mode) {
  require(mdg_db >= 0.0, ErrorCode::invalid_argument, "MDG must be non-negative");
  const std::size_t M = input_signal_power.size();
  std::vector<double> g(M, G);
  if (mdg_db == 0.0 || M <= 1) return g;
  const double r = std::pow(10.0, -mdg_db / 10.0);
  std::vector<double> shape(M, r);
  shape[0] = 1.0;
  const double target = relay_output_power(g, input_signal_power, Pb, ase_per_mode);
  const double base = relay_output_power(shape, input_signal_power, Pb, ase_per_mode);
  for (std::size_t m = 0; m < M; ++m) g[m] = shape[m] * target / base;
  return g;
}

/// Per-state overload: the normalization uses this state's relay input.
inline std::vector<double> mode_gains(double G, double mdg_db, const FadingState& state, double Pt, double Pb,
                                      double ase_per_mode) {
  std::vector<double> pin(state.relay_modes);
  for (std::size_t m = 0; m < state.relay_modes; ++m) pin[m] = Pt * std::norm(state.h1[m]);
  return mode_gains(G, mdg_db, pin, Pb, ase_per_mode);
}

/// Ensemble overload: the normalization uses the ensemble-average relay input
/// (fixed-gain relays only know the average channel).
inline std::vector<double> mode_gains(double G, double mdg_db, const FadingEnsemble& ensemble, double Pt, double Pb,
                                      double ase_per_mode) {
  require(!ensemble.states.empty(), ErrorCode::invalid_argument, "empty ensemble");
  const std::size_t M = ensemble.states.front().relay_modes;
  std::vector<double> pin(M, 0.0);
  for (const auto& st : ensemble.states)
    for (std::size_t m = 0; m < M; ++m) pin[m] += Pt * std::norm(st.h1[m]);
  for (auto& v : pin) v /= double(ensemble.size());
  return mode_gains(G, mdg_db, pin, Pb, ase_per_mode);
}

}  // namespace fsorelay
