#pragma once

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fsorelay/amplifier.hpp"
#include "fsorelay/channel.hpp"
#include "fsorelay/error.hpp"
#include "fsorelay/format.hpp"
#include "fsorelay/oracle.hpp"
#include "fsorelay/receiver.hpp"
#include "fsorelay/scenario.hpp"

namespace fsorelay {

inline constexpr const char* kVersion = "0.1.0";

struct BerCurve {
  RelayConfiguration config;
  double mdg_db = 0.0;
  std::vector<double> pt_dbm;
  std::vector<double> mean;
  std::vector<double> se;
  std::vector<std::vector<double>> per_state;  // [pt][state]
};

inline BerCurve ber_curve(const FadingEnsemble& ensemble, const Scenario& scn, GainMode gain, double mdg_db,
                          int threads = 1) {
  BerCurve c;
  c.config = {ensemble.config.relay, gain};
  c.mdg_db = mdg_db;
  c.pt_dbm = scn.pt_dbm;
  const AmplifierConfig amp = scn.amplifier(gain, mdg_db);
  const BerOptions opt = scn.ber_options(threads);
  const double n = double(ensemble.size());
  for (double dbm : scn.pt_dbm) {
    auto v = state_bers(ensemble, dbm_to_watts(dbm), scn.params, amp, opt);
    double s = 0.0;
    for (double b : v) s += b;
    const double m = s / n;
    double ss = 0.0;
    for (double b : v) ss += (b - m) * (b - m);
    c.mean.push_back(m);
    c.se.push_back(n > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0);
    c.per_state.push_back(std::move(v));
  }
  return c;
}

/// Transmit power (dBm) at which a BER curve first falls to `target`, by
/// linear interpolation of log10(BER) between the bracketing samples.
inline std::optional<double> crossing_power(const std::vector<double>& pt_dbm, const std::vector<double>& ber,
                                            double target) {
  const double lt = std::log10(target);
  for (std::size_t i = 0; i + 1 < ber.size(); ++i) {
    if (ber[i] > target && ber[i + 1] <= target) {
      const double a = std::log10(ber[i]);
      const double b = ber[i + 1] > 0.0 ? std::log10(ber[i + 1]) : -300.0;
      const double t = (a - lt) / (a - b);
      return pt_dbm[i] + t * (pt_dbm[i + 1] - pt_dbm[i]);
    }
  }
  return std::nullopt;
}

struct PairedGap {
  bool valid = false;
  double gap_db = std::numeric_limits<double>::quiet_NaN();  // reference minus improved
  double se_db = std::numeric_limits<double>::quiet_NaN();
  double pt_reference = std::numeric_limits<double>::quiet_NaN();
  double pt_improved = std::numeric_limits<double>::quiet_NaN();
};

/// Power-budget gain of `improved` over `reference` at `target`. Both curves
/// must come from ensembles drawn with the same seeds, so the standard error
/// is a paired, blocked-jackknife estimate (contiguous blocks of states are
/// left out of both curves together). Relay gains are not re-derived per
/// jackknife replicate.
inline PairedGap paired_gap(const BerCurve& reference, const BerCurve& improved, double target, int blocks = 20) {
  PairedGap g;
  const auto a = crossing_power(reference.pt_dbm, reference.mean, target);
  const auto b = crossing_power(improved.pt_dbm, improved.mean, target);
  if (!a || !b) return g;
  g.valid = true;
  g.pt_reference = *a;
  g.pt_improved = *b;
  g.gap_db = *a - *b;

  const std::size_t n = reference.per_state.empty() ? 0 : reference.per_state.front().size();
  require(improved.per_state.empty() || improved.per_state.front().size() == n, ErrorCode::invalid_argument,
          "paired curves need equal ensemble sizes");
  const int B = std::min<int>(blocks, int(n));
  if (B < 2) return g;
  std::vector<double> gaps;
  auto replicate = [&](const BerCurve& c, std::size_t lo, std::size_t hi) {
    std::vector<double> m(c.pt_dbm.size());
    for (std::size_t p = 0; p < m.size(); ++p) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (i < lo || i >= hi) s += c.per_state[p][i];
      m[p] = s / double(n - (hi - lo));
    }
    return m;
  };
  for (int k = 0; k < B; ++k) {
    const std::size_t lo = n * k / B, hi = n * (k + 1) / B;
    const auto ra = crossing_power(reference.pt_dbm, replicate(reference, lo, hi), target);
    const auto rb = crossing_power(improved.pt_dbm, replicate(improved, lo, hi), target);
    if (!ra || !rb) return g;
    gaps.push_back(*ra - *rb);
  }
  double mean = 0.0;
  for (double v : gaps) mean += v;
  mean /= B;
  double ss = 0.0;
  for (double v : gaps) ss += (v - mean) * (v - mean);
  g.se_db = std::sqrt(double(B - 1) / B * ss);
  return g;
}

struct PointDifference {
  double mean = 0.0;  // mean over states of (a - b)
  double se = 0.0;
};

/// Paired per-Pt difference of two curves drawn from the same seeds.
inline std::vector<PointDifference> paired_difference(const BerCurve& a, const BerCurve& b) {
  std::vector<PointDifference> out;
  for (std::size_t p = 0; p < a.pt_dbm.size(); ++p) {
    const auto& x = a.per_state[p];
    const auto& y = b.per_state[p];
    require(x.size() == y.size(), ErrorCode::invalid_argument, "paired curves need equal ensemble sizes");
    const double n = double(x.size());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] - y[i];
    const double m = s / n;
    // Deviations are scaled before squaring so deep-tail BERs do not underflow.
    double scale = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) scale = std::max(scale, std::abs(x[i] - y[i] - m));
    double ss = 0.0;
    if (scale > 0.0)
      for (std::size_t i = 0; i < x.size(); ++i) ss += std::pow((x[i] - y[i] - m) / scale, 2);
    out.push_back({m, n > 1 ? scale * std::sqrt(ss / (n - 1.0) / n) : 0.0});
  }
  return out;
}

struct Series {
  std::string name;
  std::vector<double> values;
};

struct SweepResult {
  std::string kind;
  std::string axis_name;
  std::vector<double> axis;
  std::vector<Series> series;
  std::vector<std::pair<std::string, std::string>> summary;
  std::vector<BerCurve> curves;
  std::vector<std::pair<std::string, FadingEnsemble>> ensembles;
  std::string scenario_text;
  std::string scenario_hash;
  std::uint64_t master_seed = 0;
  int threads = 0;
  double runtime_s = 0.0;
  bool log_y = true;

  void add_summary(const std::string& key, double v) { summary.emplace_back(key, format_double(v)); }
  void add_summary(const std::string& key, const std::string& v) { summary.emplace_back(key, v); }
};

/// How sweeps obtain their fading ensembles. The default draws them; callers
/// that already hold matching ensembles can supply them instead.
using EnsembleSource = std::function<FadingEnsemble(const Scenario&, RelayType)>;

struct RunOptions {
  int threads = 0;
  std::function<void(const std::string&)> progress;
  EnsembleSource ensembles;
};

inline FadingEnsemble draw_scenario_ensemble(const Scenario& scn, RelayType relay, int threads) {
  const ChannelModel model(scn.channel(relay));
  return model.draw_ensemble(scn.master_seed, scn.ensemble_size, threads);
}

namespace detail {

inline void report(const RunOptions& opt, const std::string& msg) {
  if (opt.progress) opt.progress(msg);
}

inline FadingEnsemble obtain(const Scenario& scn, RelayType relay, const RunOptions& opt) {
  report(opt, std::string("drawing ") + std::to_string(scn.ensemble_size) + " states, " + to_string(relay) +
                  " relay, d1 = " + format_double(scn.d1) + " m");
  if (opt.ensembles) return opt.ensembles(scn, relay);
  return draw_scenario_ensemble(scn, relay, opt.threads);
}

inline void stamp(SweepResult& r, const Scenario& scn, const RunOptions& opt,
                  std::chrono::steady_clock::time_point start) {
  r.scenario_text = serialize_scenario(scn);
  r.scenario_hash = scenario_hash(scn);
  r.master_seed = scn.master_seed;
  r.threads = resolve_threads(opt.threads);
  r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline std::string pt_or_none(const std::optional<double>& v) { return v ? format_double(*v) : std::string("none"); }

}  // namespace detail

/// BER against transmit power for every configuration of the scenario.
/// All relay types share master_seed, so SM and FM curves see the same
/// turbulence and their power-budget gap is a paired estimate.
inline SweepResult run_ber_sweep(const Scenario& scn, const RunOptions& opt = {}) {
  scn.validate();
  require(!scn.pt_dbm.empty(), ErrorCode::config_invalid, "pt_dbm sweep is empty");
  const auto start = std::chrono::steady_clock::now();
  SweepResult r;
  r.kind = "ber-sweep";
  r.axis_name = "pt_dbm";
  r.axis = scn.pt_dbm;

  std::map<RelayType, FadingEnsemble> ens;
  for (const auto& c : scn.configurations)
    if (!ens.count(c.relay)) ens.emplace(c.relay, detail::obtain(scn, c.relay, opt));

  for (const auto& c : scn.configurations) {
    detail::report(opt, "BER curve " + c.name());
    r.curves.push_back(ber_curve(ens.at(c.relay), scn, c.gain, scn.mdg_db, opt.threads));
    r.series.push_back({c.name(), r.curves.back().mean});
    r.add_summary("pt_required_dbm." + c.name(),
                  detail::pt_or_none(crossing_power(scn.pt_dbm, r.curves.back().mean, scn.ber_target)));
  }
  for (const auto& [relay, e] : ens) r.add_summary(std::string("mean_alpha1.") + to_string(relay), e.mean_alpha1());

  for (GainMode gm : {GainMode::fixed, GainMode::variable}) {
    const BerCurve* sm = nullptr;
    const BerCurve* fm = nullptr;
    for (const auto& c : r.curves) {
      if (c.config == RelayConfiguration{RelayType::sm, gm}) sm = &c;
      if (c.config == RelayConfiguration{RelayType::fm, gm}) fm = &c;
    }
    if (!sm || !fm) continue;
    const auto g = paired_gap(*sm, *fm, scn.ber_target);
    const std::string key = std::string("gap_db.") + to_string(gm);
    r.add_summary(key, g.valid ? format_double(g.gap_db) : std::string("none"));
    r.add_summary(key + "_se", g.valid ? format_double(g.se_db) : std::string("none"));
  }
  detail::stamp(r, scn, opt, start);
  return r;
}

struct FocalChoice {
  double d1_km = 0.0;
  FocalSearch hop1, hop2;
  double nominal_hop1_coupling = 0.0;
  double nominal_hop2_coupling = 0.0;
};

/// Relay-location sweep. At each d1 the relay and destination receive lenses
/// are re-optimized for zero-turbulence LP01 coupling before drawing the
/// ensemble; series are BER against Pt for every (configuration, d1).
inline SweepResult run_relay_location_sweep(const Scenario& scn, const RunOptions& opt = {},
                                            std::vector<FocalChoice>* focals = nullptr) {
  scn.validate();
  require(!scn.d1_km.empty(), ErrorCode::config_invalid, "d1_km list is empty");
  const auto start = std::chrono::steady_clock::now();
  SweepResult r;
  r.kind = "relay-sweep";
  r.axis_name = "pt_dbm";
  r.axis = scn.pt_dbm;

  std::map<std::string, std::optional<double>> best;  // per configuration: lowest required Pt
  std::map<std::string, double> best_d1;
  for (double d1_km : scn.d1_km) {
    Scenario s = scn;
    s.d1 = d1_km * 1000.0;
    s.d2 = scn.total_length() - s.d1;
    std::map<RelayType, bool> relays;
    for (const auto& c : scn.configurations) relays[c.relay] = true;
    std::map<RelayType, FadingEnsemble> ens;
    for (const auto& [relay, unused] : relays) {
      (void)unused;
      ChannelConfig cc = s.channel(relay);
      detail::report(opt, "optimizing focal lengths at d1 = " + format_double(d1_km) + " km");
      FocalChoice fc;
      fc.d1_km = d1_km;
      fc.hop1 = optimize_receiver_focal(cc, 1, s.focal_search_min, s.focal_search_max);
      fc.hop2 = optimize_receiver_focal(cc, 2, s.focal_search_min, s.focal_search_max);
      {
        const ComplexField tx1 = lp_mode_field({0, 1, Orientation::cosine}, kSmfOmega, cc.facet_grid);
        const ComplexField tx2 = lp_mode_field({0, 1, Orientation::cosine}, cc.relay_omega(), cc.facet_grid);
        const ModeBasis rx1 = mode_basis(1, cc.relay_omega(), cc.facet_grid);
        const ModeBasis rx2 = mode_basis(1, kFmfOmega, cc.facet_grid);
        fc.nominal_hop1_coupling = std::norm(hop_coupling(tx1, {s.d1, cc.geometry.f_t1, cc.geometry.f_r1,
                                                                cc.geometry.aperture_rx, cc.wavelength},
                                                          {}, ScreenPlacement::receiver, rx1, cc.free_grid)[0]);
        fc.nominal_hop2_coupling = std::norm(hop_coupling(tx2, {s.d2, cc.geometry.f_t2, cc.geometry.f_r2,
                                                                cc.geometry.aperture_rx, cc.wavelength},
                                                          {}, ScreenPlacement::receiver, rx2, cc.free_grid)[0]);
      }
      const std::string tag = std::string(to_string(relay)) + ".d1=" + format_double(d1_km);
      r.add_summary("focal_r1." + tag, fc.hop1.focal);
      r.add_summary("focal_r2." + tag, fc.hop2.focal);
      r.add_summary("coupling_r1." + tag, fc.hop1.coupling);
      r.add_summary("coupling_r2." + tag, fc.hop2.coupling);
      r.add_summary("nominal_coupling_r1." + tag, fc.nominal_hop1_coupling);
      r.add_summary("nominal_coupling_r2." + tag, fc.nominal_hop2_coupling);
      if (focals) focals->push_back(fc);

      Scenario so = s;
      if (relay == RelayType::fm) so.f_r1_fm = fc.hop1.focal;
      else so.f_r1_sm = fc.hop1.focal;
      so.f_r2 = fc.hop2.focal;
      ens.emplace(relay, detail::obtain(so, relay, opt));
    }
    for (const auto& c : scn.configurations) {
      BerCurve curve = ber_curve(ens.at(c.relay), scn, c.gain, scn.mdg_db, opt.threads);
      const std::string name = c.name() + " d1=" + format_double(d1_km);
      const auto req = crossing_power(scn.pt_dbm, curve.mean, scn.ber_target);
      r.add_summary("pt_required_dbm." + c.name() + ".d1=" + format_double(d1_km), detail::pt_or_none(req));
      if (req && (!best[c.name()] || *req < *best[c.name()])) {
        best[c.name()] = req;
        best_d1[c.name()] = d1_km;
      }
      r.series.push_back({name, curve.mean});
      r.curves.push_back(std::move(curve));
    }
  }
  for (const auto& c : scn.configurations)
    r.add_summary("best_d1_km." + c.name(), best[c.name()] ? format_double(best_d1[c.name()]) : std::string("none"));
  detail::stamp(r, scn, opt, start);
  return r;
}

/// Fixed-gain FM relay BER for every MDG value of the scenario.
inline SweepResult run_mdg_sweep(const Scenario& scn, const RunOptions& opt = {}) {
  scn.validate();
  require(!scn.mdg_list_db.empty(), ErrorCode::config_invalid, "mdg_list_db is empty");
  const auto start = std::chrono::steady_clock::now();
  SweepResult r;
  r.kind = "mdg-sweep";
  r.axis_name = "pt_dbm";
  r.axis = scn.pt_dbm;
  const FadingEnsemble ens = detail::obtain(scn, RelayType::fm, opt);
  for (double mdg : scn.mdg_list_db) {
    BerCurve curve = ber_curve(ens, scn, GainMode::fixed, mdg, opt.threads);
    const std::string name = "fm-fixed mdg=" + format_double(mdg);
    r.add_summary("pt_required_dbm.mdg=" + format_double(mdg),
                  detail::pt_or_none(crossing_power(scn.pt_dbm, curve.mean, scn.ber_target)));
    r.series.push_back({name, curve.mean});
    r.curves.push_back(std::move(curve));
  }
  detail::stamp(r, scn, opt, start);
  return r;
}

inline std::vector<double> histogram_2db(const FadingEnsemble& e, std::size_t bins) {
  std::vector<double> h(bins, 0.0);
  for (const auto& s : e.states) {
    const double loss = -10.0 * std::log10(s.alpha1);
    const auto i = std::size_t(std::clamp(std::floor(loss / 2.0), 0.0, double(bins - 1)));
    h[i] += 1.0;
  }
  return h;
}

/// Histogram of the relay-input fading in 2 dB bins of loss, for both relay
/// types, with mean loss and RSD.
inline SweepResult run_fading_stats(const Scenario& scn, const RunOptions& opt = {}) {
  scn.validate();
  const auto start = std::chrono::steady_clock::now();
  SweepResult r;
  r.kind = "fading-stats";
  r.axis_name = "loss_db_bin_start";
  r.log_y = false;
  const FadingEnsemble sm = detail::obtain(scn, RelayType::sm, opt);
  const FadingEnsemble fm = detail::obtain(scn, RelayType::fm, opt);
  double worst = 0.0;
  for (const auto* e : {&sm, &fm})
    for (const auto& s : e->states) worst = std::max(worst, -10.0 * std::log10(s.alpha1));
  const std::size_t bins = std::size_t(std::floor(worst / 2.0)) + 1;
  for (std::size_t i = 0; i < bins; ++i) r.axis.push_back(2.0 * double(i));
  r.series.push_back({"sm", histogram_2db(sm, bins)});
  r.series.push_back({"fm", histogram_2db(fm, bins)});
  const auto ssm = fading_stats(sm), sfm = fading_stats(fm);
  r.add_summary("mean_loss_db.sm", ssm.mean_alpha1_db);
  r.add_summary("mean_loss_db.fm", sfm.mean_alpha1_db);
  r.add_summary("rsd.sm", ssm.rsd);
  r.add_summary("rsd.fm", sfm.rsd);
  r.add_summary("rsd_ratio_fm_over_sm", sfm.rsd / ssm.rsd);
  r.ensembles.emplace_back("sm", sm);
  r.ensembles.emplace_back("fm", fm);
  detail::stamp(r, scn, opt, start);
  return r;
}

inline void write_ensemble_csv(std::ostream& os, const FadingEnsemble& e) {
  require(!e.states.empty(), ErrorCode::invalid_argument, "empty ensemble");
  const auto& f = e.states.front();
  os << "state_index,alpha1_linear";
  for (std::size_t m = 0; m < f.relay_modes; ++m) os << ",h1_" << m << "_abs,h1_" << m << "_phase";
  for (std::size_t m = 0; m < f.relay_modes; ++m)
    for (std::size_t n = 0; n < f.dest_modes; ++n) os << ",h2_" << m << n << "_abs,h2_" << m << n << "_phase";
  os << "\n";
  for (const auto& s : e.states) {
    os << s.index << "," << format_double(s.alpha1);
    for (const auto& v : s.h1) os << "," << format_double(std::abs(v)) << "," << format_double(std::arg(v));
    for (const auto& v : s.h2) os << "," << format_double(std::abs(v)) << "," << format_double(std::arg(v));
    os << "\n";
  }
}

inline void write_result_csv(std::ostream& os, const SweepResult& r) {
  os << "# kind=" << r.kind << " scenario_hash=" << r.scenario_hash << " master_seed=" << r.master_seed << "\n";
  os << r.axis_name;
  for (const auto& s : r.series) os << "," << s.name;
  os << "\n";
  for (std::size_t i = 0; i < r.axis.size(); ++i) {
    os << format_double(r.axis[i]);
    for (const auto& s : r.series) os << "," << format_double(s.values[i]);
    os << "\n";
  }
}

inline void write_summary_csv(std::ostream& os, const SweepResult& r) {
  os << "# kind=" << r.kind << " scenario_hash=" << r.scenario_hash << " master_seed=" << r.master_seed << "\n";
  os << "key,value\n";
  for (const auto& [k, v] : r.summary) os << k << "," << v << "\n";
}

inline void write_manifest(std::ostream& os, const SweepResult& r) {
  os << "kind: " << r.kind << "\n";
  os << "fsorelay_version: " << kVersion << "\n";
  os << "fftw_version: " << fftw_version << "\n";
#ifdef __VERSION__
  os << "compiler: " << __VERSION__ << "\n";
#endif
  os << "scenario_hash: " << r.scenario_hash << "\n";
  os << "master_seed: " << r.master_seed << "\n";
  os << "threads: " << r.threads << "\n";
  os << "wall_time_s: " << format_double(r.runtime_s) << "\n";
  os << "\n[summary]\n";
  for (const auto& [k, v] : r.summary) os << k << " = " << v << "\n";
  os << "\n[scenario]\n" << r.scenario_text;
}

/// Minimal line plot; BER plots use a log10 y axis.
inline void write_svg(std::ostream& os, const SweepResult& r) {
  const double W = 720, H = 480, ml = 70, mr = 190, mt = 30, mb = 50;
  const double pw = W - ml - mr, ph = H - mt - mb;
  auto ty = [&](double v) { return r.log_y ? std::log10(std::max(v, 1e-300)) : v; };
  double xmin = r.axis.empty() ? 0 : r.axis.front(), xmax = r.axis.empty() ? 1 : r.axis.back();
  if (xmax <= xmin) xmax = xmin + 1;
  double ymin = r.log_y ? -10.0 : 0.0, ymax = r.log_y ? std::log10(0.5) : 1.0;
  if (!r.log_y)
    for (const auto& s : r.series)
      for (double v : s.values) ymax = std::max(ymax, v);
  auto X = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double v) { return mt + (1.0 - (std::clamp(ty(v), ymin, ymax) - ymin) / (ymax - ymin)) * ph; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << r.axis_name
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" transform=\"rotate(-90 16 " << mt + ph / 2
     << ")\" text-anchor=\"middle\">" << (r.log_y ? "log10(BER)" : "count") << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    os << "<text x=\"" << X(xv) << "\" y=\"" << mt + ph + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << format_double(std::round(xv * 100) / 100) << "</text>\n";
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    os << "<text x=\"" << ml - 6 << "\" y=\"" << mt + (1.0 - t / 4.0) * ph + 4
       << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(std::round(yv * 100) / 100) << "</text>\n";
  }
  for (std::size_t k = 0; k < r.series.size(); ++k) {
    const auto& s = r.series[k];
    const char* col = colors[k % 10];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < r.axis.size(); ++i) os << X(r.axis[i]) << "," << Y(s.values[i]) << " ";
    os << "\"><title>" << s.name << "</title></polyline>\n";
    os << "<text x=\"" << ml + pw + 10 << "\" y=\"" << mt + 16 + 18 * double(k) << "\" fill=\"" << col
       << "\" font-size=\"12\">" << s.name << "</text>\n";
  }
  os << "</svg>\n";
}

struct EmitFormats {
  bool csv = true;
  bool manifest = true;
  bool svg = true;
};

/// Writes <stem>.csv, <stem>_summary.csv, <stem>_manifest.txt, <stem>.svg and,
/// for fading statistics, one ensemble CSV per relay type.
inline std::vector<std::filesystem::path> emit_outputs(const SweepResult& r, const std::filesystem::path& dir,
                                                       const std::string& stem, const EmitFormats& formats = {}) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec && std::filesystem::is_directory(dir), ErrorCode::io_failure, "cannot create output directory " + dir.string());
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::string& name, auto&& body) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    require(bool(out), ErrorCode::io_failure, "cannot open " + path.string());
    body(out);
    out.flush();
    require(bool(out), ErrorCode::io_failure, "write failed for " + path.string());
    written.push_back(path);
  };
  if (formats.csv) {
    write(stem + ".csv", [&](std::ostream& o) { write_result_csv(o, r); });
    write(stem + "_summary.csv", [&](std::ostream& o) { write_summary_csv(o, r); });
    for (const auto& [tag, e] : r.ensembles)
      write(stem + "_ensemble_" + tag + ".csv", [&](std::ostream& o) { write_ensemble_csv(o, e); });
  }
  if (formats.manifest) write(stem + "_manifest.txt", [&](std::ostream& o) { write_manifest(o, r); });
  if (formats.svg) write(stem + ".svg", [&](std::ostream& o) { write_svg(o, r); });
  return written;
}

struct OracleRow {
  int state = 0;
  std::string term;
  double closed_form = 0.0;
  double oracle = 0.0;
  double se = 0.0;
  bool pass = false;
};

/// Closed-form budget against the time-domain simulation on random small
/// states. A term passes when |oracle - closed| <= 5% of closed + 3 SE.
inline std::vector<OracleRow> run_oracle_check(const Scenario& scn, int threads = 0,
                                               const std::function<void(const std::string&)>& progress = {}) {
  scn.validate();
  std::vector<OracleRow> rows;
  const std::size_t dest = mode_indices(scn.destination_modes, scn.four_mode).size();
  for (int k = 0; k < scn.oracle_states; ++k) {
    if (progress) progress("oracle state " + std::to_string(k));
    const std::uint64_t seed = derive_seed(scn.master_seed, Stream::test, std::uint64_t(k));
    const FadingState st = random_test_state(seed, 3, dest);
    const double Pt = 1e-3;
    AmplifierConfig amp = scn.amplifier(GainMode::variable, 0.0);
    const double G = variable_gain(st.alpha1, Pt, scn.params.Pb, amp, scn.params);
    std::mt19937_64 rng(seed);
    const double u = std::uniform_real_distribution<double>(0.5, 1.0)(rng);
    const std::vector<double> gains = {G, G * u, G * u};
    const NoiseBudget closed = noise_budget(2.0, Pt, st, gains, scn.params, scn.beat);
    OracleConfig oc;
    oc.M = scn.oracle_tones;
    oc.n_realizations = scn.oracle_realizations;
    oc.seed = seed;
    oc.threads = threads;
    const OracleEstimate est = simulate_budget(2.0, Pt, st, gains, scn.params, oc);
    const auto fc = budget_fields(closed), fm = budget_fields(est.mean), fs = budget_fields(est.se);
    for (std::size_t i = 0; i < fc.size(); ++i) {
      const auto& name = fc[i].first;
      if (name == "var_th" || name.rfind("var_shot", 0) == 0) continue;
      OracleRow row{k, name, fc[i].second, fm[i].second, fs[i].second, false};
      row.pass = std::abs(row.oracle - row.closed_form) <= 0.05 * std::abs(row.closed_form) + 3.0 * row.se;
      rows.push_back(row);
    }
  }
  return rows;
}

/// Dumps hop-1 screens of the FM configuration as float32 row-major files
/// with a text header each.
inline std::vector<std::filesystem::path> dump_screens(const Scenario& scn, const std::filesystem::path& dir) {
  scn.validate();
  require(scn.cn2 > 0.0, ErrorCode::config_invalid, "screens need cn2 > 0");
  const ChannelConfig cc = scn.channel(RelayType::fm);
  const ChannelModel model(cc);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec && std::filesystem::is_directory(dir), ErrorCode::io_failure, "cannot create output directory " + dir.string());
  std::vector<std::filesystem::path> written;
  const ScreenSynthesizer synth(cc.free_grid);
  for (int i = 0; i < scn.screen_dump_count; ++i) {
    const std::uint64_t seed = derive_seed(scn.master_seed, Stream::hop1_screen, std::uint64_t(i));
    auto [unit, unused] = synth.unit_pair(seed, cc.screens.subharmonics);
    (void)unused;
    const PhaseScreen screen = detail::scaled_screen(std::move(unit), cc.free_grid, model.hop1_r0(), seed);
    const auto bin = dir / ("screen_" + std::to_string(i) + ".f32");
    const auto hdr = dir / ("screen_" + std::to_string(i) + ".txt");
    {
      std::ofstream out(bin, std::ios::binary);
      require(bool(out), ErrorCode::io_failure, "cannot open " + bin.string());
      for (double v : screen.phase) {
        const float f = float(v);
        out.write(reinterpret_cast<const char*>(&f), sizeof f);
      }
      require(bool(out), ErrorCode::io_failure, "write failed for " + bin.string());
    }
    {
      std::ofstream out(hdr);
      require(bool(out), ErrorCode::io_failure, "cannot open " + hdr.string());
      out << "n_points = " << cc.free_grid.n_points << "\nspacing = " << format_double(cc.free_grid.spacing)
          << "\nr0 = " << format_double(screen.r0) << "\nseed = " << seed << "\nsubharmonics = "
          << cc.screens.subharmonics << "\nformat = float32 row-major radians\n";
    }
    written.push_back(bin);
    written.push_back(hdr);
  }
  return written;
}

}  // namespace fsorelay
