#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "fsorelay/error.hpp"
#include "fsorelay/fiber_modes.hpp"
#include "fsorelay/grid.hpp"
#include "fsorelay/optics.hpp"
#include "fsorelay/parallel.hpp"
#include "fsorelay/rng.hpp"
#include "fsorelay/turbulence.hpp"

namespace fsorelay {

inline const double kSmfOmega = omega_from_mfd(10.4e-6);
inline constexpr double kFmfOmega = 3.89e-6;

enum class RelayType { sm, fm };

inline const char* to_string(RelayType t) noexcept { return t == RelayType::sm ? "sm" : "fm"; }

struct LinkGeometry {
  double d1 = 2500.0;
  double d2 = 2500.0;
  double f_t1 = 0.20;
  double f_t2 = 0.2115;
  double f_r1 = 0.40;
  double f_r2 = 0.40;
  double aperture_rx = 0.150;
  double attenuation_db_per_km = 0.0;

  double total_length() const noexcept { return d1 + d2; }

  /// Default focal lengths for each relay type: the SM relay launches from
  /// SMF (20 cm) and receives through 38 cm; the FM relay uses 21.15 / 40 cm.
  static LinkGeometry nominal(RelayType relay) {
    LinkGeometry g;
    if (relay == RelayType::sm) {
      g.f_r1 = 0.38;
      g.f_t2 = 0.20;
    }
    return g;
  }

  void validate() const {
    for (double v : {d1, d2, f_t1, f_t2, f_r1, f_r2, aperture_rx})
      require(v > 0.0 && std::isfinite(v), ErrorCode::config_invalid, "link lengths must be positive");
    require(attenuation_db_per_km >= 0.0, ErrorCode::config_invalid, "attenuation must be non-negative");
  }
};

/// Where the single phase plate of a hop sits. With split_steps = S > 1 the
/// hop is cut into S equal segments, each carrying one screen with the r0 of
/// its own sub-path, placed at the end (receiver) or start (transmitter) of
/// the segment.
enum class ScreenPlacement { receiver, transmitter };

struct ScreenOptions {
  ScreenPlacement placement = ScreenPlacement::receiver;
  int split_steps = 1;
  int subharmonics = 0;
};

struct ChannelConfig {
  LinkGeometry geometry = LinkGeometry::nominal(RelayType::fm);
  RelayType relay = RelayType::fm;
  int relay_labels = 0;        // LP labels guided at the relay; 0 = 2 for FM, 1 for SM
  int destination_labels = 1;  // N
  FourModeConvention four_mode = FourModeConvention::lp_labels;
  double cn2 = 0.0;
  double wavelength = 1550e-9;
  double beam_waist = 19e-3;  // launched beam radius used for the hop r0
  ScreenOptions screens{};
  GridSpec free_grid{1024, 0.5e-3};
  GridSpec facet_grid{128, 0.5e-6};

  int resolved_relay_labels() const noexcept {
    if (relay_labels > 0) return relay_labels;
    return relay == RelayType::fm ? 2 : 1;
  }
  double relay_omega() const noexcept { return relay == RelayType::fm ? kFmfOmega : kSmfOmega; }

  void validate() const {
    geometry.validate();
    require(cn2 >= 0.0 && std::isfinite(cn2), ErrorCode::config_invalid, "cn2 must be non-negative");
    require(screens.split_steps >= 1, ErrorCode::config_invalid, "split steps must be >= 1");
    require(screens.subharmonics >= 0, ErrorCode::config_invalid, "subharmonics must be >= 0");
    require(wavelength > 0.0 && beam_waist > 0.0, ErrorCode::config_invalid, "wavelength and waist must be positive");
    (void)mode_indices(resolved_relay_labels(), four_mode);
    (void)mode_indices(destination_labels, four_mode);
  }
};

/// One turbulence realization. h2 is row-major, relay mode m by destination
/// mode n.
struct FadingState {
  std::vector<cdouble> h1;
  std::vector<cdouble> h2;
  std::size_t relay_modes = 0;
  std::size_t dest_modes = 0;
  double alpha1 = 0.0;
  std::uint64_t seed = 0;
  std::size_t index = 0;

  cdouble& H2(std::size_t m, std::size_t n) { return h2[m * dest_modes + n]; }
  const cdouble& H2(std::size_t m, std::size_t n) const { return h2[m * dest_modes + n]; }

  void refresh_alpha1() {
    alpha1 = 0.0;
    for (const auto& v : h1) alpha1 += std::norm(v);
  }

  /// Keeps the first `relay` relay modes and `dest` destination modes.
  FadingState restricted(std::size_t relay, std::size_t dest) const {
    require(relay >= 1 && relay <= relay_modes && dest >= 1 && dest <= dest_modes, ErrorCode::invalid_argument,
            "restriction larger than the state");
    FadingState out;
    out.relay_modes = relay;
    out.dest_modes = dest;
    out.seed = seed;
    out.index = index;
    out.h1.assign(h1.begin(), h1.begin() + relay);
    out.h2.resize(relay * dest);
    for (std::size_t m = 0; m < relay; ++m)
      for (std::size_t n = 0; n < dest; ++n) out.H2(m, n) = H2(m, n);
    out.refresh_alpha1();
    return out;
  }

  /// Scales hop amplitudes by sqrt of the given linear power factors.
  FadingState attenuated(double hop1_power, double hop2_power) const {
    FadingState out = *this;
    const double a1 = std::sqrt(hop1_power), a2 = std::sqrt(hop2_power);
    for (auto& v : out.h1) v *= a1;
    for (auto& v : out.h2) v *= a2;
    out.refresh_alpha1();
    return out;
  }
};

struct FadingEnsemble {
  std::vector<FadingState> states;
  ChannelConfig config;
  std::uint64_t master_seed = 0;

  std::size_t size() const noexcept { return states.size(); }

  double mean_alpha1() const {
    require(!states.empty(), ErrorCode::invalid_argument, "empty ensemble");
    double s = 0.0;
    for (const auto& st : states) s += st.alpha1;
    return s / double(states.size());
  }

  FadingEnsemble restricted(std::size_t relay, std::size_t dest) const {
    FadingEnsemble out{{}, config, master_seed};
    out.states.reserve(states.size());
    for (const auto& st : states) out.states.push_back(st.restricted(relay, dest));
    return out;
  }

  FadingEnsemble attenuated(double hop1_power, double hop2_power) const {
    FadingEnsemble out{{}, config, master_seed};
    out.states.reserve(states.size());
    for (const auto& st : states) out.states.push_back(st.attenuated(hop1_power, hop2_power));
    return out;
  }
};

/// Linear power transmission of a hop from the atmospheric attenuation.
inline double attenuation_linear(double db_per_km, double distance) {
  return std::pow(10.0, -db_per_km * distance / 1000.0 / 10.0);
}

struct HopGeometry {
  double distance = 2500.0;
  double f_tx = 0.20;
  double f_rx = 0.40;
  double aperture = 0.150;
  double wavelength = 1550e-9;
};

namespace detail {

inline void propagate_with_screens(ComplexField& u, double distance, double wavelength,
                                   std::span<const PhaseScreen> screens, ScreenPlacement placement) {
  if (screens.empty()) {
    u = propagate(u, distance, wavelength);
    return;
  }
  const double seg = distance / double(screens.size());
  for (const auto& s : screens) {
    if (placement == ScreenPlacement::transmitter) u = apply_screen(std::move(u), s);
    u = propagate(u, seg, wavelength);
    if (placement == ScreenPlacement::receiver) u = apply_screen(std::move(u), s);
  }
}

}  // namespace detail

/// Reference path for one hop, straight from the building blocks:
/// collimate the transmit fiber mode, run it through the screens and free
/// space, then couple into every receive mode. Returns h e^{j phi} per
/// receive mode, without atmospheric attenuation.
inline std::vector<cdouble> hop_coupling(const ComplexField& tx_fiber_mode, const HopGeometry& hop,
                                         std::span<const PhaseScreen> screens, ScreenPlacement placement,
                                         const ModeBasis& rx_basis, const GridSpec& free_grid) {
  ComplexField u = lens_collimate(tx_fiber_mode, hop.f_tx, hop.wavelength, free_grid);
  detail::propagate_with_screens(u, hop.distance, hop.wavelength, screens, placement);
  std::vector<cdouble> out;
  out.reserve(rx_basis.size());
  for (const auto& mode : rx_basis.fields) out.push_back(couple_to_mode(u, mode, hop.f_rx, hop.wavelength, hop.aperture));
  return out;
}

/// Precomputed hop: collimated launch fields and receive pupil modes are
/// built once, and each realization only costs the screen phasors and
/// overlap sums. For a single receiver-side screen the launch fields are
/// propagated ahead of time and the sum runs over aperture pixels only; for
/// a single transmitter-side screen the receive modes are back-propagated
/// instead. Split-step hops propagate every realization in full.
class HopModel {
 public:
  HopModel(std::vector<ComplexField> launch, std::vector<ComplexField> rx_pupils, double distance, double aperture,
           double wavelength, ScreenPlacement placement, int steps)
      : launch_(std::move(launch)),
        pupils_(std::move(rx_pupils)),
        distance_(distance),
        aperture_(aperture),
        wavelength_(wavelength),
        placement_(placement),
        steps_(steps) {
    require(!launch_.empty() && !pupils_.empty(), ErrorCode::invalid_argument, "hop needs launch and receive modes");
    grid_ = launch_.front().grid;
    for (const auto& f : launch_) require_same_grid(f.grid, grid_);
    for (const auto& f : pupils_) require_same_grid(f.grid, grid_);
    require(steps_ >= 1, ErrorCode::invalid_argument, "steps must be >= 1");

    const double r2max = 0.25 * aperture_ * aperture_;
    for (int iy = 0; iy < grid_.n_points; ++iy) {
      const double y = grid_.coordinate(iy);
      for (int ix = 0; ix < grid_.n_points; ++ix) {
        const double x = grid_.coordinate(ix);
        if (x * x + y * y <= r2max) aperture_pixels_.push_back(std::size_t(iy) * grid_.n_points + ix);
      }
    }
    const double da = grid_.spacing * grid_.spacing;

    if (steps_ == 1 && placement_ == ScreenPlacement::receiver) {
      for (const auto& f : launch_) {
        const ComplexField p = propagate(f, distance_, wavelength_);
        std::vector<cdouble> crop(aperture_pixels_.size());
        for (std::size_t j = 0; j < crop.size(); ++j) crop[j] = p.samples[aperture_pixels_[j]];
        arriving_.push_back(std::move(crop));
      }
      for (const auto& q : pupils_) {
        std::vector<cdouble> crop(aperture_pixels_.size());
        for (std::size_t j = 0; j < crop.size(); ++j) crop[j] = std::conj(q.samples[aperture_pixels_[j]]) * da;
        weights_.push_back(std::move(crop));
      }
    } else if (steps_ == 1) {
      for (const auto& q : pupils_) {
        ComplexField b = back_propagate(circular_aperture(q, aperture_), distance_, wavelength_);
        for (auto& v : b.samples) v = std::conj(v) * da;
        weights_.push_back(std::move(b.samples));
      }
    }
  }

  std::size_t launch_count() const noexcept { return launch_.size(); }
  std::size_t receive_count() const noexcept { return pupils_.size(); }
  int steps() const noexcept { return steps_; }
  const GridSpec& grid() const noexcept { return grid_; }

  /// Coupling matrix, row-major launch k by receive mode m. `screens` holds
  /// one phase array per step, or is empty for a vacuum hop.
  std::vector<cdouble> couple(std::span<const std::vector<double>* const> screens) const {
    require(screens.empty() || screens.size() == std::size_t(steps_), ErrorCode::invalid_argument,
            "one screen per step required");
    const std::size_t K = launch_.size(), M = pupils_.size();
    std::vector<cdouble> out(K * M);

    if (steps_ == 1 && placement_ == ScreenPlacement::receiver) {
      const std::size_t np = aperture_pixels_.size();
      std::vector<cdouble> t(np);
      std::vector<cdouble> phasor;
      if (!screens.empty()) {
        phasor.resize(np);
        const auto& phi = *screens[0];
        for (std::size_t j = 0; j < np; ++j) phasor[j] = std::polar(1.0, phi[aperture_pixels_[j]]);
      }
      for (std::size_t k = 0; k < K; ++k) {
        const auto& a = arriving_[k];
        if (phasor.empty()) {
          t = a;
        } else {
          for (std::size_t j = 0; j < np; ++j) t[j] = phasor[j] * a[j];
        }
        for (std::size_t m = 0; m < M; ++m) out[k * M + m] = dot(weights_[m], t);
      }
      return out;
    }

    if (steps_ == 1) {
      const std::size_t np = grid_.size();
      std::vector<cdouble> t(np);
      for (std::size_t k = 0; k < K; ++k) {
        const auto& a = launch_[k].samples;
        if (screens.empty()) {
          t = a;
        } else {
          const auto& phi = *screens[0];
          for (std::size_t j = 0; j < np; ++j) t[j] = std::polar(1.0, phi[j]) * a[j];
        }
        for (std::size_t m = 0; m < M; ++m) out[k * M + m] = dot(weights_[m], t);
      }
      return out;
    }

    std::vector<PhaseScreen> ps;
    for (const auto* s : screens) ps.push_back(PhaseScreen{grid_, *s, 0.0, 0});
    for (std::size_t k = 0; k < K; ++k) {
      ComplexField u = launch_[k];
      detail::propagate_with_screens(u, distance_, wavelength_, ps, placement_);
      for (std::size_t m = 0; m < M; ++m) out[k * M + m] = pupil_overlap(u, pupils_[m], aperture_);
    }
    return out;
  }

 private:
  static cdouble dot(const std::vector<cdouble>& w, const std::vector<cdouble>& t) {
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) {
      const cdouble p = w[j] * t[j];
      re += p.real();
      im += p.imag();
    }
    return {re, im};
  }

  std::vector<ComplexField> launch_;
  std::vector<ComplexField> pupils_;
  double distance_, aperture_, wavelength_;
  ScreenPlacement placement_;
  int steps_;
  GridSpec grid_;
  std::vector<std::size_t> aperture_pixels_;
  std::vector<std::vector<cdouble>> arriving_;
  std::vector<std::vector<cdouble>> weights_;
};

/// Both hops of the relay link for one configuration.
class ChannelModel {
 public:
  explicit ChannelModel(const ChannelConfig& cfg) : cfg_(cfg), synth_(cfg.free_grid) {
    cfg.validate();
    const auto& g = cfg.geometry;
    const double lam = cfg.wavelength;
    const ModeBasis source = mode_basis(1, kSmfOmega, cfg.facet_grid);
    const ModeBasis relay = mode_basis(cfg.resolved_relay_labels(), cfg.relay_omega(), cfg.facet_grid, cfg.four_mode);
    const ModeBasis dest = mode_basis(cfg.destination_labels, kFmfOmega, cfg.facet_grid, cfg.four_mode);

    auto collimated = [&](const ModeBasis& b, double f) {
      std::vector<ComplexField> out;
      for (const auto& m : b.fields) out.push_back(lens_collimate(m, f, lam, cfg.free_grid));
      return out;
    };
    auto pupils = [&](const ModeBasis& b, double f) {
      std::vector<ComplexField> out;
      for (const auto& m : b.fields) out.push_back(receive_pupil_mode(m, f, lam, cfg.free_grid));
      return out;
    };
    hop1_.emplace(collimated(source, g.f_t1), pupils(relay, g.f_r1), g.d1, g.aperture_rx, lam,
                  cfg.screens.placement, cfg.screens.split_steps);
    hop2_.emplace(collimated(relay, g.f_t2), pupils(dest, g.f_r2), g.d2, g.aperture_rx, lam, cfg.screens.placement,
                  cfg.screens.split_steps);

    const double k = 2.0 * std::numbers::pi / lam;
    const GaussianBeamParams beam{cfg.beam_waist, lam, std::numeric_limits<double>::infinity()};
    const int S = cfg.screens.split_steps;
    r0_1_ = coherence_length({cfg.cn2, g.d1 / S, k, beam});
    r0_2_ = coherence_length({cfg.cn2, g.d2 / S, k, beam});
    detail::check_r0(r0_1_, cfg.free_grid);
    detail::check_r0(r0_2_, cfg.free_grid);
    atten1_ = attenuation_linear(g.attenuation_db_per_km, g.d1);
    atten2_ = attenuation_linear(g.attenuation_db_per_km, g.d2);
  }

  const ChannelConfig& config() const noexcept { return cfg_; }
  double hop1_r0() const noexcept { return r0_1_; }
  double hop2_r0() const noexcept { return r0_2_; }
  std::size_t relay_modes() const noexcept { return hop1_->receive_count(); }
  std::size_t dest_modes() const noexcept { return hop2_->receive_count(); }

  /// Realization `index` of the ensemble seeded by `master_seed`. The screens
  /// of step s come from one spectral draw seeded by
  /// derive_seed(master_seed, hop1_screen, index, s): its real part is the
  /// hop-1 screen and its imaginary part the hop-2 screen.
  FadingState draw_state(std::uint64_t master_seed, std::size_t index) const {
    const int S = cfg_.screens.split_steps;
    std::vector<std::vector<double>> s1, s2;
    const std::uint64_t seed = derive_seed(master_seed, Stream::hop1_screen, index);
    if (cfg_.cn2 > 0.0) {
      for (int s = 0; s < S; ++s) {
        auto [a, b] = synth_.unit_pair(derive_seed(master_seed, Stream::hop1_screen, index, std::uint64_t(s)),
                                       cfg_.screens.subharmonics);
        const double c1 = std::pow(r0_1_, -5.0 / 6.0), c2 = std::pow(r0_2_, -5.0 / 6.0);
        for (auto& v : a) v *= c1;
        for (auto& v : b) v *= c2;
        s1.push_back(std::move(a));
        s2.push_back(std::move(b));
      }
    }
    std::vector<const std::vector<double>*> p1, p2;
    for (const auto& v : s1) p1.push_back(&v);
    for (const auto& v : s2) p2.push_back(&v);

    FadingState st;
    st.index = index;
    st.seed = seed;
    st.relay_modes = relay_modes();
    st.dest_modes = dest_modes();
    st.h1 = hop1_->couple(p1);  // 1 x M_r
    st.h2 = hop2_->couple(p2);  // M_r x N_d
    const double a1 = std::sqrt(atten1_), a2 = std::sqrt(atten2_);
    for (auto& v : st.h1) v *= a1;
    for (auto& v : st.h2) v *= a2;
    st.refresh_alpha1();
    return st;
  }

  FadingEnsemble draw_ensemble(std::uint64_t master_seed, std::size_t count, int threads = 0) const {
    FadingEnsemble ens{std::vector<FadingState>(count), cfg_, master_seed};
    parallel_for(count, threads, [&](std::size_t i) { ens.states[i] = draw_state(master_seed, i); });
    return ens;
  }

 private:
  ChannelConfig cfg_;
  ScreenSynthesizer synth_;
  std::optional<HopModel> hop1_, hop2_;
  double r0_1_ = 0.0, r0_2_ = 0.0;
  double atten1_ = 1.0, atten2_ = 1.0;
};

struct FadingStats {
  double mean_alpha1_db = 0.0;  // positive loss
  double rsd = 0.0;
  double mean_alpha1 = 0.0;
  double std_alpha1 = 0.0;
};

inline FadingStats fading_stats(const FadingEnsemble& ensemble) {
  require(!ensemble.states.empty(), ErrorCode::invalid_argument, "empty ensemble");
  const double n = double(ensemble.size());
  double mean = 0.0;
  for (const auto& s : ensemble.states) mean += s.alpha1;
  mean /= n;
  double var = 0.0;
  for (const auto& s : ensemble.states) var += (s.alpha1 - mean) * (s.alpha1 - mean);
  var /= n;
  FadingStats out;
  out.mean_alpha1 = mean;
  out.std_alpha1 = std::sqrt(var);
  out.mean_alpha1_db = -10.0 * std::log10(mean);
  out.rsd = mean > 0.0 ? out.std_alpha1 / mean : 0.0;
  return out;
}

/// Zero-turbulence power coupling from the LP01 transmit mode into the LP01
/// receive mode of one hop.
inline double baseline_coupling(double tx_omega, double f_tx, double rx_omega, double f_rx, double distance,
                                double aperture, double wavelength, const GridSpec& free_grid,
                                const GridSpec& facet_grid) {
  const ComplexField tx = lp_mode_field({0, 1, Orientation::cosine}, tx_omega, facet_grid);
  const ModeBasis rx = mode_basis(1, rx_omega, facet_grid);
  const auto h = hop_coupling(tx, {distance, f_tx, f_rx, aperture, wavelength}, {}, ScreenPlacement::receiver, rx,
                              free_grid);
  return std::norm(h[0]);
}

struct FocalSearch {
  double focal = 0.0;
  double coupling = 0.0;
  int evaluations = 0;
};

/// Golden-section search for the receive focal length that maximizes
/// zero-turbulence LP01 coupling of a hop whose launched beam is
/// `arriving_field` (already propagated to the receive aperture).
inline FocalSearch optimize_receiver_focal(const ComplexField& arriving_field, double rx_omega, double lo, double hi,
                                           double aperture, double wavelength, const GridSpec& facet_grid,
                                           double tolerance = 1e-3) {
  require(lo > 0.0 && hi > lo, ErrorCode::invalid_argument, "focal search range must be increasing and positive");
  const ComplexField mode = lp_mode_field({0, 1, Orientation::cosine}, rx_omega, facet_grid);
  FocalSearch res;
  auto eval = [&](double f) {
    ++res.evaluations;
    return std::norm(couple_to_mode(arriving_field, mode, f, wavelength, aperture));
  };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = eval(c), fd = eval(d);
  while (b - a > tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = eval(d);
    }
  }
  res.focal = 0.5 * (a + b);
  res.coupling = eval(res.focal);
  const double f_lo = eval(lo), f_hi = eval(hi);
  require(res.coupling > f_lo && res.coupling > f_hi && res.focal - lo > tolerance && hi - res.focal > tolerance,
          ErrorCode::no_interior_maximum, "coupling maximum is not inside the search range");
  return res;
}

/// Convenience overload: nominal hop of a channel configuration.
/// hop = 1 optimizes the relay receive lens, hop = 2 the destination lens.
inline FocalSearch optimize_receiver_focal(const ChannelConfig& cfg, int hop, double lo, double hi) {
  require(hop == 1 || hop == 2, ErrorCode::invalid_argument, "hop must be 1 or 2");
  const auto& g = cfg.geometry;
  const double tx_omega = hop == 1 ? kSmfOmega : cfg.relay_omega();
  const double rx_omega = hop == 1 ? cfg.relay_omega() : kFmfOmega;
  const double f_tx = hop == 1 ? g.f_t1 : g.f_t2;
  const double d = hop == 1 ? g.d1 : g.d2;
  const ComplexField tx = lp_mode_field({0, 1, Orientation::cosine}, tx_omega, cfg.facet_grid);
  const ComplexField arriving = propagate(lens_collimate(tx, f_tx, cfg.wavelength, cfg.free_grid), d, cfg.wavelength);
  return optimize_receiver_focal(arriving, rx_omega, lo, hi, g.aperture_rx, cfg.wavelength, cfg.facet_grid);
}

}  // namespace fsorelay
