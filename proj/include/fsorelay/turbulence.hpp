#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "fsorelay/fft.hpp"
#include "fsorelay/grid.hpp"
#include "fsorelay/optics.hpp"

namespace fsorelay {

struct TurbulenceParams {
  double cn2 = 0.0;            // m^(-2/3)
  double distance = 5000.0;    // m
  double wavenumber = 2.0 * std::numbers::pi / 1550e-9;
  GaussianBeamParams beam{};
};

/// Gaussian-beam atmospheric coherence length
///   r0 = [8 / (3 (a + 0.62 L^{11/6}))]^{3/5} (0.423 Cn2 k^2 d)^{-3/5}
/// with the receiver-plane beam parameters Theta, Lambda of the launched beam.
/// Returns +inf when cn2 == 0.
inline double coherence_length(const TurbulenceParams& p) {
  require(p.cn2 >= 0.0 && std::isfinite(p.cn2), ErrorCode::invalid_argument, "cn2 must be non-negative");
  require(p.distance > 0.0 && p.wavenumber > 0.0 && p.beam.waist_radius > 0.0, ErrorCode::invalid_argument,
          "distance, wavenumber and waist must be positive");
  if (p.cn2 == 0.0) return std::numeric_limits<double>::infinity();

  const double d = p.distance, k = p.wavenumber, w0 = p.beam.waist_radius;
  const double theta0 = std::isinf(p.beam.curvature_radius) ? 1.0 : 1.0 - d / p.beam.curvature_radius;
  const double lambda0 = 2.0 * d / (k * w0 * w0);
  const double denom = theta0 * theta0 + lambda0 * lambda0;
  const double theta = theta0 / denom;
  const double lambda = lambda0 / denom;
  const double a = theta >= 0.0 ? (1.0 - std::pow(theta, 8.0 / 3.0)) / (1.0 - theta)
                                : (1.0 + std::pow(std::abs(theta), 8.0 / 3.0)) / (1.0 - theta);
  const double beam_factor = std::pow(8.0 / (3.0 * (a + 0.62 * std::pow(lambda, 11.0 / 6.0))), 0.6);
  return beam_factor * std::pow(0.423 * p.cn2 * k * k * d, -0.6);
}

struct PhaseScreen {
  GridSpec grid;
  std::vector<double> phase;  // radians, row-major
  double r0 = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
};

/// Fourier-transform-method Kolmogorov screens for one grid. The spectral
/// weights are cached; each draw is a pure function of the seed.
///
/// A complex Gaussian spectrum C (independent N(0,1) real and imaginary parts)
/// is filtered by sigma(f) = sqrt(0.023 r0^{-5/3} |f|^{-11/3}) * df, f in
/// cycles/m, and summed back to x-space. The real and imaginary parts are two
/// independent screens.
///
/// With subharmonics > 0 the low-order spectrum is rebuilt: 3x3 rings of
/// frequencies at df / 3^p, p = 1..levels, are added, and every cell close to
/// the origin (the first FFT ring and each subharmonic ring) gets the power
/// of int_cell Phi |f|^2 / |f_c|^2 instead of the point sample Phi(f_c). That
/// weighting makes each ring reproduce the tilt-dominated structure function
/// of its cell exactly. The innermost cell left over after the last level is
/// added as a random tilt with the matching variance.
class ScreenSynthesizer {
 public:
  explicit ScreenSynthesizer(const GridSpec& grid) : grid_(grid), weight_(grid.size()) {
    grid.validate();
    const double df = grid.frequency_step();
    for (int iy = 0; iy < grid.n_points; ++iy) {
      const double fy = grid.frequency(iy);
      for (int ix = 0; ix < grid.n_points; ++ix) {
        const double fx = grid.frequency(ix);
        const double f2 = fx * fx + fy * fy;
        weight_[std::size_t(iy) * grid.n_points + ix] = f2 > 0.0 ? std::sqrt(0.023 * std::pow(f2, -11.0 / 6.0)) * df : 0.0;
      }
    }
    ring_weight_ = weight_;
    for (int j = -1; j <= 1; ++j)
      for (int i = -1; i <= 1; ++i) {
        if (i == 0 && j == 0) continue;
        const std::size_t idx = std::size_t((j + grid.n_points) % grid.n_points) * grid.n_points +
                                std::size_t((i + grid.n_points) % grid.n_points);
        ring_weight_[idx] = std::sqrt(tilt_weighted_psd(i * df, j * df, df)) * df;
      }
  }

  const GridSpec& grid() const noexcept { return grid_; }

  /// Screens for r0 = 1 m; scale by r0^{-5/6} for any other coherence length.
  std::pair<std::vector<double>, std::vector<double>> unit_pair(std::uint64_t seed, int subharmonics) const {
    require(subharmonics >= 0, ErrorCode::invalid_argument, "subharmonic levels must be >= 0");
    const int n = grid_.n_points;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<cdouble> spec(grid_.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      spec[i] = cdouble(re, im) * (subharmonics > 0 ? ring_weight_[i] : weight_[i]);
    }
    fft::transform_2d(spec, n, fft::Direction::backward);

    if (subharmonics > 0) add_subharmonics(spec, rng, normal, subharmonics);

    std::pair<std::vector<double>, std::vector<double>> out;
    out.first.resize(spec.size());
    out.second.resize(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
      out.first[i] = spec[i].real();
      out.second[i] = spec[i].imag();
    }
    return out;
  }

 private:
  /// Mean of Phi(f) |f|^2 over the square cell of side d centred on (cx, cy),
  /// divided by |f_c|^2 (unit r0).
  static double tilt_weighted_psd(double cx, double cy, double d) {
    constexpr int q = 32;
    double acc = 0.0;
    for (int b = 0; b < q; ++b) {
      const double fy = cy + ((b + 0.5) / q - 0.5) * d;
      for (int a = 0; a < q; ++a) {
        const double fx = cx + ((a + 0.5) / q - 0.5) * d;
        acc += 0.023 * std::pow(fx * fx + fy * fy, -5.0 / 6.0);
      }
    }
    return acc / (q * q) / (cx * cx + cy * cy);
  }

  /// int over the unit square of |u|^{-11/3} u_x^2 d^2u, in polar form
  /// 12 int_0^{pi/4} (1 / (2 cos t))^{1/3} dt (Simpson).
  static double tilt_integral() {
    constexpr int n = 2000;
    const double h = (std::numbers::pi / 4.0) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double v = std::cbrt(0.5 / std::cos(i * h));
      s += (i == 0 || i == n) ? v : (i % 2 ? 4.0 * v : 2.0 * v);
    }
    return 12.0 * s * h / 3.0;
  }

  void add_subharmonics(std::vector<cdouble>& screen, std::mt19937_64& rng, std::normal_distribution<double>& normal,
                        int levels) const {
    const int n = grid_.n_points;
    std::vector<cdouble> low(grid_.size());
    std::vector<cdouble> ex(n), ey(n);
    double d = grid_.frequency_step();
    for (int p = 1; p <= levels; ++p) {
      d /= 3.0;
      for (int j = -1; j <= 1; ++j) {
        for (int i = -1; i <= 1; ++i) {
          if (i == 0 && j == 0) continue;
          const double fx = i * d, fy = j * d;
          const double amp = std::sqrt(tilt_weighted_psd(fx, fy, d)) * d;
          const double re = normal(rng);
          const double im = normal(rng);
          const cdouble c = cdouble(re, im) * amp;
          for (int k = 0; k < n; ++k) {
            ex[k] = std::polar(1.0, 2.0 * std::numbers::pi * fx * grid_.coordinate(k));
            ey[k] = std::polar(1.0, 2.0 * std::numbers::pi * fy * grid_.coordinate(k));
          }
          for (int iy = 0; iy < n; ++iy) {
            const cdouble cy = c * ey[iy];
            cdouble* row = &low[std::size_t(iy) * n];
            for (int ix = 0; ix < n; ++ix) row[ix] += cy * ex[ix];
          }
        }
      }
    }
    // Leftover central cell of side d: its structure function is a pure tilt
    // with slope variance (2 pi)^2 * 0.023 d^{1/3} * tilt_integral().
    const double slope_sd = 2.0 * std::numbers::pi * std::sqrt(0.023 * std::cbrt(d) * tilt_integral());
    const cdouble ax(normal(rng), normal(rng)), ay(normal(rng), normal(rng));
    for (int iy = 0; iy < n; ++iy) {
      const double y = grid_.coordinate(iy);
      cdouble* row = &low[std::size_t(iy) * n];
      for (int ix = 0; ix < n; ++ix) row[ix] += slope_sd * (ax * grid_.coordinate(ix) + ay * y);
    }
    cdouble mean{};
    for (const auto& v : low) mean += v;
    mean /= double(low.size());
    for (std::size_t i = 0; i < low.size(); ++i) screen[i] += low[i] - mean;
  }

  GridSpec grid_;
  std::vector<double> weight_;       // point-sampled spectrum
  std::vector<double> ring_weight_;  // same, first ring tilt-weighted
};

namespace detail {

inline void check_r0(double r0, const GridSpec& grid) {
  if (std::isinf(r0) && r0 > 0.0) return;
  require(r0 > 0.0 && r0 >= 4.0 * grid.spacing && r0 <= grid.window() / 4.0, ErrorCode::r0_out_of_range,
          "r0 must be resolvable (>= 4 samples) and contained (<= window/4)");
}

inline PhaseScreen scaled_screen(std::vector<double> unit, const GridSpec& grid, double r0, std::uint64_t seed) {
  if (std::isinf(r0)) {
    std::fill(unit.begin(), unit.end(), 0.0);
  } else {
    const double s = std::pow(r0, -5.0 / 6.0);
    for (auto& v : unit) v *= s;
  }
  return PhaseScreen{grid, std::move(unit), r0, seed};
}

}  // namespace detail

/// Both screens (real and imaginary part) from one spectral draw.
inline std::pair<PhaseScreen, PhaseScreen> generate_screen_pair(double r0, const GridSpec& grid, std::uint64_t seed,
                                                                int subharmonics = 0) {
  detail::check_r0(r0, grid);
  if (std::isinf(r0)) {
    return {PhaseScreen{grid, std::vector<double>(grid.size()), r0, seed},
            PhaseScreen{grid, std::vector<double>(grid.size()), r0, seed}};
  }
  auto [a, b] = ScreenSynthesizer(grid).unit_pair(seed, subharmonics);
  return {detail::scaled_screen(std::move(a), grid, r0, seed), detail::scaled_screen(std::move(b), grid, r0, seed)};
}

inline PhaseScreen generate_screen(double r0, const GridSpec& grid, std::uint64_t seed, int subharmonics = 0) {
  return generate_screen_pair(r0, grid, seed, subharmonics).first;
}

inline ComplexField apply_screen(ComplexField field, const PhaseScreen& screen) {
  require_same_grid(field.grid, screen.grid);
  for (std::size_t i = 0; i < field.samples.size(); ++i) field.samples[i] *= std::polar(1.0, screen.phase[i]);
  return field;
}

}  // namespace fsorelay
