#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "fsorelay/error.hpp"

namespace fsorelay {

using cdouble = std::complex<double>;

/// Uniform square sampling of a transverse plane. Sample i sits at
/// (i - n/2) * spacing, so the optical axis falls on index n/2.
struct GridSpec {
  int n_points = 1024;
  double spacing = 0.5e-3;

  double window() const noexcept { return n_points * spacing; }
  double coordinate(int i) const noexcept { return (i - n_points / 2) * spacing; }
  std::size_t size() const noexcept { return std::size_t(n_points) * std::size_t(n_points); }

  /// Spatial frequency (cycles/m) of DFT bin i in standard FFT ordering.
  double frequency(int i) const noexcept {
    const int k = i < n_points / 2 ? i : i - n_points;
    return k / (n_points * spacing);
  }
  double frequency_step() const noexcept { return 1.0 / window(); }

  void validate() const {
    require(n_points >= 64 && (n_points & (n_points - 1)) == 0, ErrorCode::invalid_argument,
            "grid size must be a power of two >= 64");
    require(spacing > 0.0 && std::isfinite(spacing), ErrorCode::invalid_argument,
            "grid spacing must be positive");
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Sampled complex amplitude, row-major (index = iy * n + ix), in sqrt(W)/m so
/// that power = sum |u|^2 * spacing^2.
struct ComplexField {
  GridSpec grid;
  std::vector<cdouble> samples;

  ComplexField() = default;
  explicit ComplexField(GridSpec g) : grid(g), samples(g.size()) {}
  ComplexField(GridSpec g, std::vector<cdouble> s) : grid(g), samples(std::move(s)) {}

  cdouble& at(int ix, int iy) { return samples[std::size_t(iy) * grid.n_points + ix]; }
  const cdouble& at(int ix, int iy) const { return samples[std::size_t(iy) * grid.n_points + ix]; }
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
  require(a.n_points == b.n_points && std::abs(a.spacing - b.spacing) <= 1e-12 * b.spacing,
          ErrorCode::grid_mismatch, "fields are sampled on different grids");
}

inline double field_power(const ComplexField& field) {
  double sum = 0.0;
  for (const auto& v : field.samples) sum += std::norm(v);
  return sum * field.grid.spacing * field.grid.spacing;
}

/// <a, b> = sum conj(a) * b * dA
inline cdouble inner_product(const ComplexField& a, const ComplexField& b) {
  require_same_grid(a.grid, b.grid);
  cdouble sum{};
  for (std::size_t i = 0; i < a.samples.size(); ++i) sum += std::conj(a.samples[i]) * b.samples[i];
  return sum * (a.grid.spacing * a.grid.spacing);
}

inline ComplexField scaled(ComplexField field, cdouble factor) {
  for (auto& v : field.samples) v *= factor;
  return field;
}

inline ComplexField normalized(ComplexField field) {
  const double p = field_power(field);
  require(p > 0.0, ErrorCode::invalid_argument, "cannot normalize a zero field");
  return scaled(std::move(field), 1.0 / std::sqrt(p));
}

/// Second-moment (D4-sigma) 1/e^2 radius along x, about the centroid.
inline double second_moment_radius_x(const ComplexField& field) {
  const auto& g = field.grid;
  double p = 0.0, mx = 0.0, mxx = 0.0;
  for (int iy = 0; iy < g.n_points; ++iy)
    for (int ix = 0; ix < g.n_points; ++ix) {
      const double w = std::norm(field.at(ix, iy));
      const double x = g.coordinate(ix);
      p += w;
      mx += w * x;
      mxx += w * x * x;
    }
  mx /= p;
  return 2.0 * std::sqrt(mxx / p - mx * mx);
}

/// Second-moment 1/e^2 diameter of a radially symmetric intensity: 2*sqrt(2<r^2>).
inline double second_moment_diameter(const ComplexField& field) {
  const auto& g = field.grid;
  double p = 0.0, mrr = 0.0;
  for (int iy = 0; iy < g.n_points; ++iy)
    for (int ix = 0; ix < g.n_points; ++ix) {
      const double w = std::norm(field.at(ix, iy));
      const double x = g.coordinate(ix), y = g.coordinate(iy);
      p += w;
      mrr += w * (x * x + y * y);
    }
  return 2.0 * std::sqrt(2.0 * mrr / p);
}

}  // namespace fsorelay
