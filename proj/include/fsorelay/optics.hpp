#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "fsorelay/fft.hpp"
#include "fsorelay/grid.hpp"

namespace fsorelay {

struct GaussianBeamParams {
  double waist_radius = 19e-3;  // 1/e^2 intensity radius
  double wavelength = 1550e-9;
  double curvature_radius = std::numeric_limits<double>::infinity();  // > 0 diverging
};

/// Unit-power Gaussian centred on the grid axis.
inline ComplexField make_gaussian(const GaussianBeamParams& params, const GridSpec& grid) {
  grid.validate();
  require(params.waist_radius > 0.0 && params.wavelength > 0.0, ErrorCode::invalid_argument,
          "waist and wavelength must be positive");
  require(params.waist_radius >= 4.0 * grid.spacing, ErrorCode::grid_too_coarse,
          "waist must span at least 4 samples");
  require(grid.window() >= 6.0 * params.waist_radius, ErrorCode::window_too_small,
          "window must be at least 6 waist radii");

  const double k = 2.0 * std::numbers::pi / params.wavelength;
  const double inv_r = std::isinf(params.curvature_radius) ? 0.0 : 1.0 / params.curvature_radius;
  const double w2 = params.waist_radius * params.waist_radius;
  ComplexField field(grid);
  for (int iy = 0; iy < grid.n_points; ++iy) {
    const double y = grid.coordinate(iy);
    for (int ix = 0; ix < grid.n_points; ++ix) {
      const double x = grid.coordinate(ix);
      const double r2 = x * x + y * y;
      field.at(ix, iy) = std::exp(-r2 / w2) * std::polar(1.0, 0.5 * k * r2 * inv_r);
    }
  }
  return normalized(std::move(field));
}

struct PropagationReport {
  double aliasing_fraction = 0.0;  // spectral power displaced beyond half a window
  bool aliasing_warning = false;
};

inline constexpr double kAliasingWarnFraction = 1e-3;

namespace detail {

// Fraction of angular-spectrum power whose paraxial walk-off lambda*z*|f| exceeds
// half the window along either axis; such components wrap around the periodic grid.
inline double wraparound_fraction(std::span<const cdouble> spectrum, const GridSpec& grid,
                                  double distance, double wavelength) {
  const double half = 0.5 * grid.window();
  double total = 0.0, wrapped = 0.0;
  for (int iy = 0; iy < grid.n_points; ++iy) {
    const double fy = std::abs(grid.frequency(iy));
    for (int ix = 0; ix < grid.n_points; ++ix) {
      const double fx = std::abs(grid.frequency(ix));
      const double p = std::norm(spectrum[std::size_t(iy) * grid.n_points + ix]);
      total += p;
      if (wavelength * distance * std::max(fx, fy) > half) wrapped += p;
    }
  }
  return total > 0.0 ? wrapped / total : 0.0;
}

}  // namespace detail

/// Angular-spectrum propagation over `distance` in vacuum. The common phase
/// exp(ikz) is dropped. Unitary up to rounding.
inline ComplexField propagate(const ComplexField& field, double distance, double wavelength,
                              PropagationReport* report = nullptr) {
  require(distance >= 0.0 && std::isfinite(distance), ErrorCode::invalid_distance,
          "propagation distance must be finite and non-negative");
  require(wavelength > 0.0, ErrorCode::invalid_argument, "wavelength must be positive");
  if (report) *report = {};
  if (distance == 0.0) return field;

  const auto& g = field.grid;
  const int n = g.n_points;
  std::vector<cdouble> work = field.samples;
  fft::transform_2d(work, n, fft::Direction::forward);

  if (report) {
    report->aliasing_fraction = detail::wraparound_fraction(work, g, distance, wavelength);
    report->aliasing_warning = report->aliasing_fraction > kAliasingWarnFraction;
  }

  const double inv_lambda = 1.0 / wavelength;
  const double inv_l2 = inv_lambda * inv_lambda;
  const double scale = 1.0 / (double(n) * double(n));
  for (int iy = 0; iy < n; ++iy) {
    const double fy = g.frequency(iy);
    for (int ix = 0; ix < n; ++ix) {
      const double fx = g.frequency(ix);
      const double f2 = fx * fx + fy * fy;
      auto& v = work[std::size_t(iy) * n + ix];
      if (f2 >= inv_l2) {
        v = 0.0;
        continue;
      }
      // 2 pi z (sqrt(1/l^2 - f^2) - 1/l), written without cancellation
      const double phase = -2.0 * std::numbers::pi * distance * f2 / (inv_lambda + std::sqrt(inv_l2 - f2));
      v *= std::polar(scale, phase);
    }
  }
  fft::transform_2d(work, n, fft::Direction::backward);
  return ComplexField(g, std::move(work));
}

/// Negative-distance counterpart of propagate (adjoint of the forward operator).
inline ComplexField back_propagate(const ComplexField& field, double distance, double wavelength) {
  require(distance >= 0.0 && std::isfinite(distance), ErrorCode::invalid_distance,
          "propagation distance must be finite and non-negative");
  if (distance == 0.0) return field;
  ComplexField conj = field;
  for (auto& v : conj.samples) v = std::conj(v);
  ComplexField out = propagate(conj, distance, wavelength);
  for (auto& v : out.samples) v = std::conj(v);
  return out;
}

/// Maps a field in the front focal plane of a thin lens (a fiber facet) to the
/// collimated field at the lens: u_out(x) = 1/(i l f) * FT[u_in](x / (l f)).
/// Evaluated as a separable matrix Fourier transform so the facet and the
/// aperture can use unrelated sample spacings.
inline ComplexField lens_collimate(const ComplexField& fiber_mode, double focal_length, double wavelength,
                                   const GridSpec& output_grid) {
  output_grid.validate();
  require(focal_length > 0.0 && std::isfinite(focal_length), ErrorCode::invalid_argument,
          "focal length must be positive");
  require(wavelength > 0.0, ErrorCode::invalid_argument, "wavelength must be positive");
  const double p_in = field_power(fiber_mode);
  require(std::abs(p_in - 1.0) <= 1e-3, ErrorCode::invalid_argument, "fiber mode must be normalized");

  const auto& gi = fiber_mode.grid;
  const double lf = wavelength * focal_length;
  // The sampled facet has a periodic far field of period l f / d_xi.
  require(lf / gi.spacing >= output_grid.window(), ErrorCode::scale_mismatch,
          "facet sampling too coarse for the output window");

  const int ni = gi.n_points, no = output_grid.n_points;
  std::vector<cdouble> kernel(std::size_t(no) * ni);  // kernel[j * ni + b]
  for (int j = 0; j < no; ++j) {
    const double x = output_grid.coordinate(j);
    for (int b = 0; b < ni; ++b)
      kernel[std::size_t(j) * ni + b] = std::polar(1.0, -2.0 * std::numbers::pi * x * gi.coordinate(b) / lf);
  }

  // tmp[a][j] = sum_b u[a][b] K[j][b]
  std::vector<cdouble> tmp(std::size_t(ni) * no);
  for (int a = 0; a < ni; ++a) {
    const cdouble* row = &fiber_mode.samples[std::size_t(a) * ni];
    for (int j = 0; j < no; ++j) {
      const cdouble* kr = &kernel[std::size_t(j) * ni];
      cdouble acc{};
      for (int b = 0; b < ni; ++b) acc += row[b] * kr[b];
      tmp[std::size_t(a) * no + j] = acc;
    }
  }

  ComplexField out(output_grid);
  const cdouble factor = gi.spacing * gi.spacing / cdouble(0.0, lf);
  for (int i = 0; i < no; ++i) {
    cdouble* orow = &out.samples[std::size_t(i) * no];
    const cdouble* kr = &kernel[std::size_t(i) * ni];
    for (int a = 0; a < ni; ++a) {
      const cdouble w = kr[a] * factor;
      const cdouble* trow = &tmp[std::size_t(a) * no];
      for (int j = 0; j < no; ++j) orow[j] += w * trow[j];
    }
  }

  const double p_out = field_power(out);
  require(std::abs(p_out - p_in) <= 1e-4 * p_in, ErrorCode::scale_mismatch,
          "output grid cannot hold the collimated field");
  return out;
}

inline ComplexField circular_aperture(ComplexField field, double diameter) {
  const auto& g = field.grid;
  const double r2max = 0.25 * diameter * diameter;
  for (int iy = 0; iy < g.n_points; ++iy) {
    const double y = g.coordinate(iy);
    for (int ix = 0; ix < g.n_points; ++ix) {
      const double x = g.coordinate(ix);
      if (x * x + y * y > r2max) field.at(ix, iy) = 0.0;
    }
  }
  return field;
}

/// Overlap of an aperture-truncated field with a pupil-plane mode.
inline cdouble pupil_overlap(const ComplexField& aperture_field, const ComplexField& pupil_mode,
                             double aperture_diameter) {
  require_same_grid(aperture_field.grid, pupil_mode.grid);
  const auto& g = aperture_field.grid;
  const double r2max = 0.25 * aperture_diameter * aperture_diameter;
  cdouble sum{};
  for (int iy = 0; iy < g.n_points; ++iy) {
    const double y = g.coordinate(iy);
    for (int ix = 0; ix < g.n_points; ++ix) {
      const double x = g.coordinate(ix);
      if (x * x + y * y > r2max) continue;
      sum += std::conj(pupil_mode.at(ix, iy)) * aperture_field.at(ix, iy);
    }
  }
  return sum * (g.spacing * g.spacing);
}

/// The lens-plane field whose overlap with an incoming field gives the
/// amplitude coupled into `fiber_mode` at the focus. This is the adjoint of
/// lens_collimate, conj(L[conj(psi)]); it differs from L[psi] by a parity sign,
/// which matters once relay modes are summed coherently.
inline ComplexField receive_pupil_mode(const ComplexField& fiber_mode, double focal_length, double wavelength,
                                       const GridSpec& output_grid) {
  ComplexField conj_mode = fiber_mode;
  for (auto& v : conj_mode.samples) v = std::conj(v);
  ComplexField out = lens_collimate(conj_mode, focal_length, wavelength, output_grid);
  for (auto& v : out.samples) v = std::conj(v);
  return out;
}

/// Complex amplitude coupled into a fiber mode sitting at the focus of a lens
/// of the given focal length, with the field truncated by the lens aperture.
/// |result|^2 is the power coupling efficiency for a unit-power field.
inline cdouble couple_to_mode(const ComplexField& aperture_field, const ComplexField& fiber_mode,
                              double focal_length, double wavelength, double aperture_diameter) {
  require(aperture_diameter > 0.0 && aperture_diameter <= aperture_field.grid.window(),
          ErrorCode::invalid_argument, "aperture must fit inside the window");
  const ComplexField pupil = receive_pupil_mode(fiber_mode, focal_length, wavelength, aperture_field.grid);
  return pupil_overlap(aperture_field, pupil, aperture_diameter);
}

}  // namespace fsorelay
