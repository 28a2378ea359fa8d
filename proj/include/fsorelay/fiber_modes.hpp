#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fsorelay/grid.hpp"

namespace fsorelay {

enum class Orientation { cosine, sine };

/// LP_{m n}: azimuthal order m >= 0, radial order n >= 1. For m = 0 the
/// orientation is always cosine.
struct LPModeIndex {
  int m = 0;
  int n = 1;
  Orientation orientation = Orientation::cosine;

  std::string name() const {
    std::string s = "LP" + std::to_string(m) + std::to_string(n);
    if (m > 0) s += orientation == Orientation::cosine ? "a" : "b";
    return s;
  }
  friend bool operator==(const LPModeIndex&, const LPModeIndex&) = default;
};

/// Graded-index (parabolic) fiber mode
///   psi ~ L^m_{n-1}(r^2/w^2) (r/w)^m exp(-r^2 / 2w^2) {cos, sin}(m theta)
/// normalized to unit power on the grid.
inline ComplexField lp_mode_field(const LPModeIndex& index, double omega, const GridSpec& grid) {
  grid.validate();
  require(index.m >= 0 && index.n >= 1, ErrorCode::invalid_argument, "invalid LP mode index");
  require(index.m > 0 || index.orientation == Orientation::cosine, ErrorCode::invalid_argument,
          "LP0n modes have no sine orientation");
  require(omega > 0.0 && omega >= 3.0 * grid.spacing, ErrorCode::grid_too_coarse,
          "mode width must span at least 3 samples");
  require(grid.window() >= 10.0 * omega, ErrorCode::window_too_small, "window must be at least 10 mode widths");

  ComplexField field(grid);
  for (int iy = 0; iy < grid.n_points; ++iy) {
    const double y = grid.coordinate(iy) / omega;
    for (int ix = 0; ix < grid.n_points; ++ix) {
      const double x = grid.coordinate(ix) / omega;
      const double s = x * x + y * y;
      double v = std::assoc_laguerre(unsigned(index.n - 1), unsigned(index.m), s) *
                 std::pow(std::sqrt(s), index.m) * std::exp(-0.5 * s);
      if (index.m > 0) {
        const double theta = std::atan2(y, x);
        v *= index.orientation == Orientation::cosine ? std::cos(index.m * theta) : std::sin(index.m * theta);
      }
      field.at(ix, iy) = v;
    }
  }
  return normalized(std::move(field));
}

/// How a "four-mode" fiber is populated: four LP labels (six spatial fields)
/// or the first four spatial fields.
enum class FourModeConvention { lp_labels, spatial_fields };

struct ModeBasis {
  double omega = 0.0;
  std::vector<LPModeIndex> modes;
  std::vector<ComplexField> fields;

  std::size_t size() const noexcept { return fields.size(); }
};

inline std::vector<LPModeIndex> mode_indices(int label_count, FourModeConvention convention) {
  const std::vector<LPModeIndex> all = {
      {0, 1, Orientation::cosine}, {1, 1, Orientation::cosine}, {1, 1, Orientation::sine},
      {2, 1, Orientation::cosine}, {2, 1, Orientation::sine},   {0, 2, Orientation::cosine},
  };
  switch (label_count) {
    case 1: return {all[0]};
    case 2: return {all.begin(), all.begin() + 3};
    case 4:
      if (convention == FourModeConvention::spatial_fields) return {all.begin(), all.begin() + 4};
      return all;
    default: throw Error(ErrorCode::unsupported_count, "fiber mode count must be 1, 2 or 4");
  }
}

/// Nested ordering: the basis for a smaller count is always a prefix of a larger one.
inline ModeBasis mode_basis(int label_count, double omega, const GridSpec& grid,
                            FourModeConvention convention = FourModeConvention::lp_labels) {
  ModeBasis basis;
  basis.omega = omega;
  basis.modes = mode_indices(label_count, convention);
  for (const auto& idx : basis.modes) basis.fields.push_back(lp_mode_field(idx, omega, grid));
  return basis;
}

/// Width constant of the Gaussian (LP01) profile whose 1/e^2 intensity
/// diameter is `mfd`.
inline double omega_from_mfd(double mfd) { return mfd / (2.0 * std::sqrt(2.0)); }
inline double mfd_from_omega(double omega) { return 2.0 * std::sqrt(2.0) * omega; }

}  // namespace fsorelay
