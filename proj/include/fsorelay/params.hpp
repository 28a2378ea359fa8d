#pragma once

#include "fsorelay/error.hpp"

namespace fsorelay {

inline constexpr double kPlanck = 6.626e-34;
inline constexpr double kElectronCharge = 1.6e-19;
inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kSpeedOfLight = 299792458.0;

struct SystemParams {
  double wavelength = 1550e-9;
  double Be = 2e9;
  double Bo = 125e9;
  double Rb = 2e9;
  double nsp = 1.4;
  double T = 300.0;
  double rho = 0.75;
  double RL = 50.0;
  double Pb = 20e-9;  // per spatial mode
  double q = kElectronCharge;
  double h = kPlanck;
  double kB = kBoltzmann;
  double Pr = 0.0;  // relay output power; <= 0 means "equal to Pt"

  double photon_energy() const noexcept { return h * kSpeedOfLight / wavelength; }
  double Nb() const noexcept { return Pb / Bo; }
  /// nsp h nu Bo, the ASE-like term per mode in the gain formulas.
  double ase_power_per_mode(double nsp_value) const noexcept { return nsp_value * photon_energy() * Bo; }
  double relay_output_power(double Pt) const noexcept { return Pr > 0.0 ? Pr : Pt; }

  void validate() const {
    require(wavelength > 0.0 && Be > 0.0 && Bo > 0.0 && Rb > 0.0 && T >= 0.0 && RL > 0.0, ErrorCode::config_invalid,
            "system parameters must be positive");
    require(Be <= Bo, ErrorCode::config_invalid, "electrical bandwidth must not exceed optical bandwidth");
    require(rho >= 0.0 && Pb >= 0.0 && nsp >= 0.0, ErrorCode::config_invalid,
            "efficiency, background and nsp must be non-negative");
  }
};

inline double responsivity(const SystemParams& p) { return p.rho * p.q / p.photon_energy(); }

inline double thermal_variance(const SystemParams& p) { return 4.0 * p.kB * p.T * p.Be / p.RL; }

}  // namespace fsorelay
