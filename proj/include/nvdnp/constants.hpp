#pragma once

// Physical constants and literature values for the NV- / 13C system.
// All frequencies in this codebase are plain Hz (cycles per second); the
// 2*pi shows up only where a propagator or Liouvillian is assembled.

namespace nvdnp {

// CODATA 2018 exact values.
inline constexpr double planck_h = 6.62607015e-34;   // J s
inline constexpr double boltzmann_k = 1.380649e-23;  // J / K

// Gyromagnetic ratios, Hz per tesla (magnitudes; sign conventions are
// applied where the Zeeman terms are built).
inline constexpr double gamma_electron = 28.0249e9;
inline constexpr double gamma_c13 = 10.7084e6;
inline constexpr double gamma_n14 = 3.077e6;

// NV- ground-state zero-field splitting at room temperature, Hz, and its
// temperature slope near 300 K (Hz per kelvin, negative: D shrinks on heating).
inline constexpr double nv_zfs_room = 2.870e9;
inline constexpr double nv_zfs_slope = -74.0e3;

// Secular hyperfine coupling of the NV electron to its own 14N, Hz.
inline constexpr double n14_hyperfine_zz = 2.16e6;

}  // namespace nvdnp
