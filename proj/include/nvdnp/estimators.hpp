#pragma once
#include "nvdnp/constants.hpp"
#include "nvdnp/errors.hpp"

namespace nvdnp {

// Nuclear thermal polarization h*f_n/(2kT) with f_n = gamma*B. The high-field
// literature writes hbar*gamma_ang*B/(2kT) with an angular-frequency gamma;
// the two forms agree, and this codebase keeps plain Hz throughout.
inline double thermal_polarization(double field_tesla, double temperature_k,
                                   double gamma = gamma_c13) {
  if (!(field_tesla > 0) || !(temperature_k > 0) || !(gamma > 0))
    throw InvalidArgument("thermal_polarization: field, temperature, gamma must be > 0");
  return planck_h * gamma * field_tesla / (2.0 * boltzmann_k * temperature_k);
}

// Inputs for converting a measured signal ratio into absolute polarization
// and an enhancement factor. The hyperpolarized signal is taken in a small
// field (b_em) at laser temperature t_l; the thermal reference in a large
// NMR field (b_sm) at room temperature t_r.
struct EnhancementInputs {
  double s_hyper = 0;      // band integral of the hyperpolarized spectrum
  double s_thermal = 0;    // band integral of the thermal reference spectrum
  double b_sm = 6.0;       // T, reference NMR field
  double b_em = 0.0176;    // T, polarizing field
  double t_l = 360.0;      // K, sample temperature during pumping
  double t_r = 297.0;      // K, room temperature of the reference
  double gamma_n = gamma_c13;  // Hz/T
};

inline void validate(const EnhancementInputs& in) {
  if (!(in.s_hyper > 0)) throw InvalidArgument("s_hyper must be > 0");
  if (!(in.s_thermal > 0)) throw InvalidArgument("s_thermal must be > 0");
  if (!(in.b_sm > 0) || !(in.b_em > 0)) throw InvalidArgument("fields must be > 0");
  if (!(in.t_l > 0) || !(in.t_r > 0)) throw InvalidArgument("temperatures must be > 0");
  if (!(in.gamma_n > 0)) throw InvalidArgument("gamma_n must be > 0");
}

// Absolute polarization from the signal ratio: the thermal reference carries
// a known polarization at (b_sm, t_r), and the ratio scales it.
inline double estimate_polarization(const EnhancementInputs& in) {
  validate(in);
  return (in.s_hyper / in.s_thermal) * thermal_polarization(in.b_sm, in.t_r, in.gamma_n);
}

// Enhancement over thermal equilibrium at the polarizing field: the signal
// ratio corrected by the field ratio and the temperature ratio.
inline double enhancement_factor(const EnhancementInputs& in) {
  validate(in);
  return (in.s_hyper / in.s_thermal) * (in.b_sm / in.b_em) * (in.t_l / in.t_r);
}

// Diamond temperature from the two electron transition frequencies: their
// mean is the zero-field splitting, which slides at nv_zfs_slope (Hz/K).
inline double temperature_from_zfs(double f_minus, double f_plus, double d_ref = nv_zfs_room,
                                   double t_ref = 297.0) {
  if (!(f_minus > 0) || !(f_plus > f_minus))
    throw InvalidArgument("temperature_from_zfs: need f_plus > f_minus > 0");
  double d = 0.5 * (f_minus + f_plus);
  return t_ref + (d - d_ref) / nv_zfs_slope;
}

}  // namespace nvdnp
