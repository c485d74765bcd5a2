#pragma once
#include <vector>

#include "nvdnp/errors.hpp"

namespace nvdnp {

// Composite laser-power model for the pumped polarization: the NV electron
// polarization grows linearly with laser density while heating erodes the
// nuclear thermal polarization hyperbolically. Their product is the candidate
// explanation for the measured rollover, and the point of modeling it is that
// the product is still strictly increasing, so heating alone cannot produce a
// maximum at finite density.
struct LaserModelParams {
  double alpha = 3.4;  // K per (mW/mm^2), heating slope of the temperature curve
  double beta = 1.0;   // per (mW/mm^2), slope of the NV polarization curve
  double c = 1.0;      // K, numerator constant of the thermal term
  double base_temperature = 300.0;  // K, unheated reference in the denominator
};

inline void validate(const LaserModelParams& p) {
  if (!(p.alpha > 0) || !(p.beta > 0) || !(p.c > 0) || !(p.base_temperature > 0))
    throw InvalidArgument("laser model parameters must be positive");
}

inline double laser_nv_polarization(const LaserModelParams& p, double density) {
  validate(p);
  if (density < 0) throw InvalidArgument("laser density must be >= 0");
  return p.beta * density;
}

inline double laser_thermal_polarization(const LaserModelParams& p, double density) {
  validate(p);
  if (density < 0) throw InvalidArgument("laser density must be >= 0");
  return p.c / (p.base_temperature + p.alpha * density);
}

inline double laser_hyper_polarization(const LaserModelParams& p, double density) {
  return laser_nv_polarization(p, density) * laser_thermal_polarization(p, density);
}

struct LaserCurvePoint {
  double density = 0;    // mW/mm^2
  double p_nv = 0;       // dimensionless, arbitrary scale
  double p_thermal = 0;  // dimensionless, arbitrary scale
  double p_hyper = 0;    // product of the two
};

inline std::vector<LaserCurvePoint> laser_composite_curve(const LaserModelParams& p,
                                                          const std::vector<double>& densities) {
  validate(p);
  std::vector<LaserCurvePoint> out;
  out.reserve(densities.size());
  for (double s : densities) {
    LaserCurvePoint pt;
    pt.density = s;
    pt.p_nv = laser_nv_polarization(p, s);
    pt.p_thermal = laser_thermal_polarization(p, s);
    pt.p_hyper = pt.p_nv * pt.p_thermal;
    out.push_back(pt);
  }
  return out;
}

}  // namespace nvdnp
