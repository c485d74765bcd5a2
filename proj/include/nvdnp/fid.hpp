#pragma once
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <vector>

#include "nvdnp/errors.hpp"
#include "nvdnp/linalg.hpp"

namespace nvdnp {

// A demodulated free-induction-decay record: complex samples on a uniform
// time grid, with the demodulation reference frequency kept so spectra come
// out on an absolute axis.
struct FidRecord {
  double sample_interval = 0;  // s
  std::vector<Complex> samples;
  double frequency_offset = 0;  // Hz, demodulation reference
};

inline void validate(const FidRecord& r) {
  if (!(r.sample_interval > 0)) throw InvalidArgument("fid: sample_interval must be > 0");
  if (r.samples.size() < 2) throw InvalidArgument("fid: need at least two samples");
}

// Test-signal generator: a single decaying complex exponential whose
// amplitude is the polarization, so every later stage can be checked for
// exact linearity against it.
inline FidRecord synthesize_fid(double polarization, double larmor_offset, double t2_star,
                                double sample_interval, int length,
                                double frequency_offset = 0.0) {
  if (!(t2_star > 0)) throw InvalidArgument("synthesize_fid: t2_star must be > 0");
  if (!(sample_interval > 0)) throw InvalidArgument("synthesize_fid: sample_interval must be > 0");
  if (length < 2) throw InvalidArgument("synthesize_fid: need at least two samples");
  FidRecord r;
  r.sample_interval = sample_interval;
  r.frequency_offset = frequency_offset;
  r.samples.resize(static_cast<size_t>(length));
  for (int n = 0; n < length; ++n) {
    double t = n * sample_interval;
    r.samples[static_cast<size_t>(n)] =
        polarization * std::exp(Complex(-t / t2_star, 2.0 * M_PI * larmor_offset * t));
  }
  return r;
}

// Frequency spectrum on a strictly increasing axis. Normalization: amplitudes
// are sample_interval times the DFT, so discrete Parseval reads
// sum |x_n|^2 dt = sum |X_k|^2 df with df = 1/(N dt).
struct FreqSpectrum {
  std::vector<double> frequencies;  // Hz
  std::vector<Complex> amplitudes;
};

inline void validate(const FreqSpectrum& s) {
  if (s.frequencies.size() != s.amplitudes.size() || s.frequencies.size() < 2)
    throw InvalidArgument("spectrum: need matching axes with at least two points");
  for (size_t i = 1; i < s.frequencies.size(); ++i)
    if (!(s.frequencies[i] > s.frequencies[i - 1]))
      throw InvalidArgument("spectrum: frequency axis must be strictly increasing");
}

inline FreqSpectrum transform(const FidRecord& r) {
  validate(r);
  size_t n = r.samples.size();
  Eigen::FFT<double> fft;
  std::vector<Complex> raw;
  fft.fwd(raw, r.samples);
  FreqSpectrum s;
  s.frequencies.resize(n);
  s.amplitudes.resize(n);
  double df = 1.0 / (static_cast<double>(n) * r.sample_interval);
  // Center the axis: bin k carries frequency k*df for k < n/2 and
  // (k - n)*df above, presented in increasing order.
  size_t half = (n + 1) / 2;  // number of nonnegative-frequency bins
  for (size_t k = 0; k < n; ++k) {
    size_t src = (k + half) % n;  // negative-frequency bins first
    double bin = static_cast<double>(src) - (src >= half ? static_cast<double>(n) : 0.0);
    s.frequencies[k] = bin * df + r.frequency_offset;
    s.amplitudes[k] = raw[src] * r.sample_interval;
  }
  return s;
}

inline FidRecord inverse_transform(const FreqSpectrum& s) {
  validate(s);
  size_t n = s.frequencies.size();
  double df = (s.frequencies.back() - s.frequencies.front()) / static_cast<double>(n - 1);
  double dt = 1.0 / (static_cast<double>(n) * df);
  size_t half = (n + 1) / 2;
  // The zero bin sits at index n - half on the increasing axis.
  double offset = s.frequencies[n - half];
  std::vector<Complex> raw(n);
  for (size_t k = 0; k < n; ++k) raw[(k + half) % n] = s.amplitudes[k] / dt;
  FidRecord r;
  r.sample_interval = dt;
  r.frequency_offset = offset;
  Eigen::FFT<double> fft;
  fft.inv(r.samples, raw);
  return r;
}

enum class SpectrumPart { real, magnitude };

// Trapezoidal integral of the chosen part over [f_lo, f_hi]. Only samples
// inside the band contribute; there is no partial-cell interpolation.
inline double band_integral(const FreqSpectrum& s, double f_lo, double f_hi,
                            SpectrumPart part = SpectrumPart::real) {
  validate(s);
  if (!(f_hi > f_lo)) throw InvalidArgument("band_integral: need f_hi > f_lo");
  size_t n = s.frequencies.size();
  size_t lo = 0;
  while (lo < n && s.frequencies[lo] < f_lo) ++lo;
  size_t hi = n;
  while (hi > lo && s.frequencies[hi - 1] > f_hi) --hi;
  if (hi - lo < 2) throw InvalidArgument("band_integral: band covers fewer than two samples");
  auto value = [&](size_t i) {
    return part == SpectrumPart::real ? s.amplitudes[i].real() : std::abs(s.amplitudes[i]);
  };
  double acc = 0;
  for (size_t i = lo; i + 1 < hi; ++i)
    acc += 0.5 * (value(i) + value(i + 1)) * (s.frequencies[i + 1] - s.frequencies[i]);
  return acc;
}

// Full width at half maximum of the real part around its global maximum,
// with linear interpolation at the crossings.
inline double real_part_fwhm(const FreqSpectrum& s) {
  validate(s);
  size_t n = s.frequencies.size(), imax = 0;
  for (size_t i = 1; i < n; ++i)
    if (s.amplitudes[i].real() > s.amplitudes[imax].real()) imax = i;
  double peak = s.amplitudes[imax].real();
  if (!(peak > 0)) throw NumericError("real_part_fwhm: no positive peak");
  double half = 0.5 * peak;
  auto cross = [&](size_t a, size_t b) {
    double ya = s.amplitudes[a].real(), yb = s.amplitudes[b].real();
    return s.frequencies[a] + (half - ya) * (s.frequencies[b] - s.frequencies[a]) / (yb - ya);
  };
  size_t i = imax;
  while (i > 0 && s.amplitudes[i].real() > half) --i;
  if (s.amplitudes[i].real() > half) throw NumericError("real_part_fwhm: left edge not reached");
  double left = cross(i, i + 1);
  size_t j = imax;
  while (j + 1 < n && s.amplitudes[j].real() > half) ++j;
  if (s.amplitudes[j].real() > half) throw NumericError("real_part_fwhm: right edge not reached");
  double right = cross(j - 1, j);
  return right - left;
}

}  // namespace nvdnp
