#pragma once
#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "nvdnp/steady_state.hpp"

namespace nvdnp {

enum class SweepProtocol {
  steady,     // long-time limit from the thermal state (default)
  transient,  // integrate for transient_duration and read the final state
};

struct SweepPlan {
  std::vector<double> frequencies;  // Hz, one tone placed at each point
  double rabi = 0.05e6;             // Hz, weak-drive regime by default
  SweepProtocol protocol = SweepProtocol::steady;
  double transient_duration = 0.0;  // s, only for SweepProtocol::transient
  int workers = 0;                  // 0: hardware concurrency
};

inline std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) throw InvalidArgument("linspace: need at least two points");
  std::vector<double> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

// Polarization readout with a single tone at the given frequency: the whole
// per-point pipeline (frame, generator, long-time limit, observable).
inline double polarization_at(const LindbladModel& base, double frequency, double rabi,
                              SweepProtocol protocol = SweepProtocol::steady,
                              double transient_duration = 0.0) {
  LindbladModel m = base;
  m.tones = {{frequency, rabi, 0.0}};
  TimeDependentLiouvillian gen = assemble_liouvillian(to_rotating_frame(m, frequency));
  Matrix rho0 = thermal_state(m.system, m.field, m.temperature);
  Matrix rho;
  if (protocol == SweepProtocol::steady) {
    rho = steady_state_from(gen, rho0);
  } else {
    if (transient_duration <= 0)
      throw InvalidArgument("transient protocol needs a positive duration");
    rho = evolve(gen, rho0, transient_duration).final_state;
  }
  return observable(rho, m.readout_op());
}

// ---- peak detection --------------------------------------------------------

struct PeakLobe {
  int sign = 0;               // +1 pumps the readout spin up, -1 down
  double grid_frequency = 0;  // best grid point
  double frequency = 0;       // refined position
  double amplitude = 0;       // signed polarization at the refined position
};

struct PeakComponent {
  double center = 0;           // mean of the refined lobe positions
  double lobe_separation = 0;  // |f(+) - f(-)|, 0 if a sign is missing
  std::vector<PeakLobe> lobes;
};

struct PeakTable {
  std::vector<PeakComponent> components;
  std::vector<double> spacings;  // consecutive component center distances
};

struct PeakFinderOptions {
  double threshold_rel = 0.05;  // ignore structure below this fraction of max
  double cluster_gap = 0.0;     // Hz; 0: four grid steps
  bool refine = true;           // polish with extra evaluations off the grid
  int fine_points = 24;         // pre-scan density around each grid candidate
  double refine_tol = 200.0;    // Hz, golden-section window
};

namespace detail {

// Golden-section maximum of f on [lo, hi], assuming unimodality there (the
// caller brackets tightly enough via the fine pre-scan).
inline double golden_max(const std::function<double(double)>& f, double lo, double hi,
                         double tol) {
  const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// Locate polarization lobes in a sampled spectrum. Grid extrema above the
// threshold are clustered into components (hyperfine copies of the same
// doublet); within each cluster the positive and negative lobes are polished
// with additional model evaluations, because a sweep grid coarse enough to be
// cheap is too coarse to place sub-grid lobe positions.
inline PeakTable find_peaks(const std::vector<double>& freqs, const std::vector<double>& vals,
                            const std::function<double(double)>& evaluate,
                            PeakFinderOptions opt = {}) {
  PeakTable table;
  size_t n = freqs.size();
  if (n < 3 || vals.size() != n) return table;
  double scale = 0;
  for (double v : vals) scale = std::max(scale, std::abs(v));
  if (scale <= 0) return table;
  double thr = opt.threshold_rel * scale;
  double grid_step = (freqs.back() - freqs.front()) / static_cast<double>(n - 1);
  double gap = opt.cluster_gap > 0 ? opt.cluster_gap : 4.0 * grid_step;

  struct Cand {
    size_t idx;
    int sign;
  };
  std::vector<Cand> cands;
  for (size_t i = 1; i + 1 < n; ++i) {
    if (std::abs(vals[i]) < thr) continue;
    int s = vals[i] > 0 ? 1 : -1;
    if (s * vals[i] >= s * vals[i - 1] && s * vals[i] >= s * vals[i + 1])
      cands.push_back({i, s});
  }
  if (cands.empty()) return table;

  // Cluster by frequency gaps.
  std::vector<std::vector<Cand>> clusters(1, std::vector<Cand>{cands[0]});
  for (size_t k = 1; k < cands.size(); ++k) {
    if (freqs[cands[k].idx] - freqs[cands[k - 1].idx] > gap)
      clusters.emplace_back();
    clusters.back().push_back(cands[k]);
  }

  for (const auto& cluster : clusters) {
    PeakComponent comp;
    for (int s : {+1, -1}) {
      const Cand* best = nullptr;
      for (const auto& c : cluster)
        if (c.sign == s && (!best || s * vals[c.idx] > s * vals[best->idx])) best = &c;
      if (!best) continue;
      PeakLobe lobe;
      lobe.sign = s;
      lobe.grid_frequency = freqs[best->idx];
      lobe.frequency = lobe.grid_frequency;
      lobe.amplitude = vals[best->idx];
      if (opt.refine && evaluate) {
        // Fine pre-scan of one grid cell on each side, then golden section in
        // the winning subinterval. This keeps golden section on a bracket
        // where the lobe is the only extremum.
        double lo = lobe.grid_frequency - grid_step, hi = lobe.grid_frequency + grid_step;
        double fine_step = (hi - lo) / opt.fine_points;
        double best_f = lobe.grid_frequency, best_v = s * vals[best->idx];
        for (int j = 0; j <= opt.fine_points; ++j) {
          double f = lo + j * fine_step;
          double v = s * evaluate(f);
          if (v > best_v) {
            best_v = v;
            best_f = f;
          }
        }
        auto g = [&](double f) { return s * evaluate(f); };
        double refined = detail::golden_max(g, best_f - fine_step, best_f + fine_step,
                                            opt.refine_tol);
        lobe.frequency = refined;
        lobe.amplitude = evaluate(refined);
      }
      comp.lobes.push_back(lobe);
    }
    if (comp.lobes.empty()) continue;
    double sum = 0;
    for (const auto& l : comp.lobes) sum += l.frequency;
    comp.center = sum / static_cast<double>(comp.lobes.size());
    if (comp.lobes.size() == 2)
      comp.lobe_separation = std::abs(comp.lobes[0].frequency - comp.lobes[1].frequency);
    table.components.push_back(std::move(comp));
  }
  for (size_t i = 0; i + 1 < table.components.size(); ++i)
    table.spacings.push_back(table.components[i + 1].center - table.components[i].center);
  return table;
}

// ---- sweeps ----------------------------------------------------------------

struct SpectrumResult {
  std::vector<double> frequencies;
  std::vector<double> polarizations;
  std::vector<std::uint8_t> failed;
  std::vector<std::string> errors;
  PeakTable peaks;
  bool any_failed = false;
};

namespace detail {

inline void check_axis(const std::vector<double>& points, const char* what) {
  if (points.empty()) throw InvalidArgument(std::string(what) + ": empty axis");
  for (size_t i = 1; i < points.size(); ++i)
    if (!(points[i] > points[i - 1]))
      throw InvalidArgument(std::string(what) + ": axis points must be strictly increasing");
}

// Run one job per index on a small worker pool. Results land by index, so
// the outcome is identical for any worker count.
inline void parallel_for(int workers, size_t count, const std::function<void(size_t)>& job) {
  unsigned hw = std::thread::hardware_concurrency();
  int w = workers > 0 ? workers : static_cast<int>(hw > 0 ? hw : 1);
  w = std::min<int>(w, static_cast<int>(count));
  if (w <= 1) {
    for (size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < w; ++t)
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Sweep a single weak tone across the spectrum and record the steady nuclear
// polarization at each point. Solver failures mark the point and move on.
inline SpectrumResult polarization_spectrum(const LindbladModel& base, const SweepPlan& plan,
                                            PeakFinderOptions peak_opt = {}) {
  detail::check_axis(plan.frequencies, "polarization_spectrum");
  SpectrumResult out;
  size_t n = plan.frequencies.size();
  out.frequencies = plan.frequencies;
  out.polarizations.assign(n, 0.0);
  out.failed.assign(n, 0);
  out.errors.assign(n, "");
  detail::parallel_for(plan.workers, n, [&](size_t i) {
    try {
      out.polarizations[i] = polarization_at(base, plan.frequencies[i], plan.rabi, plan.protocol,
                                             plan.transient_duration);
    } catch (const std::exception& e) {
      out.failed[i] = 1;
      out.errors[i] = e.what();
    }
  });
  for (auto f : out.failed) out.any_failed = out.any_failed || f;
  auto evaluate = [&](double f) {
    return polarization_at(base, f, plan.rabi, plan.protocol, plan.transient_duration);
  };
  out.peaks = find_peaks(out.frequencies, out.polarizations, evaluate, peak_opt);
  return out;
}

// ---- microwave power dependence ---------------------------------------------

// Delivered microwave power maps to a Rabi amplitude through the usual
// square-root coupling; the default calibration puts 10 W at 0.35 MHz.
inline double rabi_from_power(double power_watt, double rabi_per_sqrt_watt = 110679.71798413355) {
  if (power_watt < 0) throw InvalidArgument("rabi_from_power: power must be >= 0");
  return rabi_per_sqrt_watt * std::sqrt(power_watt);
}

struct PowerPlan {
  std::vector<double> powers;  // W
  double frequency = 0.0;      // Hz, the tone sits here throughout
  double rabi_per_sqrt_watt = 110679.71798413355;
  SweepProtocol protocol = SweepProtocol::steady;
  double transient_duration = 0.0;
  int workers = 0;
};

struct PowerResult {
  std::vector<double> powers;
  std::vector<double> rabis;
  std::vector<double> polarizations;
  std::vector<std::uint8_t> failed;
  std::vector<std::string> errors;
  int peak_index = -1;             // argmax of |polarization|
  double final_to_peak_ratio = 0;  // |last| / |peak|
  bool any_failed = false;
};

inline PowerResult power_dependence(const LindbladModel& base, const PowerPlan& plan) {
  detail::check_axis(plan.powers, "power_dependence");
  PowerResult out;
  size_t n = plan.powers.size();
  out.powers = plan.powers;
  out.rabis.resize(n);
  for (size_t i = 0; i < n; ++i) out.rabis[i] = rabi_from_power(plan.powers[i], plan.rabi_per_sqrt_watt);
  out.polarizations.assign(n, 0.0);
  out.failed.assign(n, 0);
  out.errors.assign(n, "");
  detail::parallel_for(plan.workers, n, [&](size_t i) {
    try {
      out.polarizations[i] = polarization_at(base, plan.frequency, out.rabis[i], plan.protocol,
                                             plan.transient_duration);
    } catch (const std::exception& e) {
      out.failed[i] = 1;
      out.errors[i] = e.what();
    }
  });
  for (auto f : out.failed) out.any_failed = out.any_failed || f;
  double best = -1;
  for (size_t i = 0; i < n; ++i)
    if (!out.failed[i] && std::abs(out.polarizations[i]) > best) {
      best = std::abs(out.polarizations[i]);
      out.peak_index = static_cast<int>(i);
    }
  if (out.peak_index >= 0 && best > 0)
    out.final_to_peak_ratio = std::abs(out.polarizations.back()) / best;
  return out;
}

}  // namespace nvdnp
