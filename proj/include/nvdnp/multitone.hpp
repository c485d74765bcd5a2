#pragma once
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nvdnp/sweep.hpp"

namespace nvdnp {

// How the beating generator is evaluated.
//   full: cycle propagator over one beat period (correct for resolved tones).
//   averaged: zero-order time average, which keeps only the static part of
//     the rotating-frame generator. Off-reference tones average to zero, so
//     this is only valid when they are far detuned and weak (their real
//     effect enters at order (rabi/offset)^2); it exists as a cheap
//     cross-check, not as the default.
enum class MultiToneStrategy { full, averaged };

// Compare the steady polarization produced by different subsets of a tone
// bank. The default subsets are cumulative: tone 0 alone, tones 0..1, tones
// 0..2, ... which answers the usual question of what each added tone buys.
struct MultiTonePlan {
  std::vector<DriveTone> tones;
  std::vector<std::vector<int>> subsets;  // indices into tones; empty: cumulative
  PeriodicOptions periodic;
  MultiToneStrategy strategy = MultiToneStrategy::full;
  bool classify_signs = true;  // single-tone sign check for each tone
  int workers = 0;
};

struct MultiToneRun {
  std::string label;
  std::vector<int> tone_indices;
  double polarization = 0;
  double ratio_to_first = 1.0;
  double period = 0;  // 0 when the subset reduces to a static generator
  bool failed = false;
  std::string error;
};

struct MultiToneResult {
  std::vector<MultiToneRun> runs;
  std::vector<int> tone_signs;  // +1 / -1 per tone; 0 if below noise
  std::vector<std::string> warnings;
};

namespace detail {

// Pick the reference frequency that minimizes the largest rotating-frame
// offset: the generator's fast scale, and with it the integration cost of the
// cycle propagator, is set by that largest offset.
inline double best_reference(const std::vector<DriveTone>& tones) {
  double best_f = tones.front().frequency, best_span = -1;
  for (const auto& cand : tones) {
    double span = 0;
    for (const auto& t : tones) span = std::max(span, std::abs(t.frequency - cand.frequency));
    if (best_span < 0 || span < best_span) {
      best_span = span;
      best_f = cand.frequency;
    }
  }
  return best_f;
}

inline std::string subset_label(const std::vector<int>& idx) {
  std::string s = std::to_string(idx.size());
  s += idx.size() == 1 ? " tone (" : " tones (";
  for (size_t i = 0; i < idx.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(idx[i]);
  }
  s += ")";
  return s;
}

// Bank entries stand for independent synthesizer channels. Channels at the
// same frequency have no stable relative phase, so their powers add rather
// than their amplitudes: duplicating a tone is worth sqrt(2), not 2.
inline std::vector<DriveTone> merge_equal_frequencies(std::vector<DriveTone> tones) {
  std::vector<DriveTone> out;
  for (const auto& t : tones) {
    bool merged = false;
    for (auto& o : out)
      if (std::abs(o.frequency - t.frequency) <= 1e-6) {
        o.rabi = std::hypot(o.rabi, t.rabi);
        merged = true;
        break;
      }
    if (!merged) out.push_back(t);
  }
  return out;
}

}  // namespace detail

// Steady polarization under a set of simultaneous tones. A single distinct
// frequency gives a static rotating-frame generator; several give a periodic
// one, handled through the cycle propagator and its time-averaged state.
inline double multi_tone_polarization(const LindbladModel& base,
                                      const std::vector<DriveTone>& tones,
                                      const PeriodicOptions& popt = {}, double* period_out = nullptr,
                                      MultiToneStrategy strategy = MultiToneStrategy::full) {
  if (tones.empty()) throw InvalidArgument("multi_tone_polarization: need at least one tone");
  LindbladModel m = base;
  m.tones = tones;
  double ref = detail::best_reference(tones);
  TimeDependentLiouvillian gen = assemble_liouvillian(to_rotating_frame(m, ref));
  Matrix rho0 = thermal_state(m.system, m.field, m.temperature);
  if (gen.is_static()) {
    if (period_out) *period_out = 0;
    return observable(steady_state_from(gen, rho0), m.readout_op());
  }
  if (strategy == MultiToneStrategy::averaged) {
    if (period_out) *period_out = 0;
    return observable(steady_state_from(gen.static_part, rho0), m.readout_op());
  }
  PeriodicSteadyState ps = periodic_steady_state(gen, rho0, popt);
  if (period_out) *period_out = ps.period;
  // The stroboscopic fixed point depends on the phase origin; the readout
  // averages over one beat period to remove it.
  return periodic_average(gen, ps, m.readout_op());
}

inline MultiToneResult multi_tone_comparison(const LindbladModel& base, const MultiTonePlan& plan) {
  if (plan.tones.empty()) throw InvalidArgument("multi_tone_comparison: empty tone bank");
  MultiToneResult out;

  std::vector<std::vector<int>> subsets = plan.subsets;
  if (subsets.empty()) {
    for (size_t k = 1; k <= plan.tones.size(); ++k) {
      std::vector<int> s(k);
      for (size_t i = 0; i < k; ++i) s[i] = static_cast<int>(i);
      subsets.push_back(std::move(s));
    }
  }
  for (const auto& s : subsets) {
    if (s.empty()) throw InvalidArgument("multi_tone_comparison: empty subset");
    for (int i : s)
      if (i < 0 || i >= static_cast<int>(plan.tones.size()))
        throw InvalidArgument("multi_tone_comparison: subset index out of range");
  }

  // Individual-tone sign survey: each tone alone, cheap static solves. Tones
  // pumping opposite signs would partially cancel when combined, which is
  // worth a warning rather than a wrong-looking ratio with no explanation.
  if (plan.classify_signs) {
    out.tone_signs.assign(plan.tones.size(), 0);
    double scale = 0;
    std::vector<double> singles(plan.tones.size(), 0.0);
    detail::parallel_for(plan.workers, plan.tones.size(), [&](size_t i) {
      singles[i] = multi_tone_polarization(base, {plan.tones[i]}, plan.periodic, nullptr,
                                           plan.strategy);
    });
    for (double v : singles) scale = std::max(scale, std::abs(v));
    for (size_t i = 0; i < singles.size(); ++i)
      if (std::abs(singles[i]) > 1e-3 * scale) out.tone_signs[i] = singles[i] > 0 ? 1 : -1;
    bool has_pos = false, has_neg = false;
    for (int s : out.tone_signs) {
      has_pos = has_pos || s > 0;
      has_neg = has_neg || s < 0;
    }
    if (has_pos && has_neg)
      out.warnings.push_back(
          "tone bank mixes pumping directions; combined subsets will partially cancel");
  }

  out.runs.resize(subsets.size());
  detail::parallel_for(plan.workers, subsets.size(), [&](size_t k) {
    MultiToneRun& run = out.runs[k];
    run.tone_indices = subsets[k];
    run.label = detail::subset_label(subsets[k]);
    std::vector<DriveTone> tones;
    for (int i : subsets[k]) tones.push_back(plan.tones[static_cast<size_t>(i)]);
    tones = detail::merge_equal_frequencies(std::move(tones));
    try {
      run.polarization =
          multi_tone_polarization(base, tones, plan.periodic, &run.period, plan.strategy);
    } catch (const std::exception& e) {
      run.failed = true;
      run.error = e.what();
    }
  });
  if (!out.runs.empty() && !out.runs.front().failed &&
      std::abs(out.runs.front().polarization) > 0) {
    double first = out.runs.front().polarization;
    for (auto& r : out.runs)
      if (!r.failed) r.ratio_to_first = r.polarization / first;
  }
  return out;
}

}  // namespace nvdnp
