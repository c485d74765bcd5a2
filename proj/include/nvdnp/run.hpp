#pragma once

// Turns a validated config into result files: builds the model, dispatches on
// the run kind, writes CSV plus JSON sidecars atomically, and closes with a
// manifest. Also the tidy per-figure exports consumed by plotting scripts.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvdnp/config.hpp"
#include "nvdnp/doublet_fit.hpp"
#include "nvdnp/estimators.hpp"
#include "nvdnp/io.hpp"
#include "nvdnp/laser_model.hpp"
#include "nvdnp/lindblad.hpp"
#include "nvdnp/multitone.hpp"
#include "nvdnp/sweep.hpp"

namespace nvdnp {

inline LindbladModel model_from_config(const ExperimentConfig& c) {
  SpinSystemSpec spec;
  if (c.system.include_n14) {
    spec = default_nv_system(c.system.c13_hyperfine_zz, c.system.c13_hyperfine_zx,
                             c.system.n14_hyperfine);
  } else {
    spec.electron = {"e", 1.0, gamma_electron};
    spec.nuclei = {{"13C", 0.5, gamma_c13}};
    spec.couplings = {{c.system.c13_hyperfine_zz, c.system.c13_hyperfine_zx}};
  }
  spec.zero_field_splitting = c.system.zero_field_splitting;
  RateSet rates;
  rates.optical_pump = c.dissipator.optical_pump;
  rates.electron_dephasing = c.dissipator.electron_dephasing;
  rates.electron_t1 = c.dissipator.electron_t1;
  rates.nuclear_t1 = c.dissipator.nuclear_t1;
  return standard_model(spec, c.system.field, c.system.temperature, rates);
}

// Default fixed-tone frequency: the lower solid-effect satellite of the
// central manifold, the strongest pump-up line. omega_0 is the bare nuclear
// Larmor frequency; omega_1 the hyperfine-tilted one in the m_s = -1 branch.
inline double auto_drive_frequency(const ExperimentConfig& c) {
  double allowed = c.system.zero_field_splitting - gamma_electron * c.system.field;
  double omega0 = gamma_c13 * c.system.field;
  double omega1 = std::hypot(gamma_c13 * c.system.field + c.system.c13_hyperfine_zz,
                             c.system.c13_hyperfine_zx);
  return allowed - 0.5 * (omega0 + omega1);
}

struct RunOutcome {
  RunManifest manifest;
  std::filesystem::path directory;
  std::filesystem::path manifest_path;
  std::vector<std::string> notes;  // single-line reports for the terminal
  int exit_code = 0;               // 0 ok, 4 partial sweep, 3 nothing usable
};

namespace detail {

inline SweepProtocol protocol_from(const ExperimentConfig& c) {
  return c.protocol.mode == "evolve" ? SweepProtocol::transient : SweepProtocol::steady;
}

struct RunWriter {
  std::filesystem::path dir;
  std::string stem;  // "<prefix>_<fingerprint>"
  RunManifest manifest;

  void add(const std::string& suffix, const std::string& content) {
    std::string name = stem + suffix;
    atomic_write_file(dir / name, content);
    manifest.outputs.push_back({name, to_hex(fnv1a64(content)),
                                static_cast<std::uint64_t>(content.size())});
  }
};

inline nlohmann::json peaks_json(const PeakTable& peaks) {
  nlohmann::json j;
  j["components"] = nlohmann::json::array();
  for (const PeakComponent& comp : peaks.components) {
    nlohmann::json jc;
    jc["center_hz"] = comp.center;
    jc["lobe_separation_hz"] = comp.lobe_separation;
    jc["lobes"] = nlohmann::json::array();
    for (const PeakLobe& lobe : comp.lobes)
      jc["lobes"].push_back({{"sign", lobe.sign},
                             {"frequency_hz", lobe.frequency},
                             {"amplitude", lobe.amplitude}});
    j["components"].push_back(jc);
  }
  j["spacings_hz"] = peaks.spacings;
  return j;
}

inline nlohmann::json run_header(const ExperimentConfig& c, const std::string& fingerprint) {
  nlohmann::json j;
  j["kind"] = to_token(*c.kind);
  j["fingerprint"] = fingerprint;
  j["tool_version"] = tool_version;
  j["seed"] = c.seed;
  return j;
}

template <typename Failed, typename Errors>
inline nlohmann::json errors_json(const Failed& failed, const Errors& errors) {
  nlohmann::json j = nlohmann::json::array();
  for (size_t i = 0; i < failed.size(); ++i)
    if (failed[i]) j.push_back({{"index", i}, {"message", errors[i]}});
  return j;
}

// 0 when everything computed, 4 when some points failed, 3 when all did.
template <typename Failed>
inline int sweep_exit_code(const Failed& failed) {
  size_t bad = 0;
  for (auto f : failed) bad += f ? 1 : 0;
  if (bad == 0) return 0;
  return bad == failed.size() ? 3 : 4;
}

}  // namespace detail

inline RunOutcome run(const ExperimentConfig& c) {
  validate_config(c);
  std::string fingerprint = config_fingerprint(c);
  std::string prefix = c.output.prefix.empty() ? to_token(*c.kind) : c.output.prefix;

  detail::RunWriter w;
  w.dir = c.output.directory.empty() ? std::filesystem::path(".")
                                     : std::filesystem::path(c.output.directory);
  w.stem = prefix + "_" + fingerprint;
  w.manifest.config_hash = fingerprint;
  w.manifest.started = utc_timestamp();

  // Fail on an unusable output directory before any physics runs.
  std::error_code ec;
  std::filesystem::create_directories(w.dir, ec);
  if (ec) throw IoError("cannot create output directory " + w.dir.string());
  {
    std::filesystem::path probe = w.dir / (w.stem + ".probe.tmp");
    atomic_write_file(probe, "probe");
    std::filesystem::remove(probe, ec);
  }

  RunOutcome out;
  out.directory = w.dir;
  int exit_code = 0;

  switch (*c.kind) {
    case RunKind::spectrum: {
      LindbladModel model = model_from_config(c);
      SweepPlan plan;
      plan.frequencies = linspace(c.drive.sweep_start, c.drive.sweep_stop,
                                  static_cast<size_t>(c.drive.sweep_points));
      plan.rabi = c.drive.rabi;
      plan.protocol = detail::protocol_from(c);
      plan.transient_duration = c.protocol.duration;
      plan.workers = static_cast<int>(c.workers);
      SpectrumResult r = polarization_spectrum(model, plan);

      CsvTable t;
      t.header = {"mw_frequency_hz", "polarization", "error_flag"};
      for (size_t i = 0; i < r.frequencies.size(); ++i)
        t.rows.push_back({format_number(r.frequencies[i]), format_number(r.polarizations[i]),
                          r.failed[i] ? "1" : "0"});
      w.add(".csv", render_csv(t));

      nlohmann::json j = detail::run_header(c, fingerprint);
      j["rabi_hz"] = c.drive.rabi;
      j["axis"] = {{"start_hz", c.drive.sweep_start},
                   {"stop_hz", c.drive.sweep_stop},
                   {"points", c.drive.sweep_points}};
      j["peaks"] = detail::peaks_json(r.peaks);
      j["errors"] = detail::errors_json(r.failed, r.errors);
      w.add("_peaks.json", j.dump(2) + "\n");
      exit_code = detail::sweep_exit_code(r.failed);
      out.notes.push_back("spectrum: " + std::to_string(r.frequencies.size()) + " points, " +
                          std::to_string(r.peaks.components.size()) + " components");
      break;
    }

    case RunKind::power_sweep: {
      LindbladModel model = model_from_config(c);
      std::vector<double> rabis = linspace(c.drive.rabi_start, c.drive.rabi_stop,
                                           static_cast<size_t>(c.drive.rabi_points));
      PowerPlan plan;
      plan.rabi_per_sqrt_watt = c.drive.rabi_per_sqrt_watt;
      for (double om : rabis) {
        double root = om / plan.rabi_per_sqrt_watt;
        plan.powers.push_back(root * root);
      }
      plan.frequency = c.drive.frequency > 0 ? c.drive.frequency : auto_drive_frequency(c);
      plan.protocol = detail::protocol_from(c);
      plan.transient_duration = c.protocol.duration;
      plan.workers = static_cast<int>(c.workers);
      PowerResult r = power_dependence(model, plan);

      CsvTable t;
      t.header = {"mw_power_w", "rabi_hz", "polarization", "error_flag"};
      for (size_t i = 0; i < r.powers.size(); ++i)
        t.rows.push_back({format_number(r.powers[i]), format_number(r.rabis[i]),
                          format_number(r.polarizations[i]), r.failed[i] ? "1" : "0"});
      w.add(".csv", render_csv(t));

      nlohmann::json j = detail::run_header(c, fingerprint);
      j["frequency_hz"] = plan.frequency;
      j["peak_index"] = r.peak_index;
      if (r.peak_index >= 0) {
        j["peak_rabi_hz"] = r.rabis[static_cast<size_t>(r.peak_index)];
        j["peak_polarization"] = r.polarizations[static_cast<size_t>(r.peak_index)];
      }
      j["final_to_peak_ratio"] = r.final_to_peak_ratio;
      j["errors"] = detail::errors_json(r.failed, r.errors);
      w.add("_summary.json", j.dump(2) + "\n");
      exit_code = detail::sweep_exit_code(r.failed);
      out.notes.push_back("power sweep: peak at index " + std::to_string(r.peak_index) +
                          ", final/peak = " + format_number(r.final_to_peak_ratio));
      break;
    }

    case RunKind::multitone: {
      LindbladModel model = model_from_config(c);
      MultiTonePlan plan;
      for (size_t i = 0; i < c.drive.tones.size(); ++i) {
        DriveTone tone;
        tone.frequency = c.drive.tones[i];
        tone.rabi = c.drive.tone_rabis.empty() ? c.drive.rabi : c.drive.tone_rabis[i];
        tone.phase = c.drive.tone_phases.empty() ? 0.0 : c.drive.tone_phases[i];
        plan.tones.push_back(tone);
      }
      plan.strategy = c.drive.strategy == "averaged" ? MultiToneStrategy::averaged
                                                     : MultiToneStrategy::full;
      plan.workers = static_cast<int>(c.workers);
      MultiToneResult r = multi_tone_comparison(model, plan);

      CsvTable t;
      t.header = {"subset", "n_tones", "polarization", "ratio_to_first", "period_s",
                  "error_flag"};
      std::vector<std::uint8_t> failed;
      for (const MultiToneRun& runrec : r.runs) {
        t.rows.push_back({runrec.label, std::to_string(runrec.tone_indices.size()),
                          format_number(runrec.polarization),
                          format_number(runrec.ratio_to_first), format_number(runrec.period),
                          runrec.failed ? "1" : "0"});
        failed.push_back(runrec.failed ? 1 : 0);
      }
      w.add(".csv", render_csv(t));

      nlohmann::json j = detail::run_header(c, fingerprint);
      j["tones"] = nlohmann::json::array();
      for (size_t i = 0; i < plan.tones.size(); ++i)
        j["tones"].push_back({{"frequency_hz", plan.tones[i].frequency},
                              {"rabi_hz", plan.tones[i].rabi},
                              {"phase_rad", plan.tones[i].phase},
                              {"sign", i < r.tone_signs.size() ? r.tone_signs[i] : 0}});
      j["warnings"] = r.warnings;
      nlohmann::json errs = nlohmann::json::array();
      for (size_t i = 0; i < r.runs.size(); ++i)
        if (r.runs[i].failed) errs.push_back({{"index", i}, {"message", r.runs[i].error}});
      j["errors"] = errs;
      w.add("_summary.json", j.dump(2) + "\n");
      exit_code = detail::sweep_exit_code(failed);
      if (!r.runs.empty() && !r.runs.back().failed)
        out.notes.push_back("multitone: " + r.runs.back().label + " reaches " +
                            format_number(r.runs.back().ratio_to_first) +
                            "x the single-tone polarization");
      break;
    }

    case RunKind::laser_model: {
      LaserModelParams params;
      params.alpha = c.laser.alpha;
      params.beta = c.laser.beta;
      params.c = c.laser.scale;
      params.base_temperature = c.laser.base_temperature;
      std::vector<double> densities = linspace(c.laser.density_start, c.laser.density_stop,
                                               static_cast<size_t>(c.laser.density_points));
      std::vector<LaserCurvePoint> curve = laser_composite_curve(params, densities);

      CsvTable t;
      t.header = {"laser_intensity_mw_mm2", "p_nv", "p_thermal", "p_hyper"};
      for (const LaserCurvePoint& p : curve)
        t.rows.push_back({format_number(p.density), format_number(p.p_nv),
                          format_number(p.p_thermal), format_number(p.p_hyper)});
      w.add(".csv", render_csv(t));
      out.notes.push_back("laser model: " + std::to_string(curve.size()) + " points");
      break;
    }

    case RunKind::estimate: {
      EnhancementInputs in;
      in.s_hyper = c.estimate.signal_ratio;
      in.s_thermal = 1.0;
      in.b_sm = c.estimate.field_nmr;
      in.b_em = c.estimate.field_dnp;
      in.t_l = c.estimate.temperature_laser;
      in.t_r = c.estimate.temperature_sample;
      double p = estimate_polarization(in);
      double eps = enhancement_factor(in);

      CsvTable t;
      t.header = {"signal_ratio", "polarization", "polarization_percent", "enhancement"};
      t.rows.push_back({format_number(c.estimate.signal_ratio), format_number(p),
                        format_number(100.0 * p), format_number(eps)});
      w.add(".csv", render_csv(t));

      nlohmann::json j = detail::run_header(c, fingerprint);
      j["inputs"] = {{"signal_ratio", c.estimate.signal_ratio},
                     {"field_nmr_t", c.estimate.field_nmr},
                     {"field_dnp_t", c.estimate.field_dnp},
                     {"temperature_sample_k", c.estimate.temperature_sample},
                     {"temperature_laser_k", c.estimate.temperature_laser}};
      j["polarization"] = p;
      j["enhancement"] = eps;
      w.add("_report.json", j.dump(2) + "\n");
      out.notes.push_back("P_hyper = " + format_number(100.0 * p) +
                          " %, enhancement = " + format_number(eps));
      break;
    }

    case RunKind::thermometry: {
      std::filesystem::path input = c.thermometry.input;
      if (!std::filesystem::exists(input))
        throw IoError("no ODMR input file at " + input.string());
      CsvTable data = parse_csv(read_file(input));
      std::vector<double> freq, contrast;
      for (size_t ri = 0; ri < data.rows.size(); ++ri) {
        const auto& row = data.rows[ri];
        if (row.size() < 2)
          throw ConfigError("ODMR input row " + std::to_string(ri + 2) +
                            " needs (frequency_hz, contrast)");
        try {
          freq.push_back(std::stod(row[0]));
          contrast.push_back(std::stod(row[1]));
        } catch (const std::exception&) {
          throw ConfigError("ODMR input row " + std::to_string(ri + 2) +
                            " is not numeric: '" + row[0] + "', '" + row[1] + "'");
        }
      }
      DoubletFit fit = odmr_doublet_fit(freq, contrast);
      double temperature =
          temperature_from_zfs(fit.f_minus, fit.f_plus, c.thermometry.reference_splitting,
                               c.thermometry.reference_temperature);

      CsvTable t;
      t.header = {"f_minus_hz", "f_plus_hz", "zfs_hz", "temperature_k"};
      t.rows.push_back({format_number(fit.f_minus), format_number(fit.f_plus),
                        format_number(0.5 * (fit.f_minus + fit.f_plus)),
                        format_number(temperature)});
      w.add(".csv", render_csv(t));

      nlohmann::json j = detail::run_header(c, fingerprint);
      j["fit"] = {{"f_minus_hz", fit.f_minus},
                  {"f_plus_hz", fit.f_plus},
                  {"width_minus_hz", fit.width_minus},
                  {"width_plus_hz", fit.width_plus},
                  {"depth_minus", fit.depth_minus},
                  {"depth_plus", fit.depth_plus},
                  {"baseline", fit.baseline},
                  {"residual_norm", fit.residual_norm},
                  {"center_stderr_minus_hz", fit.center_stderr_minus},
                  {"center_stderr_plus_hz", fit.center_stderr_plus},
                  {"iterations", fit.iterations}};
      j["temperature_k"] = temperature;
      w.add("_report.json", j.dump(2) + "\n");
      out.notes.push_back("temperature = " + format_number(temperature) + " K from centers " +
                          format_number(fit.f_minus) + " / " + format_number(fit.f_plus) +
                          " Hz");
      break;
    }
  }

  w.manifest.finished = utc_timestamp();
  out.manifest = w.manifest;
  out.manifest_path = w.dir / (w.stem + "_manifest.json");
  atomic_write_file(out.manifest_path, manifest_json(w.manifest));
  out.exit_code = exit_code;
  return out;
}

// ---- per-figure exports ---------------------------------------------------

namespace detail {

inline size_t column_index(const CsvTable& t, const std::string& name,
                           const std::filesystem::path& path) {
  for (size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  throw InvalidArgument("result file " + path.string() + " has no column '" + name +
                        "'; is it the right input for this layout?");
}

}  // namespace detail

// Reads a run's main CSV and writes the tidy per-figure file next to `out_dir`.
// Layouts: fig2 (normalized spectrum), fig3 (power curve), fig4 (laser curve),
// fig5 (tone subsets). A trailing "-like" on the layout name is accepted.
inline std::filesystem::path export_plotdata(const std::filesystem::path& result_csv,
                                             std::string layout,
                                             const std::filesystem::path& out_dir) {
  if (layout.size() > 5 && layout.substr(layout.size() - 5) == "-like")
    layout = layout.substr(0, layout.size() - 5);
  if (layout != "fig2" && layout != "fig3" && layout != "fig4" && layout != "fig5")
    throw InvalidArgument("unknown layout '" + layout + "' (fig2, fig3, fig4, fig5)");
  if (!std::filesystem::exists(result_csv))
    throw IoError("no result file at " + result_csv.string());

  CsvTable in = parse_csv(read_file(result_csv));
  CsvTable out;

  if (layout == "fig2") {
    size_t fcol = detail::column_index(in, "mw_frequency_hz", result_csv);
    size_t pcol = detail::column_index(in, "polarization", result_csv);
    size_t ecol = detail::column_index(in, "error_flag", result_csv);
    double scale = 0;
    for (const auto& row : in.rows)
      if (row[ecol] == "0") scale = std::max(scale, std::abs(std::stod(row[pcol])));
    out.header = {"mw_frequency_hz", "polarization_norm"};
    for (const auto& row : in.rows) {
      if (row[ecol] != "0") continue;
      double p = std::stod(row[pcol]);
      out.rows.push_back({row[fcol], format_number(scale > 0 ? p / scale : 0.0)});
    }
  } else if (layout == "fig3") {
    size_t wcol = detail::column_index(in, "mw_power_w", result_csv);
    size_t pcol = detail::column_index(in, "polarization", result_csv);
    size_t ecol = detail::column_index(in, "error_flag", result_csv);
    out.header = {"mw_power_w", "polarization"};
    for (const auto& row : in.rows)
      if (row[ecol] == "0") out.rows.push_back({row[wcol], row[pcol]});
  } else if (layout == "fig4") {
    size_t dcol = detail::column_index(in, "laser_intensity_mw_mm2", result_csv);
    size_t acol = detail::column_index(in, "p_nv", result_csv);
    size_t bcol = detail::column_index(in, "p_thermal", result_csv);
    size_t ccol = detail::column_index(in, "p_hyper", result_csv);
    out.header = {"laser_intensity_mw_mm2", "p_nv", "p_thermal", "p_hyper"};
    for (const auto& row : in.rows)
      out.rows.push_back({row[dcol], row[acol], row[bcol], row[ccol]});
  } else {  // fig5
    size_t scol = detail::column_index(in, "subset", result_csv);
    size_t ncol = detail::column_index(in, "n_tones", result_csv);
    size_t pcol = detail::column_index(in, "polarization", result_csv);
    size_t rcol = detail::column_index(in, "ratio_to_first", result_csv);
    size_t ecol = detail::column_index(in, "error_flag", result_csv);
    out.header = {"subset", "n_tones", "polarization", "ratio_to_first"};
    for (const auto& row : in.rows)
      if (row[ecol] == "0")
        out.rows.push_back({row[scol], row[ncol], row[pcol], row[rcol]});
  }

  std::filesystem::path dest = out_dir / (result_csv.stem().string() + "_" + layout + ".csv");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string());
  atomic_write_file(dest, render_csv(out));
  return dest;
}

}  // namespace nvdnp
