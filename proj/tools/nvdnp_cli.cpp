// Command-line front end. Subcommands pick the run kind; a config file fills
// in everything else (all keys have defaults, so most runs work without one).
// Exit codes: 0 ok, 2 bad config or arguments, 3 numeric or I/O failure,
// 4 sweep finished with some failed points.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nvdnp/config.hpp"
#include "nvdnp/io.hpp"
#include "nvdnp/run.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  long workers = -1;  // -1: leave whatever the config says
  long seed = -1;
};

nvdnp::ExperimentConfig load_config(const GlobalArgs& g, nvdnp::RunKind kind) {
  std::string text;
  if (!g.config_path.empty()) text = nvdnp::read_file(g.config_path);
  nvdnp::ExperimentConfig c = nvdnp::parse_config(text, kind);
  if (c.kind != kind)
    throw nvdnp::ConfigError(std::string("config says kind = ") + nvdnp::to_token(*c.kind) +
                             " but the subcommand is " + nvdnp::to_token(kind));
  if (!g.out_dir.empty()) c.output.directory = g.out_dir;
  if (g.workers >= 0) c.workers = g.workers;
  if (g.seed >= 0) c.seed = g.seed;
  nvdnp::validate_config(c);
  return c;
}

int execute(const nvdnp::ExperimentConfig& c) {
  nvdnp::RunOutcome outcome = nvdnp::run(c);
  for (const std::string& note : outcome.notes) std::cout << note << "\n";
  std::cout << "wrote " << outcome.manifest.outputs.size() << " files to "
            << outcome.directory.string() << " (manifest "
            << outcome.manifest_path.filename().string() << ")\n";
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NV-driven nuclear polarization: simulation and analysis runs"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "config file (key = value or JSON)");
  app.add_option("--out", g.out_dir, "output directory (overrides the config)");
  app.add_option("--workers", g.workers, "worker threads for sweeps (0: all cores)");
  app.add_option("--seed", g.seed, "seed recorded with the run");

  // Let --out and friends appear after the subcommand name too.
  app.fallthrough();

  auto* spectrum = app.add_subcommand("spectrum", "polarization vs MW frequency");
  auto* power = app.add_subcommand("power-sweep", "polarization vs MW power on one line");
  auto* multitone = app.add_subcommand("multitone", "simultaneous drive tone comparison");
  auto* laser = app.add_subcommand("laser-model", "NV / thermal / composite heating curves");

  auto* estimate = app.add_subcommand("estimate", "polarization and enhancement arithmetic");
  double ratio = -1, s_hyper = -1, s_thermal = -1;
  double field_nmr = -1, field_dnp = -1, temp_sample = -1, temp_laser = -1;
  estimate->add_option("--ratio", ratio, "hyper/thermal signal integral ratio");
  estimate->add_option("--signal-hyper", s_hyper, "hyperpolarized signal integral");
  estimate->add_option("--signal-thermal", s_thermal, "thermal reference signal integral");
  estimate->add_option("--field-nmr", field_nmr, "thermal reference field, tesla");
  estimate->add_option("--field-dnp", field_dnp, "polarizing field, tesla");
  estimate->add_option("--temp-sample", temp_sample, "sample temperature, kelvin");
  estimate->add_option("--temp-laser", temp_laser, "laser-heated NV temperature, kelvin");

  auto* odmr = app.add_subcommand("odmr-temp", "temperature from a fitted ODMR doublet");
  std::string odmr_input;
  double ref_split = -1, ref_temp = -1;
  odmr->add_option("--input", odmr_input, "CSV with (frequency_hz, contrast) rows");
  odmr->add_option("--ref-splitting", ref_split, "reference zero-field splitting, hertz");
  odmr->add_option("--ref-temperature", ref_temp, "temperature at the reference, kelvin");

  auto* exporter = app.add_subcommand("export", "tidy per-figure CSV from a result file");
  std::string layout, result_path;
  exporter->add_option("--layout", layout, "fig2, fig3, fig4, or fig5")->required();
  exporter->add_option("--result", result_path, "main CSV written by a run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (spectrum->parsed()) return execute(load_config(g, nvdnp::RunKind::spectrum));
    if (power->parsed()) return execute(load_config(g, nvdnp::RunKind::power_sweep));
    if (multitone->parsed()) return execute(load_config(g, nvdnp::RunKind::multitone));
    if (laser->parsed()) return execute(load_config(g, nvdnp::RunKind::laser_model));

    if (estimate->parsed()) {
      nvdnp::ExperimentConfig c = load_config(g, nvdnp::RunKind::estimate);
      if (s_hyper > 0 && s_thermal > 0) c.estimate.signal_ratio = s_hyper / s_thermal;
      if (ratio > 0) c.estimate.signal_ratio = ratio;
      if (field_nmr > 0) c.estimate.field_nmr = field_nmr;
      if (field_dnp > 0) c.estimate.field_dnp = field_dnp;
      if (temp_sample > 0) c.estimate.temperature_sample = temp_sample;
      if (temp_laser > 0) c.estimate.temperature_laser = temp_laser;
      nvdnp::validate_config(c);
      return execute(c);
    }

    if (odmr->parsed()) {
      std::string text;
      if (!g.config_path.empty()) text = nvdnp::read_file(g.config_path);
      nvdnp::ExperimentConfig c =
          nvdnp::parse_config_unchecked(text, nvdnp::RunKind::thermometry);
      if (!odmr_input.empty()) c.thermometry.input = odmr_input;
      if (ref_split > 0) c.thermometry.reference_splitting = ref_split;
      if (ref_temp > 0) c.thermometry.reference_temperature = ref_temp;
      if (!g.out_dir.empty()) c.output.directory = g.out_dir;
      if (g.workers >= 0) c.workers = g.workers;
      if (g.seed >= 0) c.seed = g.seed;
      nvdnp::validate_config(c);
      return execute(c);
    }

    if (exporter->parsed()) {
      std::filesystem::path dest = nvdnp::export_plotdata(
          result_path, layout, g.out_dir.empty() ? "." : g.out_dir);
      std::cout << "wrote " << dest.string() << "\n";
      return 0;
    }
  } catch (const nvdnp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nvdnp::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nvdnp::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
