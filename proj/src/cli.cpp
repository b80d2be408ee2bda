#include "fibermem/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fibermem/analysis.hpp"
#include "fibermem/error.hpp"

namespace fibermem::cli {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string scan_csv(const std::vector<ScanRow>& rows, const char* x_name) {
  std::ostringstream os;
  os << x_name << ",signal_rate,noise_rate,corrected_rate\n";
  for (const auto& r : rows)
    os << fmt(r.x) << ',' << fmt(r.signal_rate) << ',' << fmt(r.noise_rate) << ',' << fmt(r.corrected_rate) << '\n';
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << content;
  if (!f) throw std::runtime_error("error writing '" + path + "'");
}

}  // namespace

std::vector<double> ScanRange::points() const {
  if (steps < 1) throw ConfigError("--steps: must be >= 1");
  if (!std::isfinite(from) || !std::isfinite(to)) throw ConfigError("--from/--to: must be finite");
  if (steps == 1) return {from};
  std::vector<double> pts(steps);
  for (std::size_t i = 0; i < steps; ++i)
    pts[i] = from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);
  return pts;
}

CommandOutput cmd_ringdown(const RunConfig& cfg) {
  const ExperimentScenario s = with_controls(cfg.scenario, true, false);
  const ScenarioResult r = run_scenario(s);
  CommandOutput out;
  std::ostringstream os;
  os << "bin,counts_fast,counts_slow\n";
  for (std::size_t b = 0; b < s.n_bins; ++b)
    os << b << ',' << r.histograms.fast.counts[b] << ',' << r.histograms.slow.counts[b] << '\n';
  out.csv = os.str();

  const double rt = s.round_trip_ns();
  const double configured = lifetime_round_trips(s.survival());
  // The fit runs even if the histogram is unusable; errors propagate after
  // the CSV has been produced by the caller.
  json summary = {{"round_trip_ns", rt}, {"configured_lifetime", finite_or_null(configured)}};
  const LifetimeFit fit = fit_ring_down(r.histograms.slow, 0, s.n_bins);
  summary["lifetime"] = fit.lifetime;
  summary["lifetime_ns"] = fit.lifetime * rt;
  summary["ci95"] = {fit.ci95_low, fit.ci95_high};
  summary["r_squared"] = fit.r_squared;
  summary["bins_used"] = fit.bins_used;
  out.summary = summary;
  return out;
}

CommandOutput cmd_delay_scan(const RunConfig& cfg, const ScanRange& range, ScanStage stage) {
  const auto rows = delay_scan(cfg.scenario, range.points(), stage);
  CommandOutput out;
  out.csv = scan_csv(rows, "delay_ps");
  const bool read_stage = stage == ScanStage::read_vs_write;
  const auto& coupling = read_stage ? cfg.scenario.coupling_read : cfg.scenario.coupling_write;
  const auto& pair = read_stage ? cfg.scenario.read_pair : cfg.scenario.write_pair;
  double peak = 0.0;
  for (const auto& r : rows) peak = std::max(peak, r.corrected_rate);
  json summary = {{"stage", read_stage ? "read" : "signal"}, {"peak_corrected_rate", peak}};
  if (cfg.scenario.input_mean_photons > 0) summary["eta_tot_peak"] = peak / cfg.scenario.input_mean_photons;
  const DelayScanFit fit = fit_delay_scan(rows, coupling, conversion_angle(coupling, pair));
  double rms = 0.0;
  for (double e : fit.residuals) rms += e * e;
  summary["walkoff_ps"] = fit.walkoff_ps;
  summary["center_ps"] = fit.center_ps;
  summary["amplitude"] = fit.amplitude;
  summary["rms_residual"] = std::sqrt(rms / static_cast<double>(fit.residuals.size()));
  out.summary = summary;
  return out;
}

CommandOutput cmd_power_scan(const RunConfig& cfg, const ScanRange& range) {
  const auto rows = power_scan(cfg.scenario, range.points());
  CommandOutput out;
  out.csv = scan_csv(rows, "sqrt_wq_wp_nj");
  const PowerScanFit fit = fit_power_scan(rows);
  out.summary = {{"xi_fit", fit.xi},
                 {"w_in", fit.amplitude},
                 {"r_squared_signal", fit.r_squared_signal},
                 {"noise_slope", fit.noise_slope},
                 {"noise_intercept", fit.noise_intercept},
                 {"r_squared_noise", fit.r_squared_noise}};
  return out;
}

CommandOutput cmd_spl(const RunConfig& cfg) {
  const ExperimentScenario& s = cfg.scenario;
  const MemoryMeasurement m = measure_memory(s);
  const std::size_t t_read = s.read_bin();
  const EfficiencyReport rep = extract_efficiencies(m, t_read, detection_efficiency(s.chain));

  CommandOutput out;
  std::ostringstream os;
  os << "bin,off_fast,off_slow,write_fast,write_slow,all_fast,all_slow,background_fast,background_slow\n";
  for (std::size_t b = 0; b < s.n_bins; ++b) {
    os << b << ',' << m.off.fast.counts[b] << ',' << m.off.slow.counts[b] << ',' << m.write.fast.counts[b] << ','
       << m.write.slow.counts[b] << ',' << m.all.fast.counts[b] << ',' << m.all.slow.counts[b] << ','
       << m.background_all.fast.counts[b] << ',' << m.background_all.slow.counts[b] << '\n';
  }
  out.csv = os.str();

  json summary = {{"eta_w", rep.eta_w.value},
                  {"eta_r", rep.eta_r.value},
                  {"eta_tot", rep.eta_tot.value},
                  {"snr", finite_or_null(rep.snr.value)},
                  {"mu1", finite_or_null(rep.mu1.value)},
                  {"n_noise", rep.n_noise.value},
                  {"uncertainties",
                   {{"eta_w", rep.eta_w.sigma},
                    {"eta_r", rep.eta_r.sigma},
                    {"eta_tot", rep.eta_tot.sigma},
                    {"snr", rep.snr.sigma},
                    {"mu1", rep.mu1.sigma},
                    {"n_noise", rep.n_noise.sigma}}},
                  {"t_read", t_read}};
  // Lifetime from the write-only slow-axis leakage, if it is resolvable.
  try {
    const LifetimeFit fit = fit_ring_down(m.write.slow, 0, s.n_bins);
    summary["lifetime"] = fit.lifetime;
    summary["ci95"] = {fit.ci95_low, fit.ci95_high};
    summary["r_squared"] = fit.r_squared;
  } catch (const FitError&) {
    summary["lifetime"] = nullptr;
    summary["ci95"] = nullptr;
    summary["r_squared"] = nullptr;
  }
  out.summary = summary;
  return out;
}

CommandOutput cmd_multiplex(const RunConfig& cfg, std::optional<std::size_t> n_bins) {
  MultiplexConfig mc = cfg.multiplex;
  if (n_bins) mc.n_bins = *n_bins;
  mc.validate();
  const std::size_t n_max = std::max(cfg.multiplex_n_max, mc.n_bins);
  CommandOutput out;
  std::ostringstream os;
  os << "n_bins,p_out\n";
  for (const auto& row : multiplex_sweep(mc, n_max)) os << row.n_bins << ',' << fmt(row.p_out) << '\n';
  out.csv = os.str();

  MultiplexConfig single = mc;
  single.n_bins = 1;
  const std::size_t best = optimal_bin_count(mc, n_max);
  MultiplexConfig at_best = mc;
  at_best.n_bins = best;
  out.summary = {{"n_bins", mc.n_bins},
                 {"p_out", output_photon_probability(mc)},
                 {"p_out_single_bin", output_photon_probability(single)},
                 {"optimal_n_bins", best},
                 {"p_out_optimal", output_photon_probability(at_best)}};
  return out;
}

SpectralIntensity read_spectrum_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spectrum csv '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "wavelength_nm,intensity") throw ConfigError(path + ": expected header 'wavelength_nm,intensity'");
  std::vector<double> grid, values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    double a = 0, b = 0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf%c", &a, &b, &tail) < 2 || (tail != 0 && tail != '\r'))
      throw ConfigError(path + " line " + std::to_string(line_no) + ": expected two numbers");
    grid.push_back(a);
    values.push_back(b);
  }
  try {
    return SpectralIntensity(std::move(grid), std::move(values));
  } catch (const DomainError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

CommandOutput cmd_fidelity(const RunConfig& cfg, const std::optional<std::string>& input_csv,
                           const std::optional<std::string>& output_csv) {
  const ExperimentScenario& s = cfg.scenario;
  const double center = s.signal_wavelength_nm();
  const double fwhm = cfg.signal_bandwidth_nm;
  const SpectralIntensity input =
      input_csv ? read_spectrum_csv(*input_csv)
                : gaussian_spectrum(Wavelength(center), fwhm, uniform_grid(center - 5 * fwhm, center + 5 * fwhm, 1001));
  const SpectralIntensity output =
      output_csv ? read_spectrum_csv(*output_csv) : retrieved_spectrum(input, s.write_pair, s.read_pair);
  const double f = spectral_fidelity(input, output);

  CommandOutput out;
  std::ostringstream os;
  os << "wavelength_nm,input,output\n";
  for (std::size_t i = 0; i < input.size(); ++i)
    os << fmt(input.grid_nm[i]) << ',' << fmt(input.values[i]) << ',' << fmt(sample_spectrum(output, input.grid_nm[i]))
       << '\n';
  out.csv = os.str();
  out.summary = {{"fidelity", f}, {"one_minus_fidelity", 1.0 - f}};
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fiber-cavity quantum memory simulator"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<unsigned> workers;
  std::string out_path;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "RNG seed (overrides config)");
  app.add_option("--trials", trials, "trials per run (overrides config)");
  app.add_option("--workers", workers, "worker threads, 0 = all cores");
  app.add_option("--out", out_path, "CSV output path; the JSON summary goes next to it with a .json extension");
  app.fallthrough();

  ScanRange range{0.0, 0.0, 0};
  std::string stage = "read";
  std::optional<std::size_t> mux_bins;
  std::optional<std::string> spec_in, spec_out;

  auto* ringdown = app.add_subcommand("ringdown", "write-only ring-down histogram and lifetime fit");
  auto* dscan = app.add_subcommand("delay-scan", "signal or read delay scan with walk-off fit");
  dscan->add_option("--from", range.from, "first delay, ps")->required();
  dscan->add_option("--to", range.to, "last delay, ps")->required();
  dscan->add_option("--steps", range.steps, "number of delays")->required();
  dscan->add_option("--stage", stage, "read | signal")->check(CLI::IsMember({"read", "signal"}));
  auto* pscan = app.add_subcommand("power-scan", "write-control energy scan with cos^2 and noise fits");
  pscan->add_option("--from", range.from, "first energy per control, nJ")->required();
  pscan->add_option("--to", range.to, "last energy per control, nJ")->required();
  pscan->add_option("--steps", range.steps, "number of energies")->required();
  auto* spl = app.add_subcommand("spl", "memory efficiencies, SNR and mu1 with background subtraction");
  auto* mux = app.add_subcommand("multiplex", "temporal multiplexing output probability");
  mux->add_option("--bins", mux_bins, "attempts per output slot (overrides config)");
  auto* fid = app.add_subcommand("fidelity", "classical spectral fidelity");
  fid->add_option("--input", spec_in, "input spectrum CSV");
  fid->add_option("--output", spec_out, "output spectrum CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  RunConfig cfg;
  try {
    cfg = config_path.empty() ? default_config() : load_config(config_path);
    if (seed) cfg.scenario.rng_seed = *seed;
    if (trials) cfg.scenario.n_trials = *trials;
    if (workers) cfg.scenario.workers = *workers;
    cfg.scenario.validate();
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  }

  CommandOutput result;
  try {
    if (*ringdown) result = cmd_ringdown(cfg);
    if (*dscan)
      result = cmd_delay_scan(cfg, range, stage == "read" ? ScanStage::read_vs_write : ScanStage::signal_vs_write);
    if (*pscan) result = cmd_power_scan(cfg, range);
    if (*spl) result = cmd_spl(cfg);
    if (*mux) result = cmd_multiplex(cfg, mux_bins);
    if (*fid) result = cmd_fidelity(cfg, spec_in, spec_out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }

  try {
    if (!out_path.empty()) {
      write_file(out_path, result.csv);
      std::filesystem::path js(out_path);
      js.replace_extension(".json");
      write_file(js.string(), result.summary.dump(2) + "\n");
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  out << result.summary.dump(2) << '\n';
  return kOk;
}

}  // namespace fibermem::cli
