#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fibermem/config.hpp"

namespace fibermem::cli {

enum ExitCode : int { kOk = 0, kUsageError = 1, kRuntimeError = 2 };

// A subcommand's product: a CSV table and a JSON summary.
struct CommandOutput {
  std::string csv;
  nlohmann::json summary;
};

struct ScanRange {
  double from;
  double to;
  std::size_t steps;
  std::vector<double> points() const;
};

CommandOutput cmd_ringdown(const RunConfig& cfg);
CommandOutput cmd_delay_scan(const RunConfig& cfg, const ScanRange& range, ScanStage stage);
CommandOutput cmd_power_scan(const RunConfig& cfg, const ScanRange& range);
CommandOutput cmd_spl(const RunConfig& cfg);
CommandOutput cmd_multiplex(const RunConfig& cfg, std::optional<std::size_t> n_bins);
// Spectra are CSV files with header `wavelength_nm,intensity`. Without an
// input file the configured signal is used; without an output file the
// memory's retrieved spectrum is simulated.
CommandOutput cmd_fidelity(const RunConfig& cfg, const std::optional<std::string>& input_csv,
                           const std::optional<std::string>& output_csv);

SpectralIntensity read_spectrum_csv(const std::string& path);

// Entry point for the `fibermem` executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fibermem::cli
