#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fibermem/bsfwm.hpp"
#include "fibermem/cavity.hpp"
#include "fibermem/detection.hpp"

namespace fibermem {

// Binary band-pass filter in front of a detector.
struct SpectralWindow {
  double center_nm;
  double bandwidth_nm;
  bool passes(double wavelength_nm) const {
    return wavelength_nm >= center_nm - 0.5 * bandwidth_nm && wavelength_nm <= center_nm + 0.5 * bandwidth_nm;
  }
};

struct ExperimentScenario {
  FiberCavity cavity;
  BsfwmCoupling coupling_write;
  BsfwmCoupling coupling_read;
  ControlPair write_pair{.role = ControlRole::write};
  ControlPair read_pair{.role = ControlRole::read};
  NoiseModel noise;
  DetectionChain chain;
  double input_mean_photons = 1.0;
  double read_delay_ns = 12.67;
  std::uint64_t n_trials = 100'000;
  std::uint64_t rng_seed = 1;
  std::size_t n_bins = 64;

  // Loss applied to photons released by the read pair (mode mismatch and
  // other readout channels that are not itemized). Calibration knob.
  double readout_loss_factor = 1.0;
  SpectralWindow fast_window{902.5, 3.0};
  SpectralWindow slow_window{925.0, 3.0};

  // 0 picks the hardware concurrency.
  unsigned workers = 0;
  bool audit = false;
  bool record_tags = false;

  // Throws ConfigError naming the offending field.
  void validate() const;
  std::size_t read_bin() const;
  double round_trip_ns() const;
  double signal_wavelength_nm() const { return coupling_write.signal_wavelength_nm; }
  double stored_wavelength_nm() const;
  // Facet reflectivity seen by stored photons.
  double stored_reflectivity() const;
  double survival() const;
};

// Bright-pulse memory defaults: 16 round-trip lifetime during operation,
// write 0.95, read 0.87, total 0.73 at 2.2 nJ per control.
ExperimentScenario default_scenario();

// Calibrated couplings and losses used by default_scenario.
double calibrated_xi(double target_efficiency, double energy_nj);
double calibrated_readout_loss(double eta_total, double eta_write, double eta_read, double survival);

struct TimeTagHistogram {
  PolarizationAxis axis = PolarizationAxis::fast;
  std::vector<std::uint64_t> counts;
  std::uint64_t n_trials = 0;

  std::uint64_t total() const;
  bool operator==(const TimeTagHistogram&) const = default;
};

struct HistogramSet {
  TimeTagHistogram fast;
  TimeTagHistogram slow;
  bool operator==(const HistogramSet&) const = default;
};

struct TimeTag {
  std::uint64_t trial;
  double time_ns;
  PolarizationAxis axis;
  bool operator==(const TimeTag&) const = default;
};

// Signal-photon bookkeeping. generated == detected + lost + remaining.
struct PhotonAudit {
  std::uint64_t generated = 0;
  std::uint64_t detected = 0;
  std::uint64_t lost = 0;
  std::uint64_t remaining = 0;
  std::uint64_t noise_detected = 0;

  bool balanced() const { return generated == detected + lost + remaining; }
  PhotonAudit& operator+=(const PhotonAudit& o);
};

struct ScenarioResult {
  HistogramSet histograms;
  std::optional<PhotonAudit> audit;
  std::vector<TimeTag> tags;
};

// Trial-by-trial simulation of write, storage, read and detection.
// Deterministic in rng_seed regardless of worker count.
ScenarioResult run_scenario(const ExperimentScenario& scenario);

// Switch control pairs on or off by zeroing their energies.
ExperimentScenario with_controls(const ExperimentScenario& s, bool write_on, bool read_on);

enum class ScanStage { signal_vs_write, read_vs_write };

struct ScanRow {
  double x;  // delay in ps, or sqrt(W_q W_p) in nJ for power scans
  double signal_rate;
  double noise_rate;
  double corrected_rate;
};

// Rates are photons per pulse referred to the inside of the fiber: read-bin
// fast-axis counts divided by trials and the detection efficiency.
std::vector<ScanRow> delay_scan(const ExperimentScenario& scenario, const std::vector<double>& delays_ps,
                                ScanStage stage);

// Write-only scan with W_q = W_p = energy; rates from fast-axis bin 0.
std::vector<ScanRow> power_scan(const ExperimentScenario& scenario, const std::vector<double>& energies_nj);

// Histograms for the three control settings (off, write only, write+read),
// each with a signal-free companion run for background subtraction.
struct MemoryMeasurement {
  HistogramSet off;
  HistogramSet write;
  HistogramSet all;
  HistogramSet background_off;
  HistogramSet background_write;
  HistogramSet background_all;
};

MemoryMeasurement measure_memory(const ExperimentScenario& scenario);

}  // namespace fibermem
