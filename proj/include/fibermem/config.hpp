#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "fibermem/montecarlo.hpp"
#include "fibermem/multiplex.hpp"

namespace fibermem {

// Everything a CLI run needs. Loaded from a JSON document whose sections
// mirror the scenario; unit-bearing key names throughout.
//
//   signal     wavelength_nm, bandwidth_nm, duration_ps, input_mean_photons
//   cavity     length_m, group_index, loss_db_per_km,
//              extra_loss_db_per_round_trip, and at most one of
//              reflectivity | lifetime_round_trips | coating_csv | coating ("synthetic")
//   write      q_energy_nj, p_energy_nj, q_wavelength_nm, p_wavelength_nm,
//              delay_ps, walkoff_ps, control_duration_ps, optimal_delay_ps,
//              acceptance_nm, xi_rad_per_nj | target_efficiency
//   read       as write, plus read_delay_ns and
//              readout_loss_factor | target_total_efficiency
//   noise      dark_rate_per_s, gate_ns, and either
//              raman_photons_per_nj + stored_readout_fraction, or
//              target_photons_per_pulse
//   detection  facet_transmission, collection_efficiency, spcm_efficiency
//   filters    fast_center_nm, slow_center_nm, bandwidth_nm
//   run        trials, seed, bins, workers
//   multiplex  herald_probability, n_bins, memory_total_efficiency,
//              survival_per_round_trip, source_heralding_efficiency, n_max
//
// Calibration targets are resolved at load time; serialization always
// writes the resolved values so that a reload reproduces the scenario.
struct RunConfig {
  ExperimentScenario scenario = default_scenario();
  double signal_bandwidth_nm = 1.05;
  MultiplexConfig multiplex;
  std::size_t multiplex_n_max = 64;
  // Source of the cavity coating when one is used: a CSV path or "synthetic".
  std::optional<std::string> coating_source;

  bool operator==(const RunConfig& other) const;
};

// Defaults: bright memory operation plus multiplexing with the measured
// total efficiency and the 925 nm resonant-probe lifetime.
RunConfig default_config();

// Throws ConfigError with the field path on any problem. Relative coating
// paths resolve against base_dir.
RunConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& cfg);

}  // namespace fibermem
