#pragma once

#include "fibermem/bsfwm.hpp"

namespace fibermem {

// Efficiency chain for a photon leaving the cavity on the signal axis.
struct DetectionChain {
  double facet_transmission = 0.74;     // exit-facet coating at the signal wavelength
  double collection_efficiency = 0.65;  // facet to detector fiber
  double spcm_efficiency = 0.44;        // detector quantum efficiency

  void validate() const;
  // Everything after the facet.
  double post_facet() const { return collection_efficiency * spcm_efficiency; }
};

double detection_efficiency(const DetectionChain& chain);

// Phenomenological Raman noise model.
//
// Noise photons in the signal window scale linearly with control energy.
// The read pair contributes directly; write-generated photons that were
// trapped in the cavity are translated out by the read pair with the same
// delay profile as the signal. The split between the two terms is a
// calibration convention, only their sum is constrained by measurement.
struct NoiseModel {
  double raman_photons_per_nj = 0.0;      // a
  double stored_readout_fraction = 0.0;   // b
  double dark_rate_per_s = 0.0;
  double gate_ns = 12.67;                 // dark-count integration window per bin

  void validate() const;
  double dark_counts_per_gate() const { return dark_rate_per_s * gate_ns * 1e-9; }

  // a and b such that the read-bin noise at unit kappa equals target.
  static NoiseModel calibrated(double target_photons, double write_energy_sum_nj,
                               double read_energy_sum_nj, double stored_readout_fraction);
};

// Mean noise photons per pulse in the read bin of the signal window.
// Raman terms are inside-fiber photons; the dark term is added as is.
double noise_mean(const NoiseModel& model, const ControlPair& write_pair, const ControlPair& read_pair,
                  double read_delay_kappa);

// Direct Raman noise from one pair.
double raman_noise(const NoiseModel& model, const ControlPair& pair);

// Signal-to-noise ratio; infinity when noise is zero.
double snr(double signal_mean, double noise_mean);

// Noise referred to the memory input, N_noise / eta.
double mu1_benchmark(double noise_mean, double efficiency);

}  // namespace fibermem
