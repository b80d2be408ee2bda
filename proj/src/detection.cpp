#include "fibermem/detection.hpp"

#include <cmath>

#include "fibermem/constants.hpp"
#include "fibermem/error.hpp"

namespace fibermem {

namespace {
bool unit_interval(double x) { return x >= 0.0 && x <= 1.0; }
}  // namespace

void DetectionChain::validate() const {
  if (!unit_interval(facet_transmission) || !unit_interval(collection_efficiency) ||
      !unit_interval(spcm_efficiency))
    throw DomainError("detection chain factors must be in [0,1]");
}

double detection_efficiency(const DetectionChain& chain) {
  chain.validate();
  return chain.facet_transmission * chain.collection_efficiency * chain.spcm_efficiency;
}

void NoiseModel::validate() const {
  if (!(raman_photons_per_nj >= 0.0) || !(stored_readout_fraction >= 0.0) || !(dark_rate_per_s >= 0.0) ||
      !(gate_ns >= 0.0))
    throw DomainError("noise model parameters must be >= 0");
}

NoiseModel NoiseModel::calibrated(double target_photons, double write_energy_sum_nj, double read_energy_sum_nj,
                                  double stored_readout_fraction) {
  const double per_a = read_energy_sum_nj + stored_readout_fraction * write_energy_sum_nj;
  if (!(per_a > 0.0)) throw DomainError("noise calibration needs non-zero control energy");
  NoiseModel m;
  m.raman_photons_per_nj = target_photons / per_a;
  m.stored_readout_fraction = stored_readout_fraction;
  return m;
}

double raman_noise(const NoiseModel& model, const ControlPair& pair) {
  return model.raman_photons_per_nj * (pair.q_energy_nj + pair.p_energy_nj);
}

double noise_mean(const NoiseModel& model, const ControlPair& write_pair, const ControlPair& read_pair,
                  double read_delay_kappa) {
  if (!unit_interval(read_delay_kappa)) throw DomainError("kappa must be in [0,1]");
  return raman_noise(model, read_pair) +
         model.stored_readout_fraction * read_delay_kappa * raman_noise(model, write_pair) +
         model.dark_counts_per_gate();
}

double snr(double signal_mean, double noise) {
  if (noise == 0.0) return kInfinity;
  return signal_mean / noise;
}

double mu1_benchmark(double noise, double efficiency) {
  if (!(efficiency > 0.0)) throw DomainError("mu1 needs a positive efficiency");
  return noise / efficiency;
}

}  // namespace fibermem
