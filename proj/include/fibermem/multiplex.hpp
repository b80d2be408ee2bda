#pragma once

#include <cstddef>
#include <vector>

namespace fibermem {

// Temporal multiplexing of a heralded source through the memory.
//
// The source fires once per round trip for N attempts. The first heralded
// photon (attempt k) is written, stored until the output slot at the end of
// the N-attempt cycle (N - k further round trips) and read out there.
struct MultiplexConfig {
  double herald_probability = 0.05;
  std::size_t n_bins = 1;
  // Store-and-retrieve efficiency without any extra storage round trips.
  double memory_total_efficiency = 1.0;
  double survival_per_round_trip = 1.0;
  double source_heralding_efficiency = 1.0;

  void validate() const;
};

// P_out = sum_{k=1..N} (1-p_h)^(k-1) p_h eta_src eta_tot p^(N-k)
double output_photon_probability(const MultiplexConfig& cfg);

// argmax over N in [1, n_max]; ties go to the smaller N.
std::size_t optimal_bin_count(const MultiplexConfig& cfg, std::size_t n_max);

// Removes the storage already folded into a measured total efficiency:
// eta_tot / p^round_trips.
double storage_free_efficiency(double eta_total, double survival, double round_trips = 1.0);

struct MultiplexRow {
  std::size_t n_bins;
  double p_out;
};

std::vector<MultiplexRow> multiplex_sweep(const MultiplexConfig& cfg, std::size_t n_max);

}  // namespace fibermem
