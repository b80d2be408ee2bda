#include "fibermem/multiplex.hpp"

#include <cmath>

#include "fibermem/error.hpp"

namespace fibermem {

namespace {
bool unit_interval(double x) { return x >= 0.0 && x <= 1.0; }
}  // namespace

void MultiplexConfig::validate() const {
  if (!unit_interval(herald_probability) || !unit_interval(memory_total_efficiency) ||
      !unit_interval(survival_per_round_trip) || !unit_interval(source_heralding_efficiency))
    throw DomainError("multiplex probabilities must be in [0,1]");
  if (n_bins < 1) throw DomainError("multiplex needs at least one bin");
}

double output_photon_probability(const MultiplexConfig& cfg) {
  cfg.validate();
  const double miss = 1.0 - cfg.herald_probability;
  const double p = cfg.survival_per_round_trip;
  // S_N = sum_k miss^(k-1) p^(N-k), built as S_N = p S_(N-1) + miss^(N-1).
  double s = 0.0;
  double miss_pow = 1.0;
  for (std::size_t n = 1; n <= cfg.n_bins; ++n) {
    s = p * s + miss_pow;
    miss_pow *= miss;
  }
  return cfg.herald_probability * cfg.source_heralding_efficiency * cfg.memory_total_efficiency * s;
}

std::size_t optimal_bin_count(const MultiplexConfig& cfg, std::size_t n_max) {
  if (n_max < 1) throw DomainError("optimal_bin_count: n_max must be >= 1");
  std::size_t best = 1;
  double best_p = -1.0;
  MultiplexConfig c = cfg;
  for (std::size_t n = 1; n <= n_max; ++n) {
    c.n_bins = n;
    const double v = output_photon_probability(c);
    if (v > best_p) {
      best_p = v;
      best = n;
    }
  }
  return best;
}

double storage_free_efficiency(double eta_total, double survival, double round_trips) {
  if (!(survival > 0.0 && survival <= 1.0)) throw DomainError("survival must be in (0,1]");
  return eta_total / std::pow(survival, round_trips);
}

std::vector<MultiplexRow> multiplex_sweep(const MultiplexConfig& cfg, std::size_t n_max) {
  std::vector<MultiplexRow> rows;
  MultiplexConfig c = cfg;
  for (std::size_t n = 1; n <= n_max; ++n) {
    c.n_bins = n;
    rows.push_back({n, output_photon_probability(c)});
  }
  return rows;
}

}  // namespace fibermem
