#include "fibermem/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fibermem/constants.hpp"
#include "fibermem/error.hpp"

namespace fibermem {

void FiberCavity::validate() const {
  if (!(length_m > 0.0) || !std::isfinite(length_m)) throw DomainError("cavity length must be > 0");
  if (!(group_index >= 1.0) || !std::isfinite(group_index)) throw DomainError("group index must be >= 1");
  if (!(fiber_loss_db_per_km >= 0.0)) throw DomainError("fiber loss must be >= 0");
  if (!(extra_loss_db_per_round_trip >= 0.0)) throw DomainError("extra loss must be >= 0");
  if (reflectivity_override && !(*reflectivity_override >= 0.0 && *reflectivity_override <= 1.0))
    throw DomainError("facet reflectivity must be in [0,1]");
}

double FiberCavity::reflectivity(Wavelength lambda) const {
  if (reflectivity_override) return *reflectivity_override;
  if (coating) return coating->reflectivity(lambda);
  throw DomainError("cavity has neither a coating curve nor a reflectivity override");
}

double round_trip_time_ns(const FiberCavity& cavity) {
  cavity.validate();
  return 2.0 * cavity.length_m * cavity.group_index / kSpeedOfLight * 1e9;
}

double fiber_round_trip_survival(const FiberCavity& cavity) {
  const double loss_db = 2.0 * cavity.length_m * 1e-3 * cavity.fiber_loss_db_per_km +
                         cavity.extra_loss_db_per_round_trip;
  return std::pow(10.0, -loss_db / 10.0);
}

double fiber_pass_survival(const FiberCavity& cavity) {
  return std::pow(10.0, -cavity.length_m * 1e-3 * cavity.fiber_loss_db_per_km / 10.0);
}

double survival_per_round_trip(const FiberCavity& cavity, double reflectivity) {
  if (!(reflectivity >= 0.0 && reflectivity <= 1.0)) throw DomainError("reflectivity must be in [0,1]");
  return reflectivity * reflectivity * fiber_round_trip_survival(cavity);
}

double survival_per_round_trip(const FiberCavity& cavity, Wavelength lambda) {
  cavity.validate();
  return survival_per_round_trip(cavity, cavity.reflectivity(lambda));
}

double lifetime_round_trips(double survival) {
  if (!(survival > 0.0 && survival <= 1.0))
    throw DomainError("survival probability must be in (0,1], got " + std::to_string(survival));
  if (survival == 1.0) return kInfinity;
  return -1.0 / std::log(survival);
}

double reflectivity_from_lifetime(double lifetime, const FiberCavity& cavity) {
  if (!(lifetime > 0.0)) throw DomainError("lifetime must be > 0");
  cavity.validate();
  const double required = std::isinf(lifetime) ? 1.0 : std::exp(-1.0 / lifetime);
  const double fiber = fiber_round_trip_survival(cavity);
  const double r_squared = required / fiber;
  if (r_squared > 1.0 + 1e-12)
    throw InfeasibleError("lifetime " + std::to_string(lifetime) +
                          " round trips exceeds the fiber-loss bound of " +
                          std::to_string(lifetime_round_trips(fiber)));
  return std::min(1.0, std::sqrt(r_squared));
}

RingDownModel RingDownModel::from_survival(double round_trip_ns, double survival) {
  if (!(round_trip_ns > 0.0)) throw DomainError("round-trip time must be > 0");
  return {round_trip_ns, survival, fibermem::lifetime_round_trips(survival)};
}

RingDownModel RingDownModel::for_cavity(const FiberCavity& cavity, Wavelength lambda) {
  return from_survival(fibermem::round_trip_time_ns(cavity), fibermem::survival_per_round_trip(cavity, lambda));
}

std::vector<double> ring_down_expected_counts(const RingDownModel& model, double initial_rate,
                                              std::size_t n_bins) {
  if (!(initial_rate >= 0.0)) throw DomainError("initial rate must be >= 0");
  if (n_bins < 1) throw DomainError("need at least one bin");
  std::vector<double> out(n_bins);
  double level = initial_rate;
  for (std::size_t t = 0; t < n_bins; ++t) {
    out[t] = level;
    level *= model.survival_per_round_trip;
  }
  return out;
}

}  // namespace fibermem
