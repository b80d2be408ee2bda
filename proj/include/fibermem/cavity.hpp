#pragma once

#include <optional>
#include <vector>

#include "fibermem/spectral.hpp"

namespace fibermem {

// Linear fiber cavity with coated end facets.
//
// The facet reflectivity comes either from a coating curve (R = 1 - T - A)
// or from a scalar override. The override is how damaged or effective
// coatings enter: the simulator takes the operating reflectivity as input.
struct FiberCavity {
  double length_m = 1.285;
  // Reproduces a 12.67 ns round trip at 1.285 m.
  double group_index = 1.478;
  double fiber_loss_db_per_km = 5.0;
  // Splices, bends and anything else not in the fiber attenuation figure.
  double extra_loss_db_per_round_trip = 0.0;
  std::optional<CoatingCurve> coating;
  std::optional<double> reflectivity_override;

  // Throws DomainError when an invariant is broken.
  void validate() const;
  // Throws RangeError outside the coating table, DomainError when neither
  // a coating nor an override is set.
  double reflectivity(Wavelength lambda) const;
};

// 2 * L * n_g / c, in ns.
double round_trip_time_ns(const FiberCavity& cavity);

// Fiber-only survival for one round trip (two passes plus extra loss).
double fiber_round_trip_survival(const FiberCavity& cavity);
// Fiber-only survival for a single pass.
double fiber_pass_survival(const FiberCavity& cavity);

// p = R^2 * fiber round-trip survival.
double survival_per_round_trip(const FiberCavity& cavity, Wavelength lambda);
double survival_per_round_trip(const FiberCavity& cavity, double reflectivity);

// 1/e lifetime in round trips, -1/ln(p). Infinite for p == 1.
double lifetime_round_trips(double survival);

// Facet reflectivity that yields the given lifetime in this cavity.
// Throws InfeasibleError if the lifetime exceeds the fiber-loss bound.
double reflectivity_from_lifetime(double lifetime_round_trips, const FiberCavity& cavity);

struct RingDownModel {
  double round_trip_time_ns;
  double survival_per_round_trip;
  double lifetime_round_trips;

  static RingDownModel from_survival(double round_trip_ns, double survival);
  static RingDownModel for_cavity(const FiberCavity& cavity, Wavelength lambda);
};

// initial_rate * p^T for T = 0 .. n_bins-1.
std::vector<double> ring_down_expected_counts(const RingDownModel& model, double initial_rate,
                                              std::size_t n_bins);

}  // namespace fibermem
