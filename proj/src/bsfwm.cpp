#include "fibermem/bsfwm.hpp"

#include <algorithm>
#include <cmath>

#include "fibermem/constants.hpp"
#include "fibermem/error.hpp"

namespace fibermem {

void ControlPair::validate() const {
  if (!(q_energy_nj >= 0.0) || !(p_energy_nj >= 0.0)) throw DomainError("control energies must be >= 0");
  if (!(q_wavelength_nm > 0.0) || !(p_wavelength_nm > 0.0))
    throw DomainError("control wavelengths must be > 0");
  if (!std::isfinite(delay_ps)) throw DomainError("control delay must be finite");
}

void BsfwmCoupling::validate() const {
  if (!(xi_rad_per_nj >= 0.0)) throw DomainError("xi must be >= 0");
  if (!(walkoff_ps > 0.0)) throw DomainError("walk-off must be > 0");
  if (!(signal_duration_ps >= 0.0) || !(control_duration_ps >= 0.0))
    throw DomainError("pulse durations must be >= 0");
  if (!(signal_wavelength_nm > 0.0)) throw DomainError("signal wavelength must be > 0");
  if (!(acceptance_nm >= 0.0)) throw DomainError("acceptance must be >= 0");
}

double conversion_angle(const BsfwmCoupling& coupling, const ControlPair& pair) {
  return coupling.xi_rad_per_nj * std::sqrt(pair.q_energy_nj * pair.p_energy_nj);
}

double translation_efficiency(double theta) {
  const double s = std::sin(theta);
  return s * s;
}

double delay_profile(const BsfwmCoupling& coupling, double delay_ps) {
  const double ss = coupling.signal_duration_ps / kFwhmPerSigma;
  const double sc = coupling.control_duration_ps / kFwhmPerSigma;
  const double scale = std::sqrt(2.0 * (ss * ss + sc * sc));
  const double half = 0.5 * coupling.walkoff_ps;
  const double x = delay_ps - coupling.optimal_delay_ps;
  if (scale == 0.0) {
    // Delta-function pulses: the bare boxcar.
    const double ax = std::abs(x);
    return ax < half ? 1.0 : ax == half ? 0.5 : 0.0;
  }
  const double peak = std::erf(half / scale);
  // erfc form keeps the tails accurate far from the collision.
  double num;
  if (x > half)
    num = 0.5 * (std::erfc((x - half) / scale) - std::erfc((x + half) / scale));
  else if (x < -half)
    num = 0.5 * (std::erfc((-x - half) / scale) - std::erfc((-x + half) / scale));
  else
    num = 0.5 * (std::erf((x + half) / scale) - std::erf((x - half) / scale));
  return std::clamp(num / peak, 0.0, 1.0);
}

double effective_angle(const BsfwmCoupling& coupling, const ControlPair& pair) {
  return conversion_angle(coupling, pair) * delay_profile(coupling, pair.delay_ps);
}

PhotonState resonant_input(const BsfwmCoupling& coupling, const ControlPair& pair) {
  if (pair.role == ControlRole::write) return {coupling.signal_wavelength_nm, PolarizationAxis::fast};
  const Wavelength stored =
      translate_frequency(Wavelength(coupling.signal_wavelength_nm), Wavelength(pair.q_wavelength_nm),
                          Wavelength(pair.p_wavelength_nm), ShiftDirection::downshift);
  return {stored.nm(), PolarizationAxis::slow};
}

PhotonState apply_bsfwm(const PhotonState& photon, const ControlPair& pair,
                        const BsfwmCoupling& coupling, double uniform_draw) {
  if (pair.is_off()) return photon;
  const PhotonState res = resonant_input(coupling, pair);
  if (photon.axis != res.axis || std::abs(photon.wavelength_nm - res.wavelength_nm) > coupling.acceptance_nm)
    return photon;
  if (!(uniform_draw < translation_efficiency(effective_angle(coupling, pair)))) return photon;
  const auto dir = pair.role == ControlRole::write ? ShiftDirection::downshift : ShiftDirection::upshift;
  const Wavelength out = translate_frequency(Wavelength(photon.wavelength_nm), Wavelength(pair.q_wavelength_nm),
                                             Wavelength(pair.p_wavelength_nm), dir);
  return {out.nm(), toggled(photon.axis)};
}

SpectralIntensity retrieved_spectrum(const SpectralIntensity& input, const ControlPair& write_pair,
                                     const ControlPair& read_pair, const SpectralShiftHook& shift) {
  const SpectralIntensity stored =
      translate_spectrum(input, Wavelength(write_pair.q_wavelength_nm), Wavelength(write_pair.p_wavelength_nm),
                         ShiftDirection::downshift);
  SpectralIntensity out =
      translate_spectrum(stored, Wavelength(read_pair.q_wavelength_nm), Wavelength(read_pair.p_wavelength_nm),
                         ShiftDirection::upshift);
  const double offset = shift ? shift(read_pair.delay_ps) : 0.0;
  std::vector<double> values(input.size());
  for (std::size_t i = 0; i < input.size(); ++i)
    values[i] = sample_spectrum(out, input.grid_nm[i] - offset);
  return SpectralIntensity(input.grid_nm, std::move(values));
}

}  // namespace fibermem
