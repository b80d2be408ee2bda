#pragma once

#include <functional>

#include "fibermem/spectral.hpp"

namespace fibermem {

enum class PolarizationAxis { fast, slow };

inline PolarizationAxis toggled(PolarizationAxis a) {
  return a == PolarizationAxis::fast ? PolarizationAxis::slow : PolarizationAxis::fast;
}

enum class ControlRole { write, read };

// One pair of control pulses. Energies are in-fiber pulse energies.
struct ControlPair {
  double q_energy_nj = 0.0;
  double p_energy_nj = 0.0;
  double q_wavelength_nm = 790.1;
  double p_wavelength_nm = 807.4;
  // Signal-to-control delay, ps. Zero is the centered collision.
  double delay_ps = 0.0;
  ControlRole role = ControlRole::write;

  void validate() const;
  bool is_off() const { return q_energy_nj == 0.0 || p_energy_nj == 0.0; }
};

struct BsfwmCoupling {
  // Conversion angle per nJ of geometric-mean control energy.
  double xi_rad_per_nj = 0.0;
  // Total signal/control group-delay slip across the fiber.
  double walkoff_ps = 16.6;
  double signal_duration_ps = 1.1;
  double control_duration_ps = 2.3;
  // Delay at which the collision is centered.
  double optimal_delay_ps = 0.0;
  // Phase-matched input signal wavelength and the tolerance for treating a
  // photon as resonant with the interaction.
  double signal_wavelength_nm = 902.5;
  double acceptance_nm = 1.5;

  void validate() const;
};

// theta = xi * sqrt(W_q W_p).
double conversion_angle(const BsfwmCoupling& coupling, const ControlPair& pair);

// Converted fraction sin^2(theta); the unconverted remainder is cos^2(theta).
double translation_efficiency(double theta);

// Fraction of the peak conversion angle reached at a signal/control delay.
//
// Gaussian intensity envelopes for signal and control are convolved with a
// boxcar of width walkoff_ps, the window over which the signal slides
// through the control grating. In closed form, with
// sigma^2 = sigma_signal^2 + sigma_control^2 and x = delay - optimal,
//   kappa(x) = [erf((x + W/2)/(sqrt2 sigma)) - erf((x - W/2)/(sqrt2 sigma))]
//              / (2 erf(W / (2 sqrt2 sigma)))
// which is 1 at x = 0 and falls to 0 once the pulses no longer collide.
double delay_profile(const BsfwmCoupling& coupling, double delay_ps);

// Effective angle at the pair's own delay.
double effective_angle(const BsfwmCoupling& coupling, const ControlPair& pair);

struct PhotonState {
  double wavelength_nm;
  PolarizationAxis axis;
};

// Resonant input state for a pair: (lambda_s, fast) for a write pair and
// (lambda_r, slow) for a read pair.
PhotonState resonant_input(const BsfwmCoupling& coupling, const ControlPair& pair);

// Monte Carlo step for one photon. With probability sin^2(theta_eff) a
// resonant photon is frequency translated and its axis toggled; everything
// else passes through unchanged. uniform_draw must be in [0,1).
PhotonState apply_bsfwm(const PhotonState& photon, const ControlPair& pair,
                        const BsfwmCoupling& coupling, double uniform_draw);

// Optional spectral shift (nm) of the retrieved pulse as a function of read
// delay. Unset means no shift.
using SpectralShiftHook = std::function<double(double delay_ps)>;

// Spectrum leaving the memory after a write downshift and a read upshift,
// resampled onto the input grid.
SpectralIntensity retrieved_spectrum(const SpectralIntensity& input, const ControlPair& write_pair,
                                     const ControlPair& read_pair,
                                     const SpectralShiftHook& shift = {});

}  // namespace fibermem
