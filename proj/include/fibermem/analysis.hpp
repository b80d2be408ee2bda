#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fibermem/bsfwm.hpp"
#include "fibermem/montecarlo.hpp"
#include "fibermem/spectral.hpp"

namespace fibermem {

struct LifetimeFit {
  double lifetime;   // round trips
  double ci95_low;
  double ci95_high;
  double r_squared;
  double slope;      // d ln(counts) / dT
  double slope_stderr;
  std::size_t bins_used;
};

// Weighted linear regression of ln(counts) against bin index over
// [begin, end). Weights are the counts (Poisson variance of the log); empty
// bins are skipped. The 95% interval is +/-1.96 sigma of the slope, carried
// through the reciprocal, with sigma inflated by the reduced chi-square when
// the data scatter more than Poisson.
LifetimeFit fit_ring_down(std::span<const double> counts, std::size_t begin, std::size_t end);
LifetimeFit fit_ring_down(const TimeTagHistogram& hist, std::size_t begin, std::size_t end);

struct Measured {
  double value = 0.0;
  double sigma = 0.0;  // one standard error
};

struct EfficiencyReport {
  Measured eta_w;
  Measured eta_r;
  Measured eta_tot;
  Measured snr;
  Measured mu1;
  Measured n_noise;
};

// Efficiencies from histogram ratios:
//   eta_w   = 1 - fast_write[0] / fast_off[0]
//   eta_r   = 1 - sum(slow_all[t_read..]) / sum(slow_write[t_read..])
//   eta_tot = fast_all[t_read] / fast_off[0]
// The read efficiency uses the tail sum because a read-out photon is gone
// from every later leakage bin. Without background, noise figures are
// reported as n_noise = 0, snr = infinity, mu1 = 0.
EfficiencyReport extract_efficiencies(const HistogramSet& off, const HistogramSet& write, const HistogramSet& all,
                                      std::size_t t_read);

// Background-corrected variant. n_noise is the background in the read bin,
// converted to photons per pulse with the given detection efficiency.
EfficiencyReport extract_efficiencies(const MemoryMeasurement& m, std::size_t t_read,
                                      double detection_efficiency);

// Classical spectral overlap of the square-root intensities, assuming flat
// spectral phase. The output is resampled onto the input grid if needed.
double spectral_fidelity(const SpectralIntensity& in, const SpectralIntensity& out);

struct PowerScanFit {
  double xi;           // rad/nJ
  double amplitude;    // W_in, photons/pulse
  double r_squared_signal;
  double noise_slope;  // photons/pulse per nJ
  double noise_intercept;
  double r_squared_noise;
};

// corrected = W_in cos^2(xi x) by nonlinear least squares; noise against x
// by weighted linear regression with Poisson weights.
PowerScanFit fit_power_scan(const std::vector<ScanRow>& rows);

struct DelayScanFit {
  double walkoff_ps;
  double amplitude;
  double center_ps;
  std::vector<double> residuals;
};

// Fit corrected(delay) = A sin^2(peak_angle * kappa(delay - center)) over the
// walk-off, amplitude and center. Pulse durations come from `coupling`.
DelayScanFit fit_delay_scan(const std::vector<ScanRow>& rows, const BsfwmCoupling& coupling, double peak_angle);

}  // namespace fibermem
