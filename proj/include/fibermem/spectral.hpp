#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace fibermem {

// Vacuum wavelength in nanometers. Always positive and finite.
class Wavelength {
 public:
  explicit Wavelength(double nm);
  double nm() const { return nm_; }
  double meters() const { return nm_ * 1e-9; }
  auto operator<=>(const Wavelength&) const = default;

 private:
  double nm_;
};

// Angular frequency in rad/s. Always positive and finite.
class AngularFrequency {
 public:
  explicit AngularFrequency(double rad_per_s);
  double value() const { return value_; }

 private:
  double value_;
};

AngularFrequency wavelength_to_omega(Wavelength lambda);
Wavelength omega_to_wavelength(AngularFrequency omega);

enum class ShiftDirection { downshift, upshift };

// Bragg-scattering frequency map. A downshift subtracts the control
// frequency difference from the signal, an upshift adds it back:
//   1/lambda_out = 1/lambda_in -/+ (1/lambda_q - 1/lambda_p)
// The controls must satisfy omega_q >= omega_p (lambda_q <= lambda_p).
Wavelength translate_frequency(Wavelength signal, Wavelength q, Wavelength p,
                               ShiftDirection direction);

struct CoatingSample {
  double wavelength_nm;
  double transmission;
  double absorption = 0.0;
};

// Tabulated facet transmission. Reflectivity is 1 - T - A.
class CoatingCurve {
 public:
  CoatingCurve(std::vector<CoatingSample> samples, double lambda0_nm);

  const std::vector<CoatingSample>& samples() const { return samples_; }
  double lambda0_nm() const { return lambda0_nm_; }
  double min_nm() const { return samples_.front().wavelength_nm; }
  double max_nm() const { return samples_.back().wavelength_nm; }

  double transmission(Wavelength lambda) const;
  double absorption(Wavelength lambda) const;
  double reflectivity(Wavelength lambda) const;

 private:
  std::vector<CoatingSample> samples_;
  double lambda0_nm_;
};

double coating_transmission(const CoatingCurve& curve, Wavelength lambda);

// Two- or three-column CSV: `wavelength_nm,transmission[,absorption]`.
// lambda0 is not part of the file; when omitted it is estimated as the
// wavelength where transmission first crosses half its maximum.
CoatingCurve read_coating_csv(std::istream& in);
CoatingCurve read_coating_csv(const std::filesystem::path& path);
CoatingCurve read_coating_csv(const std::filesystem::path& path, double lambda0_nm);
void write_coating_csv(std::ostream& out, const CoatingCurve& curve);

// Smooth short-wave-pass edge: ~0.745 transmission below 908 nm, < 0.02
// above 920 nm, centered at 915 nm. Sampled 700-1000 nm every 0.5 nm.
CoatingCurve synthetic_coating_curve();

struct SpectralIntensity {
  std::vector<double> grid_nm;
  std::vector<double> values;

  SpectralIntensity(std::vector<double> grid, std::vector<double> vals);
  std::size_t size() const { return grid_nm.size(); }
};

// n points from lo to hi inclusive.
std::vector<double> uniform_grid(double lo_nm, double hi_nm, std::size_t n);

// Unit-area Gaussian with the given FWHM. The grid must cover
// center +/- 3 fwhm.
SpectralIntensity gaussian_spectrum(Wavelength center, double fwhm_nm,
                                    std::span<const double> grid_nm);

// Trapezoidal integral of values over grid.
double integrate(std::span<const double> grid, std::span<const double> values);

// Linear interpolation of a spectrum at x; zero outside the grid.
double sample_spectrum(const SpectralIntensity& s, double x_nm);

// Push a spectrum through translate_frequency. Energy per sample interval is
// conserved, so densities pick up the Jacobian |d lambda_in / d lambda_out|.
SpectralIntensity translate_spectrum(const SpectralIntensity& in, Wavelength q, Wavelength p,
                                     ShiftDirection direction);

}  // namespace fibermem
