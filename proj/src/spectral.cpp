#include "fibermem/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "fibermem/constants.hpp"
#include "fibermem/error.hpp"

namespace fibermem {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, std::size_t line_no) {
  const std::string t = trim(field);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size() || !std::isfinite(v))
    throw ConfigError("coating csv line " + std::to_string(line_no) + ": bad number '" + t + "'");
  return v;
}

// Half-max crossing of the transmission, falling edge.
double estimate_lambda0(const std::vector<CoatingSample>& samples) {
  double tmax = 0.0;
  for (const auto& s : samples) tmax = std::max(tmax, s.transmission);
  const double half = 0.5 * tmax;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const auto& a = samples[i - 1];
    const auto& b = samples[i];
    if (a.transmission >= half && b.transmission < half) {
      const double f = (a.transmission - half) / (a.transmission - b.transmission);
      return a.wavelength_nm + f * (b.wavelength_nm - a.wavelength_nm);
    }
  }
  return samples.back().wavelength_nm;
}

}  // namespace

Wavelength::Wavelength(double nm) : nm_(nm) {
  if (!std::isfinite(nm) || nm <= 0.0)
    throw DomainError("wavelength must be positive and finite, got " + std::to_string(nm));
}

AngularFrequency::AngularFrequency(double rad_per_s) : value_(rad_per_s) {
  if (!std::isfinite(rad_per_s) || rad_per_s <= 0.0)
    throw DomainError("angular frequency must be positive and finite");
}

AngularFrequency wavelength_to_omega(Wavelength lambda) {
  return AngularFrequency(kTwoPi * kSpeedOfLight / lambda.meters());
}

Wavelength omega_to_wavelength(AngularFrequency omega) {
  return Wavelength(kTwoPi * kSpeedOfLight / omega.value() * 1e9);
}

Wavelength translate_frequency(Wavelength signal, Wavelength q, Wavelength p,
                               ShiftDirection direction) {
  if (q.nm() > p.nm())
    throw DomainError("translate_frequency: requires omega_q >= omega_p (lambda_q <= lambda_p)");
  // Work in inverse wavelength; it is proportional to frequency.
  const double shift = 1.0 / q.nm() - 1.0 / p.nm();
  const double inv = direction == ShiftDirection::downshift ? 1.0 / signal.nm() - shift
                                                            : 1.0 / signal.nm() + shift;
  if (!(inv > 0.0)) throw DomainError("translate_frequency: translated frequency is not positive");
  return Wavelength(1.0 / inv);
}

CoatingCurve::CoatingCurve(std::vector<CoatingSample> samples, double lambda0_nm)
    : samples_(std::move(samples)), lambda0_nm_(lambda0_nm) {
  if (samples_.size() < 2) throw DomainError("coating curve needs at least two samples");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!std::isfinite(s.wavelength_nm) || s.wavelength_nm <= 0.0)
      throw DomainError("coating curve: wavelength must be positive");
    if (i > 0 && !(s.wavelength_nm > samples_[i - 1].wavelength_nm))
      throw DomainError("coating curve: wavelengths must be strictly increasing");
    if (!(s.transmission >= 0.0 && s.transmission <= 1.0))
      throw DomainError("coating curve: transmission outside [0,1]");
    if (!(s.absorption >= 0.0 && s.transmission + s.absorption <= 1.0))
      throw DomainError("coating curve: absorption must be >= 0 with T + A <= 1");
  }
  if (!std::isfinite(lambda0_nm) || lambda0_nm <= 0.0)
    throw DomainError("coating curve: lambda0 must be positive");
}

namespace {

template <typename Field>
double interpolate(const std::vector<CoatingSample>& samples, double x, Field field) {
  if (x < samples.front().wavelength_nm || x > samples.back().wavelength_nm)
    throw RangeError("wavelength " + std::to_string(x) + " nm outside coating table [" +
                     std::to_string(samples.front().wavelength_nm) + ", " +
                     std::to_string(samples.back().wavelength_nm) + "]");
  auto it = std::lower_bound(samples.begin(), samples.end(), x,
                             [](const CoatingSample& s, double v) { return s.wavelength_nm < v; });
  if (it->wavelength_nm == x) return field(*it);
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double f = (x - a.wavelength_nm) / (b.wavelength_nm - a.wavelength_nm);
  return field(a) + f * (field(b) - field(a));
}

}  // namespace

double CoatingCurve::transmission(Wavelength lambda) const {
  const double t = interpolate(samples_, lambda.nm(), [](const CoatingSample& s) { return s.transmission; });
  return std::clamp(t, 0.0, 1.0);
}

double CoatingCurve::absorption(Wavelength lambda) const {
  const double a = interpolate(samples_, lambda.nm(), [](const CoatingSample& s) { return s.absorption; });
  return std::clamp(a, 0.0, 1.0);
}

double CoatingCurve::reflectivity(Wavelength lambda) const {
  return std::clamp(1.0 - transmission(lambda) - absorption(lambda), 0.0, 1.0);
}

double coating_transmission(const CoatingCurve& curve, Wavelength lambda) {
  return curve.transmission(lambda);
}

CoatingCurve read_coating_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<CoatingSample> samples;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (t != "wavelength_nm,transmission" && t != "wavelength_nm,transmission,absorption")
        throw ConfigError("coating csv: expected header 'wavelength_nm,transmission', got '" + t + "'");
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(t);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 2 && fields.size() != 3)
      throw ConfigError("coating csv line " + std::to_string(line_no) + ": expected 2 or 3 columns");
    CoatingSample s{parse_number(fields[0], line_no), parse_number(fields[1], line_no)};
    if (fields.size() == 3) s.absorption = parse_number(fields[2], line_no);
    samples.push_back(s);
  }
  if (!header_seen) throw ConfigError("coating csv: empty file");
  if (samples.size() < 2) throw ConfigError("coating csv: need at least two rows");
  const double lambda0 = estimate_lambda0(samples);
  try {
    return CoatingCurve(std::move(samples), lambda0);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("coating csv: ") + e.what());
  }
}

CoatingCurve read_coating_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open coating csv '" + path.string() + "'");
  return read_coating_csv(in);
}

CoatingCurve read_coating_csv(const std::filesystem::path& path, double lambda0_nm) {
  const CoatingCurve c = read_coating_csv(path);
  return CoatingCurve(c.samples(), lambda0_nm);
}

void write_coating_csv(std::ostream& out, const CoatingCurve& curve) {
  bool with_abs = false;
  for (const auto& s : curve.samples()) with_abs = with_abs || s.absorption != 0.0;
  out << (with_abs ? "wavelength_nm,transmission,absorption\n" : "wavelength_nm,transmission\n");
  char buf[96];
  for (const auto& s : curve.samples()) {
    if (with_abs)
      std::snprintf(buf, sizeof buf, "%.4f,%.8f,%.8f\n", s.wavelength_nm, s.transmission, s.absorption);
    else
      std::snprintf(buf, sizeof buf, "%.4f,%.8f\n", s.wavelength_nm, s.transmission);
    out << buf;
  }
}

CoatingCurve synthetic_coating_curve() {
  constexpr double kPlateau = 0.745;
  constexpr double kEdge = 915.0;
  constexpr double kWidth = 0.8;
  std::vector<CoatingSample> samples;
  for (int i = 0; i <= 600; ++i) {
    const double wl = 700.0 + 0.5 * i;
    samples.push_back({wl, kPlateau / (1.0 + std::exp((wl - kEdge) / kWidth))});
  }
  return CoatingCurve(std::move(samples), kEdge);
}

SpectralIntensity::SpectralIntensity(std::vector<double> grid, std::vector<double> vals)
    : grid_nm(std::move(grid)), values(std::move(vals)) {
  if (grid_nm.size() != values.size()) throw DomainError("spectrum: grid and values differ in length");
  if (grid_nm.size() < 8) throw DomainError("spectrum: need at least 8 samples");
  for (std::size_t i = 0; i < grid_nm.size(); ++i) {
    if (!std::isfinite(grid_nm[i]) || (i > 0 && !(grid_nm[i] > grid_nm[i - 1])))
      throw DomainError("spectrum: grid must be strictly increasing");
    if (!(values[i] >= 0.0) || !std::isfinite(values[i]))
      throw DomainError("spectrum: intensities must be finite and non-negative");
  }
}

std::vector<double> uniform_grid(double lo_nm, double hi_nm, std::size_t n) {
  if (n < 2 || !(hi_nm > lo_nm)) throw DomainError("uniform_grid: need n >= 2 and hi > lo");
  std::vector<double> g(n);
  const double step = (hi_nm - lo_nm) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo_nm + step * static_cast<double>(i);
  g.back() = hi_nm;
  return g;
}

SpectralIntensity gaussian_spectrum(Wavelength center, double fwhm_nm, std::span<const double> grid_nm) {
  if (!(fwhm_nm > 0.0) || !std::isfinite(fwhm_nm)) throw DomainError("gaussian_spectrum: fwhm must be > 0");
  if (grid_nm.empty() || grid_nm.front() > center.nm() - 3.0 * fwhm_nm ||
      grid_nm.back() < center.nm() + 3.0 * fwhm_nm)
    throw RangeError("gaussian_spectrum: grid must span center +/- 3 fwhm");
  const double sigma = fwhm_nm / kFwhmPerSigma;
  const double norm = 1.0 / (sigma * std::sqrt(kTwoPi));
  std::vector<double> values(grid_nm.size());
  for (std::size_t i = 0; i < grid_nm.size(); ++i) {
    const double z = (grid_nm[i] - center.nm()) / sigma;
    values[i] = norm * std::exp(-0.5 * z * z);
  }
  return SpectralIntensity({grid_nm.begin(), grid_nm.end()}, std::move(values));
}

double integrate(std::span<const double> grid, std::span<const double> values) {
  double sum = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    sum += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
  return sum;
}

double sample_spectrum(const SpectralIntensity& s, double x_nm) {
  const auto& g = s.grid_nm;
  if (x_nm < g.front() || x_nm > g.back()) return 0.0;
  auto it = std::lower_bound(g.begin(), g.end(), x_nm);
  const auto i = static_cast<std::size_t>(it - g.begin());
  if (g[i] == x_nm) return s.values[i];
  const double f = (x_nm - g[i - 1]) / (g[i] - g[i - 1]);
  return s.values[i - 1] + f * (s.values[i] - s.values[i - 1]);
}

SpectralIntensity translate_spectrum(const SpectralIntensity& in, Wavelength q, Wavelength p,
                                     ShiftDirection direction) {
  std::vector<double> grid(in.size());
  std::vector<double> values(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double from = in.grid_nm[i];
    const double to = translate_frequency(Wavelength(from), q, p, direction).nm();
    grid[i] = to;
    values[i] = in.values[i] * (from * from) / (to * to);
  }
  return SpectralIntensity(std::move(grid), std::move(values));
}

}  // namespace fibermem
