#include <doctest.h>

#include <cmath>
#include <random>

#include "fibermem/analysis.hpp"
#include "fibermem/error.hpp"
#include "fibermem/rng.hpp"

using namespace fibermem;

namespace {

HistogramSet histograms(std::vector<std::uint64_t> fast, std::vector<std::uint64_t> slow, std::uint64_t trials) {
  HistogramSet h;
  h.fast = {PolarizationAxis::fast, std::move(fast), trials};
  h.slow = {PolarizationAxis::slow, std::move(slow), trials};
  return h;
}

SpectralIntensity gaussian_sigma(double center, double sigma, const std::vector<double>& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = std::exp(-0.5 * std::pow((grid[i] - center) / sigma, 2));
  return SpectralIntensity(grid, v);
}

std::vector<ScanRow> power_rows(double xi, double w_in, double scale, std::uint64_t seed) {
  StreamRng rng(seed, 0);
  std::vector<ScanRow> rows;
  for (int i = 0; i <= 20; ++i) {
    const double x = 0.2 * i;
    const double mean_sig = w_in * std::pow(std::cos(xi * x), 2), mean_noise = 0.07 * x;
    double sig = mean_sig, noise = mean_noise;
    if (scale > 0) {
      std::poisson_distribution<long> ps(mean_sig * scale), pn(mean_noise * scale + 1e-12);
      sig = ps(rng) / scale;
      noise = pn(rng) / scale;
    }
    rows.push_back({x, sig + noise, noise, sig});
  }
  return rows;
}

std::vector<ScanRow> delay_rows(const BsfwmCoupling& c, double theta, double amp, double scale, std::uint64_t seed) {
  StreamRng rng(seed, 0);
  std::vector<ScanRow> rows;
  for (int i = 0; i <= 40; ++i) {
    const double d = -30.0 + 1.5 * i;
    const double mean = amp * std::pow(std::sin(theta * delay_profile(c, d)), 2);
    double y = mean;
    if (scale > 0) {
      std::poisson_distribution<long> ps(mean * scale + 1e-12);
      y = ps(rng) / scale;
    }
    rows.push_back({d, y, 0.0, y});
  }
  return rows;
}

}  // namespace

TEST_CASE("ring-down fit on exact geometric data") {
  const double p = std::exp(-1.0 / 39.7);
  std::vector<double> c(60);
  for (std::size_t t = 0; t < c.size(); ++t) c[t] = 1e5 * std::pow(p, double(t));
  const LifetimeFit fit = fit_ring_down(c, 0, c.size());
  CHECK(std::abs(fit.lifetime - 39.7) / 39.7 < 1e-6);
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.ci95_low <= 39.7);
  CHECK(fit.ci95_high >= 39.7);
  CHECK(fit.bins_used == 60);
}

TEST_CASE("ring-down fit errors") {
  std::vector<double> flat(20, 100.0);
  CHECK_THROWS_AS(fit_ring_down(flat, 0, flat.size()), NonDecayingError);
  std::vector<double> rising{1, 2, 4, 8, 16};
  CHECK_THROWS_AS(fit_ring_down(rising, 0, rising.size()), NonDecayingError);
  std::vector<double> two{100, 50};
  CHECK_THROWS_AS(fit_ring_down(two, 0, 2), InsufficientDataError);
  std::vector<double> sparse{100, 0, 0, 0, 0};
  CHECK_THROWS_AS(fit_ring_down(sparse, 0, sparse.size()), InsufficientDataError);
  CHECK_THROWS_AS(fit_ring_down(flat, 5, 30), RangeError);
}

TEST_CASE("ring-down CI covers the truth in seeded Poisson repetitions") {
  const double p = std::exp(-1.0 / 87.0);
  int covered = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    StreamRng rng(4242, rep);
    std::vector<double> c(200);
    for (std::size_t t = 0; t < c.size(); ++t) {
      std::poisson_distribution<long> d(1e5 * std::pow(p, double(t)));
      c[t] = double(d(rng));
    }
    const LifetimeFit fit = fit_ring_down(c, 0, c.size());
    if (fit.ci95_low <= 87.0 && 87.0 <= fit.ci95_high) ++covered;
  }
  CHECK(covered >= 90);
}

TEST_CASE("efficiency extraction") {
  const auto same = histograms({1000, 400, 0}, {500, 400, 300}, 100);
  const EfficiencyReport r = extract_efficiencies(same, same, same, 1);
  CHECK(r.eta_w.value == 0.0);
  CHECK(r.eta_r.value == 0.0);
  CHECK(r.eta_tot.value == doctest::Approx(0.4));
  CHECK(std::isinf(r.snr.value));
  CHECK(r.mu1.value == 0.0);

  // Perfect memory: full write, full read, nothing lost in between.
  const auto off = histograms({1000, 0, 0}, {0, 0, 0}, 100);
  const auto write = histograms({0, 0, 0}, {0, 1000, 1000}, 100);
  const auto all = histograms({0, 1000, 0}, {0, 0, 0}, 100);
  const EfficiencyReport perfect = extract_efficiencies(off, write, all, 1);
  CHECK(perfect.eta_w.value == 1.0);
  CHECK(perfect.eta_r.value == 1.0);
  CHECK(perfect.eta_tot.value == 1.0);

  const auto empty = histograms({0, 0, 0}, {0, 0, 0}, 100);
  CHECK_THROWS_AS(extract_efficiencies(empty, write, all, 1), DivisionError);
  CHECK_THROWS_AS(extract_efficiencies(off, write, histograms({0, 1, 0}, {0, 0, 0}, 7), 1), DomainError);
  CHECK_THROWS_AS(extract_efficiencies(off, write, all, 3), DomainError);
}

TEST_CASE("calibrated scenario yields the configured efficiencies") {
  ExperimentScenario s = default_scenario();
  s.input_mean_photons = 100.0;
  s.n_trials = 4000;
  s.noise = NoiseModel{};
  const MemoryMeasurement m = measure_memory(s);
  const EfficiencyReport r = extract_efficiencies(m, 1, detection_efficiency(s.chain));
  CHECK(r.eta_w.value == doctest::Approx(0.95).epsilon(0.01));
  CHECK(r.eta_r.value == doctest::Approx(0.87).epsilon(0.01));
  CHECK(r.eta_tot.value == doctest::Approx(0.73).epsilon(0.02));
}

TEST_CASE("spectral fidelity") {
  const auto grid = uniform_grid(880.0, 925.0, 9001);
  const auto a = gaussian_sigma(902.5, 0.45, grid);
  CHECK(spectral_fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  const auto b = gaussian_sigma(902.5 + 0.45, 0.45, grid);
  CHECK(spectral_fidelity(a, b) == doctest::Approx(0.882496902584595).epsilon(1e-9));
  CHECK(spectral_fidelity(a, b) == doctest::Approx(spectral_fidelity(b, a)).epsilon(1e-14));
  std::vector<double> scaled = b.values;
  for (double& v : scaled) v *= 37.0;
  CHECK(spectral_fidelity(a, SpectralIntensity(grid, scaled)) == doctest::Approx(spectral_fidelity(a, b)).epsilon(1e-13));
  const auto zero = SpectralIntensity(grid, std::vector<double>(grid.size(), 0.0));
  CHECK_THROWS_AS(spectral_fidelity(a, zero), DomainError);
}

TEST_CASE("spectral fidelity converges at second order") {
  // Spectra cut off inside the window, so the trapezoid rule shows its h^2 error.
  auto fid = [](std::size_t n) {
    const auto g = uniform_grid(902.0, 903.5, n);
    return spectral_fidelity(gaussian_sigma(902.5, 0.45, g), gaussian_sigma(902.95, 0.45, g));
  };
  const double ref = fid(64001);
  const double e1 = std::abs(fid(41) - ref), e2 = std::abs(fid(81) - ref), e3 = std::abs(fid(161) - ref);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("power scan fit") {
  const PowerScanFit exact = fit_power_scan(power_rows(0.6, 1.0, 0.0, 0));
  CHECK(exact.xi == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(exact.amplitude == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(exact.r_squared_signal == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(exact.noise_slope == doctest::Approx(0.07).epsilon(1e-9));
  CHECK(exact.r_squared_noise == doctest::Approx(1.0).epsilon(1e-9));
  const PowerScanFit noisy = fit_power_scan(power_rows(0.6, 1.0, 2e4, 3));
  CHECK(noisy.r_squared_signal >= 0.99);
  CHECK(noisy.r_squared_noise > 0.98);
  CHECK(noisy.xi == doctest::Approx(0.6).epsilon(0.01));
  CHECK_THROWS_AS(fit_power_scan(std::vector<ScanRow>(3, ScanRow{1, 1, 0, 1})), InsufficientDataError);
}

TEST_CASE("delay scan fit") {
  BsfwmCoupling c;
  const double theta = std::asin(std::sqrt(0.87));
  const DelayScanFit exact = fit_delay_scan(delay_rows(c, theta, 0.8, 0.0, 0), c, theta);
  CHECK(exact.walkoff_ps == doctest::Approx(16.6).epsilon(1e-6));
  CHECK(exact.amplitude == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(exact.center_ps == doctest::Approx(0.0).epsilon(1e-6));
  const DelayScanFit noisy = fit_delay_scan(delay_rows(c, theta, 0.8, 2e4, 5), c, theta);
  CHECK(std::abs(noisy.walkoff_ps - 16.6) < 0.5);
  BsfwmCoupling wide = c;
  wide.walkoff_ps = 33.2;
  const DelayScanFit doubled = fit_delay_scan(delay_rows(wide, theta, 0.8, 0.0, 0), c, theta);
  CHECK(doubled.walkoff_ps == doctest::Approx(33.2).epsilon(1e-6));
  CHECK_THROWS_AS(fit_delay_scan(std::vector<ScanRow>(4, ScanRow{0, 1, 0, 1}), c, theta), InsufficientDataError);
  std::vector<ScanRow> flat;
  for (int i = 0; i < 9; ++i) flat.push_back({double(i), 0.5, 0.0, 0.5});
  CHECK_THROWS_AS(fit_delay_scan(flat, c, theta), FitError);
}
