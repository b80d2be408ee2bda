#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fibermem/bsfwm.hpp"
#include "fibermem/constants.hpp"
#include "fibermem/error.hpp"
#include "fibermem/rng.hpp"

using namespace fibermem;

namespace {

// Gaussian (combined width) convolved with the walk-off boxcar by Simpson
// quadrature; normalized at the center.
double kappa_by_quadrature(const BsfwmCoupling& c, double x) {
  const double ss = c.signal_duration_ps / kFwhmPerSigma, sc = c.control_duration_ps / kFwhmPerSigma;
  const double var = ss * ss + sc * sc;
  auto conv = [&](double at) {
    const int n = 20000;
    const double a = -0.5 * c.walkoff_ps, h = c.walkoff_ps / n;
    double sum = 0;
    for (int i = 0; i <= n; ++i) {
      const double y = a + i * h, u = at - y;
      const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
      sum += w * std::exp(-u * u / (2 * var));
    }
    return sum * h / 3;
  };
  return conv(x) / conv(0.0);
}

ControlPair pair(double wq, double wp, ControlRole role = ControlRole::write) {
  ControlPair p;
  p.q_energy_nj = wq;
  p.p_energy_nj = wp;
  p.role = role;
  return p;
}

}  // namespace

TEST_CASE("conversion angle") {
  BsfwmCoupling c;
  c.xi_rad_per_nj = 1.0;
  CHECK(conversion_angle(c, pair(0, 0)) == 0.0);
  c.xi_rad_per_nj = 0.5;
  CHECK(conversion_angle(c, pair(4, 9)) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(conversion_angle(c, pair(8, 18)) == doctest::Approx(2 * conversion_angle(c, pair(4, 9))));
}

TEST_CASE("translation efficiency") {
  CHECK(translation_efficiency(std::numbers::pi / 2) == doctest::Approx(1.0));
  CHECK(translation_efficiency(0.0) == 0.0);
  CHECK(translation_efficiency(1.345282920896765) == doctest::Approx(0.95).epsilon(1e-14));
  CHECK(std::asin(std::sqrt(0.95)) == doctest::Approx(1.3453).epsilon(1e-4));
}

TEST_CASE("delay profile") {
  BsfwmCoupling c;
  CHECK(delay_profile(c, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(delay_profile(c, 100.0) < 1e-100);
  CHECK(delay_profile(c, -100.0) < 1e-100);
  // Numerical convolution oracle (scipy quad): frozen values.
  CHECK(delay_profile(c, 5.0) == doctest::Approx(0.9988481509792718).epsilon(1e-12));
  CHECK(delay_profile(c, 8.3) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(delay_profile(c, 10.0) == doctest::Approx(0.05818639947524005).epsilon(1e-10));
  CHECK(delay_profile(c, 12.0) == doctest::Approx(0.0003160480317511332).epsilon(1e-8));
  CHECK(delay_profile(c, 20.0) == doctest::Approx(1.6025591055388533e-27).epsilon(1e-6));
  for (double x = -25.0; x <= 25.0; x += 0.7)
    CHECK(delay_profile(c, x) == doctest::Approx(kappa_by_quadrature(c, x)).epsilon(1e-9));
  c.optimal_delay_ps = 3.0;
  CHECK(delay_profile(c, 3.0) == doctest::Approx(1.0));
  CHECK(delay_profile(c, 3.0 + 4.0) == doctest::Approx(delay_profile(c, 3.0 - 4.0)));
}

TEST_CASE("delay profile width") {
  BsfwmCoupling c;
  // At W >> sigma the half-maximum sits at +/-W/2, so the FWHM equals the walk-off.
  CHECK(delay_profile(c, 0.5 * c.walkoff_ps) == doctest::Approx(0.5).epsilon(1e-12));
  BsfwmCoupling wide = c;
  wide.walkoff_ps *= 2;
  CHECK(delay_profile(wide, 0.5 * wide.walkoff_ps) == doctest::Approx(0.5).epsilon(1e-12));
  BsfwmCoupling delta = c;
  delta.signal_duration_ps = delta.control_duration_ps = 0.0;
  CHECK(delay_profile(delta, 8.29) == 1.0);
  CHECK(delay_profile(delta, 8.3) == 0.5);
  CHECK(delay_profile(delta, 8.31) == 0.0);
}

TEST_CASE("resonant write converts fast 902.5 to slow 925.1") {
  BsfwmCoupling c;
  c.xi_rad_per_nj = (std::numbers::pi / 2) / 2.2;
  const PhotonState out = apply_bsfwm({902.5, PolarizationAxis::fast}, pair(2.2, 2.2), c, 0.999999);
  CHECK(out.axis == PolarizationAxis::slow);
  CHECK(out.wavelength_nm == doctest::Approx(925.142861437890).epsilon(1e-12));
  const PhotonState back = apply_bsfwm(out, pair(2.2, 2.2, ControlRole::read), c, 0.5);
  CHECK(back.axis == PolarizationAxis::fast);
  CHECK(back.wavelength_nm == doctest::Approx(902.5).epsilon(1e-12));
}

TEST_CASE("off-resonant and switched-off photons pass through") {
  BsfwmCoupling c;
  c.xi_rad_per_nj = 1.0;
  const PhotonState in{902.5, PolarizationAxis::fast};
  const PhotonState off = apply_bsfwm(in, pair(0, 2.2), c, 0.0);
  CHECK(off.axis == in.axis);
  CHECK(off.wavelength_nm == in.wavelength_nm);
  const PhotonState wrong_axis = apply_bsfwm({902.5, PolarizationAxis::slow}, pair(2.2, 2.2), c, 0.0);
  CHECK(wrong_axis.axis == PolarizationAxis::slow);
  const PhotonState wrong_color = apply_bsfwm({910.0, PolarizationAxis::fast}, pair(2.2, 2.2), c, 0.0);
  CHECK(wrong_color.wavelength_nm == 910.0);
  // A read pair does not act on the input signal.
  const PhotonState read_only = apply_bsfwm(in, pair(2.2, 2.2, ControlRole::read), c, 0.0);
  CHECK(read_only.axis == PolarizationAxis::fast);
}

TEST_CASE("converted fraction matches sin^2 over 1e6 draws") {
  BsfwmCoupling c;
  c.xi_rad_per_nj = std::asin(std::sqrt(0.87)) / 2.2;
  const ControlPair rp = pair(2.2, 2.2, ControlRole::read);
  const PhotonState stored = resonant_input(c, rp);
  StreamRng rng(2024, 0);
  const int n = 1'000'000;
  int converted = 0;
  for (int i = 0; i < n; ++i)
    if (apply_bsfwm(stored, rp, c, rng.uniform()).axis == PolarizationAxis::fast) ++converted;
  CHECK(std::abs(converted / double(n) - 0.87) < 0.002);
}

TEST_CASE("retrieved spectrum at matched controls reproduces the input") {
  const auto in = gaussian_spectrum(Wavelength(902.5), 1.05, uniform_grid(896.0, 909.0, 1301));
  const auto out = retrieved_spectrum(in, pair(2.2, 2.2), pair(2.2, 2.2, ControlRole::read));
  REQUIRE(out.size() == in.size());
  for (std::size_t i = 0; i < in.size(); ++i) CHECK(out.values[i] == doctest::Approx(in.values[i]).epsilon(1e-6));
  const auto shifted = retrieved_spectrum(in, pair(2.2, 2.2), pair(2.2, 2.2, ControlRole::read),
                                          [](double) { return 0.5; });
  CHECK(sample_spectrum(shifted, 903.0) == doctest::Approx(sample_spectrum(in, 902.5)).epsilon(1e-4));
}

TEST_CASE("coupling and pair validation") {
  BsfwmCoupling c;
  c.walkoff_ps = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  ControlPair p;
  p.q_energy_nj = -1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
}
