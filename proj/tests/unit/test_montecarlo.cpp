#include <doctest.h>

#include <cmath>

#include "fibermem/analysis.hpp"
#include "fibermem/error.hpp"
#include "fibermem/montecarlo.hpp"

using namespace fibermem;

namespace {

ExperimentScenario bright(std::uint64_t trials = 2000) {
  ExperimentScenario s = default_scenario();
  s.input_mean_photons = 1000.0;
  s.n_trials = trials;
  s.rng_seed = 11;
  s.workers = 2;
  return s;
}

double tail(const TimeTagHistogram& h, std::size_t from) {
  double t = 0;
  for (std::size_t i = from; i < h.counts.size(); ++i) t += static_cast<double>(h.counts[i]);
  return t;
}

}  // namespace

TEST_CASE("default scenario calibration") {
  const ExperimentScenario s = default_scenario();
  s.validate();
  CHECK(s.read_bin() == 1);
  CHECK(s.stored_wavelength_nm() == doctest::Approx(925.142861437890).epsilon(1e-12));
  CHECK(s.survival() == doctest::Approx(0.939413062813476).epsilon(1e-12));
  CHECK(s.readout_loss_factor == doctest::Approx(0.940206842117408).epsilon(1e-12));
  CHECK(calibrated_xi(0.95, 2.2) == doctest::Approx(0.611492236771257).epsilon(1e-12));
  CHECK(calibrated_xi(0.87, 2.2) == doctest::Approx(0.546333337531033).epsilon(1e-12));
  CHECK_THROWS_AS(calibrated_readout_loss(0.99, 0.95, 0.87, 0.9), InfeasibleError);
}

TEST_CASE("controls off: fast counts in bin 0, slow empty") {
  const auto r = run_scenario(with_controls(bright(), false, false));
  const auto& f = r.histograms.fast.counts;
  CHECK(f[0] > 0);
  CHECK(static_cast<double>(f[0]) / static_cast<double>(r.histograms.fast.total()) > 0.999);
  CHECK(r.histograms.slow.total() == 0);
}

TEST_CASE("write only: geometric slow ring-down and suppressed fast bin 0") {
  const ExperimentScenario s = bright();
  const auto off = run_scenario(with_controls(s, false, false));
  const auto w = run_scenario(with_controls(s, true, false));
  const double eta_w = 1.0 - double(w.histograms.fast.counts[0]) / double(off.histograms.fast.counts[0]);
  CHECK(std::abs(eta_w - 0.95) < 0.01);
  const double ratio = (tail(w.histograms.slow, 1) - tail(w.histograms.slow, 21)) /
                       (tail(w.histograms.slow, 0) - tail(w.histograms.slow, 20));
  CHECK(ratio == doctest::Approx(s.survival()).epsilon(0.005));
  const LifetimeFit fit = fit_ring_down(w.histograms.slow, 0, 40);
  CHECK(fit.lifetime == doctest::Approx(16.0).epsilon(0.03));
}

TEST_CASE("write and read: slow tail suppressed, fast read bin gains") {
  const ExperimentScenario s = bright();
  const auto w = run_scenario(with_controls(s, true, false));
  const auto a = run_scenario(with_controls(s, true, true));
  const std::size_t t = s.read_bin();
  CHECK(1.0 - tail(a.histograms.slow, t) / tail(w.histograms.slow, t) == doctest::Approx(0.87).epsilon(0.01));
  CHECK(a.histograms.fast.counts[t] > 10 * w.histograms.fast.counts[t] + 100);
  // Bin 0 is before the read and unaffected.
  CHECK(double(a.histograms.slow.counts[0]) == doctest::Approx(double(w.histograms.slow.counts[0])).epsilon(0.03));
}

TEST_CASE("photon audit balances") {
  for (bool write : {false, true})
    for (bool read : {false, true}) {
      ExperimentScenario s = with_controls(bright(100), write, read);
      s.audit = true;
      s.noise.dark_rate_per_s = 5e4;
      const auto r = run_scenario(s);
      REQUIRE(r.audit.has_value());
      CHECK(r.audit->balanced());
      CHECK(r.audit->generated > 0);
      CHECK(r.audit->detected + r.audit->noise_detected ==
            r.histograms.fast.total() + r.histograms.slow.total());
    }
}

TEST_CASE("histograms are identical for 1, 2 and 8 workers") {
  ExperimentScenario s = default_scenario();
  s.n_trials = 20000;
  s.rng_seed = 99;
  s.record_tags = true;
  s.workers = 1;
  const auto one = run_scenario(s);
  s.workers = 2;
  const auto two = run_scenario(s);
  s.workers = 8;
  const auto eight = run_scenario(s);
  CHECK(one.histograms == two.histograms);
  CHECK(one.histograms == eight.histograms);
  CHECK(one.tags == eight.tags);
  s.rng_seed = 100;
  CHECK_FALSE(run_scenario(s).histograms == one.histograms);
}

TEST_CASE("time tags agree with histograms") {
  ExperimentScenario s = default_scenario();
  s.n_trials = 5000;
  s.record_tags = true;
  const auto r = run_scenario(s);
  CHECK(r.tags.size() == r.histograms.fast.total() + r.histograms.slow.total());
  for (std::size_t i = 1; i < r.tags.size(); ++i) CHECK(r.tags[i - 1].trial <= r.tags[i].trial);
}

TEST_CASE("scenario validation names the field") {
  ExperimentScenario s = default_scenario();
  s.n_trials = 0;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("trials"), ConfigError);
  s = default_scenario();
  s.read_delay_ns = 1e6;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = default_scenario();
  s.input_mean_photons = -1;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("delay scan") {
  ExperimentScenario s = default_scenario();
  s.n_trials = 50000;
  const auto rows = delay_scan(s, {-60.0, 0.0, 60.0}, ScanStage::read_vs_write);
  REQUIRE(rows.size() == 3);
  CHECK(std::abs(rows[0].corrected_rate) < 0.02);
  CHECK(std::abs(rows[2].corrected_rate) < 0.02);
  CHECK(rows[1].corrected_rate == doctest::Approx(0.73).epsilon(0.05));
  // Off resonance only the read pair's own Raman light remains.
  const double read_floor = raman_noise(s.noise, s.read_pair);
  CHECK(rows[0].noise_rate == doctest::Approx(read_floor).epsilon(0.1));
}

TEST_CASE("power scan at zero energy passes the full input") {
  ExperimentScenario s = default_scenario();
  s.n_trials = 50000;
  const auto rows = power_scan(s, {0.0, 2.2});
  CHECK(rows[0].corrected_rate == doctest::Approx(s.input_mean_photons).epsilon(0.03));
  CHECK(rows[0].noise_rate == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rows[1].corrected_rate == doctest::Approx(0.05).epsilon(0.5));
}
