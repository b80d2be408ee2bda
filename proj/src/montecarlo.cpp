#include "fibermem/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "fibermem/error.hpp"
#include "fibermem/rng.hpp"

namespace fibermem {

namespace {

// Stream indices for scan points; each point and its background run get
// their own seed.
constexpr std::uint64_t kBackgroundStream = 0x8000'0000ULL;

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

template <typename F>
void rethrow_as_config(const std::string& field, F&& f) {
  try {
    f();
  } catch (const DomainError& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

}  // namespace

void ExperimentScenario::validate() const {
  rethrow_as_config("cavity", [&] { cavity.validate(); });
  rethrow_as_config("write", [&] { coupling_write.validate(); write_pair.validate(); });
  rethrow_as_config("read", [&] { coupling_read.validate(); read_pair.validate(); });
  rethrow_as_config("noise", [&] { noise.validate(); });
  rethrow_as_config("detection", [&] { chain.validate(); });
  check(write_pair.role == ControlRole::write, "write", "pair must have the write role");
  check(read_pair.role == ControlRole::read, "read", "pair must have the read role");
  check(input_mean_photons >= 0.0 && std::isfinite(input_mean_photons), "signal.input_mean_photons", "must be >= 0");
  check(read_delay_ns >= 0.0 && std::isfinite(read_delay_ns), "read.read_delay_ns", "must be >= 0");
  check(n_trials >= 1, "run.trials", "must be >= 1");
  check(n_bins >= 1, "run.bins", "must be >= 1");
  check(readout_loss_factor >= 0.0 && readout_loss_factor <= 1.0, "read.readout_loss_factor", "must be in [0,1]");
  check(fast_window.bandwidth_nm >= 0.0 && slow_window.bandwidth_nm >= 0.0, "filters.bandwidth_nm", "must be >= 0");
  rethrow_as_config("cavity.reflectivity", [&] { (void)stored_reflectivity(); });
  check(read_bin() < n_bins, "read.read_delay_ns",
        "read bin " + std::to_string(read_bin()) + " is beyond the last histogram bin " + std::to_string(n_bins - 1));
}

double ExperimentScenario::round_trip_ns() const { return round_trip_time_ns(cavity); }

std::size_t ExperimentScenario::read_bin() const {
  return static_cast<std::size_t>(std::llround(read_delay_ns / round_trip_ns()));
}

double ExperimentScenario::stored_wavelength_nm() const {
  return translate_frequency(Wavelength(signal_wavelength_nm()), Wavelength(write_pair.q_wavelength_nm),
                             Wavelength(write_pair.p_wavelength_nm), ShiftDirection::downshift)
      .nm();
}

double ExperimentScenario::stored_reflectivity() const {
  return cavity.reflectivity(Wavelength(stored_wavelength_nm()));
}

double ExperimentScenario::survival() const { return survival_per_round_trip(cavity, stored_reflectivity()); }

double calibrated_xi(double target_efficiency, double energy_nj) {
  if (!(target_efficiency >= 0.0 && target_efficiency <= 1.0) || !(energy_nj > 0.0))
    throw DomainError("calibrated_xi: efficiency must be in [0,1] and energy > 0");
  return std::asin(std::sqrt(target_efficiency)) / energy_nj;
}

double calibrated_readout_loss(double eta_total, double eta_write, double eta_read, double survival) {
  const double naive = eta_write * eta_read * survival;
  if (!(naive > 0.0)) throw DomainError("calibrated_readout_loss: zero naive efficiency");
  const double f = eta_total / naive;
  if (f > 1.0) throw InfeasibleError("total efficiency exceeds write * survival * read");
  return f;
}

ExperimentScenario default_scenario() {
  constexpr double kEnergy = 2.2;
  constexpr double kEtaWrite = 0.95;
  constexpr double kEtaRead = 0.87;
  constexpr double kEtaTotal = 0.73;
  constexpr double kLifetime = 16.0;
  constexpr double kNoise = 0.30;

  ExperimentScenario s;
  s.cavity.reflectivity_override = reflectivity_from_lifetime(kLifetime, s.cavity);
  s.coupling_write.xi_rad_per_nj = calibrated_xi(kEtaWrite, kEnergy);
  s.coupling_read.xi_rad_per_nj = calibrated_xi(kEtaRead, kEnergy);
  for (ControlPair* pair : {&s.write_pair, &s.read_pair}) {
    pair->q_energy_nj = kEnergy;
    pair->p_energy_nj = kEnergy;
  }
  const double p = s.survival();
  s.readout_loss_factor = calibrated_readout_loss(kEtaTotal, kEtaWrite, kEtaRead, p);
  s.noise = NoiseModel::calibrated(kNoise, 2 * kEnergy, 2 * kEnergy, kEtaRead * p);
  s.noise.gate_ns = s.round_trip_ns();
  return s;
}

std::uint64_t TimeTagHistogram::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

PhotonAudit& PhotonAudit::operator+=(const PhotonAudit& o) {
  generated += o.generated;
  detected += o.detected;
  lost += o.lost;
  remaining += o.remaining;
  noise_detected += o.noise_detected;
  return *this;
}

namespace {

// Quantities fixed for the whole run.
struct Plan {
  std::size_t n_bins;
  std::size_t read_bin;
  double rt_ns;
  double pass_survival;
  double reflectivity;
  double reflect_to_next;  // R * fiber round trip: back at the exit facet one bin later
  double facet_transmission;
  double post_facet;
  double readout_loss;
  double signal_nm;
  bool write_on;
  bool read_on;
  double write_noise_mean;
  double read_noise_mean;
  double dark_mean;
  SpectralWindow fast_window;
  SpectralWindow slow_window;
};

Plan make_plan(const ExperimentScenario& s) {
  Plan p{};
  p.n_bins = s.n_bins;
  p.read_bin = s.read_bin();
  p.rt_ns = s.round_trip_ns();
  p.pass_survival = fiber_pass_survival(s.cavity);
  p.reflectivity = s.stored_reflectivity();
  p.reflect_to_next = p.reflectivity * fiber_round_trip_survival(s.cavity);
  p.facet_transmission = s.chain.facet_transmission;
  p.post_facet = s.chain.post_facet();
  p.readout_loss = s.readout_loss_factor;
  p.signal_nm = s.signal_wavelength_nm();
  p.write_on = !s.write_pair.is_off();
  p.read_on = !s.read_pair.is_off();
  p.write_noise_mean = p.write_on ? raman_noise(s.noise, s.write_pair) : 0.0;
  if (p.read_on) {
    const double kappa = delay_profile(s.coupling_read, s.read_pair.delay_ps);
    const ControlPair off_pair{.q_energy_nj = 0.0, .p_energy_nj = 0.0};
    p.read_noise_mean = noise_mean(s.noise, p.write_on ? s.write_pair : off_pair, s.read_pair, kappa) -
                        s.noise.dark_counts_per_gate();
  }
  p.dark_mean = s.noise.dark_counts_per_gate();
  p.fast_window = s.fast_window;
  p.slow_window = s.slow_window;
  return p;
}

struct WorkerOutput {
  std::vector<std::uint64_t> fast;
  std::vector<std::uint64_t> slow;
  PhotonAudit audit;
  std::vector<TimeTag> tags;
};

class TrialRunner {
 public:
  TrialRunner(const ExperimentScenario& s, const Plan& plan, WorkerOutput& out)
      : s_(s), plan_(plan), out_(out) {}

  void run(std::uint64_t trial) {
    StreamRng rng(s_.rng_seed, trial);
    trial_ = trial;
    const std::uint64_t n_signal = poisson(rng, s_.input_mean_photons);
    out_.audit.generated += n_signal;
    for (std::uint64_t i = 0; i < n_signal; ++i) propagate_photon(rng);
    emit_noise(rng);
  }

 private:
  static std::uint64_t poisson(StreamRng& rng, double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(rng);
  }

  void record(PolarizationAxis axis, std::size_t bin) {
    (axis == PolarizationAxis::fast ? out_.fast : out_.slow)[bin] += 1;
    if (s_.record_tags) out_.tags.push_back({trial_, static_cast<double>(bin) * plan_.rt_ns, axis});
  }

  // A photon that has left through the exit facet: filter then detector.
  bool detect(StreamRng& rng, const PhotonState& ph, std::size_t bin) {
    const SpectralWindow& w = ph.axis == PolarizationAxis::fast ? plan_.fast_window : plan_.slow_window;
    if (!w.passes(ph.wavelength_nm) || !rng.bernoulli(plan_.post_facet)) return false;
    record(ph.axis, bin);
    return true;
  }

  void propagate_photon(StreamRng& rng) {
    PhotonState ph{plan_.signal_nm, PolarizationAxis::fast};
    ph = apply_bsfwm(ph, s_.write_pair, s_.coupling_write, rng.uniform());
    if (!rng.bernoulli(plan_.pass_survival)) {
      ++out_.audit.lost;
      return;
    }
    for (std::size_t bin = 0;;) {
      // At the exit facet. Fast-axis light sees the signal-band coating and
      // leaves; slow-axis light is stored and only leaks.
      if (ph.axis == PolarizationAxis::fast) {
        const bool hit = rng.bernoulli(plan_.facet_transmission) && detect(rng, ph, bin);
        ++(hit ? out_.audit.detected : out_.audit.lost);
        return;
      }
      if (!rng.bernoulli(plan_.reflectivity)) {
        ++(detect(rng, ph, bin) ? out_.audit.detected : out_.audit.lost);
        return;
      }
      if (!rng.bernoulli(plan_.reflect_to_next)) {
        ++out_.audit.lost;
        return;
      }
      if (++bin >= plan_.n_bins) {
        ++out_.audit.remaining;
        return;
      }
      if (bin == plan_.read_bin && plan_.read_on) {
        const PhotonState before = ph;
        ph = apply_bsfwm(ph, s_.read_pair, s_.coupling_read, rng.uniform());
        if (ph.axis != before.axis && !rng.bernoulli(plan_.readout_loss)) {
          ++out_.audit.lost;
          return;
        }
      }
    }
  }

  void emit_noise_photons(StreamRng& rng, double mean, std::size_t bin) {
    const std::uint64_t n = poisson(rng, mean);
    const double eff = plan_.facet_transmission * plan_.post_facet;
    const PhotonState ph{plan_.signal_nm, PolarizationAxis::fast};
    for (std::uint64_t i = 0; i < n; ++i) {
      if (!rng.bernoulli(eff) || !plan_.fast_window.passes(ph.wavelength_nm)) continue;
      record(ph.axis, bin);
      ++out_.audit.noise_detected;
    }
  }

  void emit_noise(StreamRng& rng) {
    emit_noise_photons(rng, plan_.write_noise_mean, 0);
    if (plan_.read_on) emit_noise_photons(rng, plan_.read_noise_mean, plan_.read_bin);
    if (plan_.dark_mean > 0.0) {
      for (std::size_t bin = 0; bin < plan_.n_bins; ++bin) {
        for (auto axis : {PolarizationAxis::fast, PolarizationAxis::slow}) {
          const std::uint64_t n = poisson(rng, plan_.dark_mean);
          for (std::uint64_t i = 0; i < n; ++i) record(axis, bin);
          out_.audit.noise_detected += n;
        }
      }
    }
  }

  const ExperimentScenario& s_;
  const Plan& plan_;
  WorkerOutput& out_;
  std::uint64_t trial_ = 0;
};

unsigned resolve_workers(unsigned requested, std::uint64_t n_trials) {
  unsigned w = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::uint64_t>(w, n_trials));
}

}  // namespace

ScenarioResult run_scenario(const ExperimentScenario& scenario) {
  scenario.validate();
  const Plan plan = make_plan(scenario);
  const unsigned workers = resolve_workers(scenario.workers, scenario.n_trials);

  // Contiguous trial blocks, merged in block order.
  std::vector<WorkerOutput> outputs(workers);
  auto work = [&](unsigned w) {
    WorkerOutput& out = outputs[w];
    out.fast.assign(plan.n_bins, 0);
    out.slow.assign(plan.n_bins, 0);
    const std::uint64_t begin = scenario.n_trials * w / workers;
    const std::uint64_t end = scenario.n_trials * (w + 1) / workers;
    TrialRunner runner(scenario, plan, out);
    for (std::uint64_t t = begin; t < end; ++t) runner.run(t);
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
  }

  ScenarioResult result;
  auto& h = result.histograms;
  h.fast = {PolarizationAxis::fast, std::vector<std::uint64_t>(plan.n_bins, 0), scenario.n_trials};
  h.slow = {PolarizationAxis::slow, std::vector<std::uint64_t>(plan.n_bins, 0), scenario.n_trials};
  PhotonAudit audit;
  for (auto& out : outputs) {
    for (std::size_t b = 0; b < plan.n_bins; ++b) {
      h.fast.counts[b] += out.fast[b];
      h.slow.counts[b] += out.slow[b];
    }
    audit += out.audit;
    if (scenario.record_tags)
      result.tags.insert(result.tags.end(), out.tags.begin(), out.tags.end());
  }
  if (scenario.audit) result.audit = audit;
  return result;
}

ExperimentScenario with_controls(const ExperimentScenario& s, bool write_on, bool read_on) {
  ExperimentScenario out = s;
  if (!write_on) out.write_pair.q_energy_nj = out.write_pair.p_energy_nj = 0.0;
  if (!read_on) out.read_pair.q_energy_nj = out.read_pair.p_energy_nj = 0.0;
  return out;
}

namespace {

ScanRow scan_point(const ExperimentScenario& s, double x, std::size_t bin, std::uint64_t point) {
  const double per_trial = static_cast<double>(s.n_trials) * detection_efficiency(s.chain);
  ExperimentScenario sig = s;
  sig.rng_seed = derive_seed(s.rng_seed, point);
  ExperimentScenario bg = s;
  bg.input_mean_photons = 0.0;
  bg.rng_seed = derive_seed(s.rng_seed, point | kBackgroundStream);
  const double signal = static_cast<double>(run_scenario(sig).histograms.fast.counts.at(bin)) / per_trial;
  const double noise = static_cast<double>(run_scenario(bg).histograms.fast.counts.at(bin)) / per_trial;
  return {x, signal, noise, signal - noise};
}

}  // namespace

std::vector<ScanRow> delay_scan(const ExperimentScenario& scenario, const std::vector<double>& delays_ps,
                                ScanStage stage) {
  scenario.validate();
  std::vector<ScanRow> rows;
  rows.reserve(delays_ps.size());
  for (std::size_t i = 0; i < delays_ps.size(); ++i) {
    if (!std::isfinite(delays_ps[i])) throw ConfigError("delay_scan: delays must be finite");
    ExperimentScenario s = scenario;
    (stage == ScanStage::signal_vs_write ? s.write_pair : s.read_pair).delay_ps = delays_ps[i];
    rows.push_back(scan_point(s, delays_ps[i], s.read_bin(), i));
  }
  return rows;
}

std::vector<ScanRow> power_scan(const ExperimentScenario& scenario, const std::vector<double>& energies_nj) {
  scenario.validate();
  std::vector<ScanRow> rows;
  rows.reserve(energies_nj.size());
  for (std::size_t i = 0; i < energies_nj.size(); ++i) {
    const double e = energies_nj[i];
    if (!(e >= 0.0) || !std::isfinite(e)) throw ConfigError("power_scan: energies must be >= 0");
    ExperimentScenario s = with_controls(scenario, true, false);
    s.write_pair.q_energy_nj = e;
    s.write_pair.p_energy_nj = e;
    rows.push_back(scan_point(s, std::sqrt(e * e), 0, i));
  }
  return rows;
}

MemoryMeasurement measure_memory(const ExperimentScenario& scenario) {
  scenario.validate();
  auto run = [&](bool w, bool r, bool background, std::uint64_t stream) {
    ExperimentScenario s = with_controls(scenario, w, r);
    if (background) s.input_mean_photons = 0.0;
    s.rng_seed = derive_seed(scenario.rng_seed, stream);
    return run_scenario(s).histograms;
  };
  MemoryMeasurement m;
  m.off = run(false, false, false, 0);
  m.write = run(true, false, false, 1);
  m.all = run(true, true, false, 2);
  m.background_off = run(false, false, true, 3);
  m.background_write = run(true, false, true, 4);
  m.background_all = run(true, true, true, 5);
  return m;
}

}  // namespace fibermem
