#include "fibermem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include <Eigen/Core>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "fibermem/constants.hpp"
#include "fibermem/error.hpp"

namespace fibermem {

namespace {

constexpr double kZ95 = 1.96;

// ---------------------------------------------------------------------------
// Levenberg-Marquardt on a residual callback (MINPACK port in Eigen).

using ResidualFn = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals)>;

struct ResidualFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  ResidualFn fn;
  int n_params;
  int n_values;

  int inputs() const { return n_params; }
  int values() const { return n_values; }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    fn(x, f);
    return 0;
  }
};

Eigen::VectorXd least_squares(const ResidualFn& fn, Eigen::VectorXd x0, int n_values, const char* what) {
  ResidualFunctor functor{fn, static_cast<int>(x0.size()), n_values};
  Eigen::NumericalDiff<ResidualFunctor, Eigen::Central> diff(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ResidualFunctor, Eigen::Central>> lm(diff);
  lm.parameters.ftol = 1e-14;
  lm.parameters.xtol = 1e-14;
  lm.parameters.maxfev = 4000;
  const auto status = lm.minimize(x0);
  Eigen::VectorXd r(n_values);
  fn(x0, r);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters ||
      status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation || !x0.allFinite() || !r.allFinite())
    throw FitError(std::string(what) + ": least squares did not converge (status " + std::to_string(status) +
                   ", residual norm " + std::to_string(r.norm()) + ")");
  return x0;
}

// ---------------------------------------------------------------------------

struct LineFit {
  double intercept;
  double slope;
  double slope_var;  // from the weights alone
  double chi2;
  double r_squared;
};

LineFit weighted_line(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  double sw = 0, swx = 0, swy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    swx += w[i] * x[i];
    swy += w[i] * y[i];
  }
  const double xm = swx / sw;
  const double ym = swy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - xm;
    const double dy = y[i] - ym;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * dy;
    syy += w[i] * dy * dy;
  }
  LineFit f{};
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  f.slope_var = 1.0 / sxx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    f.chi2 += w[i] * r * r;
  }
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - f.chi2 / syy, 0.0, 1.0) : 1.0;
  return f;
}

double ratio_sigma(double num, double var_num, double den, double var_den) {
  if (num == 0.0) return std::sqrt(var_num) / std::abs(den);
  const double r = num / den;
  return std::abs(r) * std::sqrt(var_num / (num * num) + var_den / (den * den));
}

double sum_from(const TimeTagHistogram& h, std::size_t start) {
  double s = 0.0;
  for (std::size_t i = start; i < h.counts.size(); ++i) s += static_cast<double>(h.counts[i]);
  return s;
}

double at(const TimeTagHistogram& h, std::size_t bin, const char* name) {
  if (bin >= h.counts.size())
    throw DomainError(std::string("extract_efficiencies: bin ") + std::to_string(bin) + " outside " + name);
  return static_cast<double>(h.counts[bin]);
}

void require_nonzero(double v, const std::string& what) {
  if (!(v > 0.0)) throw DivisionError("extract_efficiencies: reference " + what + " has no counts");
}

double unit(double v) { return std::clamp(v, 0.0, 1.0); }

// Counts with variance, possibly background-subtracted.
struct Counts {
  double value;
  double var;
};

Counts corrected(double sig, double bg) { return {sig - bg, sig + bg}; }

struct Core {
  Counts fast_off0, fast_write0, fast_all_t, slow_write_tail, slow_all_tail;
};

EfficiencyReport from_core(const Core& c) {
  EfficiencyReport r;
  require_nonzero(c.fast_off0.value, "fast-axis bin 0 (controls off)");
  require_nonzero(c.slow_write_tail.value, "slow-axis tail (write only)");
  r.eta_w = {unit(1.0 - c.fast_write0.value / c.fast_off0.value),
             ratio_sigma(c.fast_write0.value, c.fast_write0.var, c.fast_off0.value, c.fast_off0.var)};
  r.eta_r = {unit(1.0 - c.slow_all_tail.value / c.slow_write_tail.value),
             ratio_sigma(c.slow_all_tail.value, c.slow_all_tail.var, c.slow_write_tail.value, c.slow_write_tail.var)};
  r.eta_tot = {unit(c.fast_all_t.value / c.fast_off0.value),
               ratio_sigma(c.fast_all_t.value, c.fast_all_t.var, c.fast_off0.value, c.fast_off0.var)};
  r.snr = {kInfinity, 0.0};
  return r;
}

void check_trials(std::initializer_list<const HistogramSet*> sets) {
  const std::uint64_t n = (*sets.begin())->fast.n_trials;
  for (const auto* s : sets)
    if (s->fast.n_trials != n || s->slow.n_trials != n)
      throw DomainError("extract_efficiencies: histograms have inconsistent trial counts");
}

}  // namespace

LifetimeFit fit_ring_down(std::span<const double> counts, std::size_t begin, std::size_t end) {
  if (end > counts.size() || begin > end)
    throw RangeError("fit_ring_down: bin range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") outside histogram of " + std::to_string(counts.size()));
  std::vector<double> x, y, w;
  for (std::size_t t = begin; t < end; ++t) {
    if (!(counts[t] >= 0.0)) throw DomainError("fit_ring_down: counts must be >= 0");
    if (counts[t] > 0.0) {
      x.push_back(static_cast<double>(t));
      y.push_back(std::log(counts[t]));
      w.push_back(counts[t]);
    }
  }
  if (x.size() < 3)
    throw InsufficientDataError("fit_ring_down: need at least 3 non-empty bins, have " + std::to_string(x.size()));
  const LineFit line = weighted_line(x, y, w);
  if (!(line.slope < 0.0))
    throw NonDecayingError("fit_ring_down: counts do not decay (slope " + std::to_string(line.slope) + ")");
  const double dof = static_cast<double>(x.size() - 2);
  const double inflation = std::max(1.0, line.chi2 / dof);
  const double slope_sigma = std::sqrt(line.slope_var * inflation);
  LifetimeFit fit{};
  fit.slope = line.slope;
  fit.slope_stderr = slope_sigma;
  fit.lifetime = -1.0 / line.slope;
  const double tau_sigma = slope_sigma / (line.slope * line.slope);
  fit.ci95_low = fit.lifetime - kZ95 * tau_sigma;
  fit.ci95_high = fit.lifetime + kZ95 * tau_sigma;
  fit.r_squared = line.r_squared;
  fit.bins_used = x.size();
  return fit;
}

LifetimeFit fit_ring_down(const TimeTagHistogram& hist, std::size_t begin, std::size_t end) {
  std::vector<double> c(hist.counts.begin(), hist.counts.end());
  return fit_ring_down(c, begin, end);
}

EfficiencyReport extract_efficiencies(const HistogramSet& off, const HistogramSet& write, const HistogramSet& all,
                                      std::size_t t_read) {
  check_trials({&off, &write, &all});
  auto raw = [](double v) { return Counts{v, v}; };
  const Core c{raw(at(off.fast, 0, "fast_off")), raw(at(write.fast, 0, "fast_write")),
               raw(at(all.fast, t_read, "fast_all")), raw(sum_from(write.slow, t_read)),
               raw(sum_from(all.slow, t_read))};
  EfficiencyReport r = from_core(c);
  r.mu1 = {0.0, 0.0};
  r.n_noise = {0.0, 0.0};
  return r;
}

EfficiencyReport extract_efficiencies(const MemoryMeasurement& m, std::size_t t_read, double detection_efficiency) {
  check_trials({&m.off, &m.write, &m.all, &m.background_off, &m.background_write, &m.background_all});
  if (!(detection_efficiency > 0.0)) throw DomainError("extract_efficiencies: detection efficiency must be > 0");
  const Core c{
      corrected(at(m.off.fast, 0, "fast_off"), at(m.background_off.fast, 0, "background_off")),
      corrected(at(m.write.fast, 0, "fast_write"), at(m.background_write.fast, 0, "background_write")),
      corrected(at(m.all.fast, t_read, "fast_all"), at(m.background_all.fast, t_read, "background_all")),
      corrected(sum_from(m.write.slow, t_read), sum_from(m.background_write.slow, t_read)),
      corrected(sum_from(m.all.slow, t_read), sum_from(m.background_all.slow, t_read))};
  EfficiencyReport r = from_core(c);

  const double trials = static_cast<double>(m.all.fast.n_trials);
  const double noise_counts = at(m.background_all.fast, t_read, "background_all");
  r.n_noise = {noise_counts / (trials * detection_efficiency), std::sqrt(noise_counts) / (trials * detection_efficiency)};
  if (noise_counts > 0.0) {
    const double s = c.fast_all_t.value / noise_counts;
    r.snr = {s, ratio_sigma(c.fast_all_t.value, c.fast_all_t.var, noise_counts, noise_counts)};
  }
  // mu1 = N_noise / eta_tot, both measured against the same detection chain.
  if (r.eta_tot.value > 0.0) {
    const double mu = r.n_noise.value / r.eta_tot.value;
    const double rel = std::hypot(r.n_noise.value > 0 ? r.n_noise.sigma / r.n_noise.value : 0.0,
                                  r.eta_tot.sigma / r.eta_tot.value);
    r.mu1 = {mu, mu * rel};
  } else {
    r.mu1 = {kInfinity, 0.0};
  }
  return r;
}

double spectral_fidelity(const SpectralIntensity& in, const SpectralIntensity& out) {
  std::vector<double> out_values;
  if (out.grid_nm == in.grid_nm) {
    out_values = out.values;
  } else {
    out_values.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out_values[i] = sample_spectrum(out, in.grid_nm[i]);
  }
  const double norm_in = integrate(in.grid_nm, in.values);
  const double norm_out = integrate(in.grid_nm, out_values);
  if (!(norm_in > 0.0) || !(norm_out > 0.0)) throw DomainError("spectral_fidelity: spectrum has zero integral");
  std::vector<double> overlap(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) overlap[i] = std::sqrt(in.values[i] * out_values[i]);
  return integrate(in.grid_nm, overlap) / std::sqrt(norm_in * norm_out);
}

PowerScanFit fit_power_scan(const std::vector<ScanRow>& rows) {
  if (rows.size() < 5)
    throw InsufficientDataError("fit_power_scan: need at least 5 energy points, have " + std::to_string(rows.size()));
  const auto n = static_cast<int>(rows.size());
  double x_max = 0.0;
  for (const auto& r : rows) x_max = std::max(x_max, r.x);
  if (!(x_max > 0.0)) throw FitError("fit_power_scan: all energies are zero");

  // Coarse scan over xi with the amplitude solved in closed form, then a
  // joint refinement. The scan bound keeps the angle within one period.
  auto amplitude_for = [&](double xi) {
    double num = 0, den = 0;
    for (const auto& r : rows) {
      const double c = std::pow(std::cos(xi * r.x), 2);
      num += c * r.corrected_rate;
      den += c * c;
    }
    return den > 0 ? num / den : 0.0;
  };
  auto sse_for = [&](double xi, double amp) {
    double s = 0;
    for (const auto& r : rows) {
      const double d = r.corrected_rate - amp * std::pow(std::cos(xi * r.x), 2);
      s += d * d;
    }
    return s;
  };
  double best_xi = 0.0, best_sse = kInfinity;
  constexpr int kGrid = 4000;
  for (int i = 1; i <= kGrid; ++i) {
    const double xi = std::numbers::pi / x_max * i / kGrid;
    const double sse = sse_for(xi, amplitude_for(xi));
    if (sse < best_sse) {
      best_sse = sse;
      best_xi = xi;
    }
  }
  Eigen::VectorXd p(2);
  p << best_xi, amplitude_for(best_xi);
  p = least_squares(
      [&](const Eigen::VectorXd& q, Eigen::VectorXd& f) {
        for (int i = 0; i < n; ++i) {
          const auto& r = rows[static_cast<std::size_t>(i)];
          f[i] = r.corrected_rate - q[1] * std::pow(std::cos(q[0] * r.x), 2);
        }
      },
      p, n, "fit_power_scan");

  PowerScanFit fit{};
  fit.xi = std::abs(p[0]);
  fit.amplitude = p[1];
  double mean = 0;
  for (const auto& r : rows) mean += r.corrected_rate;
  mean /= n;
  double ss_tot = 0;
  for (const auto& r : rows) ss_tot += (r.corrected_rate - mean) * (r.corrected_rate - mean);
  const double ss_res = sse_for(fit.xi, fit.amplitude);
  fit.r_squared_signal = ss_tot > 0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;

  // Poisson weights: variance proportional to the rate. Empty points get the
  // weight of the smallest observed rate.
  double floor = kInfinity;
  for (const auto& r : rows)
    if (r.noise_rate > 0) floor = std::min(floor, r.noise_rate);
  if (!std::isfinite(floor)) floor = 1.0;
  std::vector<double> x, y, w;
  for (const auto& r : rows) {
    x.push_back(r.x);
    y.push_back(r.noise_rate);
    w.push_back(1.0 / std::max(r.noise_rate, floor));
  }
  const LineFit line = weighted_line(x, y, w);
  fit.noise_slope = line.slope;
  fit.noise_intercept = line.intercept;
  fit.r_squared_noise = line.r_squared;
  return fit;
}

DelayScanFit fit_delay_scan(const std::vector<ScanRow>& rows, const BsfwmCoupling& coupling, double peak_angle) {
  if (rows.size() < 7)
    throw InsufficientDataError("fit_delay_scan: need at least 7 delay points, have " + std::to_string(rows.size()));
  if (!(peak_angle > 0.0)) throw FitError("fit_delay_scan: peak conversion angle must be > 0");
  std::vector<ScanRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(), [](const ScanRow& a, const ScanRow& b) { return a.x < b.x; });
  const auto [lo, hi] = std::minmax_element(sorted.begin(), sorted.end(), [](const ScanRow& a, const ScanRow& b) {
    return a.corrected_rate < b.corrected_rate;
  });
  if (!(hi->corrected_rate > lo->corrected_rate))
    throw FitError("fit_delay_scan: profile not resolved (all points equal)");

  // Starting point from the half-maximum crossings of the data.
  const double half = 0.5 * (hi->corrected_rate + lo->corrected_rate);
  const std::ptrdiff_t peak = hi - sorted.begin();
  const auto size = static_cast<std::ptrdiff_t>(sorted.size());
  auto crossing = [&](std::ptrdiff_t from, std::ptrdiff_t step) {
    for (std::ptrdiff_t i = from; i + step >= 0 && i + step < size; i += step) {
      const auto& a = sorted[static_cast<std::size_t>(i)];
      const auto& b = sorted[static_cast<std::size_t>(i + step)];
      if (b.corrected_rate < half) {
        const double f = (a.corrected_rate - half) / (a.corrected_rate - b.corrected_rate);
        return a.x + f * (b.x - a.x);
      }
    }
    return step > 0 ? sorted.back().x : sorted.front().x;
  };
  const double left = crossing(peak, -1);
  const double right = crossing(peak, 1);
  const double width0 = std::max(right - left, 1e-3);

  BsfwmCoupling model = coupling;
  const double gain0 = std::pow(std::sin(peak_angle), 2);
  Eigen::VectorXd p(3);
  p << width0, hi->corrected_rate / (gain0 > 0 ? gain0 : 1.0), 0.5 * (left + right);
  const auto n = static_cast<int>(sorted.size());
  auto predict = [&](const Eigen::VectorXd& q, double delay) {
    model.walkoff_ps = std::max(std::abs(q[0]), 1e-9);
    model.optimal_delay_ps = q[2];
    return q[1] * translation_efficiency(peak_angle * delay_profile(model, delay));
  };
  p = least_squares(
      [&](const Eigen::VectorXd& q, Eigen::VectorXd& f) {
        for (int i = 0; i < n; ++i) {
          const auto& r = sorted[static_cast<std::size_t>(i)];
          f[i] = r.corrected_rate - predict(q, r.x);
        }
      },
      p, n, "fit_delay_scan");

  DelayScanFit fit;
  fit.walkoff_ps = std::abs(p[0]);
  fit.amplitude = p[1];
  fit.center_ps = p[2];
  for (const auto& r : rows) fit.residuals.push_back(r.corrected_rate - predict(p, r.x));
  return fit;
}

}  // namespace fibermem
