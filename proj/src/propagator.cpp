#include "latdiff/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "latdiff/errors.hpp"
#include "hsr_kernel.hpp"

namespace latdiff {

namespace {

constexpr double kTraceTol = 1e-8;

int snapshot_step(double t, double dt) {
  const double k = std::round(t / dt);
  if (std::abs(k * dt - t) > 1e-9 * std::max(1.0, std::abs(t))) {
    std::ostringstream msg;
    msg << "snapshot time " << t << " is not a multiple of dt = " << dt;
    throw ConfigError(msg.str());
  }
  return static_cast<int>(k);
}

// Accumulates the recorded observables; rho(i, j) is read through a callable
// so the dense and the pure-state propagators share one code path.
class Recorder {
 public:
  Recorder(const PropagationConfig& config, int n_records)
      : config_(config), offset_(site_offset(config.n_sites)) {
    series_.n_sites = config.n_sites;
    series_.times.resize(n_records);
    series_.mean_n.resize(n_records);
    series_.second_moment.resize(n_records);
    series_.variance.resize(n_records);
    series_.boundary_mass.resize(n_records);
    series_.trace.resize(n_records);
    series_.hermiticity_drift.resize(n_records);
    series_.coherences.resize(n_records, kDefaultMaxLag + 1);
    series_.weighted_coherences.resize(n_records, kDefaultMaxLag + 1);
    series_.snapshot_times = config.snapshot_times;
    series_.snapshots.resize(static_cast<Eigen::Index>(config.snapshot_times.size()), config.n_sites);
  }

  template <typename Entry>
  void record(int row, double t, Entry&& rho, double drift) {
    const int n = config_.n_sites;
    double mean = 0.0;
    double second = 0.0;
    double trace = 0.0;
    double edge = 0.0;
    for (int i = 0; i < n; ++i) {
      const double site = i + offset_;
      const double p = rho(i, i).real();
      trace += p;
      mean += site * p;
      second += site * site * p;
      if (i < config_.boundary_margin || i >= n - config_.boundary_margin) edge += p;
    }
    for (int l = 0; l <= kDefaultMaxLag; ++l) {
      Complex sum = 0.0;
      Complex weighted = 0.0;
      for (int i = 0; i + l < n; ++i) {
        const Complex v = rho(i, i + l);
        sum += v;
        weighted += static_cast<double>(i + offset_) * v;
      }
      series_.coherences(row, l) = sum;
      series_.weighted_coherences(row, l) = weighted;
    }
    series_.times(row) = t;
    series_.mean_n(row) = mean;
    series_.second_moment(row) = second;
    series_.variance(row) = second - mean * mean;
    series_.boundary_mass(row) = edge;
    series_.trace(row) = trace;
    series_.hermiticity_drift(row) = drift;

    if (edge > config_.boundary_mass_tol) {
      std::ostringstream msg;
      msg << "population " << edge << " reached the outer " << config_.boundary_margin
          << " sites at t = " << t << " (tolerance " << config_.boundary_mass_tol
          << "); enlarge the chain";
      throw BoundaryLeakError(msg.str());
    }
    if (std::abs(trace - 1.0) > kTraceTol) {
      std::ostringstream msg;
      msg << "trace drifted to " << trace << " at t = " << t << "; reduce dt";
      throw StepSizeError(msg.str());
    }
  }

  template <typename Entry>
  void snapshot(int index, Entry&& rho) {
    for (int i = 0; i < config_.n_sites; ++i) series_.snapshots(index, i) = rho(i, i).real();
  }

  ObservableSeries finish(double J, DensityMatrix final_state) {
    series_.diffusivity_flux = diffusivity_from_coherences(series_, J);
    series_.diffusivity_fd = diffusivity_from_variance(series_);
    series_.final_state = std::move(final_state);
    return std::move(series_);
  }

 private:
  const PropagationConfig& config_;
  int offset_;
  ObservableSeries series_;
};

struct Schedule {
  int steps;
  std::vector<int> record_steps;
  std::vector<int> snapshot_steps;
};

Schedule schedule_for(const PropagationConfig& config) {
  Schedule s;
  s.steps = config.steps();
  for (int k = 0; k <= s.steps; k += config.record_stride) s.record_steps.push_back(k);
  if (s.record_steps.back() != s.steps) s.record_steps.push_back(s.steps);
  for (double t : config.snapshot_times) {
    const int k = snapshot_step(t, config.dt);
    if (k < 0 || k > s.steps) throw ConfigError("snapshot time outside the propagation window");
    s.snapshot_steps.push_back(k);
  }
  return s;
}

}  // namespace

int PropagationConfig::steps() const {
  return static_cast<int>(std::ceil(t_end / dt - 1e-9));
}

void PropagationConfig::validate(const InitialState& state, double J, double gamma) const {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw ConfigError("dt and t_end must be positive");
  if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
  if (boundary_margin < 1) throw ConfigError("boundary_margin must be >= 1");
  if (n_sites < 3 || n_sites % 2 == 0) throw ConfigError("n_sites must be odd and >= 3");
  if (gamma < 0.0) throw ConfigError("dephasing rate must be non-negative");
  const double dt_max = 0.05 / std::max(std::abs(J), gamma);
  if (dt > dt_max * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds 0.05/max(|J|, gamma) = " << dt_max;
    throw ConfigError(msg.str());
  }
  const double required =
      2.0 * std::ceil(2.0 * std::abs(J) * t_end) + 6.0 * state.width() + boundary_margin;
  if (n_sites < required) {
    std::ostringstream msg;
    msg << "chain of " << n_sites << " sites is smaller than the light-cone bound " << required
        << " for t_end = " << t_end;
    throw ConfigError(msg.str());
  }
}

int PropagationConfig::minimal_sites(const InitialState& state, double J, double t_end, int margin) {
  const double reach = std::abs(J) * t_end;
  const int cone = static_cast<int>(std::ceil(2.0 * reach));
  const int envelope = static_cast<int>(std::ceil(5.2 * state.width()));
  const int fringe = 6 + 6 * static_cast<int>(std::ceil(std::cbrt(reach)));
  return 2 * (cone + envelope + fringe + margin) + 1;
}

PropagationConfig PropagationConfig::sized_for(const InitialState& state, double J, double gamma,
                                               double t_end, Scheme scheme) {
  PropagationConfig c;
  c.t_end = t_end;
  c.dt = 1e-2 / std::max(std::abs(J), gamma);
  c.scheme = scheme;
  c.n_sites = minimal_sites(state, J, t_end, c.boundary_margin);
  return c;
}

ObservableSeries evolve_closed_bloch(const LatticeModel& lattice, const InitialState& state,
                                     const PropagationConfig& config) {
  if (config.scheme != Scheme::bloch_closed) {
    throw ConfigError("evolve_closed_bloch needs scheme = bloch_closed");
  }
  const double J = lattice.coupling();
  config.validate(state, J, 0.0);
  const Schedule schedule = schedule_for(config);
  const int n = config.n_sites;

  Eigen::FFT<double> fft;
  const Eigen::VectorXcd psi0 = build_amplitudes(state, n);
  Eigen::VectorXcd spectrum;
  fft.fwd(spectrum, psi0);
  Eigen::VectorXd energy(n);
  for (int q = 0; q < n; ++q) energy(q) = 2.0 * J * std::cos(2.0 * std::numbers::pi * q / n);

  Recorder recorder(config, static_cast<int>(schedule.record_steps.size()));
  Eigen::VectorXcd psi = psi0;
  Eigen::VectorXcd rotated(n);
  const auto rho = [&psi](int i, int j) { return psi(i) * std::conj(psi(j)); };
  const auto advance = [&](int step) {
    const double t = step * config.dt;
    for (int q = 0; q < n; ++q) rotated(q) = spectrum(q) * std::polar(1.0, -energy(q) * t);
    fft.inv(psi, rotated);
  };

  std::size_t next_record = 0;
  std::vector<int> wanted = schedule.record_steps;
  wanted.insert(wanted.end(), schedule.snapshot_steps.begin(), schedule.snapshot_steps.end());
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  for (int step : wanted) {
    if (step == 0) {
      psi = psi0;
    } else {
      advance(step);
    }
    for (std::size_t s = 0; s < schedule.snapshot_steps.size(); ++s) {
      if (schedule.snapshot_steps[s] == step) recorder.snapshot(static_cast<int>(s), rho);
    }
    if (next_record < schedule.record_steps.size() && schedule.record_steps[next_record] == step) {
      recorder.record(static_cast<int>(next_record), step * config.dt, rho, 0.0);
      ++next_record;
    }
  }
  return recorder.finish(J, DensityMatrix::pure(psi / psi.norm()));
}

ObservableSeries evolve_hsr_rk4(const LatticeModel& lattice, const InitialState& state, double gamma,
                                const PropagationConfig& config) {
  if (config.scheme != Scheme::rk4_dense) {
    throw ConfigError("evolve_hsr_rk4 needs scheme = rk4_dense");
  }
  const double J = lattice.coupling();
  config.validate(state, J, gamma);
  const Schedule schedule = schedule_for(config);

  detail::HsrKernel kernel(build_amplitudes(state, config.n_sites), J, gamma);
  Recorder recorder(config, static_cast<int>(schedule.record_steps.size()));
  const auto rho = [&kernel](int i, int j) { return kernel.entry(i, j); };

  std::size_t next_record = 0;
  for (int step = 0;; ++step) {
    for (std::size_t s = 0; s < schedule.snapshot_steps.size(); ++s) {
      if (schedule.snapshot_steps[s] == step) recorder.snapshot(static_cast<int>(s), rho);
    }
    if (next_record < schedule.record_steps.size() && schedule.record_steps[next_record] == step) {
      const double drift = kernel.enforce_hermiticity();
      recorder.record(static_cast<int>(next_record), step * config.dt, rho, drift);
      ++next_record;
    }
    if (step == schedule.steps) break;
    kernel.step(config.dt);
  }
  return recorder.finish(J, DensityMatrix(kernel.dense()));
}

ObservableSeries evolve(const LatticeModel& lattice, const InitialState& state, double gamma,
                        const PropagationConfig& config) {
  if (config.scheme == Scheme::bloch_closed) {
    if (gamma != 0.0) throw ConfigError("bloch_closed propagates the isolated system only");
    return evolve_closed_bloch(lattice, state, config);
  }
  return evolve_hsr_rk4(lattice, state, gamma, config);
}

Eigen::VectorXd diffusivity_from_coherences(const ObservableSeries& series, double J) {
  const Eigen::ArrayXd flux = 2.0 * J * series.coherences.col(1).imag().array();
  const Eigen::ArrayXd weighted = 2.0 * J * series.weighted_coherences.col(1).imag().array();
  return weighted + 0.5 * flux - series.mean_n.array() * flux;
}

Eigen::VectorXd diffusivity_from_variance(const ObservableSeries& series) {
  const Eigen::Index n = series.size();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  if (n < 3) return d;
  const Eigen::VectorXd& t = series.times;
  const Eigen::VectorXd& v = series.variance;
  // Non-uniform three-point derivative; exact for quadratics.
  const auto derivative = [&](Eigen::Index a, Eigen::Index b, Eigen::Index c, Eigen::Index at) {
    const double ta = t(a), tb = t(b), tc = t(c), x = t(at);
    const double la = ((x - tb) + (x - tc)) / ((ta - tb) * (ta - tc));
    const double lb = ((x - ta) + (x - tc)) / ((tb - ta) * (tb - tc));
    const double lc = ((x - ta) + (x - tb)) / ((tc - ta) * (tc - tb));
    return la * v(a) + lb * v(b) + lc * v(c);
  };
  d(0) = 0.5 * derivative(0, 1, 2, 0);
  for (Eigen::Index i = 1; i + 1 < n; ++i) d(i) = 0.5 * derivative(i - 1, i, i + 1, i);
  d(n - 1) = 0.5 * derivative(n - 3, n - 2, n - 1, n - 1);
  return d;
}

Eigen::MatrixXd population_snapshot(const LatticeModel& lattice, const InitialState& state,
                                    double gamma, const std::vector<double>& t_list,
                                    PropagationConfig config) {
  if (t_list.empty()) return {};
  const double t_max = *std::max_element(t_list.begin(), t_list.end());
  if (config.steps() * config.dt < t_max - 1e-9) {
    throw ConfigError("propagation window does not cover the requested snapshot times");
  }
  config.snapshot_times = t_list;
  return evolve(lattice, state, gamma, config).snapshots;
}

}  // namespace latdiff
