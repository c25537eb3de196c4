#include "latdiff/difflength.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "latdiff/quadrature.hpp"

namespace latdiff {

LifetimeModel::LifetimeModel(double tau) : tau_(tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidParameter("lifetime tau must be positive");
}

double l2_gaussian_quadrature(double J, double w, double gamma, double tau) {
  if (!(tau > 0.0)) throw InvalidParameter("lifetime tau must be positive");
  if (!(gamma >= 0.0)) throw InvalidParameter("dephasing rate must be non-negative");
  const LifetimeModel lifetime(tau);
  const auto msd = [&](double t) {
    if (t == 0.0) return 0.0;
    const auto diffusivity = [&](double s) { return 2.0 * analytic::d_gaussian(s, J, w, gamma); };
    return integrate(diffusivity, 0.0, t, 1e-14 * J * J * (1.0 + t * t), 1e-13).value;
  };
  // Substituting t = tau u turns the weight into e^{-u}; beyond u = 60 the
  // remaining mass is below 1e-24.
  const auto outer = [&](double u) { return msd(tau * u) * std::exp(-u); };
  const QuadratureResult r = integrate(outer, 0.0, 60.0, 0.0, 1e-12);
  return r.value;
}

PropagationConfig l2_config(const InitialState& state, double J, double gamma, double tau) {
  PropagationConfig c;
  c.t_end = 20.0 * tau;
  c.dt = 0.05 / std::max(std::abs(J), gamma);
  c.record_stride = std::max(1, static_cast<int>(std::lround(0.1 / (std::abs(J) * c.dt))));
  c.scheme = Scheme::rk4_dense;
  c.n_sites = PropagationConfig::minimal_sites(state, J, c.t_end, c.boundary_margin);
  return c;
}

DiffusionLength l2_numeric(const LatticeModel& lattice, const InitialState& state, double gamma,
                           const LifetimeModel& lifetime, const PropagationConfig& config) {
  const double tau = lifetime.tau();
  if (config.steps() * config.dt < 20.0 * tau * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "diffusion length needs t_end >= 20 tau = " << 20.0 * tau;
    throw ConfigError(msg.str());
  }
  const double J = lattice.coupling();
  const ObservableSeries series = evolve(lattice, state, gamma, config);
  const Eigen::Index n = series.size();
  const double n2_0 = series.second_moment(0);

  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double t0 = series.times(i), t1 = series.times(i + 1);
    const double f0 = (series.second_moment(i) - n2_0) * lifetime.density(t0);
    const double f1 = (series.second_moment(i + 1) - n2_0) * lifetime.density(t1);
    sum += 0.5 * (t1 - t0) * (f0 + f1);
  }

  // Beyond T extrapolate R^2 quadratically using the exact flux identity for
  // d<n^2>/dt and a difference of it for the curvature.
  const auto msd_rate = [&](Eigen::Index i) {
    return 4.0 * J * series.weighted_coherences(i, 1).imag() +
           2.0 * J * series.coherences(i, 1).imag();
  };
  const double T = series.times(n - 1);
  const double r2 = series.second_moment(n - 1) - n2_0;
  const double slope = msd_rate(n - 1);
  const double curvature =
      n > 1 ? (slope - msd_rate(n - 2)) / (series.times(n - 1) - series.times(n - 2)) : 0.0;
  const double tail =
      lifetime.survival(T) * (r2 + slope * tau + std::max(0.0, curvature) * tau * tau);

  const double value = sum + tail;
  if (std::abs(tail) > 1e-3 * std::abs(value)) {
    std::ostringstream msg;
    msg << "lifetime tail " << tail << " exceeds 0.1% of L^2 = " << value;
    throw TailBoundError(msg.str());
  }
  return {value, sum, tail};
}

}  // namespace latdiff
