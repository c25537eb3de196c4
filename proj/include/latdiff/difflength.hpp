#pragma once

// Exciton diffusion length: L^2 = int_0^inf R^2(t) P(t) dt with the
// exponential lifetime density P(t) = e^{-t/tau} / tau and the relative mean
// square displacement R^2(t) = <n^2(t)> - <n^2(0)>.

#include <cmath>
#include <optional>

#include "latdiff/analytic.hpp"
#include "latdiff/errors.hpp"
#include "latdiff/lattice.hpp"
#include "latdiff/propagator.hpp"

namespace latdiff {

class LifetimeModel {
 public:
  explicit LifetimeModel(double tau);

  double tau() const { return tau_; }
  double density(double t) const { return std::exp(-t / tau_) / tau_; }
  // Weight left beyond t, e^{-t/tau}.
  double survival(double t) const { return std::exp(-t / tau_); }

 private:
  double tau_;
};

// Closed form for a Gaussian of width w (w = 0 gives the delta state).
template <typename Scalar>
Scalar l2_closed_gaussian(Scalar J, Scalar w, Scalar gamma, Scalar tau) {
  const Scalar x = gamma * tau;
  const Scalar c = analytic::lag_coherence(w, 2);
  return 4 * J * J * tau * tau * (1 + x - c) / ((x + 1) * (x + 1));
}

// L^2 - L_delta^2.
template <typename Scalar>
Scalar delta_l2(Scalar J, Scalar w, Scalar gamma, Scalar tau) {
  const Scalar x = gamma * tau;
  return -4 * J * J * analytic::lag_coherence(w, 2) * tau * tau / ((x + 1) * (x + 1));
}

// L^2(gamma) - L^2(0).
template <typename Scalar>
Scalar delta_gamma_l2(Scalar J, Scalar w, Scalar gamma, Scalar tau) {
  const Scalar x = gamma * tau;
  const Scalar c = analytic::lag_coherence(w, 2);
  return 4 * gamma * J * J * tau * tau * tau * ((2 + x) * c - (x + 1)) / ((x + 1) * (x + 1));
}

// Dephasing rate that maximises L^2 at fixed w and tau; none for w <= w_c.
template <typename Scalar>
std::optional<Scalar> gamma_max(Scalar w, Scalar tau) {
  const Scalar c = analytic::lag_coherence(w, 2);
  if (!(2 * c > 1)) return std::nullopt;
  return (2 * c - 1) / tau;
}

// The lifetime average of R^2(t) = int_0^t 2 D_G(s) ds by nested adaptive
// quadrature of the Gaussian diffusivity.
double l2_gaussian_quadrature(double J, double w, double gamma, double tau);

struct DiffusionLength {
  double value;       // quadrature + tail
  double quadrature;  // trapezoid over the record grid
  double tail;        // analytic estimate beyond t_end
};

// Propagation window for l2_numeric: t_end = 20 tau, the largest admissible dt
// and records roughly every 0.1 / |J|.
PropagationConfig l2_config(const InitialState& state, double J, double gamma, double tau);

DiffusionLength l2_numeric(const LatticeModel& lattice, const InitialState& state, double gamma,
                           const LifetimeModel& lifetime, const PropagationConfig& config);

}  // namespace latdiff
