#pragma once

// Closed-form transient diffusivities, centre-of-mass trajectories and derived
// critical parameters for the four wave-packet families, isolated (gamma = 0)
// and under pure site dephasing at rate gamma.
//
// Formula templates are generic in the scalar type. Units: time in 1/|J|,
// diffusivity in J a^2, a = 1.

#include <cmath>
#include <numbers>
#include <optional>

#include "latdiff/errors.hpp"
#include "latdiff/lattice.hpp"

namespace latdiff::analytic {

enum class PacketKind { gaussian, standing, traveling };

// Which coherence factor the standing-wave formulas use: the full
// finite-width expression, or its wide-packet (w >> 1) limit cos(2k) e^{-1/w^2}.
enum class StandingForm { exact, wide };

template <typename Scalar>
Scalar wrap_modulation(Scalar value) {
  const Scalar half_pi = std::numbers::pi_v<Scalar> / 2;
  if (std::abs(value) <= half_pi) return value;
  const Scalar reduced = std::remainder(value, std::numbers::pi_v<Scalar>);
  warn("wavenumber/momentum outside [-pi/2, pi/2] reduced modulo pi");
  return reduced;
}

// (1 - e^{-gamma t}) / gamma, continuous through gamma = 0.
template <typename Scalar>
Scalar relaxation(Scalar gamma, Scalar t) {
  const Scalar x = gamma * t;
  if (x < Scalar(1e-8)) {
    return t * (Scalar(1) - x / 2 + x * x / 6 - x * x * x / 24);
  }
  return -std::expm1(-x) / gamma;
}

// Spatial coherence of a Gaussian at lag l: e^{-l^2 / (4 w^2)}. w = 0 gives 0.
template <typename Scalar>
Scalar lag_coherence(Scalar w, int l) {
  if (w == Scalar(0)) return l == 0 ? Scalar(1) : Scalar(0);
  return std::exp(-Scalar(l * l) / (4 * w * w));
}

// Re<rho(0)>_2 of the standing Gaussian.
template <typename Scalar>
Scalar standing_coherence(Scalar w, Scalar k, StandingForm form = StandingForm::exact) {
  const Scalar c = lag_coherence(w, 2);
  if (form == StandingForm::wide) return c * std::cos(2 * k);
  const Scalar damp = std::exp(-k * k * w * w);
  return c * ((std::cos(2 * k) + damp) / (Scalar(1) + damp));
}

template <typename Scalar>
Scalar d_delta(Scalar t, Scalar J, Scalar gamma) {
  return 2 * J * J * relaxation(gamma, t);
}

// Common stationary-centre form: 2J^2 [relaxation - Re<rho(0)>_2 e^{-gamma t} t].
template <typename Scalar>
Scalar stationary_diffusivity(Scalar t, Scalar J, Scalar coherence2, Scalar gamma) {
  return 2 * J * J * (relaxation(gamma, t) - coherence2 * std::exp(-gamma * t) * t);
}

template <typename Scalar>
Scalar d_gaussian(Scalar t, Scalar J, Scalar w, Scalar gamma) {
  return stationary_diffusivity(t, J, lag_coherence(w, 2), gamma);
}

template <typename Scalar>
Scalar d_standing(Scalar t, Scalar J, Scalar w, Scalar k, Scalar gamma,
                  StandingForm form = StandingForm::exact) {
  return stationary_diffusivity(t, J, standing_coherence(w, wrap_modulation(k), form), gamma);
}

template <typename Scalar>
Scalar d_traveling(Scalar t, Scalar J, Scalar w, Scalar p, Scalar gamma) {
  p = wrap_modulation(p);
  const Scalar s = std::sin(p);
  const Scalar decay = std::exp(-gamma * t);
  return stationary_diffusivity(t, J, lag_coherence(w, 2) * std::cos(2 * p), gamma) -
         4 * J * J * (lag_coherence(w, 1) * lag_coherence(w, 1)) * (s * s) * relaxation(gamma, t) *
             decay;
}

template <typename Scalar>
Scalar com_traveling(Scalar t, Scalar J, Scalar w, Scalar p, Scalar gamma) {
  return -2 * J * lag_coherence(w, 1) * std::sin(wrap_modulation(p)) * relaxation(gamma, t);
}

// d<n>/dt of the traveling packet.
template <typename Scalar>
Scalar com_velocity_traveling(Scalar t, Scalar J, Scalar w, Scalar p, Scalar gamma) {
  return -2 * J * lag_coherence(w, 1) * std::sin(wrap_modulation(p)) * std::exp(-gamma * t);
}

// D_kind(t) - D_delta(t), evaluated directly from the coherence terms.
template <typename Scalar>
Scalar relative_diffusivity(PacketKind kind, Scalar t, Scalar J, Scalar w, Scalar kp, Scalar gamma,
                            StandingForm form = StandingForm::exact) {
  const Scalar decay = std::exp(-gamma * t);
  switch (kind) {
    case PacketKind::gaussian:
      return -2 * J * J * lag_coherence(w, 2) * decay * t;
    case PacketKind::standing:
      return -2 * J * J * standing_coherence(w, wrap_modulation(kp), form) * decay * t;
    case PacketKind::traveling: {
      const Scalar p = wrap_modulation(kp);
      const Scalar s = std::sin(p);
      const Scalar c1 = lag_coherence(w, 1);
      return -2 * J * J * lag_coherence(w, 2) * std::cos(2 * p) * decay * t -
             4 * J * J * c1 * c1 * s * s * relaxation(gamma, t) * decay;
    }
  }
  return Scalar(0);
}

// Isolated-system d/dt of D_S - D_delta in the wide-packet limit.
template <typename Scalar>
Scalar standing_relative_rate(Scalar J, Scalar w, Scalar k) {
  return -2 * J * J * lag_coherence(w, 2) * std::cos(2 * wrap_modulation(k));
}

// Isolated-system dD_T/dt.
template <typename Scalar>
Scalar traveling_rate(Scalar J, Scalar w, Scalar p) {
  p = wrap_modulation(p);
  const Scalar s = std::sin(p);
  return 2 * J * J *
         (Scalar(1) - lag_coherence(w, 2) * std::cos(2 * p) - 2 * lag_coherence(w, 1) *
                                                                   lag_coherence(w, 1) * s * s);
}

// Short-time limit of [D_T(gamma) - D_T(0)] / (gamma J^2 t^2). Its zero in w is
// the traveling critical width; at p = 0 it reduces to 2 e^{-1/w^2} - 1.
template <typename Scalar>
Scalar traveling_enhancement_coefficient(Scalar w, Scalar p) {
  p = wrap_modulation(p);
  const Scalar s = std::sin(p);
  const Scalar c1 = lag_coherence(w, 1);
  return 2 * lag_coherence(w, 2) * std::cos(2 * p) + 6 * c1 * c1 * s * s - Scalar(1);
}

std::optional<double> critical_width(PacketKind kind, double kp = 0.0);

std::optional<double> peak_time(PacketKind kind, double J, double w, double kp, double gamma);

double green_kubo_gaussian_rate(double w, double J);

struct RelationSides {
  double lhs;
  double rhs;
};

// D_S(t) against D_T(t) + (1/2) d/dt <n(t)>^2 in the isolated system, with the
// standing form taken in its wide-packet limit.
RelationSides standing_traveling_relation_check(double t, double J, double w, double q);

}  // namespace latdiff::analytic
