#include "latdiff/analytic.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "latdiff/errors.hpp"
#include "latdiff/quadrature.hpp"

namespace latdiff::analytic {

namespace {

constexpr double kWidthTol = 1e-10;
constexpr double kGolden = 0.618033988749894848204586834365638;

template <typename F>
double bisect(F&& f, double lo, double hi, double tol) {
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0) == (f_hi > 0)) {
    std::ostringstream msg;
    msg << "no sign change on [" << lo << ", " << hi << "]";
    throw NoRootError(msg.str());
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0) == (f_lo > 0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

template <typename F>
double golden_argmax(F&& f, double lo, double hi, double tol) {
  double x1 = hi - kGolden * (hi - lo);
  double x2 = lo + kGolden * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = f(x1);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::optional<double> critical_width(PacketKind kind, double kp) {
  kp = wrap_modulation(kp);
  switch (kind) {
    case PacketKind::gaussian:
      return 1.0 / std::sqrt(std::numbers::ln2);
    case PacketKind::standing: {
      if (std::abs(kp) >= std::numbers::pi / 6) return std::nullopt;
      return 1.0 / std::sqrt(std::log(2.0 * std::cos(2.0 * kp)));
    }
    case PacketKind::traveling:
      return bisect([kp](double w) { return traveling_enhancement_coefficient(w, kp); }, 0.1, 10.0,
                    kWidthTol);
  }
  return std::nullopt;
}

std::optional<double> peak_time(PacketKind kind, double J, double w, double kp, double gamma) {
  if (!(gamma > 0.0)) throw InvalidParameter("peak time needs a positive dephasing rate");
  kp = wrap_modulation(kp);
  switch (kind) {
    case PacketKind::gaussian:
      return std::nullopt;
    case PacketKind::standing: {
      const double c = standing_coherence(w, kp, StandingForm::wide);
      if (!(c < 0.0)) return std::nullopt;
      return (1.0 - 1.0 / c) / gamma;
    }
    case PacketKind::traveling: {
      const auto curve = [&](double t) { return d_traveling(t, J, w, kp, gamma); };
      constexpr int samples = 2000;
      const double t_max = 20.0 / gamma;
      const double step = t_max / samples;
      int best = 1;
      double best_value = curve(step);
      for (int i = 2; i <= samples; ++i) {
        const double v = curve(i * step);
        if (v > best_value) {
          best_value = v;
          best = i;
        }
      }
      if (best == samples) return std::nullopt;
      return golden_argmax(curve, (best - 1) * step, (best + 1) * step, 1e-9 / gamma);
    }
  }
  return std::nullopt;
}

// Group-velocity average over the Bloch-coefficient distribution of the
// Gaussian. |c_nu|^2 is 2 pi periodic, so the e^{-w^2 nu^2} profile is summed
// over its periodic images before integrating over one Brillouin zone.
double green_kubo_gaussian_rate(double w, double J) {
  if (!(w >= 1.0)) throw InvalidParameter("Green-Kubo rate requires w >= 1");
  const auto weight = [w](double nu) {
    double sum = 0.0;
    for (int m = -3; m <= 3; ++m) {
      const double shifted = nu - 2.0 * std::numbers::pi * m;
      sum += std::exp(-w * w * shifted * shifted);
    }
    return sum;
  };
  const auto flux = [&](double nu) {
    const double v = -2.0 * J * std::sin(nu);
    return v * v * weight(nu);
  };
  const double pi = std::numbers::pi;
  const QuadratureResult norm = integrate(weight, -pi, pi, 1e-13, 1e-14, 2000, 64);
  const QuadratureResult num = integrate(flux, -pi, pi, 1e-13, 1e-14, 2000, 64);
  if (norm.abs_error > 1e-10 || num.abs_error > 1e-10) {
    throw QuadratureError("Green-Kubo quadrature did not reach 1e-10");
  }
  return num.value / norm.value;
}

RelationSides standing_traveling_relation_check(double t, double J, double w, double q) {
  const double lhs = d_standing(t, J, w, q, 0.0, StandingForm::wide);
  const double com = com_traveling(t, J, w, q, 0.0);
  const double velocity = com_velocity_traveling(t, J, w, q, 0.0);
  return {lhs, d_traveling(t, J, w, q, 0.0) + com * velocity};
}

}  // namespace latdiff::analytic
