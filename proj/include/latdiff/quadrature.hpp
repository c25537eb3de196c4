#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.

#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "latdiff/errors.hpp"

namespace latdiff {

struct QuadratureResult {
  double value;
  double abs_error;
  int intervals;
};

namespace detail {

// Kronrod abscissae on [0, 1]; odd indices are the Gauss-Legendre 7 nodes.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename F>
Segment kronrod15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(centre - dx) + f(centre + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

// Integrates f over [a, b] until the summed error estimate drops below
// max(abs_tol, rel_tol * |value|). Throws QuadratureError otherwise. Narrow
// features that a single 15-point rule could step over call for a larger
// number of initial pieces.
template <typename F>
QuadratureResult integrate(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                           int max_intervals = 2000, int initial_pieces = 1) {
  std::priority_queue<detail::Segment> heap;
  double value = 0.0;
  double error = 0.0;
  for (int i = 0; i < initial_pieces; ++i) {
    const double lo = a + (b - a) * i / initial_pieces;
    const double hi = i + 1 == initial_pieces ? b : a + (b - a) * (i + 1) / initial_pieces;
    const detail::Segment piece = detail::kronrod15(f, lo, hi);
    value += piece.value;
    error += piece.error;
    heap.push(piece);
  }
  while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (static_cast<int>(heap.size()) >= max_intervals) {
      std::ostringstream msg;
      msg << "quadrature on [" << a << ", " << b << "] stalled at error " << error;
      throw QuadratureError(msg.str());
    }
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const detail::Segment left = detail::kronrod15(f, worst.a, mid);
    const detail::Segment right = detail::kronrod15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift of the running updates.
  double total = 0.0;
  double total_error = 0.0;
  const int intervals = static_cast<int>(heap.size());
  while (!heap.empty()) {
    total += heap.top().value;
    total_error += heap.top().error;
    heap.pop();
  }
  return {total, total_error, intervals};
}

}  // namespace latdiff
