#include "hsr_kernel.hpp"

#include <algorithm>
#include <cmath>

namespace latdiff::detail {

namespace {

// out[m] = base[m] + c (L y)[m] for one column of y; `diag` is the row that
// lies on the main diagonal and is left undamped. out may alias base.
void column_stage(long n, double J, double G, double c, const double* __restrict lr,
                  const double* __restrict li, const double* __restrict cr,
                  const double* __restrict ci, const double* __restrict rr,
                  const double* __restrict ri, const double* br, const double* bi, double* orr,
                  double* oi, long diag) {
  double dr, di;
  {
    const long m = diag;
    const double sr = (cr[m - 1] + cr[m + 1]) - (lr[m] + rr[m]);
    const double si = (ci[m - 1] + ci[m + 1]) - (li[m] + ri[m]);
    dr = br[m] + c * (J * si);
    di = bi[m] + c * (-J * sr);
  }
  for (long m = 1; m <= n; ++m) {
    const double sr = (cr[m - 1] + cr[m + 1]) - (lr[m] + rr[m]);
    const double si = (ci[m - 1] + ci[m + 1]) - (li[m] + ri[m]);
    const double kr = J * si - G * cr[m];
    const double ki = -J * sr - G * ci[m];
    orr[m] = br[m] + c * kr;
    oi[m] = bi[m] + c * ki;
  }
  orr[diag] = dr;
  oi[diag] = di;
}

}  // namespace

HsrKernel::HsrKernel(const Eigen::VectorXcd& psi0, double J, double gamma)
    : n_(psi0.size()), J_(J), gamma_(gamma) {
  const long p = n_ + 2;
  re_ = Eigen::MatrixXd::Zero(p, p);
  im_ = Eigen::MatrixXd::Zero(p, p);
  for (long j = 0; j < n_; ++j) {
    for (long i = 0; i < n_; ++i) {
      const Complex v = psi0(i) * std::conj(psi0(j));
      re_(i + 1, j + 1) = v.real();
      im_(i + 1, j + 1) = v.imag();
    }
  }
  enforce_hermiticity();
  for (Ring& y : y_) {
    y.re = Eigen::MatrixXd::Zero(p, 3);
    y.im = Eigen::MatrixXd::Zero(p, 3);
  }
}

void HsrKernel::step(double h) {
  const long n = n_;
  const double coeff[4] = {h / 4, h / 3, h / 2, h};
  for (Ring& y : y_) {
    y.re.col(0).setZero();
    y.im.col(0).setZero();
  }
  for (long c = 1; c <= n + 3; ++c) {
    if (c <= n) {
      const long s = c % 3;
      column_stage(n, J_, gamma_, coeff[0], re_.col(c - 1).data(), im_.col(c - 1).data(),
                   re_.col(c).data(), im_.col(c).data(), re_.col(c + 1).data(),
                   im_.col(c + 1).data(), re_.col(c).data(), im_.col(c).data(),
                   y_[0].re.col(s).data(), y_[0].im.col(s).data(), c);
    } else if (c == n + 1) {
      y_[0].re.col(c % 3).setZero();
      y_[0].im.col(c % 3).setZero();
    }
    for (int stage = 1; stage < 4; ++stage) {
      const long j = c - stage;
      if (j < 1) continue;
      const long s = j % 3;
      if (j <= n) {
        const Ring& src = y_[stage - 1];
        const long a = (j - 1) % 3, b = j % 3, d = (j + 1) % 3;
        double* orr = stage < 3 ? y_[stage].re.col(s).data() : re_.col(j).data();
        double* oi = stage < 3 ? y_[stage].im.col(s).data() : im_.col(j).data();
        column_stage(n, J_, gamma_, coeff[stage], src.re.col(a).data(), src.im.col(a).data(),
                     src.re.col(b).data(), src.im.col(b).data(), src.re.col(d).data(),
                     src.im.col(d).data(), re_.col(j).data(), im_.col(j).data(), orr, oi, j);
      } else if (j == n + 1 && stage < 3) {
        y_[stage].re.col(s).setZero();
        y_[stage].im.col(s).setZero();
      }
    }
  }
}

double HsrKernel::enforce_hermiticity() {
  double drift = 0.0;
  for (long j = 1; j <= n_; ++j) {
    drift = std::max(drift, std::abs(im_(j, j)));
    im_(j, j) = 0.0;
    for (long i = 1; i < j; ++i) {
      const double dr = re_(i, j) - re_(j, i);
      const double di = im_(i, j) + im_(j, i);
      drift = std::max({drift, std::abs(dr), std::abs(di)});
      if (dr != 0.0 || di != 0.0) {
        const double r = 0.5 * (re_(i, j) + re_(j, i));
        const double m = 0.5 * (im_(i, j) - im_(j, i));
        re_(i, j) = r;
        re_(j, i) = r;
        im_(i, j) = m;
        im_(j, i) = -m;
      }
    }
  }
  return drift;
}

Eigen::MatrixXcd HsrKernel::dense() const {
  Eigen::MatrixXcd rho(n_, n_);
  for (long j = 0; j < n_; ++j) {
    for (long i = 0; i < n_; ++i) rho(i, j) = entry(static_cast<int>(i), static_cast<int>(j));
  }
  return rho;
}

}  // namespace latdiff::detail
