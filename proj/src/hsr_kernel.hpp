#pragma once

#include <Eigen/Dense>

#include "latdiff/lattice.hpp"

namespace latdiff::detail {

// Dense density matrix under the dephasing master equation, stored as split
// real/imaginary parts padded with a zero border. One step applies the RK4
// polynomial of the (linear) generator in nested form,
//   y1 = rho + h/4 L rho, y2 = rho + h/3 L y1, y3 = rho + h/2 L y2, rho += h L y3,
// with the four stages swept together column by column.
class HsrKernel {
 public:
  HsrKernel(const Eigen::VectorXcd& psi0, double J, double gamma);

  void step(double h);

  // Restores exact hermiticity and returns the largest deviation found.
  double enforce_hermiticity();

  Complex entry(int i, int j) const { return {re_(i + 1, j + 1), im_(i + 1, j + 1)}; }
  Eigen::MatrixXcd dense() const;

 private:
  struct Ring {
    Eigen::MatrixXd re, im;
  };

  long n_;
  double J_, gamma_;
  Eigen::MatrixXd re_, im_;
  Ring y_[3];
};

}  // namespace latdiff::detail
