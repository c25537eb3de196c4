#pragma once

// Nearest-neighbour tight-binding chain, the four initial wave packets and the
// exact-summation moment machinery shared by every other part of the library.
//
// Conventions: hbar = 1, lattice constant = 1. A chain of N (odd) sites carries
// physical indices n = -(N-1)/2 .. (N-1)/2; matrix index i maps to
// n = i + site_offset with site_offset = -(N-1)/2, so the centre site is n = 0.

#include <complex>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace latdiff {

using Complex = std::complex<double>;

class LatticeModel {
 public:
  explicit LatticeModel(double coupling);

  double coupling() const { return coupling_; }

  // Dense open-boundary Hamiltonian H_{m,n} = J (delta_{m,n+1} + delta_{m,n-1}).
  Eigen::MatrixXd hamiltonian(int n_sites) const;

 private:
  double coupling_;
};

struct Delta {};
struct Gaussian {
  double width;
};
struct StandingGaussian {
  double width;
  double wavenumber;
};
struct TravelingGaussian {
  double width;
  double momentum;
};

enum class StateKind { delta, gaussian, standing, traveling };

// Pure initial state. Construction validates the width and reduces the
// wavenumber/momentum into [-pi/2, pi/2] (period pi), warning when it does.
class InitialState {
 public:
  using Variant = std::variant<Delta, Gaussian, StandingGaussian, TravelingGaussian>;

  static InitialState delta();
  static InitialState gaussian(double width);
  static InitialState standing(double width, double wavenumber);
  static InitialState traveling(double width, double momentum);

  StateKind kind() const;
  const Variant& variant() const { return v_; }

  // 0 for the delta state.
  double width() const;
  // k for standing, p for traveling, 0 otherwise.
  double modulation() const;

  std::string describe() const;

 private:
  explicit InitialState(Variant v) : v_(v) {}
  Variant v_;
};

double reduce_modulation(double value);

// Continuum mass of the Gaussian envelope beyond |n| > n_max, erfc(n_max / w).
double gaussian_tail_mass(double width, int n_max);

// Amplitudes with the continuum prefactor and no discrete renormalisation.
Eigen::VectorXcd continuum_amplitudes(const InitialState& state, int n_sites);

// psi_n on the truncated chain, renormalised to unit norm.
Eigen::VectorXcd build_amplitudes(const InitialState& state, int n_sites);

inline int site_offset(int n_sites) { return -(n_sites - 1) / 2; }

class DensityMatrix {
 public:
  // Validates odd size, hermiticity (1e-12) and unit trace (1e-10).
  explicit DensityMatrix(Eigen::MatrixXcd entries);

  static DensityMatrix pure(const Eigen::VectorXcd& amplitudes);

  int n_sites() const { return static_cast<int>(rho_.rows()); }
  int site_offset() const { return latdiff::site_offset(n_sites()); }
  int lattice_index(int matrix_index) const { return matrix_index + site_offset(); }

  const Eigen::MatrixXcd& entries() const { return rho_; }
  Complex operator()(int i, int j) const { return rho_(i, j); }
  Eigen::VectorXd populations() const { return rho_.diagonal().real(); }

  double hermiticity_error() const;

 private:
  Eigen::MatrixXcd rho_;
};

DensityMatrix build_rho0(const InitialState& state, int n_sites);

// <rho>_l = sum_n rho_{n,n+l}
Complex coherence_moment(const DensityMatrix& rho, int l);
// <n>_l = sum_n n rho_{n,n+l}
Complex weighted_coherence_moment(const DensityMatrix& rho, int l);

struct PopulationMoments {
  double mean;
  double second_moment;
  double variance;
};

PopulationMoments population_moments(const DensityMatrix& rho);

struct CoherenceMoments {
  std::vector<Complex> rho_l;  // l = 0..l_max
  std::vector<Complex> n_l;
};

inline constexpr int kDefaultMaxLag = 4;

CoherenceMoments coherence_moments(const DensityMatrix& rho, int l_max = kDefaultMaxLag);

// Continuum (sum -> integral) values of <rho(0)>_l and <n(0)>_l.
CoherenceMoments initial_moment_table(const InitialState& state, int l_max = kDefaultMaxLag);

}  // namespace latdiff
