#pragma once

// Numerical reference dynamics on a finite open chain:
//  * bloch_closed: exact phase rotation of the discrete Bloch transform
//    (isolated system, pure states);
//  * rk4_dense: fixed-step fourth-order integration of the full density
//    matrix under  d rho/dt = -i[H, rho] - gamma * offdiag(rho).
// Both record the population moments, the spatial coherences <rho>_l,
// <n>_l (l = 0..4) and the population that reached the chain edges.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "latdiff/lattice.hpp"

namespace latdiff {

enum class Scheme { rk4_dense, bloch_closed };

struct PropagationConfig {
  int n_sites = 0;
  double dt = 0.0;
  double t_end = 0.0;
  int record_stride = 1;
  int boundary_margin = 4;
  double boundary_mass_tol = 1e-8;
  Scheme scheme = Scheme::rk4_dense;
  // Times (multiples of dt) at which full site populations are kept.
  std::vector<double> snapshot_times;

  int steps() const;

  // Throws ConfigError unless dt <= 0.05 / max(|J|, gamma) and the chain holds
  // the ballistic light cone: n_sites >= 2 ceil(2|J| t_end) + 6w + margin.
  void validate(const InitialState& state, double J, double gamma) const;

  // Smallest odd chain that satisfies validate() and also keeps the initial
  // envelope tail and the diffraction fringe beyond the light cone negligible.
  static int minimal_sites(const InitialState& state, double J, double t_end, int margin = 4);

  // Config sized by minimal_sites with dt = 1e-2 / max(|J|, gamma).
  static PropagationConfig sized_for(const InitialState& state, double J, double gamma,
                                     double t_end, Scheme scheme = Scheme::rk4_dense);
};

struct ObservableSeries {
  Eigen::VectorXd times;
  Eigen::VectorXd mean_n;
  Eigen::VectorXd second_moment;
  Eigen::VectorXd variance;
  Eigen::VectorXd diffusivity_flux;
  Eigen::VectorXd diffusivity_fd;
  Eigen::VectorXd boundary_mass;
  Eigen::VectorXd trace;
  // Largest |rho - rho^dagger| entry seen before enforcement at each record.
  Eigen::VectorXd hermiticity_drift;
  // Row r holds <rho(t_r)>_l and <n(t_r)>_l for l = 0..kDefaultMaxLag.
  Eigen::MatrixXcd coherences;
  Eigen::MatrixXcd weighted_coherences;

  std::vector<double> snapshot_times;
  Eigen::MatrixXd snapshots;  // one row of populations per snapshot time

  std::optional<DensityMatrix> final_state;
  int n_sites = 0;

  Eigen::Index size() const { return times.size(); }
  Eigen::VectorXcd rho_l(int l) const { return coherences.col(l); }
  Eigen::VectorXcd n_l(int l) const { return weighted_coherences.col(l); }
};

ObservableSeries evolve_closed_bloch(const LatticeModel& lattice, const InitialState& state,
                                     const PropagationConfig& config);

ObservableSeries evolve_hsr_rk4(const LatticeModel& lattice, const InitialState& state, double gamma,
                                const PropagationConfig& config);

// Dispatches on config.scheme; bloch_closed requires gamma == 0.
ObservableSeries evolve(const LatticeModel& lattice, const InitialState& state, double gamma,
                        const PropagationConfig& config);

// D(t) = 2J Im<n>_1 + J Im<rho>_1 - <n> 2J Im<rho>_1, from the flux identities.
Eigen::VectorXd diffusivity_from_coherences(const ObservableSeries& series, double J);

// Half the time derivative of the variance by centred differences on the
// record grid (second-order one-sided stencils at the ends).
Eigen::VectorXd diffusivity_from_variance(const ObservableSeries& series);

// Site populations rho_nn(t) for each t in t_list; rows follow t_list.
Eigen::MatrixXd population_snapshot(const LatticeModel& lattice, const InitialState& state,
                                    double gamma, const std::vector<double>& t_list,
                                    PropagationConfig config);

}  // namespace latdiff
