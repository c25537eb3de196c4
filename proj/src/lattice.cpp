#include "latdiff/lattice.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "latdiff/errors.hpp"

namespace latdiff {

namespace {

constexpr double kTailError = 1e-9;
constexpr double kTailWarning = 1e-12;

void check_width(double width) {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw InvalidParameter("wave packet width must be positive and finite, got " +
                           std::to_string(width));
  }
}

void check_chain(int n_sites) {
  if (n_sites < 3 || n_sites % 2 == 0) {
    throw InvalidParameter("chain length must be odd and >= 3, got " + std::to_string(n_sites));
  }
}

double wrapped(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw InvalidParameter(std::string(what) + " must be finite");
  }
  const double reduced = reduce_modulation(value);
  if (reduced != value) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << " " << value << " outside [-pi/2, pi/2], reduced to " << reduced;
    warn(msg.str());
  }
  return reduced;
}

}  // namespace

LatticeModel::LatticeModel(double coupling) : coupling_(coupling) {
  if (coupling == 0.0 || !std::isfinite(coupling)) {
    throw InvalidParameter("coupling J must be finite and nonzero");
  }
}

Eigen::MatrixXd LatticeModel::hamiltonian(int n_sites) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_sites, n_sites);
  h.diagonal(1).setConstant(coupling_);
  h.diagonal(-1).setConstant(coupling_);
  return h;
}

double reduce_modulation(double value) {
  constexpr double half_pi = std::numbers::pi / 2;
  if (std::abs(value) <= half_pi) return value;
  return std::remainder(value, std::numbers::pi);
}

InitialState InitialState::delta() { return InitialState(Delta{}); }

InitialState InitialState::gaussian(double width) {
  check_width(width);
  return InitialState(Gaussian{width});
}

InitialState InitialState::standing(double width, double wavenumber) {
  check_width(width);
  return InitialState(StandingGaussian{width, wrapped(wavenumber, "wavenumber k")});
}

InitialState InitialState::traveling(double width, double momentum) {
  check_width(width);
  return InitialState(TravelingGaussian{width, wrapped(momentum, "momentum p")});
}

StateKind InitialState::kind() const { return static_cast<StateKind>(v_.index()); }

double InitialState::width() const {
  return std::visit(
      [](const auto& s) -> double {
        if constexpr (requires { s.width; }) {
          return s.width;
        } else {
          return 0.0;
        }
      },
      v_);
}

double InitialState::modulation() const {
  if (const auto* s = std::get_if<StandingGaussian>(&v_)) return s->wavenumber;
  if (const auto* s = std::get_if<TravelingGaussian>(&v_)) return s->momentum;
  return 0.0;
}

std::string InitialState::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind()) {
    case StateKind::delta:
      out << "delta";
      break;
    case StateKind::gaussian:
      out << "gaussian(w=" << width() << ")";
      break;
    case StateKind::standing:
      out << "standing(w=" << width() << ",k=" << modulation() << ")";
      break;
    case StateKind::traveling:
      out << "traveling(w=" << width() << ",p=" << modulation() << ")";
      break;
  }
  return out.str();
}

double gaussian_tail_mass(double width, int n_max) {
  return std::erfc(static_cast<double>(n_max) / width);
}

namespace {

// Envelope times modulation, without any normalisation.
Eigen::VectorXcd raw_amplitudes(const InitialState& state, int n_sites) {
  check_chain(n_sites);
  const int offset = site_offset(n_sites);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n_sites);
  if (state.kind() == StateKind::delta) {
    psi(-offset) = 1.0;
    return psi;
  }
  const double w = state.width();
  check_width(w);
  const double tail = gaussian_tail_mass(w, -offset);
  if (tail > kTailError) {
    std::ostringstream msg;
    msg << "chain of " << n_sites << " sites truncates " << tail << " of the w=" << w
        << " envelope (limit " << kTailError << ")";
    throw TailTruncationError(msg.str());
  }
  if (tail > kTailWarning) {
    std::ostringstream msg;
    msg << "envelope tail mass " << tail << " exceeds " << kTailWarning;
    warn(msg.str());
  }
  const double q = state.modulation();
  for (int i = 0; i < n_sites; ++i) {
    const double n = i + offset;
    const double envelope = std::exp(-n * n / (2.0 * w * w));
    switch (state.kind()) {
      case StateKind::standing:
        psi(i) = envelope * std::cos(q * n);
        break;
      case StateKind::traveling:
        psi(i) = envelope * std::polar(1.0, q * n);
        break;
      default:
        psi(i) = envelope;
    }
  }
  return psi;
}

}  // namespace

Eigen::VectorXcd continuum_amplitudes(const InitialState& state, int n_sites) {
  Eigen::VectorXcd psi = raw_amplitudes(state, n_sites);
  if (state.kind() == StateKind::delta) return psi;
  const double w = state.width();
  double norm2 = w * std::sqrt(std::numbers::pi);
  if (state.kind() == StateKind::standing) {
    const double k = state.modulation();
    norm2 *= 0.5 * (1.0 + std::exp(-k * k * w * w));
  }
  return psi / std::sqrt(norm2);
}

Eigen::VectorXcd build_amplitudes(const InitialState& state, int n_sites) {
  Eigen::VectorXcd psi = raw_amplitudes(state, n_sites);
  return psi / psi.norm();
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries) : rho_(std::move(entries)) {
  if (rho_.rows() != rho_.cols()) {
    throw InvalidParameter("density matrix must be square");
  }
  check_chain(static_cast<int>(rho_.rows()));
  if (hermiticity_error() > 1e-12) {
    throw InvalidParameter("density matrix is not hermitian");
  }
  if (std::abs(rho_.trace() - Complex(1.0)) > 1e-10) {
    throw InvalidParameter("density matrix trace differs from 1");
  }
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& a) {
  const Eigen::Index n = a.size();
  Eigen::MatrixXcd rho(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    rho(j, j) = std::norm(a(j));
    for (Eigen::Index i = 0; i < j; ++i) {
      rho(i, j) = a(i) * std::conj(a(j));
      rho(j, i) = std::conj(rho(i, j));
    }
  }
  return DensityMatrix(std::move(rho));
}

double DensityMatrix::hermiticity_error() const {
  return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

DensityMatrix build_rho0(const InitialState& state, int n_sites) {
  return DensityMatrix::pure(build_amplitudes(state, n_sites));
}

Complex coherence_moment(const DensityMatrix& rho, int l) {
  if (l < 0 || l >= rho.n_sites()) throw InvalidParameter("lag out of range");
  return rho.entries().diagonal(l).sum();
}

Complex weighted_coherence_moment(const DensityMatrix& rho, int l) {
  if (l < 0 || l >= rho.n_sites()) throw InvalidParameter("lag out of range");
  Complex sum = 0.0;
  const auto diag = rho.entries().diagonal(l);
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    sum += static_cast<double>(rho.lattice_index(static_cast<int>(i))) * diag(i);
  }
  return sum;
}

PopulationMoments population_moments(const DensityMatrix& rho) {
  double mean = 0.0;
  double second = 0.0;
  for (int i = 0; i < rho.n_sites(); ++i) {
    const double n = rho.lattice_index(i);
    const double p = rho(i, i).real();
    mean += n * p;
    second += n * n * p;
  }
  return {mean, second, second - mean * mean};
}

CoherenceMoments coherence_moments(const DensityMatrix& rho, int l_max) {
  CoherenceMoments m;
  for (int l = 0; l <= l_max; ++l) {
    m.rho_l.push_back(coherence_moment(rho, l));
    m.n_l.push_back(weighted_coherence_moment(rho, l));
  }
  return m;
}

// Gaussian integrals over the continuum envelope. For every family
// psi_n psi*_{n+l} is centred on n = -l/2, which fixes <n>_l = -(l/2) <rho>_l.
CoherenceMoments initial_moment_table(const InitialState& state, int l_max) {
  CoherenceMoments m;
  for (int l = 0; l <= l_max; ++l) {
    Complex r = 0.0;
    if (state.kind() == StateKind::delta) {
      r = l == 0 ? 1.0 : 0.0;
    } else {
      const double w = state.width();
      const double q = state.modulation();
      const double envelope = std::exp(-static_cast<double>(l * l) / (4.0 * w * w));
      switch (state.kind()) {
        case StateKind::standing: {
          const double damp = std::exp(-q * q * w * w);
          r = envelope * (std::cos(q * l) + damp) / (1.0 + damp);
          break;
        }
        case StateKind::traveling:
          r = envelope * std::polar(1.0, -q * l);
          break;
        default:
          r = envelope;
      }
    }
    m.rho_l.push_back(r);
    m.n_l.push_back(-0.5 * l * r);
  }
  return m;
}

}  // namespace latdiff
