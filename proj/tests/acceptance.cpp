// Acceptance gate: one line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "latdiff/analytic.hpp"
#include "latdiff/difflength.hpp"
#include "latdiff/propagator.hpp"
#include "latdiff/validate.hpp"

namespace fs = std::filesystem;
using namespace latdiff;
using std::numbers::pi;

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

ObservableSeries propagate(const InitialState& s, double J, double gamma, double t_end,
                           int stride = 1, Scheme scheme = Scheme::rk4_dense, int n_sites = 0) {
  PropagationConfig c = PropagationConfig::sized_for(s, J, gamma, t_end, scheme);
  c.record_stride = stride;
  if (n_sites > 0) c.n_sites = n_sites;
  return evolve(LatticeModel(J), s, gamma, c);
}

// Least-squares slope through the origin.
double slope_through_origin(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return x.dot(y) / x.dot(x);
}

double max_rel_err(const Eigen::VectorXd& num, const Eigen::VectorXd& ref) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < num.size(); ++i) {
    const double abs_err = std::abs(num(i) - ref(i));
    if (abs_err <= validate::kAbsoluteFloor) continue;
    m = std::max(m, abs_err / std::abs(ref(i)));
  }
  return m;
}

void c1(Outcome& o) {
  const double J = 1.0;
  for (Scheme scheme : {Scheme::rk4_dense, Scheme::bloch_closed}) {
    const auto s = propagate(InitialState::delta(), J, 0.0, 8.0, 10, scheme, 129);
    const Eigen::VectorXd ref = 2 * J * J * s.times;
    const double err = max_rel_err(s.diffusivity_flux, ref);
    o.detail << (scheme == Scheme::rk4_dense ? " rk4" : " bloch") << " max_rel=" << err;
    o.require(err < 1e-6, "rel err < 1e-6");
  }
}

void c2(Outcome& o) {
  const double J = 1.0;
  for (double gamma : {0.1, 1.0, 2.0}) {
    const auto s = propagate(InitialState::delta(), J, gamma, 10.0 / gamma, 10);
    Eigen::VectorXd ref(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) ref(i) = analytic::d_delta(s.times(i), J, gamma);
    const double err = max_rel_err(s.diffusivity_flux, ref);
    const double late = rel(s.diffusivity_flux(s.size() - 1), 2 * J * J / gamma);
    o.detail << " gamma=" << gamma << " max_rel=" << err << " late=" << late;
    o.require(err < 1e-4, "rel err < 1e-4");
    o.require(late < 1e-3, "long-time value within 0.1%");
  }
}

void c3(Outcome& o) {
  for (double w : {1.0, 3.0, 10.0}) {
    const auto s = propagate(InitialState::gaussian(w), 1.0, 0.0, 8.0, 10, Scheme::bloch_closed);
    const double rate = slope_through_origin(s.times, s.diffusivity_flux);
    const double err = rel(rate, 2 * (1 - std::exp(-1 / (w * w))));
    o.detail << " w=" << w << " rel=" << err;
    o.require(err < (w <= 1.0 ? 5e-3 : 1e-3), "rate tolerance");
  }
}

void c4(Outcome& o) {
  const InitialState states[] = {InitialState::delta(), InitialState::gaussian(3.0),
                                 InitialState::standing(10.0, 0.4), InitialState::traveling(10.0, pi / 4)};
  double worst = 0.0;
  for (const auto& state : states) {
    for (double gamma : {0.1, 1.0, 2.0}) {
      const auto s = propagate(state, 1.0, gamma, 5.0, 10);
      const auto table = initial_moment_table(state);
      for (Eigen::Index i = 0; i < s.size(); ++i) {
        for (int l = 1; l <= 4; ++l) {
          const Complex expect = s.coherences(0, l) * std::exp(-gamma * s.times(i));
          worst = std::max(worst, std::abs(s.coherences(i, l) - expect));
        }
      }
      // the t = 0 row itself against the continuum moment table
      if (state.kind() != StateKind::delta) {
        for (int l = 1; l <= 4; ++l) worst = std::max(worst, std::abs(s.coherences(0, l) - table.rho_l[l]));
      }
    }
  }
  o.detail << " max_abs=" << worst;
  o.require(worst < 1e-6, "abs err < 1e-6");
}

void c5(Outcome& o) {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(1.0 + 0.05 * i);
  const auto scan = validate::critical_scan(analytic::PacketKind::gaussian, 0.01, 1.0, grid, 1.0, 10.0, 0);
  o.detail << " w_c=" << scan.estimate;
  o.require(std::abs(scan.estimate - 1.20) <= 0.01, "w_c = 1.20 +- 0.01");

  const auto noisy = propagate(InitialState::gaussian(10.0), 1.0, 1.0, 10.0, 10);
  const auto closed = propagate(InitialState::gaussian(10.0), 1.0, 0.0, 10.0, 10);
  int above = 0;
  for (Eigen::Index i = 1; i < noisy.size(); ++i) {
    if (noisy.diffusivity_flux(i) > closed.diffusivity_flux(i) + 1e-6) ++above;
  }
  o.detail << " w=10 enhanced records=" << above << "/" << noisy.size() - 1;
  o.require(above > 0, "enhancement over a nonempty interval");
}

void c6(Outcome& o) {
  std::vector<double> grid;
  for (int i = 0; i <= 8; ++i) grid.push_back(0.6 + 0.05 * i);
  const auto scan = validate::critical_scan(analytic::PacketKind::standing, 0.0, 5.0, grid, 1.0, 10.0, 0);
  o.detail << " k_c=" << scan.estimate;
  o.require(std::abs(scan.estimate - pi / 4) <= 0.01, "k_c = pi/4 +- 0.01");

  const auto gain = [](double k) {
    const auto noisy = propagate(InitialState::standing(10.0, k), 1.0, 1.0, 5.0, 5);
    const auto closed = propagate(InitialState::standing(10.0, k), 1.0, 0.0, 5.0, 5);
    return Eigen::VectorXd(noisy.diffusivity_flux - closed.diffusivity_flux);
  };
  const Eigen::VectorXd g04 = gain(0.4), g06 = gain(0.6);
  o.detail << " max gain k=0.4: " << g04.maxCoeff() << " k=0.6: " << g06.tail(g06.size() - 1).maxCoeff();
  o.require(g04(1) > 0.0 && g04.maxCoeff() > 1e-4, "enhancement at k = 0.4");
  o.require(g06.tail(g06.size() - 1).maxCoeff() < 0.0, "no enhancement at k = 0.6");
}

void c7(Outcome& o) {
  const auto ts = validate::numeric_peak_time(InitialState::standing(10.0, pi / 2), 1.0, 1.0, 6.0);
  const auto tt = validate::numeric_peak_time(InitialState::traveling(10.0, pi / 2), 1.0, 1.0, 10.0);
  o.require(ts.has_value() && tt.has_value(), "peaks found");
  if (!ts || !tt) return;
  const double es = rel(*ts, 1 + std::exp(0.01));
  const double et = rel(*tt, 3.92);
  o.detail << " standing t_p=" << *ts << " (rel " << es << ") traveling t_p=" << *tt << " (rel " << et << ")";
  o.require(es < 0.02, "standing within 2%");
  o.require(et < 0.02, "traveling within 2%");
}

void c8(Outcome& o) {
  for (double p : {pi / 8, pi / 4, pi / 2}) {
    const auto closed = propagate(InitialState::traveling(10.0, p), 1.0, 0.0, 8.0, 10, Scheme::bloch_closed);
    const double v = slope_through_origin(closed.times, closed.mean_n);
    const double v_ref = -2 * std::exp(-1.0 / 400) * std::sin(p);
    const auto noisy = propagate(InitialState::traveling(10.0, p), 1.0, 1.0, 15.0, 20);
    const double x = noisy.mean_n(noisy.size() - 1);
    const double x_ref = -2 * std::exp(-1.0 / 400) * std::sin(p);
    o.detail << " p=" << p << " v_rel=" << rel(v, v_ref) << " x_rel=" << rel(x, x_ref);
    o.require(rel(v, v_ref) < 1e-3, "velocity within 0.1%");
    o.require(rel(x, x_ref) < 5e-3, "asymptote within 0.5%");
  }
}

void c9(Outcome& o) {
  const auto s = propagate(InitialState::traveling(10.0, pi / 2), 1.0, 0.0, 10.0, 10, Scheme::bloch_closed);
  const double rate = slope_through_origin(s.times, s.diffusivity_flux);
  const double bound = 1.1 * 2 * std::pow(1 - std::exp(-1.0 / 200), 2);
  o.detail << " rate=" << rate << " bound=" << bound;
  o.require(rate <= bound, "rate below bound");
}

void c10(Outcome& o) {
  const auto reports = validate::run_suite(validate::Suite::identities, {}, 0);
  int passed = 0;
  for (const auto& r : reports) passed += r.passed;
  o.detail << " " << passed << "/" << reports.size() << " identity cases";
  o.require(validate::all_passed(reports), "identity suite");
  for (double w : {1.0, 3.0, 10.0}) {
    const double e = rel(analytic::green_kubo_gaussian_rate(w, 1.0), 2 * (1 - std::exp(-1 / (w * w))));
    o.detail << " gk(w=" << w << ")=" << e;
    o.require(e < 1e-6, "Green-Kubo within 1e-6");
  }
}

void c11(Outcome& o) {
  const LatticeModel lat(1.0);
  const double tau = 5.0;
  double worst = 0.0;
  for (double w : {1.0, 3.0, 10.0}) {
    for (double x : {0.25, 1.0, 4.0}) {
      const double gamma = x / tau;
      const auto s = InitialState::gaussian(w);
      const auto r = l2_numeric(lat, s, gamma, LifetimeModel(tau), l2_config(s, 1.0, gamma, tau));
      worst = std::max(worst, rel(r.value, l2_closed_gaussian(1.0, w, gamma, tau)));
    }
  }
  o.detail << " grid max_rel=" << worst;
  o.require(worst < 5e-3, "L^2 within 0.5%");

  const auto s10 = InitialState::gaussian(10.0);
  double best_gamma = 0.0, best = -1.0;
  for (int i = 0; i <= 10; ++i) {
    const double gamma = 0.10 + 0.02 * i;
    const double v = l2_numeric(lat, s10, gamma, LifetimeModel(tau), l2_config(s10, 1.0, gamma, tau)).value;
    if (v > best) {
      best = v;
      best_gamma = gamma;
    }
  }
  const double gm = *gamma_max(10.0, tau);
  const double gm_printed = (2 * std::exp(0.01) - 1) / tau;
  o.detail << " argmax=" << best_gamma << " gamma_m=" << gm << " printed=" << gm_printed;
  o.require(std::abs(best_gamma - gm) <= 0.02 + 1e-12, "argmax within one step of gamma_m");
  o.require(std::abs(best_gamma - gm_printed) <= 0.02 + 1e-12, "argmax within one step of the printed value");

  // sign flip of L^2(gamma) - L^2(0) across e^{-1/w^2} = (1 + x)/(2 + x)
  bool flips = true;
  for (double x : {0.5, 1.0, 3.0}) {
    const double w_flip = 1 / std::sqrt(std::log((2 + x) / (1 + x)));
    flips &= delta_gamma_l2(1.0, w_flip * (1 - 1e-6), x, 1.0) < 0 && delta_gamma_l2(1.0, w_flip * (1 + 1e-6), x, 1.0) > 0;
    flips &= std::abs(delta_gamma_l2(1.0, w_flip, x, 1.0)) < 1e-12;
  }
  const double x = 1.0, tau1 = 1.0;
  const double w_flip = 1 / std::sqrt(std::log((2 + x) / (1 + x)));
  const auto numeric_gain = [&](double w) {
    const auto s = InitialState::gaussian(w);
    const double with = l2_numeric(lat, s, x / tau1, LifetimeModel(tau1), l2_config(s, 1.0, x / tau1, tau1)).value;
    const double without = l2_numeric(lat, s, 0.0, LifetimeModel(tau1), l2_config(s, 1.0, 0.0, tau1)).value;
    return with - without;
  };
  const double below = numeric_gain(0.9 * w_flip), above = numeric_gain(1.1 * w_flip);
  o.detail << " propagated gain at 0.9/1.1 w_flip: " << below << ", " << above;
  flips &= below < 0 && above > 0;
  o.require(flips, "sign flip at the predicted width");
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void c12(Outcome& o) {
  const fs::path base = fs::temp_directory_path() / "latdiff_acceptance_figures";
  fs::remove_all(base);
  std::ostringstream sink;
  int identical = 0, files = 0;
  for (const char* run : {"a", "b"}) {
    fs::create_directories(base / run);
    const int code = cli::run({"figure", "all", "--out", (base / run).string()}, sink, sink);
    o.require(code == 0, std::string("figure run ") + run);
  }
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    ++files;
    const fs::path twin = base / "b" / entry.path().filename();
    if (fs::exists(twin) && read_file(entry.path()) == read_file(twin) && fs::file_size(twin) > 0) ++identical;
  }
  o.detail << " " << identical << "/" << files << " panels byte-identical";
  o.require(files == 14 && identical == 14, "14 identical panels");
  fs::remove_all(base);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"C1 delta ballistic law", c1},
      {"C2 delta under dephasing", c2},
      {"C3 gaussian width suppression", c3},
      {"C4 coherence decay law", c4},
      {"C5 critical width and enhancement", c5},
      {"C6 standing critical wavenumber", c6},
      {"C7 peak times", c7},
      {"C8 centre-of-mass dynamics", c8},
      {"C9 soliton limit", c9},
      {"C10 identity suite", c10},
      {"C11 diffusion length", c11},
      {"C12 figure regeneration", c12},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      check(o);
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.passed;
    std::cout << (o.passed ? "[PASS] " : "[FAIL] ") << name << ":" << o.detail.str() << " (" << secs << " s)"
              << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " acceptance criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
