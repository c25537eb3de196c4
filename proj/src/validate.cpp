#include "latdiff/validate.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "latdiff/difflength.hpp"
#include "latdiff/errors.hpp"
#include "latdiff/propagator.hpp"

namespace latdiff::validate {

namespace {

using Grid = std::map<std::string, double>;
constexpr double pi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Case {
  std::string id;
  Grid grid;
  double tolerance;
  std::function<ComparisonReport()> run;
};

std::string label(const InitialState& state) {
  std::ostringstream out;
  out.precision(6);
  switch (state.kind()) {
    case StateKind::delta:
      out << "delta";
      break;
    case StateKind::gaussian:
      out << "gaussian/w=" << state.width();
      break;
    case StateKind::standing:
      out << "standing/w=" << state.width() << "/k=" << state.modulation();
      break;
    case StateKind::traveling:
      out << "traveling/w=" << state.width() << "/p=" << state.modulation();
      break;
  }
  return out.str();
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

Grid state_grid(const InitialState& state) {
  Grid g;
  if (state.kind() != StateKind::delta) g["w"] = state.width();
  if (state.kind() == StateKind::standing) g["k"] = state.modulation();
  if (state.kind() == StateKind::traveling) g["p"] = state.modulation();
  return g;
}

std::vector<InitialState> default_states(const GridOverride& o) {
  const std::vector<double> widths = o.widths.empty() ? std::vector<double>{1.0, 3.0, 10.0} : o.widths;
  const std::vector<double> ks =
      o.modulations.empty() ? std::vector<double>{0.0, 0.4, pi / 4, 1.2, pi / 2} : o.modulations;
  const std::vector<double> ps =
      o.modulations.empty() ? std::vector<double>{0.0, pi / 8, pi / 4, 3 * pi / 8, pi / 2}
                            : o.modulations;
  std::vector<InitialState> states{InitialState::delta()};
  for (double w : widths) states.push_back(InitialState::gaussian(w));
  for (double k : ks) states.push_back(InitialState::standing(10.0, k));
  for (double p : ps) states.push_back(InitialState::traveling(10.0, p));
  return states;
}

// Looser bound for packets at the edge of the continuum approximation.
double propagation_tolerance(const InitialState& state) {
  return state.kind() != StateKind::delta && state.width() <= 1.0 ? 5e-3 : 1e-3;
}

Eigen::VectorXd analytic_curve(const InitialState& state, double J, double gamma,
                               const Eigen::VectorXd& times) {
  Eigen::VectorXd out(times.size());
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    out(i) = analytic_diffusivity(state, J, gamma, times(i));
  }
  return out;
}

PropagationConfig propagation_for(const InitialState& state, double J, double gamma,
                                  double t_end) {
  PropagationConfig c = PropagationConfig::sized_for(
      state, J, gamma, t_end, gamma == 0.0 ? Scheme::bloch_closed : Scheme::rk4_dense);
  c.dt = 0.05 / std::max(std::abs(J), gamma);
  c.record_stride = 2;
  return c;
}

std::vector<Case> closed_system_cases(const GridOverride& o) {
  const double J = o.coupling.value_or(1.0);
  const double t_end = o.t_end.value_or(8.0 / std::abs(J));
  std::vector<Case> cases;
  for (const InitialState& state : default_states(o)) {
    const double tol = propagation_tolerance(state);
    const std::string id = "closed_system/" + label(state);
    Grid grid = state_grid(state);
    grid["J"] = J;
    grid["t_end"] = t_end;
    cases.push_back({id, grid, tol, [=] {
                       const auto s = evolve(LatticeModel(J), state, 0.0,
                                             propagation_for(state, J, 0.0, t_end));
                       return compare(id, grid, s.diffusivity_flux,
                                      analytic_curve(state, J, 0.0, s.times), tol,
                                      Metric::relative, s.times);
                     }});
    if (state.kind() == StateKind::traveling) {
      const std::string cm_id = id + "/com";
      cases.push_back({cm_id, grid, tol, [=] {
                         const auto s = evolve(LatticeModel(J), state, 0.0,
                                               propagation_for(state, J, 0.0, t_end));
                         Eigen::VectorXd ref(s.size());
                         for (Eigen::Index i = 0; i < s.size(); ++i) {
                           ref(i) = analytic::com_traveling(s.times(i), J, state.width(),
                                                            state.modulation(), 0.0);
                         }
                         return compare(cm_id, grid, s.mean_n, ref, tol, Metric::relative,
                                        s.times);
                       }});
    }
  }
  return cases;
}

std::vector<Case> hsr_cases(const GridOverride& o) {
  const double J = o.coupling.value_or(1.0);
  const double t_end = o.t_end.value_or(8.0 / std::abs(J));
  const std::vector<double> gammas = o.gammas.empty() ? std::vector<double>{0.1, 1.0, 2.0} : o.gammas;
  std::vector<Case> cases;
  for (const InitialState& state : default_states(o)) {
    for (double gamma : gammas) {
      const double tol = propagation_tolerance(state);
      const std::string id = "hsr/" + label(state) + "/gamma=" + fmt(gamma);
      Grid grid = state_grid(state);
      grid["J"] = J;
      grid["gamma"] = gamma;
      grid["t_end"] = t_end;
      cases.push_back({id, grid, tol, [=] {
                         const auto s = evolve(LatticeModel(J), state, gamma,
                                               propagation_for(state, J, gamma, t_end));
                         return compare(id, grid, s.diffusivity_flux,
                                        analytic_curve(state, J, gamma, s.times), tol,
                                        Metric::relative, s.times);
                       }});
    }
  }
  return cases;
}

std::vector<Case> coherence_law_cases(const GridOverride& o) {
  const double J = o.coupling.value_or(1.0);
  const double t_end = o.t_end.value_or(8.0 / std::abs(J));
  const std::vector<double> gammas = o.gammas.empty() ? std::vector<double>{0.0, 0.1, 1.0} : o.gammas;
  std::vector<Case> cases;
  for (const InitialState& state : default_states(o)) {
    for (double gamma : gammas) {
      // Conservation in the isolated system is held to a tighter bound.
      const double tol = gamma == 0.0 ? 1e-9 : 1e-6;
      const std::string id = "coherence_law/" + label(state) + "/gamma=" + fmt(gamma);
      Grid grid = state_grid(state);
      grid["J"] = J;
      grid["gamma"] = gamma;
      grid["t_end"] = t_end;
      cases.push_back({id, grid, tol, [=] {
                         PropagationConfig c = propagation_for(state, J, gamma, t_end);
                         c.scheme = Scheme::rk4_dense;
                         const auto s = evolve(LatticeModel(J), state, gamma, c);
                         // Real and imaginary parts of l = 1..4 stacked per record.
                         const Eigen::Index n = s.size();
                         Eigen::VectorXd num(8 * n), ref(8 * n), times(8 * n);
                         for (Eigen::Index i = 0; i < n; ++i) {
                           const double decay = std::exp(-gamma * s.times(i));
                           for (int l = 1; l <= kDefaultMaxLag; ++l) {
                             const Complex got = s.coherences(i, l);
                             const Complex want = s.coherences(0, l) * decay;
                             const Eigen::Index k = 8 * i + 2 * (l - 1);
                             num(k) = got.real();
                             num(k + 1) = got.imag();
                             ref(k) = want.real();
                             ref(k + 1) = want.imag();
                             times(k) = times(k + 1) = s.times(i);
                           }
                         }
                         return compare(id, grid, num, ref, tol, Metric::absolute, times);
                       }});
    }
  }
  return cases;
}

std::vector<Case> difflength_cases(const GridOverride& o) {
  const double J = o.coupling.value_or(1.0);
  const std::vector<double> widths = o.widths.empty() ? std::vector<double>{1.0, 3.0, 10.0} : o.widths;
  const std::vector<double> products =
      o.gammas.empty() ? std::vector<double>{0.25, 1.0, 4.0} : o.gammas;
  const std::vector<double> taus = o.taus.empty() ? std::vector<double>{5.0 / std::abs(J)} : o.taus;
  std::vector<Case> cases;
  for (double tau : taus) {
    {
      const std::string id = "difflength/numeric/delta/gamma=0/tau=" + fmt(tau);
      const Grid grid{{"J", J}, {"gamma", 0.0}, {"tau", tau}};
      cases.push_back({id, grid, 5e-3, [=] {
                         const InitialState state = InitialState::delta();
                         const auto r = l2_numeric(LatticeModel(J), state, 0.0, LifetimeModel(tau),
                                                   l2_config(state, J, 0.0, tau));
                         return compare(id, grid, Eigen::VectorXd::Constant(1, r.value),
                                        Eigen::VectorXd::Constant(1, 4.0 * J * J * tau * tau), 5e-3);
                       }});
    }
    for (double w : widths) {
      for (double x : products) {
        const double gamma = x / tau;
        const Grid grid{{"J", J}, {"w", w}, {"gamma", gamma}, {"tau", tau}};
        const std::string suffix = "/w=" + fmt(w) + "/gamma_tau=" + fmt(x) + "/tau=" + fmt(tau);
        const std::string qid = "difflength/quadrature" + suffix;
        cases.push_back({qid, grid, 1e-8, [=] {
                           return compare(
                               qid, grid,
                               Eigen::VectorXd::Constant(1, l2_gaussian_quadrature(J, w, gamma, tau)),
                               Eigen::VectorXd::Constant(1, l2_closed_gaussian(J, w, gamma, tau)),
                               1e-8);
                         }});
        const std::string nid = "difflength/numeric" + suffix;
        cases.push_back({nid, grid, 5e-3, [=] {
                           const InitialState state = InitialState::gaussian(w);
                           const auto r = l2_numeric(LatticeModel(J), state, gamma,
                                                     LifetimeModel(tau),
                                                     l2_config(state, J, gamma, tau));
                           return compare(
                               nid, grid, Eigen::VectorXd::Constant(1, r.value),
                               Eigen::VectorXd::Constant(1, l2_closed_gaussian(J, w, gamma, tau)),
                               5e-3);
                         }});
      }
    }
  }
  return cases;
}

std::vector<Case> identity_cases(const GridOverride& o) {
  const double J = o.coupling.value_or(1.0);
  const double t_end = o.t_end.value_or(8.0 / std::abs(J));
  const std::vector<double> qs =
      o.modulations.empty() ? std::vector<double>{0.0, pi / 8, pi / 4, 3 * pi / 8, pi / 2}
                            : o.modulations;
  const std::vector<double> widths = o.widths.empty() ? std::vector<double>{1.0, 3.0, 10.0} : o.widths;
  const std::vector<double> gammas = o.gammas.empty() ? std::vector<double>{0.0, 1.0} : o.gammas;
  constexpr int samples = 33;
  const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(samples, 0.0, t_end);
  std::vector<Case> cases;

  for (double q : qs) {
    const std::string id = "identities/standing_traveling/q=" + fmt(q);
    const Grid grid{{"J", J}, {"w", 10.0}, {"q", q}};
    cases.push_back({id, grid, 1e-8, [=] {
                       Eigen::VectorXd lhs(samples), rhs(samples);
                       for (int i = 0; i < samples; ++i) {
                         const auto sides = analytic::standing_traveling_relation_check(times(i), J, 10.0, q);
                         lhs(i) = sides.lhs;
                         rhs(i) = sides.rhs;
                       }
                       return compare(id, grid, rhs, lhs, 1e-8, Metric::relative, times);
                     }});
  }
  for (double w : widths) {
    const std::string id = "identities/green_kubo/w=" + fmt(w);
    const Grid grid{{"J", J}, {"w", w}};
    cases.push_back({id, grid, 1e-8, [=] {
                       const double rate = 2.0 * J * J * (1.0 - analytic::lag_coherence(w, 2));
                       return compare(id, grid,
                                      Eigen::VectorXd::Constant(1, analytic::green_kubo_gaussian_rate(w, J)),
                                      Eigen::VectorXd::Constant(1, rate), 1e-8);
                     }});
  }
  for (double gamma : gammas) {
    const std::string id = "identities/critical_wavenumber_null/gamma=" + fmt(gamma);
    const Grid grid{{"J", J}, {"w", 10.0}, {"gamma", gamma}};
    cases.push_back({id, grid, 1e-8, [=] {
                       Eigen::VectorXd num(samples);
                       for (int i = 0; i < samples; ++i) {
                         num(i) = analytic::relative_diffusivity(analytic::PacketKind::standing, times(i), J,
                                                                 10.0, pi / 4, gamma,
                                                                 analytic::StandingForm::wide);
                       }
                       return compare(id, grid, num, Eigen::VectorXd::Zero(samples), 1e-8,
                                      Metric::absolute, times);
                     }});
    for (double w : widths) {
      const std::string rid = "identities/reduction/w=" + fmt(w) + "/gamma=" + fmt(gamma);
      const Grid rgrid{{"J", J}, {"w", w}, {"gamma", gamma}};
      cases.push_back({rid, rgrid, 1e-8, [=] {
                         // standing(k=0) -> gaussian, traveling(p=0) -> gaussian,
                         // gaussian(w -> 0) -> delta, stacked per sample.
                         Eigen::VectorXd num(3 * samples), ref(3 * samples), t3(3 * samples);
                         for (int i = 0; i < samples; ++i) {
                           const double t = times(i);
                           const double g = analytic::d_gaussian(t, J, w, gamma);
                           num(3 * i) = analytic::d_standing(t, J, w, 0.0, gamma);
                           num(3 * i + 1) = analytic::d_traveling(t, J, w, 0.0, gamma);
                           num(3 * i + 2) = analytic::d_gaussian(t, J, 0.0, gamma);
                           ref(3 * i) = g;
                           ref(3 * i + 1) = g;
                           ref(3 * i + 2) = analytic::d_delta(t, J, gamma);
                           t3(3 * i) = t3(3 * i + 1) = t3(3 * i + 2) = t;
                         }
                         return compare(rid, rgrid, num, ref, 1e-8, Metric::relative, t3);
                       }});
    }
  }
  {
    const std::string id = "identities/traveling_critical_width/p=0";
    const Grid grid{{"p", 0.0}};
    cases.push_back({id, grid, 1e-8, [=] {
                       return compare(
                           id, grid,
                           Eigen::VectorXd::Constant(
                               1, *analytic::critical_width(analytic::PacketKind::traveling, 0.0)),
                           Eigen::VectorXd::Constant(
                               1, *analytic::critical_width(analytic::PacketKind::gaussian)),
                           1e-8);
                     }});
  }
  for (double x : {0.1, 1.0, 10.0}) {
    const std::string id = "identities/diffusion_length_sign_flip/gamma_tau=" + fmt(x);
    const Grid grid{{"J", J}, {"gamma_tau", x}};
    cases.push_back({id, grid, 1e-8, [=] {
                       // Width at which e^{-1/w^2} = (1 + x)/(2 + x); delta_gamma_l2
                       // must vanish there and change sign across it.
                       const double tau = 5.0;
                       const double gamma = x / tau;
                       const double w = 1.0 / std::sqrt(std::log((2.0 + x) / (1.0 + x)));
                       const double scale = 4.0 * gamma * J * J * tau * tau * tau;
                       const double at = delta_gamma_l2(J, w, gamma, tau) / scale;
                       const double below = delta_gamma_l2(J, w * (1 - 1e-6), gamma, tau);
                       const double above = delta_gamma_l2(J, w * (1 + 1e-6), gamma, tau);
                       ComparisonReport r = compare(id, grid, Eigen::VectorXd::Constant(1, at),
                                                    Eigen::VectorXd::Zero(1), 1e-8, Metric::absolute);
                       if (!(below < 0.0 && above > 0.0)) {
                         r.passed = false;
                         r.error = "no sign change across the predicted width";
                       }
                       return r;
                     }});
  }
  return cases;
}

std::vector<Case> cases_for(Suite suite, const GridOverride& o) {
  switch (suite) {
    case Suite::closed_system:
      return closed_system_cases(o);
    case Suite::hsr:
      return hsr_cases(o);
    case Suite::coherence_law:
      return coherence_law_cases(o);
    case Suite::difflength:
      return difflength_cases(o);
    case Suite::identities:
      return identity_cases(o);
  }
  return {};
}

template <typename F>
double bisect_sign(F&& f, double lo, double hi, double f_lo, double tol);

}  // namespace

double numeric_diffusivity(const InitialState& state, double J, double gamma, double t) {
  PropagationConfig c = PropagationConfig::sized_for(state, J, gamma, t);
  // Land exactly on t.
  const int steps = static_cast<int>(std::ceil(t / c.dt));
  c.dt = t / steps;
  c.record_stride = steps;
  const auto s = evolve(LatticeModel(J), state, gamma, c);
  return s.diffusivity_flux(s.size() - 1);
}

std::optional<double> numeric_peak_time(const InitialState& state, double J, double gamma,
                                        double t_max) {
  PropagationConfig c = PropagationConfig::sized_for(state, J, gamma, t_max);
  c.dt = 0.05 / std::max(std::abs(J), gamma);
  const auto s = evolve(LatticeModel(J), state, gamma, c);
  Eigen::Index best = 0;
  const double peak = s.diffusivity_flux.maxCoeff(&best);
  const Eigen::Index last = s.size() - 1;
  if (best == 0 || best == last) return std::nullopt;
  if (peak - s.diffusivity_flux(last) <= 1e-9 * std::abs(peak)) return std::nullopt;
  const double h = s.times(best + 1) - s.times(best);
  const double ym = s.diffusivity_flux(best - 1), y0 = peak, yp = s.diffusivity_flux(best + 1);
  const double denom = ym - 2.0 * y0 + yp;
  const double shift = denom != 0.0 ? 0.5 * (ym - yp) / denom : 0.0;
  return s.times(best) + shift * h;
}

namespace {

template <typename F>
double bisect_sign(F&& f, double lo, double hi, double f_lo, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if ((f_mid > 0) == (f_lo > 0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ScanResult locate_sign_change(const std::function<double(double)>& f,
                              const std::vector<double>& grid, double tol, int jobs) {
  ScanResult result{0.0, 0.0, 0.0, grid, {}};
  result.values = parallel_map(grid.size(), jobs, [&](std::size_t i) { return f(grid[i]); });
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if ((result.values[i] > 0) != (result.values[i + 1] > 0)) {
      result.lower = grid[i];
      result.upper = grid[i + 1];
      result.estimate = bisect_sign(f, grid[i], grid[i + 1], result.values[i], tol);
      return result;
    }
  }
  throw NoSignChangeError("critical scan found no sign change on the grid");
}

}  // namespace

ComparisonReport compare(std::string case_id, std::map<std::string, double> grid,
                         const Eigen::VectorXd& numeric, const Eigen::VectorXd& reference,
                         double tolerance, Metric metric, const Eigen::VectorXd& times) {
  ComparisonReport r;
  r.case_id = std::move(case_id);
  r.grid = std::move(grid);
  r.tolerance = tolerance;
  r.metric = metric;
  if (numeric.size() != reference.size()) {
    r.error = "numeric and reference series differ in length";
    return r;
  }
  for (Eigen::Index i = 0; i < numeric.size(); ++i) {
    const double abs_err = std::abs(numeric(i) - reference(i));
    double rel_err = 0.0;
    if (abs_err > kAbsoluteFloor) {
      rel_err = reference(i) != 0.0 ? abs_err / std::abs(reference(i))
                                    : std::numeric_limits<double>::infinity();
    }
    if (std::isnan(abs_err)) rel_err = std::numeric_limits<double>::infinity();
    r.max_abs_err = std::max(r.max_abs_err, std::isnan(abs_err) ? kInf : abs_err);
    r.max_rel_err = std::max(r.max_rel_err, rel_err);
    const bool bad = metric == Metric::relative ? rel_err > tolerance
                                                : !(abs_err <= tolerance);
    if (bad && !r.first_fail_index) {
      r.first_fail_index = static_cast<int>(i);
      if (times.size() == numeric.size()) r.first_fail_time = times(i);
    }
  }
  const double measured = metric == Metric::relative ? r.max_rel_err : r.max_abs_err;
  r.passed = measured <= tolerance || r.max_abs_err <= kAbsoluteFloor;
  return r;
}

ComparisonReport failed_case(std::string case_id, std::map<std::string, double> grid,
                             double tolerance, const std::string& error) {
  ComparisonReport r;
  r.case_id = std::move(case_id);
  r.grid = std::move(grid);
  r.tolerance = tolerance;
  r.max_abs_err = kInf;
  r.max_rel_err = kInf;
  r.error = error;
  return r;
}

std::optional<Suite> parse_suite(const std::string& name) {
  for (Suite s : all_suites()) {
    if (suite_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string suite_name(Suite suite) {
  switch (suite) {
    case Suite::closed_system:
      return "closed_system";
    case Suite::hsr:
      return "hsr";
    case Suite::coherence_law:
      return "coherence_law";
    case Suite::difflength:
      return "difflength";
    case Suite::identities:
      return "identities";
  }
  return "";
}

const std::vector<Suite>& all_suites() {
  static const std::vector<Suite> suites{Suite::closed_system, Suite::hsr, Suite::coherence_law,
                                         Suite::difflength, Suite::identities};
  return suites;
}

std::vector<ComparisonReport> run_suite(Suite suite, const GridOverride& grid, int jobs) {
  const std::vector<Case> cases = cases_for(suite, grid);
  std::vector<ComparisonReport> reports = parallel_map(cases.size(), jobs, [&](std::size_t i) {
    const Case& c = cases[i];
    try {
      return c.run();
    } catch (const std::exception& e) {
      return failed_case(c.id, c.grid, c.tolerance, e.what());
    }
  });
  std::stable_sort(reports.begin(), reports.end(),
                   [](const auto& a, const auto& b) { return a.case_id < b.case_id; });
  return reports;
}

bool all_passed(const std::vector<ComparisonReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed; });
}

nlohmann::ordered_json to_json(const ComparisonReport& r) {
  const auto number = [](double v) -> nlohmann::ordered_json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  nlohmann::ordered_json j;
  j["case_id"] = r.case_id;
  j["max_abs_err"] = number(r.max_abs_err);
  j["max_rel_err"] = number(r.max_rel_err);
  j["tolerance"] = r.tolerance;
  j["metric"] = r.metric == Metric::relative ? "relative" : "absolute";
  j["passed"] = r.passed;
  nlohmann::ordered_json grid = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.grid) grid[k] = v;
  j["grid"] = grid;
  j["first_fail_index"] = r.first_fail_index ? nlohmann::ordered_json(*r.first_fail_index) : nullptr;
  j["first_fail_time"] = r.first_fail_time ? nlohmann::ordered_json(*r.first_fail_time) : nullptr;
  j["error"] = r.error.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.error);
  return j;
}

nlohmann::ordered_json to_json(const std::vector<ComparisonReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return arr;
}

double analytic_diffusivity(const InitialState& state, double J, double gamma, double t) {
  switch (state.kind()) {
    case StateKind::delta:
      return analytic::d_delta(t, J, gamma);
    case StateKind::gaussian:
      return analytic::d_gaussian(t, J, state.width(), gamma);
    case StateKind::standing:
      return analytic::d_standing(t, J, state.width(), state.modulation(), gamma);
    case StateKind::traveling:
      return analytic::d_traveling(t, J, state.width(), state.modulation(), gamma);
  }
  return 0.0;
}

int resolve_jobs(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

ScanResult critical_scan(analytic::PacketKind kind, double gamma, double time,
                         const std::vector<double>& grid, double J, double width, int jobs) {
  if (grid.size() < 2) throw ConfigError("critical scan needs at least two grid points");
  if (!(time > 0.0)) throw ConfigError("critical scan needs a positive time");
  ScanResult result{0.0, 0.0, 0.0, grid, {}};

  if (kind == analytic::PacketKind::traveling) {
    if (!(gamma > 0.0)) throw ConfigError("peak detection needs a positive dephasing rate");
    // Height of the interior maximum of D_T above its final value, relative.
    result.values = parallel_map(grid.size(), jobs, [&](std::size_t i) {
      const InitialState state = InitialState::traveling(width, grid[i]);
      PropagationConfig c = PropagationConfig::sized_for(state, J, gamma, time);
      c.dt = 0.05 / std::max(std::abs(J), gamma);
      const auto s = evolve(LatticeModel(J), state, gamma, c);
      const double last = s.diffusivity_flux(s.size() - 1);
      return (s.diffusivity_flux.maxCoeff() - last) / std::abs(last);
    });
    constexpr double kPeak = 1e-6;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      if (result.values[i] <= kPeak && result.values[i + 1] > kPeak) {
        result.lower = grid[i];
        result.upper = grid[i + 1];
        result.estimate = 0.5 * (grid[i] + grid[i + 1]);
        return result;
      }
    }
    throw NoSignChangeError("no onset of a diffusivity peak on the momentum grid");
  }

  if (kind == analytic::PacketKind::gaussian) {
    return width_scan([](double w) { return InitialState::gaussian(w); }, gamma, time, grid, J, jobs);
  }
  const double reference = numeric_diffusivity(InitialState::delta(), J, gamma, time);
  return locate_sign_change(
      [=](double k) {
        return numeric_diffusivity(InitialState::standing(width, k), J, gamma, time) - reference;
      },
      grid, 1e-5, jobs);
}

ScanResult width_scan(const std::function<InitialState(double)>& family, double gamma, double time,
                      const std::vector<double>& grid, double J, int jobs) {
  if (grid.size() < 2) throw ConfigError("critical scan needs at least two grid points");
  if (!(time > 0.0)) throw ConfigError("critical scan needs a positive time");
  return locate_sign_change(
      [=](double w) {
        const InitialState state = family(w);
        return numeric_diffusivity(state, J, gamma, time) - numeric_diffusivity(state, J, 0.0, time);
      },
      grid, 1e-4, jobs);
}

}  // namespace latdiff::validate
