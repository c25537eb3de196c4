#include "figures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "csv.hpp"
#include "latdiff/analytic.hpp"
#include "latdiff/difflength.hpp"
#include "latdiff/errors.hpp"
#include "latdiff/propagator.hpp"

namespace latdiff::cli {

namespace {

constexpr double pi = std::numbers::pi;

const std::vector<double> kStandingSet{0.0, 0.4, pi / 4, 1.2, pi / 2};
const std::vector<double> kTravelingSet{0.0, pi / 8, pi / 4, 3 * pi / 8, pi / 2};

struct Curve {
  std::string name;
  std::function<double(double)> f;
};

std::vector<double> axis(const FigureOptions& o, double lo, double hi, int samples) {
  lo = o.x_min.value_or(lo);
  hi = o.x_max.value_or(hi);
  samples = o.samples.value_or(samples);
  if (samples < 2 || !(hi > lo)) throw ConfigError("figure axis needs x-max > x-min and >= 2 samples");
  std::vector<double> x(samples);
  for (int i = 0; i < samples; ++i) x[i] = lo + (hi - lo) * i / (samples - 1);
  return x;
}

std::vector<double> or_default(const std::vector<double>& given,
                               const std::vector<double>& fallback) {
  return given.empty() ? fallback : given;
}

void emit_curves(CsvWriter& csv, const std::string& x_name, const std::vector<double>& x,
                 const std::vector<Curve>& curves) {
  std::vector<std::string> columns{x_name};
  for (const auto& c : curves) columns.push_back(c.name);
  csv.header(columns);
  std::vector<double> row(curves.size() + 1);
  for (double xi : x) {
    row[0] = xi;
    for (std::size_t j = 0; j < curves.size(); ++j) row[j + 1] = curves[j].f(xi);
    csv.row(row);
  }
}

void preamble(CsvWriter& csv, const std::string& id, const std::string& what) {
  csv.comment("latdiff figure " + id + ": " + what);
  csv.units();
}

void fig1(const std::string& id, const FigureOptions& o, CsvWriter& csv) {
  const double J = o.coupling.value_or(1.0);
  const auto w = axis(o, 0.5, 10.0, 381);
  std::vector<Curve> curves;
  if (id == "fig1a") {
    preamble(csv, id, "isolated standing Gaussian, d/dt (D_S - D_delta) against w (wide-packet form)");
    for (double k : or_default(o.modulations, kStandingSet)) {
      curves.push_back({"k=" + modulation_label(k), [=](double x) {
                          return analytic::standing_relative_rate(J, x, k);
                        }});
    }
  } else if (id == "fig1b") {
    preamble(csv, id, "isolated traveling Gaussian, dD_T/dt against w");
    for (double p : or_default(o.modulations, kTravelingSet)) {
      curves.push_back({"p=" + modulation_label(p), [=](double x) {
                          return analytic::traveling_rate(J, x, p);
                        }});
    }
  } else {
    preamble(csv, id, "isolated traveling Gaussian, centre-of-mass speed |d<n>/dt| against w");
    for (double p : or_default(o.modulations, kTravelingSet)) {
      curves.push_back({"p=" + modulation_label(p), [=](double x) {
                          return std::abs(analytic::com_velocity_traveling(0.0, J, x, p, 0.0));
                        }});
    }
  }
  csv.comment("J=" + format_number(J));
  emit_curves(csv, "w", w, curves);
}

void fig2(const std::string& id, const FigureOptions& o, CsvWriter& csv) {
  double J = o.coupling.value_or(1.0);
  const double w = o.width.value_or(10.0);
  double gamma = 0.0;
  std::vector<double> modulations;
  std::function<InitialState(double)> make;
  if (id == "fig2a") {
    preamble(csv, id, "isolated standing Gaussian, site populations");
    modulations = or_default(o.modulations, kStandingSet);
    make = [w](double k) { return InitialState::standing(w, k); };
  } else if (id == "fig2b") {
    preamble(csv, id, "isolated traveling Gaussian (J < 0), site populations");
    J = -std::abs(J);
    modulations = or_default(o.modulations, kTravelingSet);
    make = [w](double p) { return InitialState::traveling(w, p); };
  } else {
    preamble(csv, id, "standing Gaussian under dephasing, site populations");
    gamma = o.gamma.value_or(std::abs(J));
    modulations = or_default(o.modulations, kStandingSet);
    make = [w](double k) { return InitialState::standing(w, k); };
  }
  const double unit = 1.0 / std::abs(J);
  const std::vector<double> times{0.0, 5.0 * unit, 10.0 * unit};
  const double t_end = times.back();

  int n_sites = 0;
  for (double m : modulations) {
    n_sites = std::max(n_sites, PropagationConfig::minimal_sites(make(m), J, t_end));
  }
  PropagationConfig config;
  config.n_sites = n_sites;
  config.t_end = t_end;
  config.dt = 0.05 / std::max(std::abs(J), gamma);
  config.record_stride = config.steps();
  config.scheme = gamma == 0.0 ? Scheme::bloch_closed : Scheme::rk4_dense;

  csv.comment("J=" + format_number(J) + " w=" + format_number(w) + " gamma=" + format_number(gamma) +
              " n_sites=" + std::to_string(n_sites));
  const char* symbol = id == "fig2b" ? "p=" : "k=";
  std::vector<std::string> columns{"n"};
  std::vector<Eigen::MatrixXd> panels;
  for (double m : modulations) {
    for (double t : times) columns.push_back(std::string(symbol) + modulation_label(m) + ";t=" + format_number(t));
    panels.push_back(population_snapshot(LatticeModel(J), make(m), gamma, times, config));
  }
  csv.header(columns);
  const int offset = site_offset(n_sites);
  std::vector<double> row(columns.size());
  for (int i = 0; i < n_sites; ++i) {
    row[0] = i + offset;
    std::size_t c = 1;
    for (const auto& panel : panels) {
      for (Eigen::Index r = 0; r < panel.rows(); ++r) row[c++] = panel(r, i);
    }
    csv.row(row);
  }
}

void fig3(const FigureOptions& o, CsvWriter& csv) {
  const double J = o.coupling.value_or(1.0);
  preamble(csv, "fig3", "Gaussian diffusivity D_G(t) under dephasing");
  csv.comment("J=" + format_number(J));
  const auto t = axis(o, 0.0, 10.0 / std::abs(J), 1001);
  std::vector<Curve> curves;
  for (double w : or_default(o.widths, {1.0, 10.0})) {
    for (double g : or_default(o.gammas, {0.0, 0.1, 0.5, 1.0})) {
      curves.push_back({"w=" + format_number(w) + ";gamma=" + format_number(g),
                        [=](double x) { return analytic::d_gaussian(x, J, w, g); }});
    }
  }
  emit_curves(csv, "t", t, curves);
}

void fig4(const std::string& id, const FigureOptions& o, CsvWriter& csv) {
  const double J = o.coupling.value_or(1.0);
  const double w = o.width.value_or(10.0);
  const double gamma = o.gamma.value_or(std::abs(J));
  const bool standing = id == "fig4a" || id == "fig4b";
  const bool relative = id == "fig4b" || id == "fig4d";
  const auto kind = standing ? analytic::PacketKind::standing : analytic::PacketKind::traveling;
  preamble(csv, id,
           std::string(standing ? "standing" : "traveling") + " Gaussian, " +
               (relative ? "D(t) - D_delta(t)" : "D(t) with and without dephasing"));
  csv.comment("J=" + format_number(J) + " w=" + format_number(w) + " gamma=" + format_number(gamma));
  const auto t = axis(o, 0.0, 10.0 / std::abs(J), 1001);
  const char* symbol = standing ? "k=" : "p=";
  std::vector<Curve> curves;
  for (double m : or_default(o.modulations, standing ? kStandingSet : kTravelingSet)) {
    const std::string label = symbol + modulation_label(m);
    const auto d = [=](double x, double g) {
      return standing ? analytic::d_standing(x, J, w, m, g) : analytic::d_traveling(x, J, w, m, g);
    };
    if (relative) {
      curves.push_back({label, [=](double x) {
                          return analytic::relative_diffusivity(kind, x, J, w, m, gamma);
                        }});
    } else {
      curves.push_back({label + ";gamma=" + format_number(gamma), [=](double x) { return d(x, gamma); }});
      curves.push_back({label + ";gamma=0", [=](double x) { return d(x, 0.0); }});
    }
  }
  emit_curves(csv, "t", t, curves);
}

void fig5(const std::string& id, const FigureOptions& o, CsvWriter& csv) {
  const double J = o.coupling.value_or(1.0);
  const double w_c = *analytic::critical_width(analytic::PacketKind::gaussian);
  const auto width_label = [w_c](double w) {
    return w == w_c ? std::string("w=w_c") : "w=" + format_number(w);
  };
  std::vector<Curve> curves;
  if (id == "fig5a" || id == "fig5b") {
    const double tau = o.tau.value_or(5.0 / std::abs(J));
    const bool relative = id == "fig5b";
    preamble(csv, id, relative ? "relative squared diffusion length L^2 - L_delta^2 against gamma"
                               : "squared diffusion length L^2 of a Gaussian against gamma");
    csv.comment("J=" + format_number(J) + " tau=" + format_number(tau) + " w_c=" + format_number(w_c));
    const auto g = axis(o, 0.0, 2.0 * std::abs(J), 401);
    for (double w : or_default(o.widths, {0.5, 1.0, w_c, 3.0, 10.0})) {
      curves.push_back({width_label(w), [=](double x) {
                          return relative ? delta_l2(J, w, x, tau) : l2_closed_gaussian(J, w, x, tau);
                        }});
    }
    emit_curves(csv, "gamma", g, curves);
    return;
  }
  const double gamma = o.gamma.value_or(std::abs(J));
  preamble(csv, id, "noise gain of the squared diffusion length L^2(gamma) - L^2(0) against w");
  csv.comment("J=" + format_number(J) + " gamma=" + format_number(gamma));
  const auto w = axis(o, 0.5, 5.0, 451);
  for (double tau : or_default(o.taus, {1.0, 5.0, 10.0})) {
    curves.push_back({"tau=" + format_number(tau), [=](double x) {
                        return delta_gamma_l2(J, x, gamma, tau);
                      }});
  }
  emit_curves(csv, "w", w, curves);
}

}  // namespace

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig1a", "fig1b", "fig1c", "fig2a", "fig2b",
                                            "fig2c", "fig3",  "fig4a", "fig4b", "fig4c",
                                            "fig4d", "fig5a", "fig5b", "fig5c"};
  return ids;
}

bool is_figure_id(const std::string& id) {
  const auto& ids = figure_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

void write_figure(const std::string& id, const FigureOptions& options, std::ostream& out) {
  if (!is_figure_id(id)) throw ConfigError("unknown figure id '" + id + "'");
  if (options.coupling && (*options.coupling == 0.0 || !std::isfinite(*options.coupling))) {
    throw InvalidParameter("coupling J must be finite and nonzero");
  }
  CsvWriter csv(out);
  if (id.starts_with("fig1")) {
    fig1(id, options, csv);
  } else if (id.starts_with("fig2")) {
    fig2(id, options, csv);
  } else if (id == "fig3") {
    fig3(options, csv);
  } else if (id.starts_with("fig4")) {
    fig4(id, options, csv);
  } else {
    fig5(id, options, csv);
  }
}

}  // namespace latdiff::cli
