#include "cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "csv.hpp"
#include "figures.hpp"
#include "latdiff/analytic.hpp"
#include "latdiff/difflength.hpp"
#include "latdiff/errors.hpp"
#include "latdiff/propagator.hpp"
#include "latdiff/validate.hpp"

namespace latdiff::cli {

namespace {

using nlohmann::json;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Raised for bad command lines and config files; mapped to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

void with_output(const std::string& path, std::ostream& fallback,
                 const std::function<void(std::ostream&)>& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IOError("cannot open '" + path + "' for writing");
  write(file);
  file.flush();
  if (!file) throw IOError("failed writing '" + path + "'");
}

std::string json_scalar(const std::string& key, const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw UsageError("config key '" + key + "' must hold a string, number, boolean or array of them");
}

// Fills options that were not given on the command line from a JSON object
// whose keys are the option names without dashes.
void apply_config(CLI::App& command, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    CLI::Option* opt = nullptr;
    if (key != "config" && key != "help") {
      opt = command.get_option_no_throw("--" + key);
      if (opt == nullptr) opt = command.get_option_no_throw(key);
    }
    if (opt == nullptr) {
      throw UsageError("unknown config key '" + key + "' for '" + command.get_name() + "'");
    }
    if (opt->count() > 0) continue;
    if (value.is_array()) {
      if (value.empty()) throw UsageError("config key '" + key + "' holds an empty list");
      for (const auto& item : value) opt->add_result(json_scalar(key, item));
    } else {
      opt->add_result(json_scalar(key, value));
    }
    opt->run_callback();
  }
}

int resolve_jobs(const CLI::Option* opt, int value) {
  if (opt->count() > 0) {
    if (value < 1) throw UsageError("--jobs must be >= 1");
    return value;
  }
  if (const char* env = std::getenv("LATDIFF_JOBS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (*end != '\0' || parsed < 1) throw UsageError("LATDIFF_JOBS must be a positive integer");
    return static_cast<int>(parsed);
  }
  return validate::resolve_jobs(0);
}

struct StateArgs {
  std::string kind = "gaussian";
  double width = 10.0;
  double wavenumber = 0.0;
  double momentum = 0.0;

  void add_to(CLI::App& app) {
    app.add_option("--state", kind, "Initial state")
        ->check(CLI::IsMember({"delta", "gaussian", "standing", "traveling"}))
        ->capture_default_str();
    app.add_option("--width", width, "Gaussian width w (lattice constants)")->capture_default_str();
    app.add_option("--wavenumber", wavenumber, "Standing-wave k")->capture_default_str();
    app.add_option("--momentum", momentum, "Traveling-packet p")->capture_default_str();
  }

  InitialState make() const {
    if (kind == "delta") return InitialState::delta();
    if (kind == "gaussian") return InitialState::gaussian(width);
    if (kind == "standing") return InitialState::standing(width, wavenumber);
    return InitialState::traveling(width, momentum);
  }
};

void check_coupling(double J) {
  if (J == 0.0 || !std::isfinite(J)) throw UsageError("--coupling must be finite and nonzero");
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw UsageError("--gamma must be >= 0");
}

analytic::PacketKind packet_kind(const std::string& family) {
  if (family == "standing") return analytic::PacketKind::standing;
  if (family == "traveling") return analytic::PacketKind::traveling;
  return analytic::PacketKind::gaussian;
}

// ---- figure ---------------------------------------------------------------

struct FigureCommand {
  std::string id;
  std::string out;
  FigureOptions options;
  double coupling = 1.0, width = 10.0, gamma = 1.0, tau = 5.0, x_min = 0.0, x_max = 1.0;
  int samples = 0;

  CLI::App* add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("figure", "Emit the data of one figure panel as CSV");
    std::vector<std::string> choices = figure_ids();
    choices.push_back("all");
    sub->add_option("id", id, "Panel id (fig1a..fig5c) or 'all'")->check(CLI::IsMember(choices));
    sub->add_option("--out", out, "Output file, or directory for 'all' (default: stdout / .)");
    sub->add_option("--coupling", coupling, "Hopping J");
    sub->add_option("--width", width, "Packet width for fig2/fig4");
    sub->add_option("--gamma", gamma, "Dephasing rate for fig2c/fig4/fig5c");
    sub->add_option("--tau", tau, "Lifetime for fig5a/fig5b");
    sub->add_option("--x-min", x_min, "Abscissa start");
    sub->add_option("--x-max", x_max, "Abscissa end");
    sub->add_option("--samples", samples, "Abscissa samples");
    sub->add_option("--modulations", options.modulations, "k or p values")->delimiter(',');
    sub->add_option("--widths", options.widths, "Widths for fig3/fig5a/fig5b")->delimiter(',');
    sub->add_option("--gammas", options.gammas, "Dephasing rates for fig3")->delimiter(',');
    sub->add_option("--taus", options.taus, "Lifetimes for fig5c")->delimiter(',');
    return sub;
  }

  int run(CLI::App& sub, std::ostream& out_stream) {
    if (id.empty()) throw UsageError("figure: missing panel id");
    const auto set = [&](const char* name, auto& field, auto value) {
      if (sub.get_option(name)->count() > 0) field = value;
    };
    set("--coupling", options.coupling, coupling);
    set("--width", options.width, width);
    set("--gamma", options.gamma, gamma);
    set("--tau", options.tau, tau);
    set("--x-min", options.x_min, x_min);
    set("--x-max", options.x_max, x_max);
    set("--samples", options.samples, samples);
    if (options.coupling) check_coupling(*options.coupling);
    if (options.gamma) check_gamma(*options.gamma);
    if (options.width && !(*options.width > 0.0)) throw UsageError("--width must be positive");
    if (options.tau && !(*options.tau > 0.0)) throw UsageError("--tau must be positive");

    if (id == "all") {
      const std::filesystem::path dir = out.empty() ? "." : out;
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw IOError("cannot create directory '" + dir.string() + "'");
      for (const auto& fid : figure_ids()) {
        const std::string path = (dir / (fid + ".csv")).string();
        with_output(path, out_stream, [&](std::ostream& os) { write_figure(fid, options, os); });
      }
      return 0;
    }
    with_output(out, out_stream, [&](std::ostream& os) { write_figure(id, options, os); });
    return 0;
  }
};

// ---- propagate ------------------------------------------------------------

struct PropagateCommand {
  StateArgs state;
  double coupling = 1.0;
  double gamma = 0.0;
  double t_end = 0.0;
  double dt = 0.0;
  int n_sites = 0;
  int record_stride = 1;
  int boundary_margin = 4;
  double boundary_mass_tol = 1e-8;
  std::string scheme = "rk4";
  std::string out;
  std::vector<double> snapshot_times;
  std::string snapshot_out;
  bool compare_schemes = false;
  std::string report;

  CLI::App* add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("propagate", "Propagate an initial state and record observables");
    state.add_to(*sub);
    sub->add_option("--coupling", coupling, "Hopping J")->capture_default_str();
    sub->add_option("--gamma", gamma, "Dephasing rate")->capture_default_str();
    sub->add_option("--t-end", t_end, "Final time (default 10/|J|)");
    sub->add_option("--dt", dt, "Time step (default 0.01/max(|J|, gamma))");
    sub->add_option("--n-sites", n_sites, "Odd chain length (default: light-cone sized)");
    sub->add_option("--record-stride", record_stride, "Steps between records")->capture_default_str();
    sub->add_option("--boundary-margin", boundary_margin, "Edge sites monitored")->capture_default_str();
    sub->add_option("--boundary-mass-tol", boundary_mass_tol, "Allowed edge population")
        ->capture_default_str();
    sub->add_option("--scheme", scheme, "rk4 or bloch (isolated system only)")
        ->check(CLI::IsMember({"rk4", "bloch"}))
        ->capture_default_str();
    sub->add_option("--out", out, "Observable CSV (default stdout)");
    sub->add_option("--snapshot-times", snapshot_times, "Times for population snapshots")
        ->delimiter(',');
    sub->add_option("--snapshot-out", snapshot_out, "Population snapshot CSV");
    sub->add_flag("--compare-schemes", compare_schemes,
                  "Run rk4 and bloch (gamma = 0) and report their agreement as JSON");
    sub->add_option("--report", report, "Comparison report path (default stdout)");
    return sub;
  }

  PropagationConfig config(const CLI::App& sub, const InitialState& s) const {
    const double t = sub.get_option("--t-end")->count() > 0 ? t_end : 10.0 / std::abs(coupling);
    PropagationConfig c = PropagationConfig::sized_for(
        s, coupling, gamma, t, scheme == "bloch" ? Scheme::bloch_closed : Scheme::rk4_dense);
    if (sub.get_option("--dt")->count() > 0) c.dt = dt;
    if (sub.get_option("--n-sites")->count() > 0) c.n_sites = n_sites;
    c.boundary_margin = boundary_margin;
    if (sub.get_option("--n-sites")->count() == 0) {
      c.n_sites = PropagationConfig::minimal_sites(s, coupling, t, boundary_margin);
    }
    c.record_stride = record_stride;
    c.boundary_mass_tol = boundary_mass_tol;
    c.snapshot_times = snapshot_times;
    return c;
  }

  int run(const CLI::App& sub, std::ostream& out_stream) {
    check_coupling(coupling);
    check_gamma(gamma);
    if (sub.get_option("--t-end")->count() > 0 && !(t_end > 0.0)) {
      throw UsageError("--t-end must be positive");
    }
    if (scheme == "bloch" && gamma != 0.0) {
      throw UsageError("--scheme bloch propagates the isolated system only (gamma = 0)");
    }
    if (!snapshot_times.empty() && snapshot_out.empty()) {
      throw UsageError("--snapshot-times needs --snapshot-out");
    }
    const InitialState s = state.make();
    const LatticeModel lattice(coupling);
    PropagationConfig c = config(sub, s);
    c.validate(s, coupling, gamma);

    if (compare_schemes) {
      if (gamma != 0.0) throw UsageError("--compare-schemes needs gamma = 0");
      return run_comparison(lattice, s, c, out_stream);
    }

    const ObservableSeries series = evolve(lattice, s, gamma, c);
    with_output(out, out_stream, [&](std::ostream& os) {
      CsvWriter csv(os);
      csv.comment("latdiff propagate: " + s.describe());
      csv.units();
      csv.comment("J=" + format_number(coupling) + " gamma=" + format_number(gamma) +
                  " scheme=" + scheme + " n_sites=" + std::to_string(c.n_sites) +
                  " dt=" + format_number(c.dt));
      std::vector<std::string> columns{"t", "mean_n", "variance", "D_flux", "D_fd"};
      for (int l = 1; l <= kDefaultMaxLag; ++l) {
        columns.push_back("Re_rho_" + std::to_string(l));
        columns.push_back("Im_rho_" + std::to_string(l));
      }
      columns.push_back("boundary_mass");
      csv.header(columns);
      std::vector<double> row(columns.size());
      for (Eigen::Index i = 0; i < series.size(); ++i) {
        std::size_t k = 0;
        row[k++] = series.times(i);
        row[k++] = series.mean_n(i);
        row[k++] = series.variance(i);
        row[k++] = series.diffusivity_flux(i);
        row[k++] = series.diffusivity_fd(i);
        for (int l = 1; l <= kDefaultMaxLag; ++l) {
          row[k++] = series.coherences(i, l).real();
          row[k++] = series.coherences(i, l).imag();
        }
        row[k++] = series.boundary_mass(i);
        csv.row(row);
      }
    });
    if (!snapshot_out.empty()) {
      with_output(snapshot_out, out_stream, [&](std::ostream& os) {
        CsvWriter csv(os);
        csv.comment("latdiff propagate snapshots: " + s.describe());
        csv.units();
        std::vector<std::string> columns{"n"};
        for (double t : series.snapshot_times) columns.push_back("t=" + format_number(t));
        csv.header(columns);
        const int offset = site_offset(c.n_sites);
        std::vector<double> row(columns.size());
        for (int i = 0; i < c.n_sites; ++i) {
          row[0] = i + offset;
          for (Eigen::Index r = 0; r < series.snapshots.rows(); ++r) row[r + 1] = series.snapshots(r, i);
          csv.row(row);
        }
      });
    }
    return 0;
  }

  int run_comparison(const LatticeModel& lattice, const InitialState& s, PropagationConfig c,
                     std::ostream& out_stream) const {
    c.scheme = Scheme::rk4_dense;
    const ObservableSeries rk4 = evolve(lattice, s, 0.0, c);
    c.scheme = Scheme::bloch_closed;
    const ObservableSeries bloch = evolve(lattice, s, 0.0, c);
    std::map<std::string, double> grid{{"J", coupling}, {"t_end", c.t_end}, {"dt", c.dt}};
    if (s.kind() != StateKind::delta) grid["w"] = s.width();
    if (s.kind() == StateKind::standing) grid["k"] = s.modulation();
    if (s.kind() == StateKind::traveling) grid["p"] = s.modulation();
    std::vector<validate::ComparisonReport> reports;
    const auto add = [&](const std::string& name, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      reports.push_back(validate::compare("schemes/" + name, grid, a, b, 1e-8,
                                          validate::Metric::absolute, rk4.times));
    };
    add("mean_n", rk4.mean_n, bloch.mean_n);
    add("variance", rk4.variance, bloch.variance);
    add("D_flux", rk4.diffusivity_flux, bloch.diffusivity_flux);
    for (int l = 1; l <= kDefaultMaxLag; ++l) {
      add("Re_rho_" + std::to_string(l), rk4.coherences.col(l).real(), bloch.coherences.col(l).real());
      add("Im_rho_" + std::to_string(l), rk4.coherences.col(l).imag(), bloch.coherences.col(l).imag());
    }
    with_output(report, out_stream,
                [&](std::ostream& os) { os << validate::to_json(reports).dump(2) << '\n'; });
    return validate::all_passed(reports) ? 0 : kExitFailure;
  }
};

// ---- validate -------------------------------------------------------------

struct ValidateCommand {
  std::string suite;
  std::string report;
  int jobs = 0;
  validate::GridOverride grid;
  double t_end = 0.0, coupling = 1.0;

  CLI::App* add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("validate", "Run a validation suite; exit 1 on any failure");
    sub->add_option("suite", suite,
                    "closed_system, hsr, coherence_law, difflength, identities or all");
    sub->add_option("--report", report, "JSON report path");
    sub->add_option("--jobs", jobs, "Worker threads (default LATDIFF_JOBS or all cores)");
    sub->add_option("--widths", grid.widths, "Gaussian widths")->delimiter(',');
    sub->add_option("--modulations", grid.modulations, "k and p values")->delimiter(',');
    sub->add_option("--gammas", grid.gammas, "Dephasing rates (gamma*tau for difflength)")
        ->delimiter(',');
    sub->add_option("--taus", grid.taus, "Lifetimes")->delimiter(',');
    sub->add_option("--t-end", t_end, "Propagation window");
    sub->add_option("--coupling", coupling, "Hopping J");
    return sub;
  }

  int run(const CLI::App& sub, std::ostream& out_stream) {
    std::vector<validate::Suite> suites;
    if (suite == "all") {
      suites = validate::all_suites();
    } else if (auto s = validate::parse_suite(suite)) {
      suites.push_back(*s);
    } else {
      throw UsageError("unknown suite '" + suite +
                       "' (expected closed_system, hsr, coherence_law, difflength, identities or all)");
    }
    if (sub.get_option("--t-end")->count() > 0) {
      if (!(t_end > 0.0)) throw UsageError("--t-end must be positive");
      grid.t_end = t_end;
    }
    if (sub.get_option("--coupling")->count() > 0) {
      check_coupling(coupling);
      grid.coupling = coupling;
    }
    const int workers = resolve_jobs(sub.get_option("--jobs"), jobs);
    std::vector<validate::ComparisonReport> all;
    for (validate::Suite s : suites) {
      auto reports = validate::run_suite(s, grid, workers);
      all.insert(all.end(), reports.begin(), reports.end());
    }
    int failed = 0;
    for (const auto& r : all) {
      if (!r.passed) ++failed;
      out_stream << (r.passed ? "PASS " : "FAIL ") << r.case_id << " max_abs_err="
                 << format_number(r.max_abs_err) << " max_rel_err=" << format_number(r.max_rel_err)
                 << " tolerance=" << format_number(r.tolerance);
      if (r.first_fail_time) out_stream << " first_fail_t=" << format_number(*r.first_fail_time);
      if (!r.error.empty()) out_stream << " error=\"" << r.error << '"';
      out_stream << '\n';
    }
    out_stream << all.size() - failed << "/" << all.size() << " cases passed\n";
    if (!report.empty()) {
      with_output(report, out_stream,
                  [&](std::ostream& os) { os << validate::to_json(all).dump(2) << '\n'; });
    }
    return failed == 0 ? 0 : kExitFailure;
  }
};

// ---- sweep ----------------------------------------------------------------

struct SweepCommand {
  std::string target = "D";
  std::string family = "gaussian";
  std::string method = "analytic";
  std::vector<double> w, k, p, gamma, tau;
  double time = 5.0;
  double coupling = 1.0;
  int jobs = 0;
  std::string out;

  CLI::App* add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("sweep", "Evaluate a target quantity on a parameter grid");
    sub->add_option("--target", target, "D (at --time), L2, tp or wc")
        ->check(CLI::IsMember({"D", "L2", "tp", "wc"}))
        ->capture_default_str();
    sub->add_option("--family", family, "delta, gaussian, standing or traveling")
        ->check(CLI::IsMember({"delta", "gaussian", "standing", "traveling"}))
        ->capture_default_str();
    sub->add_option("--method", method, "analytic (closed forms) or numeric (propagation)")
        ->check(CLI::IsMember({"analytic", "numeric"}))
        ->capture_default_str();
    sub->add_option("--w", w, "Width grid (default 10)")->delimiter(',');
    sub->add_option("--k", k, "Wavenumber grid (default 0)")->delimiter(',');
    sub->add_option("--p", p, "Momentum grid (default 0)")->delimiter(',');
    sub->add_option("--gamma", gamma, "Dephasing-rate grid (default 0)")->delimiter(',');
    sub->add_option("--tau", tau, "Lifetime grid (default 5)")->delimiter(',');
    sub->add_option("--time", time, "Evaluation time t* for D, horizon for numeric tp")
        ->capture_default_str();
    sub->add_option("--coupling", coupling, "Hopping J")->capture_default_str();
    sub->add_option("--jobs", jobs, "Worker threads (default LATDIFF_JOBS or all cores)");
    sub->add_option("--out", out, "CSV path (default stdout)");
    return sub;
  }

  InitialState state_at(double wi, double ki, double pi_) const {
    if (family == "delta") return InitialState::delta();
    if (family == "gaussian") return InitialState::gaussian(wi);
    if (family == "standing") return InitialState::standing(wi, ki);
    return InitialState::traveling(wi, pi_);
  }

  double evaluate(double wi, double ki, double pi_, double g, double ta) const {
    const double J = coupling;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double modulation = family == "standing" ? ki : pi_;
    if (target == "D") {
      const InitialState s = state_at(wi, ki, pi_);
      return method == "analytic" ? validate::analytic_diffusivity(s, J, g, time)
                                  : validate::numeric_diffusivity(s, J, g, time);
    }
    if (target == "L2") {
      if (method == "analytic") {
        if (family == "delta") return l2_closed_gaussian(J, 0.0, g, ta);
        if (family == "gaussian") return l2_closed_gaussian(J, wi, g, ta);
        throw UsageError("closed-form L2 exists for delta and gaussian only; use --method numeric");
      }
      const InitialState s = state_at(wi, ki, pi_);
      return l2_numeric(LatticeModel(J), s, g, LifetimeModel(ta), l2_config(s, J, g, ta)).value;
    }
    if (target == "tp") {
      if (!(g > 0.0)) throw UsageError("peak times need gamma > 0");
      if (method == "analytic") {
        if (family == "delta") return nan;
        return analytic::peak_time(packet_kind(family), J, wi, modulation, g).value_or(nan);
      }
      return validate::numeric_peak_time(state_at(wi, ki, pi_), J, g, time).value_or(nan);
    }
    // wc
    if (family == "delta") return nan;
    if (method == "analytic") {
      return analytic::critical_width(packet_kind(family), modulation).value_or(nan);
    }
    if (!(g > 0.0)) throw UsageError("numeric critical widths need gamma > 0 (use gamma * time << 1)");
    std::vector<double> widths;
    for (int i = 0; i <= 27; ++i) widths.push_back(0.3 + 0.1 * i);
    try {
      return validate::width_scan([&](double x) { return state_at(x, ki, pi_); }, g, time, widths, J, 1)
          .estimate;
    } catch (const NoSignChangeError&) {
      return nan;
    }
  }

  int run(const CLI::App& sub, std::ostream& out_stream) {
    check_coupling(coupling);
    const char* axes[] = {"--w", "--k", "--p", "--gamma", "--tau"};
    if (std::none_of(std::begin(axes), std::end(axes),
                     [&](const char* a) { return sub.get_option(a)->count() > 0; })) {
      throw UsageError("sweep: empty grid; give at least one of --w, --k, --p, --gamma, --tau");
    }
    const std::vector<double> ws = w.empty() ? std::vector<double>{10.0} : w;
    const std::vector<double> ks = k.empty() ? std::vector<double>{0.0} : k;
    const std::vector<double> ps = p.empty() ? std::vector<double>{0.0} : p;
    const std::vector<double> gs = gamma.empty() ? std::vector<double>{0.0} : gamma;
    const std::vector<double> ts = tau.empty() ? std::vector<double>{5.0} : tau;
    for (double g : gs) check_gamma(g);
    for (double x : ws) {
      if (!(x > 0.0)) throw UsageError("sweep: widths must be positive");
    }
    for (double x : ts) {
      if (!(x > 0.0)) throw UsageError("sweep: lifetimes must be positive");
    }
    if (!(time > 0.0)) throw UsageError("--time must be positive");

    std::vector<std::array<double, 5>> points;
    for (double a : ws)
      for (double b : ks)
        for (double c : ps)
          for (double d : gs)
            for (double e : ts) points.push_back({a, b, c, d, e});

    const int workers = resolve_jobs(sub.get_option("--jobs"), jobs);
    const std::vector<double> values = validate::parallel_map(points.size(), workers, [&](std::size_t i) {
      const auto& q = points[i];
      return evaluate(q[0], q[1], q[2], q[3], q[4]);
    });
    with_output(out, out_stream, [&](std::ostream& os) {
      CsvWriter csv(os);
      csv.comment("latdiff sweep: target=" + target + " family=" + family + " method=" + method +
                  " J=" + format_number(coupling) +
                  (target == "D" || (target == "tp" && method == "numeric") || target == "wc"
                       ? " time=" + format_number(time)
                       : std::string()));
      csv.units();
      csv.comment("nan marks grid points where the quantity does not exist");
      csv.header({"w", "k", "p", "gamma", "tau", target});
      for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& q = points[i];
        csv.row({q[0], q[1], q[2], q[3], q[4], values[i]});
      }
    });
    return 0;
  }
};

// ---- difflength -----------------------------------------------------------

struct DifflengthCommand {
  StateArgs state;
  double coupling = 1.0;
  double gamma = 0.0;
  double tau = 5.0;
  bool numeric = false;
  std::string out;

  CLI::App* add(CLI::App& app) {
    CLI::App* sub = app.add_subcommand("difflength", "Squared diffusion length and its variations");
    state.add_to(*sub);
    sub->add_option("--coupling", coupling, "Hopping J")->capture_default_str();
    sub->add_option("--gamma", gamma, "Dephasing rate")->capture_default_str();
    sub->add_option("--tau", tau, "Mean lifetime")->capture_default_str();
    sub->add_flag("--numeric", numeric, "Also propagate and integrate R^2(t) numerically");
    sub->add_option("--out", out, "CSV path (default stdout)");
    return sub;
  }

  int run(std::ostream& out_stream) {
    check_coupling(coupling);
    check_gamma(gamma);
    if (!(tau > 0.0)) throw UsageError("--tau must be positive");
    const InitialState s = state.make();
    const double J = coupling;
    const double w = s.width();
    const bool closed = s.kind() == StateKind::delta || s.kind() == StateKind::gaussian;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<std::string> columns{"w", "gamma", "tau"};
    std::vector<double> row{w, gamma, tau};
    if (closed) {
      columns.insert(columns.end(), {"L2", "delta_L2", "delta_gamma_L2", "gamma_max", "L2_quadrature"});
      row.push_back(l2_closed_gaussian(J, w, gamma, tau));
      row.push_back(delta_l2(J, w, gamma, tau));
      row.push_back(delta_gamma_l2(J, w, gamma, tau));
      row.push_back(gamma_max(w, tau).value_or(nan));
      row.push_back(l2_gaussian_quadrature(J, w, gamma, tau));
    } else if (!numeric) {
      throw UsageError("no closed form for " + state.kind + " states; add --numeric");
    }
    if (numeric) {
      const DiffusionLength r = l2_numeric(LatticeModel(J), s, gamma, LifetimeModel(tau),
                                           l2_config(s, J, gamma, tau));
      columns.insert(columns.end(), {"L2_numeric", "L2_tail"});
      row.push_back(r.value);
      row.push_back(r.tail);
    }
    with_output(out, out_stream, [&](std::ostream& os) {
      CsvWriter csv(os);
      csv.comment("latdiff difflength: " + s.describe() + " J=" + format_number(J));
      csv.units();
      csv.comment("nan marks a missing maximum (w <= w_c)");
      csv.header(columns);
      csv.row(row);
    });
    return 0;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Transient diffusivity of wave packets on a tight-binding chain", "latdiff");
  app.require_subcommand(1);

  FigureCommand figure;
  PropagateCommand propagate;
  ValidateCommand validate_cmd;
  SweepCommand sweep;
  DifflengthCommand difflength;

  std::vector<std::string> config_paths(5);
  CLI::App* subs[] = {figure.add(app), propagate.add(app), validate_cmd.add(app), sweep.add(app),
                      difflength.add(app)};
  for (int i = 0; i < 5; ++i) {
    subs[i]->add_option("--config", config_paths[i], "JSON file of option values");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    for (int i = 0; i < 5; ++i) {
      if (subs[i]->parsed() && !config_paths[i].empty()) apply_config(*subs[i], config_paths[i]);
    }
    if (subs[0]->parsed()) return figure.run(*subs[0], out);
    if (subs[1]->parsed()) return propagate.run(*subs[1], out);
    if (subs[2]->parsed()) {
      if (validate_cmd.suite.empty()) throw UsageError("validate: missing suite name");
      return validate_cmd.run(*subs[2], out);
    }
    if (subs[3]->parsed()) return sweep.run(*subs[3], out);
    return difflength.run(out);
  } catch (const CLI::Error& e) {
    err << "latdiff: error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "latdiff: error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidParameter& e) {
    err << "latdiff: error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "latdiff: error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "latdiff: error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace latdiff::cli
