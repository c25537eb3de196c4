#pragma once

// Oracle-equivalence harness: matched analytic/numeric pairs on parameter
// grids, reported as machine-readable pass/fail records.

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "latdiff/analytic.hpp"
#include "latdiff/lattice.hpp"

namespace latdiff::validate {

inline constexpr double kAbsoluteFloor = 1e-9;

enum class Metric { relative, absolute };

struct ComparisonReport {
  std::string case_id;
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  Metric metric = Metric::relative;
  bool passed = false;
  std::map<std::string, double> grid;
  std::optional<int> first_fail_index;
  std::optional<double> first_fail_time;
  std::string error;  // set when the case threw instead of producing data
};

// Pointwise comparison. Relative errors of points whose absolute error is
// already below kAbsoluteFloor count as zero.
ComparisonReport compare(std::string case_id, std::map<std::string, double> grid,
                         const Eigen::VectorXd& numeric, const Eigen::VectorXd& reference,
                         double tolerance, Metric metric = Metric::relative,
                         const Eigen::VectorXd& times = {});

ComparisonReport failed_case(std::string case_id, std::map<std::string, double> grid,
                             double tolerance, const std::string& error);

enum class Suite { closed_system, hsr, coherence_law, difflength, identities };

std::optional<Suite> parse_suite(const std::string& name);
std::string suite_name(Suite suite);
const std::vector<Suite>& all_suites();

// Replaces the corresponding default axes; empty fields keep the defaults.
struct GridOverride {
  std::vector<double> widths;       // Gaussian widths
  std::vector<double> modulations;  // k and p for the modulated families
  std::vector<double> gammas;       // dephasing rates (hsr, coherence_law); gamma*tau (difflength)
  std::vector<double> taus;
  std::optional<double> t_end;
  std::optional<double> coupling;
};

std::vector<ComparisonReport> run_suite(Suite suite, const GridOverride& grid = {}, int jobs = 1);

bool all_passed(const std::vector<ComparisonReport>& reports);

nlohmann::ordered_json to_json(const ComparisonReport& report);
nlohmann::ordered_json to_json(const std::vector<ComparisonReport>& reports);

// Closed-form D(t) of any initial state; the standing form is the exact one.
double analytic_diffusivity(const InitialState& state, double J, double gamma, double t);

// D(t) from a propagation that lands exactly on t.
double numeric_diffusivity(const InitialState& state, double J, double gamma, double t);

// Time of the interior maximum of the propagated D(t) on (0, t_max], refined by
// a parabola through the three largest neighbouring records; none when D is
// still rising at t_max.
std::optional<double> numeric_peak_time(const InitialState& state, double J, double gamma,
                                        double t_max);

struct ScanResult {
  double estimate;
  double lower;  // bracket that contains the sign change
  double upper;
  std::vector<double> grid;
  std::vector<double> values;
};

// Locates a critical parameter from propagated dynamics:
//  gaussian  - width where D_G(t; gamma) - D_G(t; 0) changes sign at t = time;
//  standing  - wavenumber where D_S(t) - D_delta(t) changes sign at t = time (w fixed);
//  traveling - momentum above which D_T(t) under dephasing gamma peaks before
//              t = time; the estimate is the midpoint of the bracketing grid points.
// Throws NoSignChangeError when the grid holds no transition.
ScanResult critical_scan(analytic::PacketKind kind, double gamma, double time,
                         const std::vector<double>& grid, double J = 1.0, double width = 10.0,
                         int jobs = 1);

// Sign change in w of D(t; gamma) - D(t; 0) for the states family(w); the
// gaussian branch of critical_scan with an arbitrary width family.
ScanResult width_scan(const std::function<InitialState(double)>& family, double gamma, double time,
                      const std::vector<double>& grid, double J = 1.0, int jobs = 1);

// Number of workers: requested value if positive, else hardware concurrency.
int resolve_jobs(int requested);

// Applies fn to 0..n-1 on up to `jobs` threads; results keep index order.
template <typename F>
auto parallel_map(std::size_t n, int jobs, F&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> slots(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(resolve_jobs(jobs)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace latdiff::validate
