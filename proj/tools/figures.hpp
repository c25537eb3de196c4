#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace latdiff::cli {

// Overrides for the default panel grids; unset fields keep the defaults.
struct FigureOptions {
  std::optional<double> coupling;
  std::optional<double> width;
  std::optional<double> gamma;
  std::optional<double> tau;
  std::optional<double> x_min;
  std::optional<double> x_max;
  std::optional<int> samples;
  std::vector<double> modulations;
  std::vector<double> widths;
  std::vector<double> gammas;
  std::vector<double> taus;
};

const std::vector<std::string>& figure_ids();
bool is_figure_id(const std::string& id);

void write_figure(const std::string& id, const FigureOptions& options, std::ostream& out);

}  // namespace latdiff::cli
