#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace latdiff::cli {

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buffer[64];
  const auto result =
      std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::general, 17);
  return std::string(buffer, result.ptr);
}

std::string modulation_label(double value) {
  if (value == 0.0) return "0";
  const double eighths = value / (std::numbers::pi / 8);
  const double rounded = std::round(eighths);
  if (std::abs(eighths - rounded) < 1e-12 && rounded != 0.0) {
    int num = static_cast<int>(rounded);
    int den = 8;
    while (num % 2 == 0 && den > 1) {
      num /= 2;
      den /= 2;
    }
    std::string out = num == 1 ? "pi" : num == -1 ? "-pi" : std::to_string(num) + "pi";
    if (den != 1) out += "/" + std::to_string(den);
    return out;
  }
  return format_number(value);
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << '\n'; }

void CsvWriter::units() {
  comment("units: hbar = 1, lattice constant a = 1; time in 1/|J|, length in a, D in J a^2");
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out_ << ',';
    out_ << columns[i];
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_number(values[i]);
  }
  out_ << '\n';
}

}  // namespace latdiff::cli
