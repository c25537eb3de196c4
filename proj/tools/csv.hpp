#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace latdiff::cli {

// 17 significant digits, general notation, '.' decimal point.
std::string format_number(double value);

// "pi/4" style label for multiples of pi/8, otherwise the number itself.
std::string modulation_label(double value);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void comment(const std::string& text);
  void units();
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);

 private:
  std::ostream& out_;
};

}  // namespace latdiff::cli
