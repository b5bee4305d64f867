#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlos/sample.hpp"

namespace rlos {

/// Malformed or invariant-violating input file; the message names the line.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header row, then one row per block: year, x(1), ..., x(R). Delimiter is
/// the first of ',', tab, ';' found in the header (whitespace otherwise).
struct Dataset {
  std::vector<std::string> header;
  std::vector<int> years;
  /// Time index t = year - first year + 1.
  RLosSample sample;
};

Dataset load_dataset(std::istream& in, const std::string& source = "<input>");
Dataset load_dataset_file(const std::string& path);

}  // namespace rlos
