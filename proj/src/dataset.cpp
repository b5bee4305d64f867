#include "rlos/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rlos {
namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  if (delim == ' ') {
    std::istringstream ss(line);
    std::string f;
    while (ss >> f) out.push_back(f);
    return out;
  }
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(field);
  if (!line.empty() && line.back() == delim) out.emplace_back();
  for (auto& f : out) {
    const auto a = f.find_first_not_of(" \t\r\"");
    const auto b = f.find_last_not_of(" \t\r\"");
    f = a == std::string::npos ? std::string{} : f.substr(a, b - a + 1);
  }
  return out;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
  std::ostringstream msg;
  msg << source << ":" << line << ": " << what;
  throw DataError(msg.str());
}

}  // namespace

Dataset load_dataset(std::istream& in, const std::string& source) {
  std::string line;
  int line_no = 0;
  Dataset data;
  char delim = ' ';
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    for (char c : {',', '\t', ';'}) {
      if (line.find(c) != std::string::npos) {
        delim = c;
        break;
      }
    }
    data.header = split(line, delim);
    break;
  }
  if (data.header.size() < 2) throw DataError(source + ": missing header with a year column and at least one order column");
  const std::size_t orders = data.header.size() - 1;

  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::vector<std::string> fields = split(line, delim);
    if (fields.size() != data.header.size()) {
      fail(source, line_no, "expected " + std::to_string(data.header.size()) + " fields, found " +
                                std::to_string(fields.size()));
    }
    int year = 0;
    const auto& yf = fields[0];
    const auto [ptr, ec] = std::from_chars(yf.data(), yf.data() + yf.size(), year);
    if (ec != std::errc{} || ptr != yf.data() + yf.size()) fail(source, line_no, "year '" + yf + "' is not an integer");
    if (!data.years.empty() && year <= data.years.back())
      fail(source, line_no, "years must be strictly increasing (" + std::to_string(year) + " follows " +
                                std::to_string(data.years.back()) + ")");
    for (std::size_t c = 1; c < fields.size(); ++c) {
      if (fields[c].empty() || fields[c] == "NA") fail(source, line_no, "missing value in column '" + data.header[c] + "'");
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(fields[c], &used);
        if (used != fields[c].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        fail(source, line_no, "value '" + fields[c] + "' in column '" + data.header[c] + "' is not a number");
      }
      if (!std::isfinite(v)) fail(source, line_no, "non-finite value in column '" + data.header[c] + "'");
      if (c > 1 && v > values.back()) {
        fail(source, line_no, "row increases from column '" + data.header[c - 1] + "' to '" + data.header[c] + "'");
      }
      values.push_back(v);
    }
    data.years.push_back(year);
  }
  if (data.years.empty()) throw DataError(source + ": no data rows");
  std::vector<double> time(data.years.size());
  for (std::size_t i = 0; i < time.size(); ++i) time[i] = static_cast<double>(data.years[i] - data.years.front() + 1);
  data.sample = RLosSample(data.years.size(), orders, std::move(values), std::move(time), "data units");
  return data;
}

Dataset load_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  return load_dataset(in, path);
}

}  // namespace rlos
