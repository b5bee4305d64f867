#include "rlos/sample.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rlos {

RLosSample::RLosSample(std::size_t blocks, std::size_t orders, std::vector<double> values,
                       std::optional<std::vector<double>> time, std::string units)
    : blocks_(blocks), orders_(orders), values_(std::move(values)), time_(std::move(time)),
      units_(std::move(units)) {
  if (blocks_ == 0 || orders_ == 0) throw std::invalid_argument("RLosSample: need n >= 1 and R >= 1");
  if (values_.size() != blocks_ * orders_)
    throw std::invalid_argument("RLosSample: value count does not match n x R");
  if (time_ && time_->size() != blocks_)
    throw std::invalid_argument("RLosSample: time index length does not match n");
  for (std::size_t i = 0; i < blocks_; ++i) {
    for (std::size_t s = 1; s <= orders_; ++s) {
      const double x = at(i, s);
      if (!std::isfinite(x)) {
        std::ostringstream msg;
        msg << "RLosSample: non-finite value at block " << i + 1 << ", order " << s;
        throw std::invalid_argument(msg.str());
      }
      if (s > 1 && x > at(i, s - 1)) {
        std::ostringstream msg;
        msg << "RLosSample: block " << i + 1 << " increases between orders " << s - 1 << " and " << s;
        throw std::invalid_argument(msg.str());
      }
    }
  }
}

RLosSample RLosSample::from_rows(const std::vector<std::vector<double>>& rows,
                                 std::optional<std::vector<double>> time) {
  if (rows.empty()) throw std::invalid_argument("RLosSample: no rows");
  const std::size_t R = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * R);
  for (const auto& row : rows) {
    if (row.size() != R) throw std::invalid_argument("RLosSample: ragged rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return RLosSample(rows.size(), R, std::move(values), std::move(time));
}

std::vector<double> RLosSample::column(std::size_t s) const {
  if (s < 1 || s > orders_) throw std::out_of_range("RLosSample::column: order out of range");
  std::vector<double> out(blocks_);
  for (std::size_t i = 0; i < blocks_; ++i) out[i] = at(i, s);
  return out;
}

const std::vector<double>& RLosSample::time() const {
  if (!time_) throw std::invalid_argument("RLosSample: sample has no time index");
  return *time_;
}

RLosSample RLosSample::truncated(std::size_t r) const {
  if (r < 1 || r > orders_) throw std::invalid_argument("RLosSample::truncated: r out of range");
  std::vector<double> values;
  values.reserve(blocks_ * r);
  for (std::size_t i = 0; i < blocks_; ++i)
    for (std::size_t s = 1; s <= r; ++s) values.push_back(at(i, s));
  return RLosSample(blocks_, r, std::move(values), time_, units_);
}

RLosSample RLosSample::with_time(std::vector<double> time) const {
  return RLosSample(blocks_, orders_, values_, std::move(time), units_);
}

}  // namespace rlos
