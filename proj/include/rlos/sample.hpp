#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rlos {

/// n blocks of the R largest order statistics, stored row-major.
/// Every row is non-increasing: x(1) >= x(2) >= ... >= x(R).
class RLosSample {
 public:
  RLosSample() = default;

  /// Validates finiteness and row ordering; throws std::invalid_argument
  /// naming the offending block and column.
  RLosSample(std::size_t blocks, std::size_t orders, std::vector<double> values,
             std::optional<std::vector<double>> time = std::nullopt, std::string units = {});

  static RLosSample from_rows(const std::vector<std::vector<double>>& rows,
                              std::optional<std::vector<double>> time = std::nullopt);

  std::size_t blocks() const noexcept { return blocks_; }
  std::size_t orders() const noexcept { return orders_; }

  /// Value of order s (1-based) in block i (0-based).
  double at(std::size_t i, std::size_t s) const noexcept { return values_[i * orders_ + (s - 1)]; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * orders_, orders_};
  }
  std::vector<double> column(std::size_t s) const;
  const std::vector<double>& values() const noexcept { return values_; }

  bool has_time() const noexcept { return time_.has_value(); }
  const std::vector<double>& time() const;
  double time_at(std::size_t i) const { return time().at(i); }

  const std::string& units() const noexcept { return units_; }

  /// First r columns of every block, keeping the time index.
  RLosSample truncated(std::size_t r) const;
  RLosSample with_time(std::vector<double> time) const;

 private:
  std::size_t blocks_ = 0;
  std::size_t orders_ = 0;
  std::vector<double> values_;
  std::optional<std::vector<double>> time_;
  std::string units_;
};

}  // namespace rlos
