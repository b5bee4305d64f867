#include "rlos/simulate.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rlos/random.hpp"

namespace rlos {

RLosSample sample_rgev11(std::size_t n, std::size_t orders, const NsGevParams& params, std::uint64_t seed) {
  if (n == 0 || orders == 0) throw std::invalid_argument("sample_rgev11: need n >= 1 and R >= 1");
  params.at(1.0).validate();
  std::vector<double> values(n * orders);
  std::vector<double> time(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i + 1);
    time[i] = t;
    const GevParams p = params.at(t);
    p.validate();
    CounterRng rng(derive_key(seed, {i + 1}));
    double w = 1.0;
    for (std::size_t j = 0; j < orders; ++j) {
      w *= rng.uniform();
      values[i * orders + j] = gev_quantile(w, p);
    }
  }
  return RLosSample(n, orders, std::move(values), std::move(time));
}

RLosSample sample_rgev(std::size_t n, std::size_t orders, const GevParams& params, std::uint64_t seed) {
  return sample_rgev11(n, orders, NsGevParams::from_stationary(params), seed);
}

RLosSample sample_wakeby_rlos(std::size_t n, std::size_t orders, const WakebyParams& params,
                              std::size_t block_size, std::uint64_t seed) {
  if (n == 0 || orders == 0) throw std::invalid_argument("sample_wakeby_rlos: need n >= 1 and R >= 1");
  if (block_size < orders) throw std::invalid_argument("sample_wakeby_rlos: block size must be at least R");
  params.validate();
  std::vector<double> values(n * orders);
  std::vector<double> time(n);
  std::vector<double> block(block_size);
  for (std::size_t i = 0; i < n; ++i) {
    time[i] = static_cast<double>(i + 1);
    CounterRng rng(derive_key(seed, {i + 1}));
    for (double& x : block) x = wakeby_quantile(rng.uniform(), params);
    std::partial_sort(block.begin(), block.begin() + static_cast<std::ptrdiff_t>(orders), block.end(),
                      std::greater<>());
    std::copy_n(block.begin(), orders, values.begin() + static_cast<std::ptrdiff_t>(i * orders));
  }
  return RLosSample(n, orders, std::move(values), std::move(time));
}

RLosSample contaminate(const RLosSample& sample, std::size_t true_r, double mixing_p) {
  const std::size_t R = sample.orders();
  if (true_r < 1 || true_r + 1 > R) throw std::invalid_argument("contaminate: need 1 <= true_r < R");
  if (!(mixing_p >= 0.0 && mixing_p <= 1.0)) throw std::invalid_argument("contaminate: mixing_p must lie in [0, 1]");
  std::vector<double> values = sample.values();
  for (std::size_t i = 0; i < sample.blocks(); ++i) {
    for (std::size_t j = true_r + 1; j < R; ++j) {
      const double upper = sample.at(i, j);
      const double lower = sample.at(i, j + 1);
      values[i * R + (j - 1)] = std::clamp(mixing_p * upper + (1.0 - mixing_p) * lower, lower, upper);
    }
  }
  std::optional<std::vector<double>> time;
  if (sample.has_time()) time = sample.time();
  return RLosSample(sample.blocks(), R, std::move(values), std::move(time), sample.units());
}

}  // namespace rlos
