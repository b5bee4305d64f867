#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rlos/gof.hpp"
#include "rlos/simulate.hpp"

using namespace rlos;

namespace {
bool rows_non_increasing(const RLosSample& s) {
  for (std::size_t i = 0; i < s.blocks(); ++i)
    for (std::size_t j = 1; j < s.orders(); ++j)
      if (s.at(i, j + 1) > s.at(i, j)) return false;
  return true;
}
}  // namespace

TEST_SUITE("simulate") {
  TEST_CASE("rGEV samples have the right marginals") {
    const GevParams p{0.0, 1.0, 0.1};
    const RLosSample s = sample_rgev(100000, 5, p, 2024);
    CHECK(rows_non_increasing(s));
    CHECK(kolmogorov_distance(s.column(1), [&](double x) { return gev_cdf(x, p); }) < 0.01);
    // -log F(x_j) is a sum of j unit exponentials.
    for (std::size_t j = 1; j <= 5; ++j) {
      std::vector<double> e;
      for (double x : s.column(j)) e.push_back(-std::log(gev_cdf(x, p)));
      CHECK(std::abs(oracle::mean(e) - double(j)) <= 0.05 * j);
    }
    const std::vector<double> c = s.column(1);
    const std::vector<double> lead(c.begin() + 1, c.end()), lag(c.begin(), c.end() - 1);
    CHECK(std::abs(oracle::correlation(lead, lag)) < 0.02);
  }

  TEST_CASE("sampling is deterministic in the seed") {
    const NsGevParams p{0.0, 0.1, 0.0, 0.01, -0.1};
    const RLosSample a = sample_rgev11(30, 4, p, 99);
    const RLosSample b = sample_rgev11(30, 4, p, 99);
    CHECK(a.values() == b.values());
    CHECK(a.time() == b.time());
    CHECK(a.values() != sample_rgev11(30, 4, p, 100).values());
    CHECK(a.time().front() == 1.0);
    CHECK(a.time().back() == 30.0);
  }

  TEST_CASE("Wakeby r-largest sampling") {
    const WakebyParams p{0.0, 5.0, 8.0, 0.5, 0.2};
    const RLosSample s = sample_wakeby_rlos(500, 10, p, 100, 8);
    CHECK(rows_non_increasing(s));
    // The block maximum stochastically dominates the second largest.
    const std::vector<double> c1 = s.column(1), c2 = s.column(2);
    for (double x = 0.0; x < 20.0; x += 0.5) {
      const auto below = [x](const std::vector<double>& v) { return std::count_if(v.begin(), v.end(), [x](double y) { return y <= x; }); };
      CHECK(below(c1) <= below(c2));
    }
    // With R equal to the block size the rows are the sorted blocks.
    const RLosSample full = sample_wakeby_rlos(20, 7, p, 7, 3);
    CHECK(rows_non_increasing(full));
    CHECK_THROWS_AS(sample_wakeby_rlos(20, 8, p, 7, 3), std::invalid_argument);
  }

  TEST_CASE("contaminate") {
    const RLosSample clean = sample_rgev(50, 10, {0.0, 1.0, 0.0}, 12);
    CHECK(contaminate(clean, 5, 1.0).values() == clean.values());
    const RLosSample shifted = contaminate(clean, 5, 0.0);
    for (std::size_t i = 0; i < clean.blocks(); ++i) {
      for (std::size_t j = 1; j <= 5; ++j) CHECK(shifted.at(i, j) == clean.at(i, j));
      for (std::size_t j = 6; j <= 9; ++j) CHECK(shifted.at(i, j) == clean.at(i, j + 1));
      CHECK(shifted.at(i, 10) == clean.at(i, 10));
    }
    for (double p : {0.1, 0.37, 0.5, 0.9}) CHECK(rows_non_increasing(contaminate(clean, 3, p)));
    CHECK_THROWS_AS(contaminate(clean, 5, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(contaminate(clean, 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(contaminate(clean, 10, 0.5), std::invalid_argument);
  }
}
