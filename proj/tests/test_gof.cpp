#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rlos/gof.hpp"
#include "rlos/random.hpp"

using namespace rlos;

namespace {
const auto identity = [](double u) { return u; };
}

TEST_SUITE("gof") {
  TEST_CASE("cvm_statistic small cases") {
    const std::vector<double> one{0.5};
    CHECK(cvm_statistic(one, identity).statistic == doctest::Approx(1.0 / 12.0));
    const std::vector<double> two{0.9, 0.1};
    // 1/24 + (0.25 - 0.1)^2 + (0.75 - 0.9)^2
    CHECK(cvm_statistic(two, identity).statistic == doctest::Approx(0.0866666666666667));
    CHECK_THROWS_AS(cvm_statistic(std::vector<double>{}, identity), std::invalid_argument);
  }

  TEST_CASE("cvm_statistic is invariant under increasing relabeling") {
    const std::vector<double> u{0.12, 0.55, 0.31, 0.97, 0.70};
    std::vector<double> x;
    for (double v : u) x.push_back(std::log(v / (1 - v)));
    const auto logistic = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };
    CHECK(cvm_statistic(x, logistic).statistic == doctest::Approx(cvm_statistic(u, identity).statistic).epsilon(1e-12));
  }

  TEST_CASE("cvm_pvalue agrees with the Smirnov integral") {
    CHECK(std::abs(oracle::cvm_upper_tail(0.46136) - 0.05) <= 0.002);
    for (double t : {0.05, 0.1, 0.2, 0.3461, 0.46136, 0.7, 1.0, 1.5})
      CHECK(std::abs(cvm_pvalue(t, 1000) - oracle::cvm_upper_tail(t)) <= 1e-4);
    CHECK(std::abs(cvm_pvalue(0.46136, 1000) - 0.05) <= 0.002);
  }

  TEST_CASE("cvm_pvalue is a decreasing probability") {
    CHECK(cvm_pvalue(1.0 / 1200.0, 100) >= 0.99);
    double prev = 1.0;
    for (double t = 0.01; t < 3.0; t += 0.01) {
      const double p = cvm_pvalue(t, 100);
      CHECK(p >= 0.0);
      CHECK(p <= prev + 1e-12);
      prev = p;
    }
  }

  TEST_CASE("cvm p-values are uniform under the null") {
    CounterRng rng(derive_key(41, {}));
    std::vector<double> pvalues;
    for (int rep = 0; rep < 1000; ++rep) {
      std::vector<double> u(50);
      for (double& v : u) v = rng.uniform();
      pvalues.push_back(cvm_test(u, identity).pvalue);
    }
    CHECK(kolmogorov_distance(pvalues, identity) < 0.06);
  }

  TEST_CASE("kolmogorov_distance") {
    CHECK(kolmogorov_distance({0.5}, identity) == doctest::Approx(0.5));
    CHECK(kolmogorov_distance({0.25, 0.75}, identity) == doctest::Approx(0.25));
  }

  TEST_CASE("mann_kendall") {
    const std::vector<double> rising{1, 2, 3, 4, 5, 6, 7};
    CHECK(mann_kendall(rising).s == 21.0);
    const std::vector<double> flat(8, 3.0);
    const MannKendallResult f = mann_kendall(flat);
    CHECK(f.s == 0.0);
    CHECK(f.pvalue == doctest::Approx(1.0));

    const std::vector<double> series{1, 3, 2, 4, 5};
    const MannKendallResult r = mann_kendall(series);
    CHECK(r.s == 8.0);
    CHECK(std::abs(r.pvalue - oracle::mann_kendall_exact(series)) <= 0.05);

    const std::vector<double> reversed{5, 4, 2, 3, 1};
    CHECK(mann_kendall(reversed).s == -8.0);
    CHECK(mann_kendall(reversed).pvalue == doctest::Approx(r.pvalue));

    const std::vector<double> longer{2.1, 0.3, 1.7, 3.3, 2.8, 4.0, 3.1, 5.2};
    CHECK(std::abs(mann_kendall(longer).pvalue - oracle::mann_kendall_exact(longer)) <= 0.05);
    CHECK_THROWS_AS(mann_kendall(std::vector<double>{1, 2, 3}), std::invalid_argument);
  }
}
