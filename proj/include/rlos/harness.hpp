#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rlos/distributions.hpp"
#include "rlos/fit.hpp"
#include "rlos/select.hpp"

namespace rlos {

enum class Population { rgev, rgev11, wakeby };

std::string_view to_string(Population p) noexcept;
Population parse_population(std::string_view name);

struct ExperimentConfig {
  Population population = Population::rgev;
  GevParams gev{};
  NsGevParams ns{};
  WakebyParams wakeby{};
  std::size_t block_size = 100;  // Wakeby draws per block
  std::size_t n = 80;
  std::size_t orders = 10;  // R
  std::size_t true_r = 5;
  double mixing_p = 0.5;
  std::size_t replicates = 200;
  std::uint64_t seed = 1;
  std::vector<Method> tests{Method::spacings, Method::ed, Method::ccdf};
  double alpha = 0.05;
  PValueLayer layer = PValueLayer::raw;
  std::size_t bootstrap = 199;
  bool penalize = true;
  unsigned workers = 0;

  Model model() const noexcept { return population == Population::rgev11 ? Model::rgev11 : Model::stationary; }
  /// Throws std::invalid_argument on out-of-range fields or a method the
  /// population's model does not support.
  void validate() const;
};

/// Parses a flat `key = value` file ('#' starts a comment). Missing required
/// keys are reported by name.
ExperimentConfig parse_experiment_config(std::istream& in);

struct SelectionHistogram {
  Method method = Method::ccdf;
  std::string population;
  std::size_t n = 0;
  std::map<std::size_t, std::size_t> counts;
  std::size_t replicates = 0;
  std::size_t failures = 0;

  /// Most frequent r (smallest on ties); 0 when empty.
  std::size_t mode() const;
  std::size_t count(std::size_t r) const;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SelectionHistogram> histograms;
  /// chosen r per replicate and method (0 = failure), for reproducibility checks.
  std::vector<std::vector<std::size_t>> choices;
};

/// Draws one replicate's (contaminated) sample.
RLosSample experiment_sample(const ExperimentConfig& config, std::size_t replicate);

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::function<void(std::size_t done, std::size_t total)>& progress = {});

void write_histogram_table(std::ostream& out, const ExperimentResult& result);
void write_manifest(std::ostream& out, const ExperimentResult& result);

}  // namespace rlos
