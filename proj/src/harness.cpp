#include "rlos/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <istream>
#include <mutex>
#include "json.hpp"
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rlos/parallel.hpp"
#include "rlos/random.hpp"
#include "rlos/simulate.hpp"
#include "rlos/version.hpp"

namespace rlos {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw std::invalid_argument("config key '" + key + "': expected a non-negative integer, got '" + value + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("config key '" + key + "': expected true/false, got '" + value + "'");
}

nlohmann::json config_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["population"] = to_string(c.population);
  switch (c.population) {
    case Population::rgev: j["params"] = {{"mu", c.gev.mu}, {"sigma", c.gev.sigma}, {"k", c.gev.k}}; break;
    case Population::rgev11:
      j["params"] = {{"mu0", c.ns.mu0}, {"mu1", c.ns.mu1}, {"sigma0", c.ns.sigma0}, {"sigma1", c.ns.sigma1}, {"k", c.ns.k}};
      break;
    case Population::wakeby:
      j["params"] = {{"xi", c.wakeby.xi},       {"alpha", c.wakeby.alpha}, {"beta", c.wakeby.beta},
                     {"gamma", c.wakeby.gamma}, {"delta", c.wakeby.delta}, {"block_size", c.block_size}};
      break;
  }
  j["n"] = c.n;
  j["R"] = c.orders;
  j["true_r"] = c.true_r;
  j["mixing_p"] = c.mixing_p;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  std::vector<std::string> tests;
  for (Method m : c.tests) tests.emplace_back(to_string(m));
  j["tests"] = tests;
  j["alpha"] = c.alpha;
  j["layer"] = to_string(c.layer);
  j["bootstrap"] = c.bootstrap;
  j["penalize"] = c.penalize;
  return j;
}

}  // namespace

std::string_view to_string(Population p) noexcept {
  switch (p) {
    case Population::rgev: return "rgev";
    case Population::rgev11: return "rgev11";
    case Population::wakeby: return "wakeby";
  }
  return "?";
}

Population parse_population(std::string_view name) {
  for (Population p : {Population::rgev, Population::rgev11, Population::wakeby})
    if (to_string(p) == name) return p;
  throw std::invalid_argument("unknown population '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  if (orders < 1) throw std::invalid_argument("experiment: R must be at least 1");
  if (true_r < 1 || true_r > orders) throw std::invalid_argument("experiment: need 1 <= true_r <= R");
  if (!(mixing_p >= 0.0 && mixing_p <= 1.0)) throw std::invalid_argument("experiment: mixing_p must lie in [0, 1]");
  if (replicates < 1) throw std::invalid_argument("experiment: replicates must be at least 1");
  if (n < 5) throw std::invalid_argument("experiment: n must be at least 5");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("experiment: alpha must lie in (0, 1)");
  if (tests.empty()) throw std::invalid_argument("experiment: no tests configured");
  if (orders < 2) throw std::invalid_argument("experiment: R must be at least 2 for sequential testing");
  for (Method m : tests)
    if (m == Method::score && model() == Model::rgev11)
      throw std::invalid_argument("experiment: the score test is not available for the rgev11 population");
  switch (population) {
    case Population::rgev: gev.validate(); break;
    case Population::rgev11: ns.at(1.0).validate(); ns.at(static_cast<double>(n)).validate(); break;
    case Population::wakeby:
      wakeby.validate();
      if (block_size < orders) throw std::invalid_argument("experiment: block_size must be at least R");
      break;
  }
}

ExperimentConfig parse_experiment_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second) throw std::invalid_argument("config key '" + key + "' given twice");
  }

  std::set<std::string> used;
  auto require = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("missing required config key '" + key + "'");
    used.insert(key);
    return it->second;
  };
  auto optional = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };

  ExperimentConfig c;
  c.population = parse_population(require("population"));
  c.n = to_unsigned("n", require("n"));
  c.orders = to_unsigned("R", require("R"));
  c.true_r = to_unsigned("true_r", require("true_r"));
  c.mixing_p = to_double("mixing_p", require("mixing_p"));
  c.replicates = to_unsigned("replicates", require("replicates"));
  c.seed = to_unsigned("seed", require("seed"));
  c.tests.clear();
  {
    std::stringstream list(require("tests"));
    std::string item;
    while (std::getline(list, item, ',')) {
      const std::string name = trim(item);
      if (!name.empty()) c.tests.push_back(parse_method(name));
    }
  }
  switch (c.population) {
    case Population::rgev:
      if (auto* v = optional("mu")) c.gev.mu = to_double("mu", *v);
      if (auto* v = optional("sigma")) c.gev.sigma = to_double("sigma", *v);
      c.gev.k = to_double("k", require("k"));
      break;
    case Population::rgev11:
      c.ns.mu0 = to_double("mu0", require("mu0"));
      c.ns.mu1 = to_double("mu1", require("mu1"));
      c.ns.sigma0 = to_double("sigma0", require("sigma0"));
      c.ns.sigma1 = to_double("sigma1", require("sigma1"));
      c.ns.k = to_double("k", require("k"));
      break;
    case Population::wakeby:
      c.wakeby.xi = to_double("wakeby_xi", require("wakeby_xi"));
      c.wakeby.alpha = to_double("wakeby_alpha", require("wakeby_alpha"));
      c.wakeby.beta = to_double("wakeby_beta", require("wakeby_beta"));
      c.wakeby.gamma = to_double("wakeby_gamma", require("wakeby_gamma"));
      c.wakeby.delta = to_double("wakeby_delta", require("wakeby_delta"));
      if (auto* v = optional("block_size")) c.block_size = to_unsigned("block_size", *v);
      break;
  }
  if (auto* v = optional("alpha")) c.alpha = to_double("alpha", *v);
  if (auto* v = optional("layer")) c.layer = parse_layer(*v);
  if (auto* v = optional("bootstrap")) c.bootstrap = to_unsigned("bootstrap", *v);
  if (auto* v = optional("penalize")) c.penalize = to_bool("penalize", *v);
  if (auto* v = optional("workers")) c.workers = static_cast<unsigned>(to_unsigned("workers", *v));
  for (const auto& [key, value] : kv)
    if (!used.contains(key)) throw std::invalid_argument("unknown config key '" + key + "'");
  c.validate();
  return c;
}

std::size_t SelectionHistogram::mode() const {
  std::size_t best = 0;
  std::size_t best_count = 0;
  for (const auto& [r, count] : counts) {
    if (count > best_count) {
      best = r;
      best_count = count;
    }
  }
  return best;
}

std::size_t SelectionHistogram::count(std::size_t r) const {
  const auto it = counts.find(r);
  return it == counts.end() ? 0 : it->second;
}

RLosSample experiment_sample(const ExperimentConfig& config, std::size_t replicate) {
  const std::uint64_t seed = derive_key(config.seed, {replicate});
  RLosSample raw;
  switch (config.population) {
    case Population::rgev: raw = sample_rgev(config.n, config.orders, config.gev, seed); break;
    case Population::rgev11: raw = sample_rgev11(config.n, config.orders, config.ns, seed); break;
    case Population::wakeby:
      raw = sample_wakeby_rlos(config.n, config.orders, config.wakeby, config.block_size, seed);
      break;
  }
  if (config.true_r >= config.orders) return raw;
  return contaminate(raw, config.true_r, config.mixing_p);
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::function<void(std::size_t, std::size_t)>& progress) {
  config.validate();
  ExperimentResult result;
  result.config = config;
  result.choices.assign(config.replicates, std::vector<std::size_t>(config.tests.size(), 0));

  TestOptions options;
  options.penalize = config.penalize;
  options.bootstrap = config.bootstrap;
  options.workers = 1;  // replicates are already spread over the pool

  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(config.replicates, config.workers, [&](std::size_t rep) {
    const RLosSample sample = experiment_sample(config, rep);
    SequenceRunner runner(sample, config.model(), [&] {
      TestOptions o = options;
      o.seed = derive_key(config.seed, {rep, 0x5C0EULL});
      return o;
    }());
    for (std::size_t m = 0; m < config.tests.size(); ++m) {
      try {
        const SelectionReport report = runner.select(config.tests[m], config.orders, config.alpha, config.layer);
        result.choices[rep][m] = report.truncated ? 0 : report.chosen_r;
      } catch (const std::exception&) {
        result.choices[rep][m] = 0;
      }
    }
    const std::size_t finished = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(finished, config.replicates);
    }
  });

  for (std::size_t m = 0; m < config.tests.size(); ++m) {
    SelectionHistogram h;
    h.method = config.tests[m];
    h.population = std::string(to_string(config.population));
    h.n = config.n;
    h.replicates = config.replicates;
    for (const auto& row : result.choices) {
      if (row[m] == 0)
        ++h.failures;
      else
        ++h.counts[row[m]];
    }
    result.histograms.push_back(std::move(h));
  }
  return result;
}

void write_histogram_table(std::ostream& out, const ExperimentResult& result) {
  out << "# rlos experiment population=" << to_string(result.config.population) << " n=" << result.config.n
      << " R=" << result.config.orders << " true_r=" << result.config.true_r
      << " replicates=" << result.config.replicates << " seed=" << result.config.seed << '\n';
  out << "method\tr\tcount\n";
  for (const auto& h : result.histograms) {
    for (std::size_t r = 1; r <= result.config.orders; ++r) out << to_string(h.method) << '\t' << r << '\t' << h.count(r) << '\n';
    out << to_string(h.method) << "\tfailures\t" << h.failures << '\n';
  }
}

void write_manifest(std::ostream& out, const ExperimentResult& result) {
  nlohmann::json j;
  j["tool"] = "rlos";
  j["version"] = kVersion;
  j["config"] = config_json(result.config);
  j["seed"] = result.config.seed;
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : result.histograms) {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [r, c] : h.counts) counts[std::to_string(r)] = c;
    hist.push_back({{"method", to_string(h.method)},
                    {"population", h.population},
                    {"n", h.n},
                    {"replicates", h.replicates},
                    {"failures", h.failures},
                    {"mode", h.mode()},
                    {"counts", counts}});
  }
  j["histograms"] = hist;
  out << j.dump(2) << '\n';
}

}  // namespace rlos
