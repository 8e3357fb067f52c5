#include "ulmc/runner.hpp"

#include <charconv>
#include <memory>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ulmc/param_convert.hpp"

namespace ulmc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double parsed = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return parsed;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': cannot parse '" + value +
                                "' as a number");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long parsed = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return parsed;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': cannot parse '" + value +
                                "' as an integer");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("config key '" + key + "': cannot parse '" + value +
                              "' as a boolean");
}

Vector parse_vector(const std::string& key, const std::string& value) {
  Vector out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw std::invalid_argument("config key '" + key + "': empty list");
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buffer, ptr);
}

void apply_key_value(RunSpec& spec, const std::string& key, const std::string& value) {
  if (key == "target") {
    if (value != "gaussian" && value != "banana" && value != "logistic") {
      throw std::invalid_argument("unknown target '" + value +
                                  "' (expected gaussian, banana or logistic)");
    }
    spec.target_name = value;
  } else if (key == "gaussian.mean") {
    spec.gaussian_mean = parse_vector(key, value);
  } else if (key == "gaussian.variance") {
    spec.gaussian_variance = parse_vector(key, value);
  } else if (key == "banana.curvature") {
    spec.banana_curvature = parse_double(key, value);
  } else if (key == "banana.scale") {
    spec.banana_scale = parse_double(key, value);
  } else if (key == "logistic.n") {
    spec.logistic.n = parse_int(key, value);
  } else if (key == "logistic.p") {
    spec.logistic.p = static_cast<std::size_t>(parse_int(key, value));
  } else if (key == "logistic.seed") {
    spec.logistic.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "logistic.signal") {
    spec.logistic.signal = parse_double(key, value);
  } else if (key == "logistic.label_noise") {
    spec.logistic.label_noise = parse_double(key, value);
  } else if (key == "logistic.prior_precision") {
    spec.logistic.prior_precision = parse_double(key, value);
  } else if (key == "integrator") {
    const auto kind = parse_integrator(value);
    if (!kind) throw std::invalid_argument("unknown integrator '" + value + "'");
    spec.integrator = *kind;
  } else if (key == "correction") {
    const auto mode = parse_correction(value);
    if (!mode) throw std::invalid_argument("unknown correction mode '" + value + "'");
    spec.correction = *mode;
  } else if (key == "multi_step_n") {
    spec.multi_step_n = static_cast<int>(parse_int(key, value));
  } else if (key == "steps") {
    spec.steps = parse_int(key, value);
  } else if (key == "chains") {
    spec.chains = parse_int(key, value);
  } else if (key == "seed") {
    spec.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "step_size") {
    spec.step_size = parse_double(key, value);
  } else if (key == "friction") {
    spec.friction = parse_double(key, value);
  } else if (key == "lr" || key == "learning_rate") {
    spec.learning_rate = parse_double(key, value);
  } else if (key == "momentum") {
    spec.momentum = parse_double(key, value);
  } else if (key == "temperature") {
    spec.temperature = parse_double(key, value);
  } else if (key == "mass") {
    spec.mass_diagonal = parse_vector(key, value);
  } else if (key == "init") {
    spec.initial_position = parse_vector(key, value);
  } else if (key == "gradient") {
    if (value != "exact" && value != "minibatch") {
      throw std::invalid_argument("gradient mode must be exact or minibatch");
    }
    spec.gradient_mode = value;
  } else if (key == "batch_size") {
    spec.batch_size = parse_int(key, value);
  } else if (key == "pre_draw_noise") {
    spec.pre_draw_noise = parse_bool(key, value);
  } else if (key == "resample_between_rounds") {
    spec.resample_momentum_between_rounds = parse_bool(key, value);
  } else if (key == "out") {
    spec.out_prefix = value;
  } else if (key == "thin") {
    spec.thin = parse_int(key, value);
  } else {
    throw unknown_key_error("unknown config key '" + key + "'");
  }
}

RunSpec spec_from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
  RunSpec spec;
  for (const auto& [key, value] : pairs) apply_key_value(spec, key, value);
  return spec;
}

std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'key = value'");
    }
    pairs.emplace_back(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return pairs;
}

TargetModel build_target(const RunSpec& spec) {
  if (spec.target_name == "gaussian") {
    Vector mean = spec.gaussian_mean;
    if (mean.empty()) mean.assign(spec.gaussian_variance.size(), 0.0);
    return make_gaussian(std::move(mean), spec.gaussian_variance);
  }
  if (spec.target_name == "banana") {
    return make_banana(spec.banana_curvature, spec.banana_scale);
  }
  return make_synthetic_logistic(spec.logistic);
}

SamplerConfig build_config(const RunSpec& spec, const TargetModel& target) {
  const bool sampler_native = spec.step_size.has_value() || spec.friction.has_value();
  const bool sgd_native = spec.learning_rate.has_value() || spec.momentum.has_value();
  if (sampler_native && sgd_native) {
    throw std::invalid_argument(
        "give either step_size/friction or lr/momentum, not a mix of both parameterizations");
  }

  SamplerConfig config;
  config.temperature = spec.temperature;
  config.mass = spec.mass_diagonal.empty() ? MassMatrix::identity(target.dim)
                                           : MassMatrix(spec.mass_diagonal);

  if (sgd_native) {
    if (!spec.learning_rate || !spec.momentum) {
      throw std::invalid_argument("the sgd parameterization needs both lr and momentum");
    }
    const SGDParams params{*spec.learning_rate, *spec.momentum, target.data_size};
    const auto mapped = sgd_to_sampler(params);
    if (!mapped) {
      // momentum == 0 is the infinite-friction limit.
      if (spec.integrator != IntegratorKind::sgld) {
        throw std::invalid_argument(
            "momentum = 0 has no finite friction; select the sgld integrator");
      }
      config.step_size = std::sqrt(params.learning_rate / static_cast<double>(params.data_size));
      config.friction = 0.0;  // unused by the sgld update
    } else {
      config.step_size = mapped->step_size;
      config.friction = mapped->friction;
    }
  } else {
    config.step_size = spec.step_size.value_or(0.1);
    config.friction = spec.friction.value_or(1.0);
  }
  config.validate(target.dim);
  return config;
}

namespace {

// Above this dimension the samples file stores summary columns instead of
// one column per coordinate.
constexpr std::size_t kMaxColumnsPerCoordinate = 64;

void write_samples_csv(const std::string& path, const std::vector<const Chain*>& chains,
                       std::int64_t thin) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);

  const std::size_t dim = chains.empty() ? 0 : chains.front()->target().dim;
  const bool per_coordinate = dim <= kMaxColumnsPerCoordinate;
  out << "step,chain";
  if (per_coordinate) {
    for (std::size_t j = 0; j < dim; ++j) out << ",theta_" << j;
  } else {
    out << ",theta_mean,theta_norm";
  }
  out << ",potential,kinetic,log_alpha,accepted\n";

  for (std::size_t c = 0; c < chains.size(); ++c) {
    const auto& samples = chains[c]->samples();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (thin > 1 && static_cast<std::int64_t>(i) % thin != 0) continue;
      const SampleRow& row = samples[i];
      out << row.step << ',' << c;
      if (per_coordinate) {
        for (std::size_t j = 0; j < dim; ++j) out << ',' << format_double(row.position[j]);
      } else {
        double sum = 0.0;
        double sq = 0.0;
        for (double x : row.position) {
          sum += x;
          sq += x * x;
        }
        out << ',' << format_double(sum / static_cast<double>(dim)) << ','
            << format_double(std::sqrt(sq));
      }
      out << ',' << format_double(row.potential) << ',' << format_double(row.kinetic) << ','
          << format_double(row.log_alpha) << ',' << (row.accepted ? 1 : 0) << '\n';
    }
  }
}

void write_summary_csv(const std::string& path, const std::vector<ChainSummary>& per_chain,
                       const ChainSummary& pooled, double kinetic_temp) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << "chain,statistic,coordinate,value\n";

  const auto emit = [&out](const std::string& chain, const ChainSummary& s) {
    out << chain << ",n_samples,," << s.n_samples << '\n';
    out << chain << ",acceptance_rate,," << format_double(s.acceptance_rate) << '\n';
    for (std::size_t j = 0; j < s.mean.size(); ++j) {
      out << chain << ",mean," << j << ',' << format_double(s.mean[j]) << '\n';
    }
    for (std::size_t j = 0; j < s.variance.size(); ++j) {
      out << chain << ",variance," << j << ',' << format_double(s.variance[j]) << '\n';
    }
    for (std::size_t j = 0; j < s.ess.size(); ++j) {
      out << chain << ",ess," << j << ',' << format_double(s.ess[j]) << '\n';
    }
    out << chain << ",mean_potential,," << format_double(s.mean_potential) << '\n';
    out << chain << ",mean_kinetic,," << format_double(s.mean_kinetic) << '\n';
  };

  for (std::size_t c = 0; c < per_chain.size(); ++c) emit(std::to_string(c), per_chain[c]);
  emit("pooled", pooled);
  out << "pooled,kinetic_temperature,," << format_double(kinetic_temp) << '\n';
}

}  // namespace

RunResult run(const RunSpec& spec) {
  const auto start_time = std::chrono::steady_clock::now();

  if (spec.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (spec.chains < 1) throw std::invalid_argument("chains must be >= 1");

  const TargetModel target = build_target(spec);
  const SamplerConfig config = build_config(spec, target);

  ChainOptions options;
  options.integrator = spec.integrator;
  options.correction = spec.correction;
  options.multi_step_n = spec.multi_step_n;
  options.use_minibatch = spec.gradient_mode == "minibatch";
  options.batch_size = spec.batch_size;
  options.pre_draw_noise = spec.pre_draw_noise;
  options.resample_momentum_between_rounds = spec.resample_momentum_between_rounds;
  options.seed = spec.seed;

  if (options.use_minibatch && options.batch_size < 1) {
    throw std::invalid_argument("minibatch gradients need batch_size >= 1");
  }

  std::vector<std::unique_ptr<Chain>> chains;
  chains.reserve(static_cast<std::size_t>(spec.chains));
  for (std::int64_t c = 0; c < spec.chains; ++c) {
    ChainOptions opt = options;
    opt.chain_id = static_cast<std::uint64_t>(c);
    chains.push_back(
        std::make_unique<Chain>(target, config, opt, spec.initial_position));
  }

  // One thread per chain; chains are independent with disjoint noise streams.
  std::vector<std::exception_ptr> errors(chains.size());
  if (chains.size() == 1) {
    chains[0]->run(spec.steps);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c) {
      workers.emplace_back([&, c] {
        try {
          chains[c]->run(spec.steps);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  RunResult result;
  for (const auto& chain : chains) result.blew_up = result.blew_up || chain->failed();

  // Pool samples across chains in chain order.
  std::size_t total = 0;
  for (const auto& chain : chains) total += chain->samples().size();
  if (total < 2) throw std::runtime_error("run produced fewer than 2 samples");

  const std::size_t dim = target.dim;
  std::vector<double> flat(total * dim);
  std::vector<double> momenta(total * dim);
  std::vector<double> potentials(total);
  std::vector<double> kinetics(total);
  std::vector<AcceptanceRecord> records;
  std::size_t row = 0;
  for (const auto& chain : chains) {
    result.per_chain.push_back(chain->summary());
    for (const auto& sample : chain->samples()) {
      for (std::size_t j = 0; j < dim; ++j) {
        flat[row * dim + j] = sample.position[j];
        momenta[row * dim + j] = sample.momentum[j];
      }
      potentials[row] = sample.potential;
      kinetics[row] = sample.kinetic;
      ++row;
    }
    records.insert(records.end(), chain->records().begin(), chain->records().end());
  }
  result.pooled = summarize(flat, dim, potentials, kinetics, records);
  result.kinetic_temperature = spec.integrator == IntegratorKind::sgld
                                   ? kNaN
                                   : kinetic_temperature(momenta, dim, config.mass);

  if (!spec.out_prefix.empty()) {
    const std::filesystem::path prefix(spec.out_prefix);
    if (prefix.has_parent_path()) std::filesystem::create_directories(prefix.parent_path());

    std::int64_t thin = spec.thin;
    if (thin < 1) {
      // Auto thinning keeps the samples file at or under 1e5 rows.
      const std::int64_t rows = static_cast<std::int64_t>(total);
      thin = (rows + 100000 - 1) / 100000;
      if (thin < 1) thin = 1;
    }
    std::vector<const Chain*> views;
    views.reserve(chains.size());
    for (const auto& chain : chains) views.push_back(chain.get());

    result.samples_path = spec.out_prefix + "_samples.csv";
    result.summary_path = spec.out_prefix + "_summary.csv";
    write_samples_csv(result.samples_path, views, thin);
    write_summary_csv(result.summary_path, result.per_chain, result.pooled,
                      result.kinetic_temperature);
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  return result;
}

std::vector<SweepCellResult> sweep(const std::vector<SweepCell>& cells) {
  std::vector<SweepCellResult> results(cells.size());
  std::vector<std::thread> workers;
  workers.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    workers.emplace_back([&, i] {
      results[i].axis_values = cells[i].axis_values;
      try {
        const RunResult r = run(cells[i].spec);
        results[i].ok = !r.blew_up;
        if (r.blew_up) results[i].error = "numerical blow-up";
        results[i].acceptance_rate = r.pooled.acceptance_rate;
        results[i].mean_potential = r.pooled.mean_potential;
        results[i].mean_kinetic = r.pooled.mean_kinetic;
      } catch (const std::exception& e) {
        results[i].ok = false;
        results[i].error = e.what();
      }
    });
  }
  for (auto& w : workers) w.join();
  return results;
}

void write_sweep_table(const std::vector<SweepCellResult>& results, const std::string& path) {
  const std::filesystem::path table_path(path);
  if (table_path.has_parent_path()) std::filesystem::create_directories(table_path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);

  out << "cell";
  if (!results.empty()) {
    for (const auto& [axis, _] : results.front().axis_values) out << ',' << axis;
  }
  out << ",status,error,acceptance_rate,mean_potential,mean_kinetic\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    out << i;
    for (const auto& [_, value] : r.axis_values) out << ',' << value;
    out << ',' << (r.ok ? "ok" : "failed") << ',' << '"' << r.error << '"' << ','
        << format_double(r.acceptance_rate) << ',' << format_double(r.mean_potential) << ','
        << format_double(r.mean_kinetic) << '\n';
  }
}

}  // namespace ulmc
