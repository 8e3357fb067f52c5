// Command-line harness for the ulmc sampling library. Talks to the library
// exclusively through the C API in ulmc/ulmc.h.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "ulmc/ulmc.h"

namespace {

using KeyValue = std::pair<std::string, std::string>;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

// Flat key = value file; '#' starts a comment.
std::vector<KeyValue> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open config file: " + path);
  std::vector<KeyValue> pairs;
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
      throw CLI::ValidationError(
          "--config", path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    pairs.emplace_back(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return pairs;
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  for (char c : csv) {
    if (c == ',') {
      out.push_back(trim(item));
      item.clear();
    } else {
      item.push_back(c);
    }
  }
  out.push_back(trim(item));
  return out;
}

std::string default_out_dir() {
  const char* env = std::getenv("ULMC_OUT_DIR");
  return env != nullptr && env[0] != '\0' ? std::string(env) : std::string(".");
}

[[noreturn]] void die(const std::string& message, int code = 1) {
  std::fprintf(stderr, "error: %s\n", message.c_str());
  std::exit(code);
}

void check(ulmc_status status, int failure_code = 1) {
  if (status != ULMC_OK) {
    die(std::string(ulmc_status_name(status)) + ": " + ulmc_last_error(), failure_code);
  }
}

// One sampling-spec flag: CLI spelling, config key, and where the parsed
// string lands. Only flags the user passed are forwarded, so library defaults
// and config-file values stay in force otherwise.
struct SpecFlag {
  std::string flag;
  std::string key;
  std::string value;
  bool is_toggle = false;
};

struct SpecFlagSet {
  CLI::App* command;
  std::string config_path;
  std::vector<std::unique_ptr<SpecFlag>> flags;

  void add(const std::string& flag, const std::string& key, const std::string& help) {
    auto entry = std::make_unique<SpecFlag>();
    entry->flag = flag;
    entry->key = key;
    command->add_option(flag, entry->value, help);
    flags.push_back(std::move(entry));
  }

  void add_toggle(const std::string& flag, const std::string& key, const std::string& help) {
    auto entry = std::make_unique<SpecFlag>();
    entry->flag = flag;
    entry->key = key;
    entry->is_toggle = true;
    command->add_flag(flag, help);
    flags.push_back(std::move(entry));
  }

  // Config first, then flags, so flags override the file.
  std::vector<KeyValue> collect() const {
    std::vector<KeyValue> pairs;
    if (!config_path.empty()) pairs = read_config(config_path);
    for (const auto& entry : flags) {
      if (command->count(entry->flag) > 0) {
        pairs.emplace_back(entry->key, entry->is_toggle ? "true" : entry->value);
      }
    }
    return pairs;
  }
};

SpecFlagSet make_spec_flags(CLI::App* command) {
  SpecFlagSet set;
  set.command = command;
  command->add_option("--config", set.config_path,
                      "Flat key = value config file; flags override it");

  set.add("--target", "target", "Target distribution: gaussian, banana or logistic");
  set.add("--mean", "gaussian.mean", "Gaussian mean, comma separated");
  set.add("--variance", "gaussian.variance", "Gaussian variances, comma separated");
  set.add("--banana-curvature", "banana.curvature", "Warp strength of the banana target");
  set.add("--banana-scale", "banana.scale", "First-coordinate scale of the banana target");
  set.add("--data-n", "logistic.n", "Synthetic logistic data: number of points");
  set.add("--data-p", "logistic.p", "Synthetic logistic data: number of features");
  set.add("--data-seed", "logistic.seed", "Synthetic logistic data: generator seed");
  set.add("--signal", "logistic.signal", "Synthetic logistic data: coefficient scale");
  set.add("--label-noise", "logistic.label_noise", "Synthetic logistic data: label flip rate");
  set.add("--prior-precision", "logistic.prior_precision", "Gaussian prior precision");
  set.add("--integrator", "integrator", "euler_maruyama, obabo, leapfrog or sgld");
  set.add("--correction", "correction", "none, per_step or multi_step");
  set.add("--multi-step-n", "multi_step_n", "Inner steps per deferred-acceptance round");
  set.add("--steps", "steps", "Outer transitions to run");
  set.add("--chains", "chains", "Independent chains (one thread each)");
  set.add("--seed", "seed", "Random seed; a run is a pure function of spec and seed");
  set.add("--step-size", "step_size", "Integrator step size (sampler-native)");
  set.add("--friction", "friction", "Friction coefficient (sampler-native)");
  set.add("--lr", "lr", "Learning rate (sgd-native; needs --momentum)");
  set.add("--momentum", "momentum", "Momentum in [0,1) (sgd-native; needs --lr)");
  set.add("--temperature", "temperature", "Target temperature");
  set.add("--mass", "mass", "Diagonal mass matrix entries, comma separated");
  set.add("--init", "init", "Initial position, comma separated");
  set.add("--gradient", "gradient", "Gradient source: exact or minibatch");
  set.add("--batch-size", "batch_size", "Minibatch size; must divide the data size");
  set.add("--thin", "thin", "Keep every k-th sample in the samples file");
  set.add_toggle("--pre-draw-noise", "pre_draw_noise",
                 "Draw each round's noise up front instead of streaming");
  set.add_toggle("--resample-between-rounds", "resample_between_rounds",
                 "Fully redraw the momentum between deferred-acceptance rounds");
  return set;
}

struct RunspecDeleter {
  void operator()(ulmc_runspec* p) const { ulmc_runspec_destroy(p); }
};
using RunspecPtr = std::unique_ptr<ulmc_runspec, RunspecDeleter>;

RunspecPtr build_runspec(const std::vector<KeyValue>& pairs) {
  ulmc_runspec* raw = nullptr;
  check(ulmc_runspec_create(&raw));
  RunspecPtr spec(raw);
  for (const auto& [key, value] : pairs) {
    check(ulmc_runspec_set(spec.get(), key.c_str(), value.c_str()));
  }
  return spec;
}

void print_summary(const ulmc_summary* summary) {
  const int32_t dim = ulmc_summary_dim(summary);
  std::vector<double> mean(static_cast<std::size_t>(dim));
  std::vector<double> variance(static_cast<std::size_t>(dim));
  std::vector<double> ess(static_cast<std::size_t>(dim));
  check(ulmc_summary_mean(summary, mean.data()));
  check(ulmc_summary_variance(summary, variance.data()));
  check(ulmc_summary_ess(summary, ess.data()));

  std::printf("samples: %lld\n", static_cast<long long>(ulmc_summary_samples(summary)));
  std::printf("acceptance rate: %.4f\n", ulmc_summary_acceptance_rate(summary));
  for (int32_t j = 0; j < dim; ++j) {
    std::printf("theta_%d: mean % .6g  variance %.6g  ess %.1f\n", j,
                mean[static_cast<std::size_t>(j)], variance[static_cast<std::size_t>(j)],
                ess[static_cast<std::size_t>(j)]);
  }
  std::printf("mean potential: %.6g\n", ulmc_summary_mean_potential(summary));
  std::printf("mean kinetic: %.6g\n", ulmc_summary_mean_kinetic(summary));
  std::printf("kinetic temperature: %.6g\n", ulmc_summary_kinetic_temperature(summary));
  std::printf("wall time: %.3f s\n", ulmc_summary_wall_seconds(summary));
}

int do_run(const SpecFlagSet& flags) {
  std::vector<KeyValue> pairs = flags.collect();
  bool has_out = false;
  for (const auto& [key, value] : pairs) has_out = has_out || key == "out";
  if (!has_out) pairs.emplace_back("out", default_out_dir() + "/ulmc_run");

  const RunspecPtr spec = build_runspec(pairs);
  ulmc_summary* summary = nullptr;
  const ulmc_status status = ulmc_run(spec.get(), &summary);
  if (status != ULMC_OK && summary == nullptr) {
    die(std::string(ulmc_status_name(status)) + ": " + ulmc_last_error());
  }
  print_summary(summary);
  for (const auto& [key, value] : pairs) {
    if (key == "out") {
      std::printf("samples file: %s_samples.csv\n", value.c_str());
      std::printf("summary file: %s_summary.csv\n", value.c_str());
    }
  }
  ulmc_summary_destroy(summary);
  if (status != ULMC_OK) {
    std::fprintf(stderr, "error: %s\n", ulmc_last_error());
    return 2;
  }
  return 0;
}

int do_sweep(const SpecFlagSet& flags, const std::string& out_dir) {
  // Comma lists on the numeric sampler flags become sweep axes.
  static const char* kAxisKeys[] = {"step_size", "friction",   "lr",
                                    "momentum",  "temperature", "batch_size"};
  std::vector<KeyValue> base;
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const auto& [key, value] : flags.collect()) {
    bool is_axis_key = false;
    for (const char* axis : kAxisKeys) is_axis_key = is_axis_key || key == axis;
    const std::vector<std::string> values = split_csv(value);
    if (is_axis_key && values.size() > 1) {
      axes.emplace_back(key, values);
    } else {
      base.emplace_back(key, value);
    }
  }

  // Cross product, first axis slowest.
  std::vector<std::vector<KeyValue>> cells_axes{{}};
  for (const auto& [key, values] : axes) {
    std::vector<std::vector<KeyValue>> expanded;
    for (const auto& cell : cells_axes) {
      for (const auto& value : values) {
        auto next = cell;
        next.emplace_back(key, value);
        expanded.push_back(std::move(next));
      }
    }
    cells_axes = std::move(expanded);
  }
  if (axes.empty()) cells_axes.clear();

  std::string axis_names;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    if (a > 0) axis_names += ',';
    axis_names += axes[a].first;
  }

  std::vector<RunspecPtr> specs;
  std::vector<std::string> cell_values;
  for (std::size_t i = 0; i < cells_axes.size(); ++i) {
    std::vector<KeyValue> pairs = base;
    std::string values_csv;
    for (std::size_t a = 0; a < cells_axes[i].size(); ++a) {
      pairs.push_back(cells_axes[i][a]);
      if (a > 0) values_csv += ',';
      values_csv += cells_axes[i][a].second;
    }
    pairs.emplace_back("out", out_dir + "/cell_" + std::to_string(i));
    specs.push_back(build_runspec(pairs));
    cell_values.push_back(std::move(values_csv));
  }

  std::vector<const ulmc_runspec*> raw_specs;
  std::vector<const char*> raw_values;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    raw_specs.push_back(specs[i].get());
    raw_values.push_back(cell_values[i].c_str());
  }

  const std::string table_path = out_dir + "/sweep_table.csv";
  check(ulmc_sweep(raw_specs.data(), static_cast<int32_t>(raw_specs.size()), axis_names.c_str(),
                   raw_values.data(), table_path.c_str()));
  std::printf("cells: %zu\n", specs.size());
  std::printf("sweep table: %s\n", table_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Underdamped Langevin Monte Carlo harness"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run chains and write sample and summary files");
  SpecFlagSet run_flags = make_spec_flags(run_cmd);
  run_flags.add("--out", "out", "Output path prefix (default $ULMC_OUT_DIR/ulmc_run)");

  auto* sweep_cmd =
      app.add_subcommand("sweep", "Run a grid of cells; comma lists on numeric flags are axes");
  SpecFlagSet sweep_flags = make_spec_flags(sweep_cmd);
  std::string sweep_out;
  sweep_cmd->add_option("--out", sweep_out, "Output directory (default $ULMC_OUT_DIR)");

  auto* demo_cmd = app.add_subcommand(
      "theorem1-demo",
      "Count backward-realizable steps of the first-order (SGHMC-style) update");
  std::int64_t demo_steps = 10000;
  double demo_step_size = 0.1;
  double demo_friction = 0.5;
  double demo_temperature = 1.0;
  std::uint64_t demo_seed = 0;
  demo_cmd->add_option("--steps", demo_steps, "Steps to simulate");
  demo_cmd->add_option("--step-size", demo_step_size, "Step size");
  demo_cmd->add_option("--friction", demo_friction, "Friction coefficient");
  demo_cmd->add_option("--temperature", demo_temperature, "Temperature");
  demo_cmd->add_option("--seed", demo_seed, "Random seed");

  auto* convert_cmd =
      app.add_subcommand("convert-params", "Convert between (lr, momentum) and (h, friction)");
  double convert_lr = 0.0, convert_momentum = -1.0;
  double convert_step = 0.0, convert_friction = -1.0;
  std::int64_t convert_n = 0;
  bool convert_em = false;
  convert_cmd->add_option("--lr", convert_lr, "Learning rate (sgd-native input)");
  convert_cmd->add_option("--momentum", convert_momentum, "Momentum (sgd-native input)");
  convert_cmd->add_option("--step-size", convert_step, "Step size (sampler-native input)");
  convert_cmd->add_option("--friction", convert_friction, "Friction (sampler-native input)");
  convert_cmd->add_option("--data-size", convert_n, "Training-set size N")->required();
  convert_cmd->add_flag("--first-order", convert_em,
                        "Use the first-order (Euler) momentum map 1 - friction*h");

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) return do_run(run_flags);

  if (sweep_cmd->parsed()) {
    const std::string out_dir = sweep_cmd->count("--out") > 0 ? sweep_out : default_out_dir();
    return do_sweep(sweep_flags, out_dir);
  }

  if (demo_cmd->parsed()) {
    std::int64_t realizable = 0;
    std::int64_t finite_accept = 0;
    check(ulmc_backward_realizability_demo(demo_steps, demo_step_size, demo_friction,
                                           demo_temperature, demo_seed, &realizable,
                                           &finite_accept));
    std::printf("backward-realizable: %lld / %lld\n", static_cast<long long>(realizable),
                static_cast<long long>(demo_steps));
    std::printf("finite log-acceptance: %lld / %lld\n", static_cast<long long>(finite_accept),
                static_cast<long long>(demo_steps));
    return 0;
  }

  if (convert_cmd->parsed()) {
    const bool sgd_in = convert_cmd->count("--lr") > 0 || convert_cmd->count("--momentum") > 0;
    const bool sampler_in =
        convert_cmd->count("--step-size") > 0 || convert_cmd->count("--friction") > 0;
    if (sgd_in == sampler_in) {
      die("give exactly one input parameterization: --lr/--momentum or --step-size/--friction");
    }
    if (sgd_in) {
      double step = 0.0, friction = 0.0;
      const ulmc_status status =
          convert_em ? ulmc_sgd_to_em_sampler(convert_lr, convert_momentum, convert_n, &step,
                                              &friction)
                     : ulmc_sgd_to_sampler(convert_lr, convert_momentum, convert_n, &step,
                                           &friction);
      if (status == ULMC_ERR_SGLD_LIMIT) {
        std::printf("step_size = %.17g\n", std::sqrt(convert_lr / static_cast<double>(convert_n)));
        std::printf("friction = infinite (momentum = 0); use the sgld integrator\n");
        return 0;
      }
      check(status);
      std::printf("step_size = %.17g\n", step);
      std::printf("friction = %.17g\n", friction);
    } else {
      double lr = 0.0, momentum = 0.0;
      const ulmc_status status =
          convert_em ? ulmc_em_sampler_to_sgd(convert_step, convert_friction, convert_n, &lr,
                                              &momentum)
                     : ulmc_sampler_to_sgd(convert_step, convert_friction, convert_n, &lr,
                                           &momentum);
      check(status);
      std::printf("lr = %.17g\n", lr);
      std::printf("momentum = %.17g\n", momentum);
    }
    return 0;
  }

  return 0;
}
