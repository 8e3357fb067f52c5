#include "ulmc/ulmc.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <new>
#include <vector>
#include <string>

#include "ulmc/chain.hpp"
#include "ulmc/core.hpp"
#include "ulmc/integrators.hpp"
#include "ulmc/mh.hpp"
#include "ulmc/param_convert.hpp"
#include "ulmc/rng.hpp"
#include "ulmc/runner.hpp"
#include "ulmc/target.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const char* message) { g_last_error = message; }

// Runs the body, translating exceptions into status codes and recording the
// message for ulmc_last_error().
template <typename Fn>
ulmc_status guarded(Fn&& body) {
  try {
    return body();
  } catch (const ulmc::dimension_error& e) {
    set_error(e.what());
    return ULMC_ERR_DIMENSION_MISMATCH;
  } catch (const ulmc::unknown_key_error& e) {
    set_error(e.what());
    return ULMC_ERR_UNKNOWN_KEY;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return ULMC_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    set_error("out of memory");
    return ULMC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return ULMC_ERR_RUN_FAILED;
  } catch (...) {
    set_error("unknown error");
    return ULMC_ERR_INTERNAL;
  }
}

ulmc_status require(bool condition, const char* message) {
  if (condition) return ULMC_OK;
  set_error(message);
  return ULMC_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct ulmc_target {
  ulmc::TargetModel model;
};

struct ulmc_runspec {
  ulmc::RunSpec spec;
};

struct ulmc_summary {
  ulmc::ChainSummary pooled;
  double kinetic_temperature = 0.0;
  double wall_seconds = 0.0;
};

extern "C" {

const char* ulmc_version(void) { return "0.1.0"; }

const char* ulmc_status_name(ulmc_status status) {
  switch (status) {
    case ULMC_OK: return "ok";
    case ULMC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case ULMC_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case ULMC_ERR_UNKNOWN_KEY: return "unknown key";
    case ULMC_ERR_RUN_FAILED: return "run failed";
    case ULMC_ERR_IO: return "io error";
    case ULMC_ERR_SGLD_LIMIT: return "infinite-friction limit";
    case ULMC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ulmc_last_error(void) { return g_last_error.c_str(); }

ulmc_status ulmc_sgd_to_sampler(double learning_rate, double momentum, int64_t data_size,
                                double* step_size, double* friction) {
  if (auto bad = require(step_size && friction, "null output pointer")) return bad;
  return guarded([&] {
    const auto mapped = ulmc::sgd_to_sampler({learning_rate, momentum, data_size});
    if (!mapped) {
      set_error("momentum = 0 has no finite friction; use the sgld integrator");
      return ULMC_ERR_SGLD_LIMIT;
    }
    *step_size = mapped->step_size;
    *friction = mapped->friction;
    return ULMC_OK;
  });
}

ulmc_status ulmc_sampler_to_sgd(double step_size, double friction, int64_t data_size,
                                double* learning_rate, double* momentum) {
  if (auto bad = require(learning_rate && momentum, "null output pointer")) return bad;
  return guarded([&] {
    const auto params = ulmc::sampler_to_sgd(step_size, friction, data_size);
    *learning_rate = params.learning_rate;
    *momentum = params.momentum;
    return ULMC_OK;
  });
}

ulmc_status ulmc_sgd_to_em_sampler(double learning_rate, double momentum, int64_t data_size,
                                   double* step_size, double* friction) {
  if (auto bad = require(step_size && friction, "null output pointer")) return bad;
  return guarded([&] {
    const auto mapped = ulmc::sgd_to_em_sampler({learning_rate, momentum, data_size});
    *step_size = mapped.step_size;
    *friction = mapped.friction;
    return ULMC_OK;
  });
}

ulmc_status ulmc_em_sampler_to_sgd(double step_size, double friction, int64_t data_size,
                                   double* learning_rate, double* momentum) {
  if (auto bad = require(learning_rate && momentum, "null output pointer")) return bad;
  return guarded([&] {
    const auto params = ulmc::em_sampler_to_sgd(step_size, friction, data_size);
    *learning_rate = params.learning_rate;
    *momentum = params.momentum;
    return ULMC_OK;
  });
}

ulmc_status ulmc_target_create_gaussian(int32_t dim, const double* mean, const double* variance,
                                        ulmc_target** out) {
  if (auto bad = require(out && variance && dim > 0, "need variance and a positive dimension")) {
    return bad;
  }
  return guarded([&] {
    ulmc::Vector mean_vec =
        mean ? ulmc::Vector(mean, mean + dim) : ulmc::Vector(static_cast<std::size_t>(dim), 0.0);
    ulmc::Vector var_vec(variance, variance + dim);
    *out = new ulmc_target{ulmc::make_gaussian(std::move(mean_vec), std::move(var_vec))};
    return ULMC_OK;
  });
}

ulmc_status ulmc_target_create_banana(double curvature, double scale, ulmc_target** out) {
  if (auto bad = require(out != nullptr, "null output pointer")) return bad;
  return guarded([&] {
    *out = new ulmc_target{ulmc::make_banana(curvature, scale)};
    return ULMC_OK;
  });
}

ulmc_status ulmc_target_create_logistic(int64_t n, int32_t p, double prior_precision,
                                        uint64_t data_seed, double signal, double label_noise,
                                        ulmc_target** out) {
  if (auto bad = require(out != nullptr, "null output pointer")) return bad;
  return guarded([&] {
    ulmc::SyntheticLogisticParams params;
    params.n = n;
    params.p = static_cast<std::size_t>(p);
    params.seed = data_seed;
    params.signal = signal;
    params.label_noise = label_noise;
    params.prior_precision = prior_precision;
    *out = new ulmc_target{ulmc::make_synthetic_logistic(params)};
    return ULMC_OK;
  });
}

void ulmc_target_destroy(ulmc_target* target) { delete target; }

int32_t ulmc_target_dim(const ulmc_target* target) {
  return target ? static_cast<int32_t>(target->model.dim) : 0;
}

ulmc_status ulmc_target_potential(const ulmc_target* target, const double* position,
                                  double* out) {
  if (auto bad = require(target && position && out, "null argument")) return bad;
  return guarded([&] {
    std::span<const double> theta(position, target->model.dim);
    *out = target->model.potential(theta);
    return ULMC_OK;
  });
}

ulmc_status ulmc_target_gradient(const ulmc_target* target, const double* position, double* out) {
  if (auto bad = require(target && position && out, "null argument")) return bad;
  return guarded([&] {
    std::span<const double> theta(position, target->model.dim);
    const ulmc::Vector gradient = target->model.grad(theta);
    std::memcpy(out, gradient.data(), gradient.size() * sizeof(double));
    return ULMC_OK;
  });
}

ulmc_status ulmc_runspec_create(ulmc_runspec** out) {
  if (auto bad = require(out != nullptr, "null output pointer")) return bad;
  *out = new (std::nothrow) ulmc_runspec();
  if (*out == nullptr) {
    set_error("out of memory");
    return ULMC_ERR_INTERNAL;
  }
  return ULMC_OK;
}

void ulmc_runspec_destroy(ulmc_runspec* spec) { delete spec; }

ulmc_status ulmc_runspec_set(ulmc_runspec* spec, const char* key, const char* value) {
  if (auto bad = require(spec && key && value, "null argument")) return bad;
  return guarded([&] {
    ulmc::apply_key_value(spec->spec, key, value);
    return ULMC_OK;
  });
}

ulmc_status ulmc_run(const ulmc_runspec* spec, ulmc_summary** out) {
  if (auto bad = require(spec && out, "null argument")) return bad;
  return guarded([&] {
    const ulmc::RunResult result = ulmc::run(spec->spec);
    auto* summary = new ulmc_summary();
    summary->pooled = result.pooled;
    summary->kinetic_temperature = result.kinetic_temperature;
    summary->wall_seconds = result.wall_seconds;
    *out = summary;
    if (result.blew_up) {
      set_error("run hit a non-finite value and stopped early; partial output kept");
      return ULMC_ERR_RUN_FAILED;
    }
    return ULMC_OK;
  });
}

void ulmc_summary_destroy(ulmc_summary* summary) { delete summary; }

int32_t ulmc_summary_dim(const ulmc_summary* summary) {
  return summary ? static_cast<int32_t>(summary->pooled.mean.size()) : 0;
}

int64_t ulmc_summary_samples(const ulmc_summary* summary) {
  return summary ? static_cast<int64_t>(summary->pooled.n_samples) : 0;
}

double ulmc_summary_acceptance_rate(const ulmc_summary* summary) {
  return summary ? summary->pooled.acceptance_rate : 0.0;
}

double ulmc_summary_mean_potential(const ulmc_summary* summary) {
  return summary ? summary->pooled.mean_potential : 0.0;
}

double ulmc_summary_mean_kinetic(const ulmc_summary* summary) {
  return summary ? summary->pooled.mean_kinetic : 0.0;
}

double ulmc_summary_kinetic_temperature(const ulmc_summary* summary) {
  return summary ? summary->kinetic_temperature : 0.0;
}

double ulmc_summary_wall_seconds(const ulmc_summary* summary) {
  return summary ? summary->wall_seconds : 0.0;
}

ulmc_status ulmc_summary_mean(const ulmc_summary* summary, double* out) {
  if (auto bad = require(summary && out, "null argument")) return bad;
  std::memcpy(out, summary->pooled.mean.data(), summary->pooled.mean.size() * sizeof(double));
  return ULMC_OK;
}

ulmc_status ulmc_summary_variance(const ulmc_summary* summary, double* out) {
  if (auto bad = require(summary && out, "null argument")) return bad;
  std::memcpy(out, summary->pooled.variance.data(),
              summary->pooled.variance.size() * sizeof(double));
  return ULMC_OK;
}

ulmc_status ulmc_summary_ess(const ulmc_summary* summary, double* out) {
  if (auto bad = require(summary && out, "null argument")) return bad;
  std::memcpy(out, summary->pooled.ess.data(), summary->pooled.ess.size() * sizeof(double));
  return ULMC_OK;
}

ulmc_status ulmc_sweep(const ulmc_runspec* const* cells, int32_t n_cells,
                       const char* axis_names_csv, const char* const* cell_axis_values_csv,
                       const char* table_path) {
  if (auto bad = require(table_path != nullptr, "null table path")) return bad;
  if (auto bad = require(n_cells >= 0, "negative cell count")) return bad;
  if (auto bad = require(n_cells == 0 || (cells && cell_axis_values_csv),
                         "null cell arrays")) {
    return bad;
  }
  return guarded([&] {
    const auto split = [](const char* csv) {
      std::vector<std::string> out;
      if (csv == nullptr) return out;
      std::string item;
      for (const char* c = csv; *c != '\0'; ++c) {
        if (*c == ',') {
          out.push_back(item);
          item.clear();
        } else {
          item.push_back(*c);
        }
      }
      if (!item.empty() || (csv[0] != '\0' && !out.empty())) out.push_back(item);
      return out;
    };

    const std::vector<std::string> axes = split(axis_names_csv);
    std::vector<ulmc::SweepCell> sweep_cells(static_cast<std::size_t>(n_cells));
    for (int32_t i = 0; i < n_cells; ++i) {
      if (cells[i] == nullptr) {
        set_error("null cell spec");
        return ULMC_ERR_INVALID_ARGUMENT;
      }
      auto& cell = sweep_cells[static_cast<std::size_t>(i)];
      cell.spec = cells[i]->spec;
      const std::vector<std::string> values = split(cell_axis_values_csv[i]);
      if (values.size() != axes.size()) {
        set_error("cell axis values do not match the axis names");
        return ULMC_ERR_INVALID_ARGUMENT;
      }
      for (std::size_t a = 0; a < axes.size(); ++a) {
        cell.axis_values.emplace_back(axes[a], values[a]);
      }
    }

    const auto results = ulmc::sweep(sweep_cells);
    ulmc::write_sweep_table(results, table_path);
    return ULMC_OK;
  });
}

ulmc_status ulmc_backward_realizability_demo(int64_t steps, double step_size, double friction,
                                             double temperature, uint64_t seed,
                                             int64_t* realizable_count,
                                             int64_t* finite_accept_count) {
  if (auto bad = require(realizable_count && finite_accept_count, "null output pointer")) {
    return bad;
  }
  if (auto bad = require(steps > 0, "steps must be positive")) return bad;
  return guarded([&] {
    const ulmc::TargetModel target = ulmc::make_gaussian({0.0}, {1.0});
    ulmc::SamplerConfig config;
    config.step_size = step_size;
    config.friction = friction;
    config.temperature = temperature;
    config.mass = ulmc::MassMatrix::identity(1);
    config.validate(1);

    ulmc::NoiseStream stream(seed, 0);
    ulmc::PhaseState state{{0.0}, {stream.normal()}};
    int64_t realizable = 0;
    int64_t finite_accept = 0;
    for (int64_t i = 0; i < steps; ++i) {
      const ulmc::Vector gradient = target.grad(state.position);
      const ulmc::PhaseState next =
          ulmc::step_euler_maruyama(state, gradient, config, stream.normal_vector(1));
      if (ulmc::check_backward_realizability_em(state, next, config)) ++realizable;
      if (std::isfinite(ulmc::em_log_accept(state, next, target, config))) ++finite_accept;
      state = next;
    }
    *realizable_count = realizable;
    *finite_accept_count = finite_accept;
    return ULMC_OK;
  });
}

}  // extern "C"
