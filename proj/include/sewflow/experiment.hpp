#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

#include "sewflow/io.hpp"
#include "sewflow/schemes.hpp"
#include "sewflow/sewing.hpp"

namespace sewflow {

/// Config is not valid JSON, misses a required key, or names an unknown built-in.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One experiment, read from a single JSON document.
///
/// Top-level keys: scheme (identity | additive | multiplicative | young | rough |
/// signature), horizon, seed, sampler, validation_tolerance, functional, path,
/// field, p, rough, schedule, start, solution, level, lift, signature.
struct ExperimentConfig {
  Json doc;
  std::string scheme;
  double horizon = 1.0;
  std::uint64_t seed = 20240607;
  /// Sampler of validate; its seed is `seed`.
  SamplerSpec sampler;
  /// Relative slack of validate: pass iff ratio <= 1 + tolerance.
  double validation_tolerance = 0.05;
};

/// Reads and checks a config; `seed` overrides the file's seed.
ExperimentConfig load_config(const std::filesystem::path& file, std::optional<std::uint64_t> seed = std::nullopt);
ExperimentConfig parse_config(const Json& doc, std::optional<std::uint64_t> seed = std::nullopt);

/// Built-in paths: linear {direction}, sin {amplitude, frequency}, circle {radius},
/// weierstrass {dim, hurst, terms}, constant {value}, csv {file}. Sampled with `samples` intervals.
DiscretePath path_from_config(const Json& desc, double horizon);
/// Smooth built-ins with exact derivatives: linear, sin, circle, constant.
SmoothPath smooth_path_from_config(const Json& desc, double horizon);
/// Built-in fields: zero, linear {matrices, radius}, scalar_exponential, rotation, sine, trig.
/// An optional gamma lowers the Hoelder exponent, with constants interpolated from sup and Lipschitz bounds.
VectorField field_from_config(const Json& desc);
/// kinds: pure_area {area, scale}, lift {path, grid, quad_refine}, discrete {path}; each with p.
RoughPath2 rough_from_config(const Json& desc, double horizon);
/// base (interval count), max_levels, min_levels, tolerance, lambda, sampler.
SewSchedule schedule_from_config(const ExperimentConfig& config);

/// Sampled almost flow of a vector-state scheme (identity, additive, young, rough).
AlmostFlow<Eigen::VectorXd> vector_flow_from_config(const ExperimentConfig& config);
/// Sampled almost flow of a matrix-state scheme (multiplicative).
AlmostFlow<Eigen::MatrixXd> matrix_flow_from_config(const ExperimentConfig& config);

/// Exit codes of the runners.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

/// report.json. Pass iff every gating condition passes.
int cmd_validate(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);
/// history.csv and summary.json. Pass iff the schedule converged.
int cmd_sew(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);
/// signature.json. Fails on a Chen violation.
int cmd_signature(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);
/// history.csv, solution.csv and defect.json. Pass iff the sewing converged and the defect is finite.
int cmd_solve(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log);

/// Dispatch by command name; maps config and run errors to exit codes.
/// Wall-clock time is appended to out/timing.log only.
int run_command(const std::string& command, const std::filesystem::path& config_file,
                const std::filesystem::path& out, std::optional<std::uint64_t> seed, std::ostream& log);

}  // namespace sewflow
