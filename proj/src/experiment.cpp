#include "sewflow/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sewflow/solutions.hpp"

namespace sewflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class T>
T get_or(const Json& doc, const char* key, T fallback) {
  if (!doc.is_object() || !doc.contains(key) || doc.at(key).is_null()) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("key '") + key + "': " + e.what());
  }
}

const Json& require(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  return doc.at(key);
}

std::string name_of(const Json& desc, const char* what) {
  const auto& n = require(desc, "name");
  if (!n.is_string()) throw ConfigError(std::string(what) + " name must be a string");
  return n.get<std::string>();
}

VectorXd vector_of(const Json& v, const char* what) {
  if (!v.is_array() || v.empty()) throw ConfigError(std::string(what) + " must be a non-empty array");
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(std::string(what) + " entries must be numbers");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

MatrixXd matrix_of(const Json& v, const char* what) {
  if (!v.is_array() || v.empty() || !v[0].is_array()) throw ConfigError(std::string(what) + " must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = static_cast<Eigen::Index>(v[0].size());
  MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(std::string(what) + " rows must have equal length");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto& x = row[static_cast<std::size_t>(j)];
      if (!x.is_number()) throw ConfigError(std::string(what) + " entries must be numbers");
      out(i, j) = x.get<double>();
    }
  }
  return out;
}

Json vector_json(const VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(json_number(v(i)));
  return out;
}

Json state_json(const VectorXd& v) { return vector_json(v); }
Json state_json(const MatrixXd& m) { return to_json(m); }

Json history_json_summary(std::span<const LevelRecord> history) {
  Json out = Json::array();
  for (const auto& h : history) out.push_back(json_number(h.gap));
  return out;
}

std::size_t samples_of(const Json& desc, std::size_t fallback) {
  const auto n = get_or<std::size_t>(desc, "samples", fallback);
  if (n < 1) throw ConfigError("path samples must be >= 1");
  return n;
}

/// Smooth built-ins as (x, dx, dim); empty x when the name is not smooth.
SmoothPath smooth_builtin(const Json& desc, double horizon) {
  const std::string name = name_of(desc, "path");
  SmoothPath out;
  out.horizon = horizon;
  if (name == "linear") {
    const VectorXd v = desc.contains("direction") ? vector_of(desc.at("direction"), "direction") : VectorXd::Ones(1);
    out.dim = static_cast<int>(v.size());
    out.x = [v](double t) -> VectorXd { return t * v; };
    out.dx = [v](double) -> VectorXd { return v; };
  } else if (name == "sin") {
    const double amp = get_or(desc, "amplitude", 1.0);
    const double freq = get_or(desc, "frequency", 1.0);
    out.dim = 1;
    out.x = [amp, freq](double t) { return VectorXd::Constant(1, amp * std::sin(freq * t)); };
    out.dx = [amp, freq](double t) { return VectorXd::Constant(1, amp * freq * std::cos(freq * t)); };
  } else if (name == "circle") {
    const double r = get_or(desc, "radius", 1.0);
    out.dim = 2;
    out.x = [r](double t) {
      VectorXd v(2);
      v << r * std::cos(t), r * std::sin(t);
      return v;
    };
    out.dx = [r](double t) {
      VectorXd v(2);
      v << -r * std::sin(t), r * std::cos(t);
      return v;
    };
  } else if (name == "constant") {
    const VectorXd c = desc.contains("value") ? vector_of(desc.at("value"), "value") : VectorXd::Zero(1);
    out.dim = static_cast<int>(c.size());
    out.x = [c](double) -> VectorXd { return c; };
    out.dx = [c](double) -> VectorXd { return VectorXd::Zero(c.size()); };
  }
  return out;
}

std::function<VectorXd(double)> weierstrass(const Json& desc) {
  const int dim = get_or(desc, "dim", 1);
  const double hurst = get_or(desc, "hurst", 0.4);
  const int terms = get_or(desc, "terms", 12);
  if (dim < 1 || dim > 2) throw ConfigError("weierstrass path supports dim 1 or 2");
  if (!(hurst > 0.0 && hurst <= 1.0)) throw ConfigError("weierstrass hurst must lie in (0, 1]");
  if (terms < 1) throw ConfigError("weierstrass terms must be >= 1");
  return [dim, hurst, terms](double t) {
    VectorXd v = VectorXd::Zero(dim);
    for (int k = 0; k < terms; ++k) {
      const double a = std::pow(2.0, -k * hurst);
      const double arg = kTwoPi * std::ldexp(t, k);
      v(0) += a * std::sin(arg);
      if (dim == 2) v(1) += a * (std::cos(arg) - 1.0);
    }
    return v;
  };
}

/// Vector-state additive functionals by name.
AlmostFlow<VectorXd> additive_from_config(const ExperimentConfig& config, bool identity) {
  const double T = config.horizon;
  const Json fdesc = identity ? Json{{"name", "zero"}} : require(config.doc, "functional");
  const std::string name = name_of(fdesc, "functional");
  std::function<VectorXd(double, double)> ev;
  VectorXd prototype = VectorXd::Zero(1);
  double bound = 0.0;
  double c = 1.0;
  double theta = 2.0;
  if (name == "zero") {
    const int dim = get_or(fdesc, "dim", 1);
    if (dim < 1) throw ConfigError("functional dim must be >= 1");
    prototype = VectorXd::Zero(dim);
    ev = [dim](double, double) -> VectorXd { return VectorXd::Zero(dim); };
  } else if (name == "x_dx") {
    // x_t = t: alpha_{s,t} = s (t - s), defect (s - r)(t - s) <= ((t - r) / 2)^2.
    ev = [](double s, double t) { return VectorXd::Constant(1, s * (t - s)); };
    bound = T * T / 4.0;
    c = 0.5;
  } else if (name == "sqrt_increment") {
    // Defect of order (t - r)^{1/2}: fails h3 against any varpi with theta > 1/2.
    ev = [](double s, double t) { return VectorXd::Constant(1, std::sqrt(t - s)); };
    bound = std::sqrt(T);
  } else {
    throw ConfigError("unknown additive functional '" + name + "'");
  }
  const Json omega = get_or(fdesc, "omega", Json::object());
  AdditiveFunctional<VectorXd> alpha{ev,
                                     control_linear(get_or(omega, "c", c)),
                                     remainder_power(get_or(get_or(fdesc, "varpi", Json::object()), "theta", theta)),
                                     get_or(fdesc, "bound", bound),
                                     T,
                                     prototype};
  return additive_flow(alpha);
}

}  // namespace

ExperimentConfig parse_config(const Json& doc, std::optional<std::uint64_t> seed) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig config;
  config.doc = doc;
  const auto& scheme = require(doc, "scheme");
  if (!scheme.is_string()) throw ConfigError("scheme must be a string");
  config.scheme = scheme.get<std::string>();
  static const char* known[] = {"identity", "additive", "multiplicative", "young", "rough", "signature"};
  if (std::find(std::begin(known), std::end(known), config.scheme) == std::end(known)) {
    throw ConfigError("unknown scheme '" + config.scheme + "'");
  }
  config.horizon = get_or(doc, "horizon", 1.0);
  if (!(config.horizon > 0.0)) throw ConfigError("horizon must be positive");
  config.seed = seed.value_or(get_or<std::uint64_t>(doc, "seed", config.seed));
  try {
    config.sampler = sampler_from_json(get_or(doc, "sampler", Json::object()));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  config.sampler.seed = config.seed;
  config.validation_tolerance = get_or(doc, "validation_tolerance", config.validation_tolerance);
  if (!(config.validation_tolerance >= 0.0)) throw ConfigError("validation_tolerance must be >= 0");
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& file, std::optional<std::uint64_t> seed) {
  Json doc;
  try {
    doc = read_json(file);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(doc, seed);
}

DiscretePath path_from_config(const Json& desc, double horizon) {
  const std::string name = name_of(desc, "path");
  if (name == "csv") {
    const auto& file = require(desc, "file");
    if (!file.is_string()) throw ConfigError("csv path file must be a string");
    try {
      return read_path_csv(file.get<std::string>());
    } catch (const IoError& e) {
      throw ConfigError(e.what());
    }
  }
  if (name == "polyline") {
    const MatrixXd pts = matrix_of(require(desc, "points"), "polyline points");
    std::vector<double> times;
    if (desc.contains("times")) {
      const VectorXd t = vector_of(desc.at("times"), "polyline times");
      times.assign(t.data(), t.data() + t.size());
    } else {
      for (Eigen::Index i = 0; i < pts.rows(); ++i) times.push_back(horizon * i / double(pts.rows() - 1));
    }
    if (static_cast<Eigen::Index>(times.size()) != pts.rows()) throw ConfigError("polyline needs one time per point");
    return DiscretePath(std::move(times), pts);
  }
  const std::size_t n = samples_of(desc, 1024);
  if (name == "weierstrass") return sample_path(weierstrass(desc), horizon, n);
  const SmoothPath smooth = smooth_builtin(desc, horizon);
  if (!smooth.x) throw ConfigError("unknown path '" + name + "'");
  return sample_path(smooth.x, horizon, n);
}

SmoothPath smooth_path_from_config(const Json& desc, double horizon) {
  SmoothPath out = smooth_builtin(desc, horizon);
  if (!out.x) throw ConfigError("path '" + name_of(desc, "path") + "' has no smooth built-in form");
  return out;
}

namespace {

/// Lowers the Hoelder exponent of a bounded Lipschitz field:
/// |g(a) - g(b)| <= min(L |a - b|, 2 S) <= L^gamma (2 S)^{1 - gamma} |a - b|^gamma.
VectorField lower_gamma(VectorField f, double gamma) {
  if (!(gamma > 0.0 && gamma <= f.gamma)) throw ConfigError("field gamma may only be lowered, within (0, 1]");
  if (gamma == f.gamma) return f;
  const double e = gamma / f.gamma;
  f.hoelder_f = std::pow(f.hoelder_f, e) * std::pow(2.0 * f.sup_f, 1.0 - e);
  f.hoelder_df = std::pow(f.hoelder_df, e) * std::pow(2.0 * f.sup_df, 1.0 - e);
  f.gamma = gamma;
  return f;
}

VectorField builtin_field(const Json& desc) {
  const std::string name = name_of(desc, "field");
  const double radius = get_or(desc, "radius", 10.0);
  if (name == "zero") return field_zero(get_or(desc, "state_dim", 1), get_or(desc, "driver_dim", 1));
  if (name == "linear") {
    const auto& ms = require(desc, "matrices");
    if (!ms.is_array() || ms.empty()) throw ConfigError("linear field needs a non-empty matrices array");
    std::vector<MatrixXd> A;
    for (const auto& m : ms) A.push_back(matrix_of(m, "linear field matrix"));
    return field_linear(std::move(A), radius);
  }
  if (name == "scalar_exponential") return field_scalar_exponential(radius);
  if (name == "rotation") return field_rotation(radius);
  if (name == "sine") return field_sine();
  if (name == "trig") return field_trig();
  throw ConfigError("unknown field '" + name + "'");
}

}  // namespace

VectorField field_from_config(const Json& desc) {
  VectorField f = builtin_field(desc);
  if (desc.contains("gamma")) f = lower_gamma(std::move(f), get_or(desc, "gamma", f.gamma));
  return f;
}

RoughPath2 rough_from_config(const Json& desc, double horizon) {
  const auto& kind_json = require(desc, "kind");
  if (!kind_json.is_string()) throw ConfigError("rough kind must be a string");
  const std::string kind = kind_json.get<std::string>();
  const double p = get_or(desc, "p", 2.0);
  if (kind == "pure_area") {
    return pure_area(matrix_of(require(desc, "area"), "area"), get_or(desc, "scale", 1.0), horizon, p);
  }
  if (kind == "lift") {
    const SmoothPath path = smooth_path_from_config(require(desc, "path"), horizon);
    const auto grid = get_or<std::size_t>(desc, "grid", 1);
    const int refine = get_or(desc, "quad_refine", 10);
    if (grid < 1) throw ConfigError("lift grid must be >= 1");
    return lift_smooth(path, uniform_partition(horizon, grid), refine, p);
  }
  if (kind == "discrete") return lift_discrete(path_from_config(require(desc, "path"), horizon), p);
  throw ConfigError("unknown rough kind '" + kind + "'");
}

SewSchedule schedule_from_config(const ExperimentConfig& config) {
  const Json desc = get_or(config.doc, "schedule", Json::object());
  SewSchedule s{uniform_partition(config.horizon, 1), 12, 1, 1e-6, config.sampler, std::nullopt};
  const auto base = get_or<std::size_t>(desc, "base", 1);
  if (base < 1) throw ConfigError("schedule base must be >= 1");
  s.base = uniform_partition(config.horizon, base);
  s.max_levels = get_or(desc, "max_levels", s.max_levels);
  s.min_levels = get_or(desc, "min_levels", s.min_levels);
  s.tolerance = get_or(desc, "tolerance", s.tolerance);
  if (desc.contains("lambda") && !desc.at("lambda").is_null()) s.lambda = get_or(desc, "lambda", 0.0);
  if (desc.contains("sampler")) {
    try {
      s.sampler = sampler_from_json(desc.at("sampler"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
  s.sampler.seed = config.seed;
  return s;
}

AlmostFlow<VectorXd> vector_flow_from_config(const ExperimentConfig& config) {
  const double T = config.horizon;
  if (config.scheme == "identity") return additive_from_config(config, true);
  if (config.scheme == "additive") return additive_from_config(config, false);
  if (config.scheme == "young") {
    const auto x = path_from_config(require(config.doc, "path"), T);
    const auto f = field_from_config(require(config.doc, "field"));
    return young_flow(f, x, get_or(config.doc, "p", 1.0));
  }
  if (config.scheme == "rough") {
    const auto X = rough_from_config(require(config.doc, "rough"), T);
    auto f = field_from_config(require(config.doc, "field"));
    if (!f.df) f = with_finite_difference_df(std::move(f));
    return rough_flow(f, X);
  }
  throw ConfigError("scheme '" + config.scheme + "' has no vector-state flow");
}

AlmostFlow<MatrixXd> matrix_flow_from_config(const ExperimentConfig& config) {
  if (config.scheme != "multiplicative") throw ConfigError("scheme '" + config.scheme + "' has no matrix-state flow");
  const Json& fdesc = require(config.doc, "functional");
  const std::string name = name_of(fdesc, "functional");
  if (name != "lie_product") throw ConfigError("unknown multiplicative functional '" + name + "'");
  MatrixXd A(2, 2), B(2, 2);
  A << 0.0, 1.0, 0.0, 0.0;
  B << 0.0, 0.0, 1.0, 0.0;
  if (fdesc.contains("A")) A = matrix_of(fdesc.at("A"), "A");
  if (fdesc.contains("B")) B = matrix_of(fdesc.at("B"), "B");
  if (A.rows() != A.cols() || B.rows() != A.rows() || B.cols() != A.cols()) {
    throw InvalidArgument("Lie product needs square matrices of equal size");
  }
  const double T = config.horizon;
  const auto n = A.rows();
  auto ev = [A, B](double s, double t) -> MatrixXd {
    return algebra_exp<MatrixXd>(A * (t - s), 30) * algebra_exp<MatrixXd>(B * (t - s), 30);
  };
  // Defect of exp(Ah)exp(Bh) is second order in h; the linear control is fitted on a grid.
  const double theta = get_or(get_or(fdesc, "varpi", Json::object()), "theta", 2.0);
  auto defect = [ev](double r, double s, double t) { return (ev(r, s) * ev(s, t) - ev(r, t)).norm(); };
  const double c = fdesc.contains("omega") ? get_or(fdesc.at("omega"), "c", 1.0)
                                           : fit_linear_control(defect, theta, T, get_or<std::size_t>(fdesc, "fit_points", 32));
  double delta = 0.0;
  const auto grid = uniform_partition(T, 32);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i; j < grid.size(); ++j) {
      delta = std::max(delta, (ev(grid[i], grid[j]) - MatrixXd::Identity(n, n)).norm());
    }
  }
  MultiplicativeFunctional<MatrixXd> alpha{ev, control_linear(c), remainder_power(theta), delta, T,
                                           MatrixXd::Identity(n, n)};
  return multiplicative_flow(alpha);
}

namespace {

template <class State>
int validate_flow(const ExperimentConfig& config, const AlmostFlow<State>& phi, const std::filesystem::path& out,
                  std::ostream& log) {
  const auto report = validate_almost_flow(phi, config.sampler, config.validation_tolerance);
  Json doc = to_json(report);
  doc["scheme"] = config.scheme;
  doc["omega"] = to_json(phi.omega);
  doc["varpi"] = to_json(phi.varpi);
  write_json(out / "report.json", doc);
  for (const auto& c : report.conditions) {
    log << c.name << " ratio=" << format_number(c.ratio) << (c.pass ? " pass" : " FAIL")
        << (c.gating ? "" : " (informational)") << '\n';
  }
  log << (report.pass ? "validate: pass\n" : "validate: FAIL\n");
  return report.pass ? kExitPass : kExitFail;
}

template <class State>
State start_state(const ExperimentConfig& config, const AlmostFlow<State>& phi) {
  if constexpr (std::is_same_v<State, MatrixXd>) {
    const Json start = get_or(config.doc, "start", Json::object());
    if (start.contains("state")) return matrix_of(start.at("state"), "start state");
    return MatrixXd::Identity(phi.prototype.rows(), phi.prototype.cols());
  } else {
    const Json start = get_or(config.doc, "start", Json::object());
    if (start.contains("state")) return vector_of(start.at("state"), "start state");
    return phi.prototype;
  }
}

template <class State>
Json sew_summary(const ExperimentConfig& config, const FlowApprox<State>& approx, const State& a,
                 const SewSchedule& schedule) {
  Json doc;
  doc["scheme"] = config.scheme;
  doc["converged"] = approx.converged;
  doc["levels"] = approx.history.size();
  doc["final_gap"] = json_number(approx.final_gap());
  doc["fitted_rate"] = json_number(approx.fitted_rate);
  try {
    doc["rate_fit"] = to_json(rate_fit(approx.history));
  } catch (const InsufficientData&) {
    doc["rate_fit"] = nullptr;
  }
  doc["gaps"] = history_json_summary(approx.history);
  doc["fitted_bound"] = json_number(approx.fitted_bound());
  doc["fitted_gauge_growth"] = json_number(approx.fitted_gauge_growth());
  doc["delta_hat"] = json_number(approx.delta_hat);
  doc["lambda"] = json_number(approx.lambda);
  doc["start"] = state_json(a);
  doc["value"] = state_json(approx(0.0, config.horizon, a));
  // Flow property on a few triples: each evaluation walks the final partition.
  const std::size_t n_triples = get_or<std::size_t>(get_or(config.doc, "flow_check", Json::object()), "triples", 4);
  SamplerSpec tri = schedule.sampler;
  tri.n_times = n_triples;
  const auto triples = sample_triples(tri, 0.0, config.horizon);
  const std::vector<State> states{a};
  doc["flow_defect"] = to_json(flow_property_check(approx, std::span<const SimplexTriple>(triples),
                                                   std::span<const State>(states)));
  Json warnings = Json::array();
  for (const auto& w : approx.warnings) warnings.push_back(w);
  doc["warnings"] = warnings;
  doc["sampler"] = to_json(schedule.sampler);
  return doc;
}

template <class State>
int sew_flow(const ExperimentConfig& config, const AlmostFlow<State>& phi, const std::filesystem::path& out,
             std::ostream& log) {
  const auto schedule = schedule_from_config(config);
  const State a = start_state(config, phi);
  std::optional<FlowApprox<State>> sewn;
  try {
    sewn.emplace(sew(phi, schedule));
  } catch (const DivergenceError& e) {
    write_history_csv(out / "history.csv", e.history());
    write_json(out / "summary.json", Json{{"scheme", config.scheme}, {"converged", false}, {"error", e.what()}});
    log << "sew: diverged: " << e.what() << '\n';
    return kExitFail;
  }
  const auto& approx = *sewn;
  write_history_csv(out / "history.csv", approx.history);
  write_json(out / "summary.json", sew_summary(config, approx, a, schedule));
  for (const auto& w : approx.warnings) log << "warning: " << w << '\n';
  log << "sew: levels=" << approx.history.size() << " final_gap=" << format_number(approx.final_gap())
      << (approx.converged ? " converged\n" : " NOT converged\n");
  return approx.converged ? kExitPass : kExitFail;
}

}  // namespace

int cmd_validate(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log) {
  if (config.scheme == "signature") throw ConfigError("validate does not apply to the signature scheme");
  if (config.scheme == "multiplicative") return validate_flow(config, matrix_flow_from_config(config), out, log);
  return validate_flow(config, vector_flow_from_config(config), out, log);
}

int cmd_sew(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log) {
  if (config.scheme == "signature") throw ConfigError("use the signature command for the signature scheme");
  if (config.scheme == "multiplicative") return sew_flow(config, matrix_flow_from_config(config), out, log);
  return sew_flow(config, vector_flow_from_config(config), out, log);
}

int cmd_signature(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log) {
  const double T = config.horizon;
  RoughPath2 X;
  if (config.doc.contains("rough")) {
    X = rough_from_config(config.doc.at("rough"), T);
  } else {
    const Json& pdesc = require(config.doc, "path");
    const std::string name = name_of(pdesc, "path");
    const Json lift = get_or(config.doc, "lift", Json::object());
    const double p = get_or(lift, "p", 2.0);
    if (name == "csv" || name == "polyline" || name == "weierstrass") {
      X = lift_discrete(path_from_config(pdesc, T), p);
    } else {
      const auto grid = get_or<std::size_t>(lift, "grid", 1);
      if (grid < 1) throw ConfigError("lift grid must be >= 1");
      X = lift_smooth(smooth_path_from_config(pdesc, T), uniform_partition(T, grid), get_or(lift, "quad_refine", 10), p);
    }
  }
  const int k = get_or(config.doc, "level", 2);
  const Json sdesc = get_or(config.doc, "signature", Json::object());
  SignatureOptions opts;
  opts.max_levels = get_or(sdesc, "max_levels", opts.max_levels);
  opts.tolerance = get_or(sdesc, "tolerance", opts.tolerance);
  opts.chen_tolerance = get_or(sdesc, "chen_tolerance", opts.chen_tolerance);
  opts.chen_sampler.seed = config.seed;
  const auto sig = signature(X, k, opts);
  Json doc = to_json(sig.signature);
  doc["levels"] = sig.levels;
  Json changes = Json::array();
  for (double c : sig.level_changes) changes.push_back(json_number(c));
  doc["level_changes"] = changes;
  doc["chen_defect"] = json_number(sig.chen_defect);
  const MatrixXd x2 = X.x2(0.0, T);
  doc["levy_area"] = to_json(MatrixXd(0.5 * (x2 - x2.transpose())));
  write_json(out / "signature.json", doc);
  log << "signature: level " << k << ", " << sig.levels << " dyadic levels, last change "
      << format_number(sig.level_changes.empty() ? 0.0 : sig.level_changes.back()) << '\n';
  return kExitPass;
}

int cmd_solve(const ExperimentConfig& config, const std::filesystem::path& out, std::ostream& log) {
  if (config.scheme != "young" && config.scheme != "rough" && config.scheme != "identity" &&
      config.scheme != "additive") {
    throw ConfigError("solve needs a vector-state scheme");
  }
  const auto phi = vector_flow_from_config(config);
  const auto schedule = schedule_from_config(config);
  std::optional<FlowApprox<VectorXd>> sewn;
  try {
    sewn.emplace(sew(phi, schedule));
  } catch (const DivergenceError& e) {
    write_history_csv(out / "history.csv", e.history());
    log << "solve: diverged: " << e.what() << '\n';
    return kExitFail;
  }
  const auto& approx = *sewn;
  write_history_csv(out / "history.csv", approx.history);
  const Json start = get_or(config.doc, "start", Json::object());
  const double r = get_or(start, "time", 0.0);
  const VectorXd a = start.contains("state") ? vector_of(start.at("state"), "start state") : phi.prototype;
  if (a.size() != phi.prototype.size()) throw InvalidArgument("start state has the wrong dimension");
  const auto points = get_or<std::size_t>(get_or(config.doc, "solution", Json::object()), "points", 64);
  if (points < 1) throw ConfigError("solution points must be >= 1");
  std::vector<double> grid;
  for (std::size_t i = 0; i <= points; ++i) grid.push_back(i == points ? config.horizon : r + (config.horizon - r) * i / points);
  const auto y = flow_to_solution(approx, r, a, Partition(std::move(grid)));
  write_dpath_csv(out / "solution.csv", y);
  const auto defect = davie_defect(y, phi);
  Json doc = to_json(defect);
  doc["fitted_bound"] = json_number(approx.fitted_bound());
  doc["converged"] = approx.converged;
  doc["final_gap"] = json_number(approx.final_gap());
  doc["delta_hat"] = json_number(approx.delta_hat);
  doc["start"] = {{"time", r}, {"state", vector_json(a)}};
  doc["final"] = vector_json(y.values().back());
  write_json(out / "defect.json", doc);
  log << "solve: k_hat=" << format_number(defect.k_hat) << " fitted_bound=" << format_number(approx.fitted_bound())
      << (approx.converged ? " converged\n" : " NOT converged\n");
  return approx.converged && std::isfinite(defect.k_hat) ? kExitPass : kExitFail;
}

int run_command(const std::string& command, const std::filesystem::path& config_file,
                const std::filesystem::path& out, std::optional<std::uint64_t> seed, std::ostream& log) {
  ExperimentConfig config;
  try {
    config = load_config(config_file, seed);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitUsage;
  }
  const auto t0 = std::chrono::steady_clock::now();
  int code = kExitFail;
  try {
    std::filesystem::create_directories(out);
    if (command == "validate") {
      code = cmd_validate(config, out, log);
    } else if (command == "sew") {
      code = cmd_sew(config, out, log);
    } else if (command == "signature") {
      code = cmd_signature(config, out, log);
    } else if (command == "solve") {
      code = cmd_solve(config, out, log);
    } else {
      log << "unknown command '" << command << "'\n";
      return kExitUsage;
    }
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    log << command << " failed: " << e.what() << '\n';
    code = kExitFail;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::error_code ec;
  if (std::filesystem::is_directory(out, ec)) {
    std::ofstream timing(out / "timing.log", std::ios::app);
    timing << command << " exit=" << code << " elapsed_seconds=" << seconds << '\n';
  }
  return code;
}

}  // namespace sewflow
