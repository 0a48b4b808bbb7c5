#include "sewflow/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <system_error>

namespace sewflow {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const std::filesystem::path& file, std::size_t line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw IoError(file.string() + ":" + std::to_string(line) + ": not a number: '" + text + "'");
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  return out;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw IoError("number formatting failed");
  return std::string(buf, ptr);
}

CsvTable read_csv(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read " + file.string());
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line.front() == '#') continue;
    auto fields = split_fields(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw IoError(file.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(table.header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f, file, lineno));
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw IoError(file.string() + ": empty CSV");
  return table;
}

void write_csv(const std::filesystem::path& file, const CsvTable& table) {
  auto out = open_out(file);
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw InvalidArgument("CSV row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + file.string());
}

void write_partition_csv(const std::filesystem::path& file, const Partition& pi) {
  CsvTable table{{"time"}, {}};
  for (double t : pi.points()) table.rows.push_back({t});
  write_csv(file, table);
}

Partition read_partition_csv(const std::filesystem::path& file) {
  const auto table = read_csv(file);
  if (table.header.size() != 1) throw IoError(file.string() + ": partition CSV needs exactly one column");
  std::vector<double> pts;
  for (const auto& row : table.rows) pts.push_back(row[0]);
  return Partition(std::move(pts));
}

void write_path_csv(const std::filesystem::path& file, const DiscretePath& path) {
  CsvTable table;
  table.header.push_back("time");
  for (int j = 0; j < path.dim(); ++j) table.header.push_back("x" + std::to_string(j));
  for (std::size_t i = 0; i < path.size(); ++i) {
    std::vector<double> row{path.times()[i]};
    for (int j = 0; j < path.dim(); ++j) row.push_back(path.values()(static_cast<Eigen::Index>(i), j));
    table.rows.push_back(std::move(row));
  }
  write_csv(file, table);
}

DiscretePath read_path_csv(const std::filesystem::path& file) {
  const auto table = read_csv(file);
  if (table.header.size() < 2) throw IoError(file.string() + ": path CSV needs a time column and value columns");
  if (table.rows.size() < 2) throw IoError(file.string() + ": path CSV needs at least two samples");
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto d = static_cast<Eigen::Index>(table.header.size() - 1);
  std::vector<double> times;
  Eigen::MatrixXd values(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    times.push_back(row[0]);
    for (Eigen::Index j = 0; j < d; ++j) values(i, j) = row[static_cast<std::size_t>(j) + 1];
  }
  return DiscretePath(std::move(times), std::move(values));
}

void write_history_csv(const std::filesystem::path& file, std::span<const LevelRecord> history) {
  CsvTable table{{"level", "points", "mesh", "theta", "gap", "bound_ratio", "gauge_ratio", "evaluations"}, {}};
  for (const auto& h : history) {
    table.rows.push_back({static_cast<double>(h.level), static_cast<double>(h.points), h.mesh, h.theta, h.gap,
                          h.bound_ratio, h.gauge_ratio, static_cast<double>(h.evaluations)});
  }
  write_csv(file, table);
}

void write_rough_csv(const std::filesystem::path& file, const RoughPath2& X,
                     std::span<const std::pair<double, double>> pairs) {
  CsvTable table;
  table.header = {"s", "t"};
  for (int i = 0; i < X.dim; ++i) table.header.push_back("x1_" + std::to_string(i));
  for (int i = 0; i < X.dim; ++i)
    for (int j = 0; j < X.dim; ++j) table.header.push_back("x2_" + std::to_string(i) + std::to_string(j));
  for (const auto& [s, t] : pairs) {
    std::vector<double> row{s, t};
    const VectorXd x1 = X.x1(s, t);
    const MatrixXd x2 = X.x2(s, t);
    for (int i = 0; i < X.dim; ++i) row.push_back(x1(i));
    for (int i = 0; i < X.dim; ++i)
      for (int j = 0; j < X.dim; ++j) row.push_back(x2(i, j));
    table.rows.push_back(std::move(row));
  }
  write_csv(file, table);
}

Json read_json(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read " + file.string());
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw IoError(file.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& file, const Json& doc) {
  auto out = open_out(file);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + file.string());
}

Json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

Json to_json(const Control& omega) {
  switch (omega.kind()) {
    case Control::Kind::Linear:
      return {{"kind", "linear"}, {"parameters", {{"c", json_number(omega.parameter())}}}};
    case Control::Kind::PVariation: {
      Json params{{"p", json_number(omega.parameter())}};
      if (const auto* table = omega.table()) params["samples"] = table->times.size();
      return {{"kind", "p-variation"}, {"parameters", params}};
    }
    case Control::Kind::Custom:
      break;
  }
  return {{"kind", "custom"}, {"parameters", Json::object()}};
}

Json to_json(const Remainder& varpi) {
  Json params{{"kappa", json_number(varpi.kappa())}};
  if (varpi.theta()) {
    params["theta"] = json_number(*varpi.theta());
    return {{"kind", "power"}, {"parameters", params}};
  }
  return {{"kind", "custom"}, {"parameters", params}};
}

Json to_json(const SamplerSpec& sampler) {
  return {{"seed", sampler.seed},
          {"n_times", sampler.n_times},
          {"n_states", sampler.n_states},
          {"state_box", {json_number(sampler.state_lo), json_number(sampler.state_hi)}}};
}

SamplerSpec sampler_from_json(const Json& doc) {
  SamplerSpec out;
  if (!doc.is_object()) throw InvalidArgument("sampler must be a JSON object");
  out.seed = doc.value("seed", out.seed);
  out.n_times = doc.value("n_times", out.n_times);
  out.n_states = doc.value("n_states", out.n_states);
  if (doc.contains("state_box")) {
    const auto& box = doc.at("state_box");
    if (!box.is_array() || box.size() != 2) throw InvalidArgument("state_box must be [lo, hi]");
    out.state_lo = box[0].get<double>();
    out.state_hi = box[1].get<double>();
  }
  if (out.n_times < 1 || out.n_states < 1) throw InvalidArgument("sampler needs n_times >= 1 and n_states >= 1");
  if (!(out.state_lo <= out.state_hi)) throw InvalidArgument("state_box needs lo <= hi");
  return out;
}

Json to_json(const Witness& w) {
  Json a = Json::array();
  for (double v : w.a) a.push_back(json_number(v));
  Json out{{"r", w.r}, {"s", w.s}, {"t", w.t}, {"a", a}};
  if (!w.b.empty()) {
    Json b = Json::array();
    for (double v : w.b) b.push_back(json_number(v));
    out["b"] = b;
  }
  return out;
}

Json to_json(const ValidationReport& report) {
  Json conditions = Json::array();
  for (const auto& c : report.conditions) {
    Json item{{"name", c.name},
              {"ratio", json_number(c.ratio)},
              {"exact", c.exact},
              {"gating", c.gating},
              {"pass", c.pass}};
    item["witness"] = c.witness ? to_json(*c.witness) : Json();
    conditions.push_back(std::move(item));
  }
  Json fitted = Json::object();
  for (const auto& [k, v] : report.fitted) fitted[k] = json_number(v);
  Json declared = Json::object();
  for (const auto& [k, v] : report.declared) declared[k] = json_number(v);
  return {{"pass", report.pass},
          {"tolerance", json_number(report.tolerance)},
          {"conditions", conditions},
          {"fitted", fitted},
          {"declared", declared},
          {"sampler", to_json(report.sampler)}};
}

Json to_json(const GalaxyDistance& g) {
  Json out{{"value", json_number(g.value)},
           {"infinite", g.infinite},
           {"divergence_slope", json_number(g.divergence_slope)}};
  out["witness"] = g.witness ? to_json(*g.witness) : Json();
  return out;
}

Json to_json(const TensorElement<double>& x) {
  Json blocks = Json::array();
  for (int j = 0; j <= x.level(); ++j) {
    Json b = Json::array();
    for (double v : x.block(j)) b.push_back(json_number(v));
    blocks.push_back(std::move(b));
  }
  return {{"base_dim", x.base_dim()}, {"level", x.level()}, {"blocks", blocks}};
}

Json to_json(const Eigen::MatrixXd& m) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json_number(m(i, j)));
    data.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Json to_json(const RateFit& fit) {
  return {{"slope", json_number(fit.slope)},
          {"intercept", json_number(fit.intercept)},
          {"r2", json_number(fit.r2)},
          {"levels", fit.levels}};
}

Json to_json(const DefectReport& report) {
  Json out{{"k_hat", json_number(report.k_hat)}, {"grid_points", report.grid_points}};
  out["worst"] = report.worst ? Json{report.worst->first, report.worst->second} : Json();
  return out;
}

Json to_json(const FlowPropertyReport& report) {
  Json out{{"max_defect", json_number(report.max_defect)}, {"gap_multiple", json_number(report.gap_multiple)}};
  out["worst"] = report.worst ? Json{report.worst->r, report.worst->s, report.worst->t} : Json();
  return out;
}

}  // namespace sewflow
