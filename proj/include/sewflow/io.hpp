#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sewflow/almostflow.hpp"
#include "sewflow/errors.hpp"
#include "sewflow/sampling.hpp"
#include "sewflow/schemes.hpp"
#include "sewflow/sewing.hpp"
#include "sewflow/solutions.hpp"
#include "sewflow/statespace.hpp"
#include "sewflow/timegrid.hpp"

namespace sewflow {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; "nan", "inf" and "-inf" for non-finite values.
std::string format_number(double v);

/// Rows of comma-separated fields; the first row is a header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::filesystem::path& file);
void write_csv(const std::filesystem::path& file, const CsvTable& table);

/// One "time" column.
void write_partition_csv(const std::filesystem::path& file, const Partition& pi);
Partition read_partition_csv(const std::filesystem::path& file);

/// Time column followed by d value columns.
void write_path_csv(const std::filesystem::path& file, const DiscretePath& path);
DiscretePath read_path_csv(const std::filesystem::path& file);

/// Columns level, points, mesh, theta, gap, bound_ratio, gauge_ratio, evaluations.
/// Wall-clock time is kept out so equal runs give equal files.
void write_history_csv(const std::filesystem::path& file, std::span<const LevelRecord> history);

/// Columns s, t, x1_i (d entries), x2_ij (d*d entries, row-major) for each pair.
void write_rough_csv(const std::filesystem::path& file, const RoughPath2& X,
                     std::span<const std::pair<double, double>> pairs);

/// Time column followed by the flattened state.
template <MetricState State>
void write_dpath_csv(const std::filesystem::path& file, const DPath<State>& y) {
  using traits = state_traits<State>;
  CsvTable table;
  const std::size_t width = traits::flatten(y.start()).size();
  table.header.push_back("time");
  for (std::size_t i = 0; i < width; ++i) table.header.push_back("y" + std::to_string(i));
  const auto pts = y.grid().points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<double> row{pts[i]};
    const auto flat = traits::flatten(y.values()[i]);
    row.insert(row.end(), flat.begin(), flat.end());
    table.rows.push_back(std::move(row));
  }
  write_csv(file, table);
}

Json read_json(const std::filesystem::path& file);
/// Two-space indented, trailing newline.
void write_json(const std::filesystem::path& file, const Json& doc);

/// Non-finite numbers become the strings "nan", "inf", "-inf".
Json json_number(double v);

/// {kind, parameters}.
Json to_json(const Control& omega);
Json to_json(const Remainder& varpi);
/// {seed, n_times, n_states, state_box: [lo, hi]}.
Json to_json(const SamplerSpec& sampler);
SamplerSpec sampler_from_json(const Json& doc);
Json to_json(const Witness& w);
Json to_json(const ValidationReport& report);
Json to_json(const GalaxyDistance& g);
/// {base_dim, level, blocks: [[...], ...]}, one flat row-major block per degree.
Json to_json(const TensorElement<double>& x);
/// {rows, cols, data: [[...], ...]}.
Json to_json(const Eigen::MatrixXd& m);
Json to_json(const RateFit& fit);
Json to_json(const DefectReport& report);
Json to_json(const FlowPropertyReport& report);

}  // namespace sewflow
