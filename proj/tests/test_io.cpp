#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "sewflow/io.hpp"

using namespace sewflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sewflow_io_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& file, const std::string& text) { std::ofstream(file, std::ios::binary) << text; }

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("number formatting round-trips") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
    for (double v : {1.0 / 3.0, -2.5e-300, 6.02214076e23, std::exp(1.0)}) CHECK(std::stod(format_number(v)) == v);
    CHECK(json_number(1.5) == Json(1.5));
    CHECK(json_number(std::numeric_limits<double>::infinity()) == Json("inf"));
  }

  TEST_CASE("csv round trips") {
    const Partition pi({0.0, 0.125, 1.0 / 3.0, 1.0});
    write_partition_csv(scratch("pi.csv"), pi);
    CHECK(read_partition_csv(scratch("pi.csv")) == pi);

    MatrixXd values(3, 2);
    values << 0.0, 1.0, 0.1, -2.0 / 3.0, 1e-17, 4.0;
    const DiscretePath path({0.0, 0.5, 1.0}, values);
    write_path_csv(scratch("path.csv"), path);
    const DiscretePath back = read_path_csv(scratch("path.csv"));
    CHECK(back.times() == path.times());
    CHECK(back.values() == path.values());

    std::vector<LevelRecord> history(2);
    history[1].level = 1;
    history[1].gap = 0.25;
    write_history_csv(scratch("history.csv"), history);
    const auto table = read_csv(scratch("history.csv"));
    CHECK(table.header == std::vector<std::string>{"level", "points", "mesh", "theta", "gap", "bound_ratio",
                                                   "gauge_ratio", "evaluations"});
    CHECK(std::isnan(table.rows[0][4]));
    CHECK(table.rows[1][4] == 0.25);

    const RoughPath2 X = pure_area((MatrixXd(2, 2) << 0, 1, -1, 0).finished(), 2.0);
    const std::vector<std::pair<double, double>> pairs{{0.0, 0.5}, {0.25, 1.0}};
    write_rough_csv(scratch("rough.csv"), X, pairs);
    const auto rough = read_csv(scratch("rough.csv"));
    CHECK(rough.header.size() == 2 + 2 + 4);
    CHECK(rough.rows[1][5] == 1.5);
    CHECK(rough.rows[1][6] == -1.5);

    const DPath<VectorXd> y(Partition({0.0, 1.0}), {VectorXd::Constant(2, 1.0), VectorXd::Constant(2, 2.0)});
    write_dpath_csv(scratch("y.csv"), y);
    CHECK(read_csv(scratch("y.csv")).header == std::vector<std::string>{"time", "y0", "y1"});
  }

  TEST_CASE("csv errors") {
    CHECK_THROWS_AS(read_csv(scratch("missing.csv")), IoError);
    write_text(scratch("ragged.csv"), "time,x0\n0,1\n1\n");
    CHECK_THROWS_AS(read_csv(scratch("ragged.csv")), IoError);
    write_text(scratch("text.csv"), "time,x0\n0,abc\n");
    CHECK_THROWS_AS(read_csv(scratch("text.csv")), IoError);
    write_text(scratch("empty.csv"), "# only a comment\n");
    CHECK_THROWS_AS(read_csv(scratch("empty.csv")), IoError);
    write_text(scratch("comments.csv"), "# header follows\ntime,x0\n0,1\n\n1,2\n");
    CHECK(read_csv(scratch("comments.csv")).rows.size() == 2);
    write_text(scratch("decreasing.csv"), "time,x0\n0,1\n0,2\n");
    CHECK_THROWS_AS(read_path_csv(scratch("decreasing.csv")), InvalidArgument);
  }

  TEST_CASE("json documents") {
    write_text(scratch("c.json"), "{\n  // comment\n  \"a\": 1, \"b\": [1, 2]\n}\n");
    const Json doc = read_json(scratch("c.json"));
    CHECK(doc["a"] == 1);
    write_text(scratch("bad.json"), "{\"a\": ");
    CHECK_THROWS_AS(read_json(scratch("bad.json")), IoError);
    CHECK_THROWS_AS(read_json(scratch("none.json")), IoError);

    write_json(scratch("out.json"), doc);
    CHECK(read_json(scratch("out.json")) == doc);

    SamplerSpec spec{7, 12, 3, -2.0, 2.0};
    CHECK(sampler_from_json(to_json(spec)) == spec);
    CHECK_THROWS_AS(sampler_from_json(Json{{"n_times", 0}}), InvalidArgument);
    CHECK_THROWS_AS(sampler_from_json(Json{{"state_box", {1.0, 0.0}}}), InvalidArgument);
    CHECK_THROWS_AS(sampler_from_json(Json::array()), InvalidArgument);

    auto t = TensorElement<double>::unit(2, 2);
    t.block(1) << 1.0, 2.0;
    const Json tj = to_json(t);
    CHECK(tj["level"] == 2);
    CHECK(tj["blocks"][1] == Json::array({1.0, 2.0}));
    CHECK(tj["blocks"][2].size() == 4);

    const Json mj = to_json((MatrixXd(2, 2) << 1, 2, 3, 4).finished());
    CHECK(mj["data"][1] == Json::array({3.0, 4.0}));
    CHECK(to_json(control_linear(2.0))["kind"] == "linear");
    CHECK(to_json(remainder_power(2.0))["parameters"]["theta"] == 2.0);
  }
}
