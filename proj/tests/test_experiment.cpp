#include "pgdni/experiment.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <limits>
#include <sstream>

using namespace pgdni;

namespace {

NetworkExperiment small_network() {
  NetworkExperiment e;
  e.degrees = {2, 3};
  e.max_rank = 2;
  e.resistance = 0.01;
  e.error_points = 8;
  return e;
}

std::string render(const std::vector<ExperimentRecord>& records, TableKind kind,
                   OutputFormat format) {
  std::ostringstream out;
  write_records(out, records, kind, format);
  return out.str();
}

} // namespace

TEST_CASE("algorithm names round trip") {
  for (Algorithm a : {Algorithm::Basic, Algorithm::Improved, Algorithm::Galerkin, Algorithm::Svd}) {
    CHECK(parse_algorithm(algorithm_name(a)) == a);
  }
  CHECK_THROWS_AS(parse_algorithm("newton"), std::invalid_argument);
}

TEST_CASE("empty tables print only the header") {
  CHECK(render({}, TableKind::Network, OutputFormat::Csv) ==
        "algorithm,d,rank,rel_error,residual_calls\n");
  CHECK(render({}, TableKind::Obstacle, OutputFormat::Csv) ==
        "algorithm,rank,rel_error,residual_calls\n");
  CHECK(nlohmann::json::parse(render({}, TableKind::Network, OutputFormat::Json)).empty());
}

TEST_CASE("failed cells print nan in CSV and null in JSON") {
  ExperimentRecord r;
  r.algorithm = Algorithm::Basic;
  r.d = 3;
  r.rel_error = std::numeric_limits<double>::quiet_NaN();
  r.converged = false;
  const std::vector<ExperimentRecord> records{r};
  CHECK(render(records, TableKind::Network, OutputFormat::Csv).find("basic,3,0,nan,0") !=
        std::string::npos);
  const auto j = nlohmann::json::parse(render(records, TableKind::Network, OutputFormat::Json));
  CHECK(j[0]["rel_error"].is_null());
  CHECK_FALSE(all_converged(records));
}

TEST_CASE("network study records, formats and determinism") {
  const auto e = small_network();
  const auto records = run_network(e);
  // Galerkin once per degree, then one record per rank for both PGD variants.
  REQUIRE(records.size() == 2 + 2 * 2 * 2);
  CHECK(all_converged(records));
  CHECK(records[0].algorithm == Algorithm::Galerkin);
  CHECK(records[0].d == 2);
  // Galerkin records carry min(m, n) = min(6, 5).
  CHECK(records[0].rank == 5);
  for (const auto& r : records) {
    CHECK(std::isfinite(r.rel_error));
    CHECK(r.residual_calls > 0);
  }

  const std::string csv = render(records, TableKind::Network, OutputFormat::Csv);
  const auto j = nlohmann::json::parse(render(records, TableKind::Network, OutputFormat::Json));
  REQUIRE(j.size() == records.size());
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(j[i]["algorithm"] == algorithm_name(records[i].algorithm));
    CHECK(j[i]["d"] == records[i].d);
    CHECK(j[i]["rank"] == records[i].rank);
    CHECK(j[i]["rel_error"].get<double>() == records[i].rel_error);
    CHECK(j[i]["residual_calls"].get<std::uint64_t>() == records[i].residual_calls);
    std::getline(lines, line);
    std::istringstream cells(line);
    std::string cell;
    for (int k = 0; k < 4; ++k) std::getline(cells, cell, ',');
    CHECK(std::stod(cell) == records[i].rel_error);
  }

  CHECK(render(run_network(e), TableKind::Network, OutputFormat::Csv) == csv);
  auto par = e;
  par.parallel = true;
  CHECK(render(run_network(par), TableKind::Network, OutputFormat::Csv) == csv);
}

TEST_CASE("PGD call counts grow with the rank") {
  const auto records = run_network(small_network());
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].algorithm == records[i - 1].algorithm && records[i].d == records[i - 1].d) {
      CHECK(records[i].residual_calls > records[i - 1].residual_calls);
    }
  }
}

TEST_CASE("obstacle study on a small mesh") {
  ObstacleExperiment e;
  e.max_rank = 3;
  e.param_elements = 4;
  e.param_rule = ParamRule::Nodal;
  e.problem.n_elements = 20;
  e.problem.form = ObstacleForm::Draped;
  const auto records = run_obstacle(e);
  REQUIRE(records.size() == 9);
  CHECK(all_converged(records));
  CHECK(records[0].algorithm == Algorithm::Svd);
  for (int k = 1; k < 3; ++k) CHECK(records[k].rel_error <= records[k - 1].rel_error);
  const std::string csv = render(records, TableKind::Obstacle, OutputFormat::Csv);
  CHECK(csv.rfind("algorithm,rank,rel_error,residual_calls\nsvd,1,", 0) == 0);
}

TEST_CASE("invalid studies are rejected") {
  auto e = small_network();
  e.degrees.clear();
  CHECK_THROWS_AS(run_network(e), std::invalid_argument);
  e = small_network();
  e.algorithms = {Algorithm::Svd};
  CHECK_THROWS_AS(run_network(e), std::invalid_argument);
  e = small_network();
  e.algorithms.clear();
  CHECK_THROWS_AS(run_network(e), std::invalid_argument);
  ObstacleExperiment o;
  o.algorithms = {Algorithm::Galerkin};
  CHECK_THROWS_AS(run_obstacle(o), std::invalid_argument);
  o = ObstacleExperiment{};
  o.param_elements = 0;
  CHECK_THROWS_AS(run_obstacle(o), std::invalid_argument);
}

TEST_CASE("unwritable output paths raise") {
  CHECK_THROWS_AS(write_records("/nonexistent-dir/out.csv", {}, TableKind::Network,
                                OutputFormat::Csv),
                  std::runtime_error);
}
