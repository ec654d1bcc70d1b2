#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "qpulse/dataset.hpp"
#include "qpulse/optimize.hpp"

using namespace qpulse;

namespace {

Dataset synthetic_dataset(std::size_t n) {
  Dataset ds;
  ds.meta.grid_size = static_cast<int>(n) + 1;
  ds.meta.seed = 7;
  ds.meta.target_fidelity = 0.999;
  for (std::size_t i = 0; i < n; ++i) {
    DatasetRow r;
    r.beta = -M_PI + 2.0 * M_PI * static_cast<double>(i + 1) / static_cast<double>(n);
    r.alpha = PulseParams::constant_x(ds.meta.pulse.spline_count, r.beta / ds.meta.pulse.duration_ns);
    r.fidelity = 0.9995;
    ds.rows.push_back(std::move(r));
  }
  ds.meta.alpha_scale = ds.max_abs_alpha();
  return ds;
}

}  // namespace

TEST_CASE("split counts follow the floor rule", "[dataset]") {
  Dataset ds = synthetic_dataset(100);
  split_dataset(ds, {0.6, 0.2, 0.2}, 42);
  CHECK(ds.count(Split::train) == 60);
  CHECK(ds.count(Split::val) == 20);
  CHECK(ds.count(Split::test) == 20);

  Dataset tiny = synthetic_dataset(5);
  split_dataset(tiny, {0.6, 0.2, 0.2}, 42);
  CHECK(tiny.count(Split::train) == 3);
  CHECK(tiny.count(Split::val) == 1);
  CHECK(tiny.count(Split::test) == 1);
}

TEST_CASE("splitting is deterministic in the seed", "[dataset]") {
  Dataset a = synthetic_dataset(37);
  Dataset b = synthetic_dataset(37);
  split_dataset(a, {0.6, 0.2, 0.2}, 99);
  split_dataset(b, {0.6, 0.2, 0.2}, 99);
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].split == b.rows[i].split);

  Dataset c = synthetic_dataset(37);
  split_dataset(c, {0.6, 0.2, 0.2}, 100);
  bool all_same = true;
  for (std::size_t i = 0; i < a.rows.size(); ++i) all_same &= a.rows[i].split == c.rows[i].split;
  CHECK_FALSE(all_same);
}

TEST_CASE("split validation", "[dataset]") {
  Dataset empty;
  CHECK_THROWS_AS(split_dataset(empty, {0.6, 0.2, 0.2}, 1), std::invalid_argument);

  Dataset ds = synthetic_dataset(10);
  CHECK_THROWS_AS(split_dataset(ds, {0.5, 0.2, 0.2}, 1), std::invalid_argument);
}

TEST_CASE("csv round trip is bit exact", "[dataset]") {
  Dataset ds = synthetic_dataset(23);
  // make the numbers awkward on purpose
  for (DatasetRow& r : ds.rows) {
    r.fidelity = 0.9991234567890123;
    for (double& v : r.alpha.q_coeffs) v = r.beta / 3.000000001;
  }
  split_dataset(ds, {0.6, 0.2, 0.2}, 5);

  std::string csv = dataset_to_csv(ds);
  std::string meta = dataset_meta_to_json(ds.meta);
  CHECK(csv.rfind("beta,alpha_0,", 0) == 0);
  CHECK(csv.find(",fidelity,split") != std::string::npos);

  Dataset back = dataset_from_csv(csv, meta);
  REQUIRE(back.rows.size() == ds.rows.size());
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    CHECK(back.rows[i].beta == ds.rows[i].beta);  // bitwise through %.17g
    CHECK(back.rows[i].alpha.flat() == ds.rows[i].alpha.flat());
    CHECK(back.rows[i].fidelity == ds.rows[i].fidelity);
    CHECK(back.rows[i].split == ds.rows[i].split);
  }
  CHECK(back.meta.grid_size == ds.meta.grid_size);
  CHECK(back.meta.seed == ds.meta.seed);
  CHECK(back.meta.alpha_scale == ds.meta.alpha_scale);
  CHECK(back.meta.pulse.time_steps == ds.meta.pulse.time_steps);
}

TEST_CASE("dataset files round trip through disk", "[dataset]") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "qpulse_dataset_test";
  fs::create_directories(dir);
  fs::path csv = dir / "ds.csv";

  Dataset ds = synthetic_dataset(8);
  write_dataset(csv, ds);
  REQUIRE(fs::exists(csv));
  REQUIRE(fs::exists(dataset_meta_path(csv)));

  Dataset back = read_dataset(csv);
  CHECK(back.rows.size() == ds.rows.size());
  fs::remove_all(dir);
}

TEST_CASE("rows from a generated dataset revalidate from disk", "[dataset]") {
  namespace fs = std::filesystem;
  PulseConfig pcfg;
  OptimizerConfig cfg;
  Dataset ds = generate_dataset(5, cfg, pcfg);

  fs::path dir = fs::temp_directory_path() / "qpulse_dataset_reval";
  fs::create_directories(dir);
  write_dataset(dir / "ds.csv", ds);
  Dataset back = read_dataset(dir / "ds.csv");
  fs::remove_all(dir);

  PulseSimulator sim(back.meta.pulse);
  for (const DatasetRow& r : back.rows) {
    double f = sim.fidelity(r.alpha, rx_gate(r.beta));
    CHECK(f >= back.meta.target_fidelity);
    CHECK(f == Catch::Approx(r.fidelity).margin(1e-14));
  }
}

TEST_CASE("malformed csv is rejected", "[dataset]") {
  Dataset ds = synthetic_dataset(3);
  std::string meta = dataset_meta_to_json(ds.meta);
  CHECK_THROWS_AS(dataset_from_csv("beta,alpha_0,fidelity,split\n1,2,3,train\n", meta),
                  std::invalid_argument);

  // decreasing betas
  std::string csv = dataset_to_csv(ds);
  Dataset swapped = ds;
  std::swap(swapped.rows[0], swapped.rows[1]);
  CHECK_THROWS_AS(dataset_from_csv(dataset_to_csv(swapped), meta), std::invalid_argument);
}
