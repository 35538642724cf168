#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "chemolimit/config.hpp"
#include "chemolimit/error.hpp"
#include "chemolimit/experiments.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace chemo;
using testing::pi;

namespace {

// Quick PES sweep on a coarse grid.
SweepConfig small_pes(std::vector<double> eps = {1e-1, 3e-2, 1e-2, 3e-3}) {
  SweepConfig cfg;
  cfg.sweep = PesSweep{1.0, std::move(eps)};
  cfg.grid.nodes_x = 64;
  cfg.t_end = 0.1;
  cfg.dt = 1e-3;
  cfg.guard = MeshGuard::None;
  return cfg;
}

std::string csv_text(const RateReport& r) {
  std::ostringstream os;
  write_csv(r, os);
  return os.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("fit_rate on exact power laws") {
  const std::vector<double> xs = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  std::vector<double> lin(xs), root;
  for (double x : xs) root.push_back(std::sqrt(x));
  const FitResult a = fit_rate(xs, lin);
  CHECK(a.slope == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(a.intercept == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(a.stderr_ <= 1e-13);
  CHECK(fit_rate(xs, root).slope == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("fit_rate on noisy synthetic data") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);
  std::vector<double> xs, es;
  for (int i = 0; i < 12; ++i) {
    const double x = std::pow(10.0, -1.0 - 0.25 * i);
    xs.push_back(x);
    es.push_back(3.0 * std::pow(x, 1.7) * (1.0 + jitter(rng)));
  }
  const FitResult f = fit_rate(xs, es);
  CHECK(std::abs(f.slope - 1.7) <= 0.01);
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(0.01));
  CHECK(f.stderr_ > 0.0);
  CHECK(f.stderr_ < 1e-3);
}

TEST_CASE("fit_rate preconditions") {
  CHECK_THROWS_AS(fit_rate({1, 2, 3}, {1, 2, 3}), FitRejected);
  CHECK_THROWS_AS(fit_rate({1, 2, 3, 4}, {1, 2, 0, 4}), InvalidArgument);
  CHECK_THROWS_AS(fit_rate({1, -2, 3, 4}, {1, 2, 3, 4}), InvalidArgument);
  CHECK_THROWS_AS(fit_rate({2, 2, 2, 2}, {1, 2, 3, 4}), InvalidArgument);
  CHECK_THROWS_AS(fit_rate({1, 2, 3, 4}, {1, 2, 3}), InvalidArgument);
}

TEST_CASE("sweep configuration validation") {
  CHECK_NOTHROW(small_pes().validate());
  CHECK_THROWS_AS(small_pes({1e-1, 1e-2, 1e-3}).validate(), FitRejected);
  CHECK_THROWS_AS(small_pes({1e-1, 1e-2, 1e-2, 1e-3}).validate(), InvalidArgument);
  CHECK_THROWS_AS(small_pes({1e-1, 1e-2, -1e-3, 1e-4}).validate(), InvalidArgument);

  SweepConfig odd = small_pes();
  odd.dt = 3e-3;
  CHECK_THROWS_AS(odd.validate(), InvalidArgument);

  SweepConfig ids = small_pes();
  ids.sweep = IdsSweep{{{1e-1, 1e-1}, {3e-2, 3e-2}, {1e-2, 1e-2}, {3e-3, 3e-3}}};
  CHECK_NOTHROW(ids.validate());
  CHECK(abscissa(ids, 1) == doctest::Approx(6e-2));
  ids.grid.kind = GridKind::RadialBall;
  ids.grid.dimension = 4;
  CHECK_THROWS_AS(ids.validate(), InvalidArgument);

  CHECK_THROWS_AS(run_ids_sweep(small_pes()), InvalidArgument);

  CHECK(data_family_from_string("eps-prepared") == DataFamily::EpsPrepared);
  CHECK(to_string(DataFamily::IllPrepared) == "ill-prepared");
  CHECK_THROWS_AS(data_family_from_string("prepared"), InvalidArgument);
  CHECK(mesh_guard_from_string(to_string(MeshGuard::Floor)) == MeshGuard::Floor);
}

TEST_CASE("profiles carry the exact discrete mass") {
  for (const GridPtr& g : {Grid::interval(1.0, 100), Grid::rectangle(1.0, 1.0, 30, 30), Grid::radial_ball(4, 1.0, 64)}) {
    const Field f = Profile::gaussian(0.75, 0.5, 0.1).sample(g);
    CHECK(integrate(f) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(f.min() >= 0.0);
    Profile two;
    two.kind = Profile::Kind::TwoBump;
    two.mass = 1.5;
    CHECK(integrate(two.sample(g)) == doctest::Approx(1.5).epsilon(1e-14));
  }
  CHECK(Profile::constant(2.0).sample(Grid::interval(1.0, 5)).min() == 2.0);
  CHECK_THROWS_AS(Profile::gaussian(1.0, 0.5, 0.0).sample(Grid::interval(1.0, 5)), InvalidArgument);
}

TEST_CASE("data families") {
  SweepConfig cfg = small_pes();
  const GridPtr g = cfg.grid.build();
  const State ref = reference_initial_state(cfg, g);
  const ManifoldKind kind = ManifoldKind::pes(1.0);
  CHECK(manifold_distance(ref.n, ref.c, ref.w, kind) <= 1e-9);

  const State well = point_initial_state(cfg, g, 2);
  CHECK((well.c - ref.c).max_abs() == 0.0);

  cfg.family = DataFamily::IllPrepared;
  const State ill = point_initial_state(cfg, g, 0);
  CHECK(ill.c.max_abs() == 0.0);
  CHECK(manifold_distance(ill.n, ill.c, ill.w, kind) > 0.1);

  // EpsPrepared: distance proportional to eps.
  cfg.family = DataFamily::EpsPrepared;
  std::vector<double> d;
  for (std::size_t i = 0; i < 4; ++i) {
    const State s = point_initial_state(cfg, g, i);
    d.push_back(manifold_distance(s.n, s.c, s.w, kind));
    CHECK((s.n - ref.n).max_abs() == 0.0);
  }
  const auto& eps = std::get<PesSweep>(cfg.sweep).eps_list;
  for (std::size_t i = 1; i < 4; ++i) CHECK(d[i] / d[0] == doctest::Approx(eps[i] / eps[0]).epsilon(0.05));
}

TEST_CASE("mass hypothesis flags") {
  const GridPtr rect = Grid::rectangle(1.0, 1.0, 10, 10);
  CHECK_FALSE(mass_hypothesis_violation(*rect, 2.0, IdsLimit{}).has_value());
  CHECK(mass_hypothesis_violation(*rect, 4 * pi, IdsLimit{}).has_value());
  CHECK(mass_hypothesis_violation(*rect, 13.0, IdsLimit{}).has_value());
  const GridPtr ball = Grid::radial_ball(4, 1.0, 20);
  CHECK_FALSE(mass_hypothesis_violation(*ball, 0.5 * 64 * pi * pi, PesLimit{1.0}).has_value());
  CHECK(mass_hypothesis_violation(*ball, 64 * 2.0 * pi * pi, PesLimit{2.0}).has_value());
  CHECK_FALSE(mass_hypothesis_violation(*ball, 64 * 1.9 * pi * pi, PesLimit{2.0}).has_value());

  SweepConfig cfg = small_pes();
  cfg.sweep = IdsSweep{{{1e-1, 1e-1}, {3e-2, 3e-2}, {1e-2, 1e-2}, {3e-3, 3e-3}}};
  cfg.grid.kind = GridKind::Rectangle;
  cfg.grid.nodes_x = cfg.grid.nodes_y = 9;
  cfg.t_end = 0.002;
  cfg.n0 = Profile::constant(13.0);
  const RateReport r = run_ids_sweep(cfg);
  CHECK(r.mass_hypothesis_violated);
  CHECK_FALSE(r.mass_note.empty());
}

TEST_CASE("well-prepared sweep: monotone errors and consistent fits") {
  const RateReport r = run_pes_sweep(small_pes({1e-1, 5e-2, 2e-2, 1e-2, 5e-3}));
  CHECK(r.abscissa_name == "eps");
  REQUIRE(r.metrics.size() == kMetricCount + 3);
  for (std::size_t m = 0; m < kMetricCount; ++m) {
    const MetricSeries& s = r.metrics[m];
    CHECK(s.name == kMetricNames[m]);
    CHECK(s.fitted);
    CHECK(s.values.size() == r.abscissae.size());
    REQUIRE(s.fit.has_value());
    CHECK(std::isfinite(s.fit->slope));
    for (std::size_t i = 1; i < s.values.size(); ++i) CHECK(s.values[i] <= 1.05 * s.values[i - 1]);
    // Largest over smallest error against the fitted power, within 2x either way.
    const double predicted = std::pow(r.abscissae.front() / r.abscissae.back(), s.fit->slope);
    const double observed = s.values.front() / s.values.back();
    CHECK(observed >= 0.5 * predicted);
    CHECK(observed <= 2.0 * predicted);
  }
  CHECK(r.metric("dist").values.front() <= 1e-9);
  CHECK_FALSE(r.metric("dist").fitted);
  CHECK(r.all_fits_ok());
  CHECK(r.runtimes.size() == r.abscissae.size());
  CHECK(r.mass == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("sweep points do not depend on their neighbours") {
  const RateReport four = run_pes_sweep(small_pes({1e-1, 3e-2, 1e-2, 3e-3}));
  const RateReport five = run_pes_sweep(small_pes({1e-1, 3e-2, 1e-2, 3e-3, 1e-3}));
  for (std::size_t m = 0; m < four.metrics.size(); ++m) {
    for (std::size_t i = 0; i < 4; ++i) CHECK(four.metrics[m].values[i] == five.metrics[m].values[i]);
  }
}

TEST_CASE("sweep output is independent of the thread count") {
  SweepConfig cfg = small_pes();
  cfg.guard = MeshGuard::Sensitivity;
  cfg.threads = 1;
  const std::string one = csv_text(run_pes_sweep(cfg));
  cfg.threads = 3;
  CHECK(csv_text(run_pes_sweep(cfg)) == one);
}

TEST_CASE("mesh guards mark excluded points") {
  SweepConfig cfg = small_pes();
  cfg.guard = MeshGuard::Floor;
  cfg.guard_factor = 1e6;
  const RateReport r = run_pes_sweep(cfg);
  REQUIRE(r.floor.has_value());
  CHECK_FALSE(r.all_fits_ok());
  for (std::size_t m = 0; m < kMetricCount; ++m) {
    CHECK(r.metrics[m].fit_points() == 0);
    CHECK_FALSE(r.metrics[m].fit_error.empty());
  }
  const std::string text = csv_text(r);
  CHECK(text.find(",excluded\n") != std::string::npos);
}

TEST_CASE("discretization floor") {
  SweepConfig desk;
  desk.sweep = PesSweep{1.0, {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}};
  // Pinned when the harness was brought up on the default desk configuration.
  CHECK(discretization_floor(desk) == doctest::Approx(5.1207e-3).epsilon(1e-3));

  // Successive floors shrink and the observed order climbs towards one.
  std::vector<double> floors;
  for (int level = 0; level < 4; ++level) {
    SweepConfig c = small_pes();
    c.grid.nodes_x = (32 << level) + 1;
    c.dt = 4e-3 / (1 << level);
    c.t_end = 0.2;
    floors.push_back(discretization_floor(c));
  }
  for (std::size_t i = 2; i < floors.size(); ++i) {
    CHECK(floors[i] < floors[i - 1]);
    CHECK(floors[i - 1] / floors[i] > floors[i - 2] / floors[i - 1]);
  }

  SweepConfig flat = small_pes();
  flat.n0 = Profile::constant(0.7);
  CHECK(discretization_floor(flat) <= 1e-12);
}

TEST_CASE("discretization floor halves under refinement") {
  SweepConfig desk;
  desk.sweep = PesSweep{1.0, {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}};
  const double f1 = discretization_floor(desk);
  desk.grid.nodes_x = 2 * desk.grid.nodes_x - 1;
  desk.dt *= 0.5;
  const double f2 = discretization_floor(desk);
  CHECK(f1 / f2 >= 2.0);
}

TEST_CASE("csv: header-only output and round trip") {
  RateReport empty;
  empty.abscissa_name = "eps";
  CHECK(csv_text(empty) == std::string(kCsvHeader) + "\n");

  const RateReport r = run_pes_sweep(small_pes());
  std::istringstream is(csv_text(r));
  const CsvReport back = parse_csv(is);
  CHECK(back.rows.size() == r.abscissae.size() * r.metrics.size());
  for (const CsvRow& row : back.rows) {
    std::size_t i = 0;
    while (r.abscissae[i] != row.abscissa) ++i;
    const MetricSeries& m = r.metric(row.metric);
    CHECK(row.value == m.values[i]);
    CHECK(row.slope_group == (m.fitted ? m.name : "record"));
  }
  for (std::size_t i = 1; i < back.rows.size(); ++i) CHECK(back.rows[i].abscissa <= back.rows[i - 1].abscissa);
  REQUIRE(back.slopes.size() == kMetricCount);
  for (const CsvSlope& s : back.slopes) {
    const MetricSeries& m = r.metric(s.metric);
    CHECK(s.slope == m.fit->slope);
    CHECK(s.stderr_ == m.fit->stderr_);
    CHECK(s.npoints == m.fit_points());
  }

  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 5e-324}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(0.5) == "0.5");

  std::istringstream bad("eps,metric,value,slope_group\n");
  CHECK_THROWS_AS(parse_csv(bad), InvalidArgument);
  std::istringstream short_row(std::string(kCsvHeader) + "\n0.1,err,1\n");
  CHECK_THROWS_AS(parse_csv(short_row), InvalidArgument);
}

TEST_CASE("csv: golden file") {
  const std::string cfg_path = std::string(CHEMO_TEST_DATA_DIR) + "/golden_pes_small.cfg";
  const std::string golden = std::string(CHEMO_TEST_DATA_DIR) + "/golden_pes_small.csv";
  const RunConfig cfg = load_run_config(cfg_path);
  const std::string text = csv_text(run_pes_sweep(cfg.sweep));
  if (std::getenv("CHEMO_UPDATE_GOLDEN")) {
    std::ofstream(golden, std::ios::binary) << text;
  }
  CHECK(text == read_file(golden));

  const auto dir = std::filesystem::temp_directory_path() / "chemo_golden_emit";
  std::filesystem::create_directories(dir);
  emit_csv(run_pes_sweep(cfg.sweep), (dir / "a.csv").string());
  CHECK(read_file((dir / "a.csv").string()) == text);
  CHECK_THROWS_AS(emit_csv(RateReport{}, (dir / "missing" / "b.csv").string()), Error);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
