#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "kinopt/ensemble.hpp"
#include "kinopt/errors.hpp"
#include "kinopt/gibbs.hpp"
#include "kinopt/objective.hpp"
#include "kinopt/rng.hpp"
#include "kinopt/schedule.hpp"

using namespace kinopt;

TEST_CASE("benchmark corpus hits its known minima") {
  const std::vector<double> zero2{0.0, 0.0};
  CHECK(make_benchmark("quadratic", 3)(std::vector<double>{0, 0, 0}) == 0.0);
  CHECK(make_benchmark("rastrigin", 2)(zero2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(make_benchmark("doublewell1d", 1)(std::vector<double>{1.0}) == 0.0);
  CHECK(make_benchmark("ackley", 2)(zero2) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK_THROWS_AS(make_benchmark("nope", 2), std::invalid_argument);
  CHECK_THROWS_AS(make_benchmark("doublewell1d", 2), std::invalid_argument);
}

TEST_CASE("known minimum is a lower bound over random probes") {
  RngStream rng(11);
  for (const auto& name : benchmark_names()) {
    const int d = name == "doublewell1d" ? 1 : 2;
    const Objective obj = make_benchmark(name, d);
    REQUIRE(obj.has_known_min());
    const double floor = obj.min_value();
    std::vector<double> x(d);
    for (int trial = 0; trial < 500; ++trial) {
      for (double& v : x) v = 8.0 * (rng.uniform() - 0.5);
      CHECK(obj(x) >= floor - 1e-12);
    }
  }
}

TEST_CASE("analytic gradients match central differences") {
  RngStream rng(12);
  for (const std::string name : {"quadratic", "doublewell1d", "rastrigin"}) {
    const int d = name == "doublewell1d" ? 1 : 3;
    const Objective obj = make_benchmark(name, d);
    REQUIRE(obj.has_analytic_gradient());
    const Objective fd("fd_" + name, d, [obj](std::span<const double> x) { return obj(x); });
    std::vector<double> x(d), ga(d), gn(d);
    for (int trial = 0; trial < 20; ++trial) {
      for (double& v : x) v = 3.0 * (rng.uniform() - 0.5);
      obj.gradient(x, ga);
      fd.gradient(x, gn);
      for (int j = 0; j < d; ++j) CHECK(ga[j] == doctest::Approx(gn[j]).epsilon(1e-5));
    }
  }
}

TEST_CASE("log cooling") {
  CHECK(log_cooling(0, 1.0) == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-12));
  double prev = log_cooling(0, 2.5);
  for (int k = 1; k < 200; ++k) {
    const double t = log_cooling(k, 2.5);
    CHECK(t < prev);
    prev = t;
  }
  CHECK(log_cooling(1e12, 1.0) < 0.04);
  CHECK_THROWS_AS(log_cooling(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(log_cooling(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("schedules") {
  const Schedule log_s = Schedule::logarithmic(1.0);
  for (int k = 0; k < 50; ++k) CHECK(log_s.value_at(k + 1) <= log_s.value_at(k));
  CHECK(Schedule::constant(0.7).value_at(123) == 0.7);
  CHECK(Schedule::geometric(2.0, 0.5).value_at(3) == doctest::Approx(0.25));
  CHECK_THROWS_AS(Schedule::constant(0.0), std::invalid_argument);
  CHECK_THROWS_AS(Schedule::geometric(1.0, -0.5), std::invalid_argument);
}

TEST_CASE("gibbs mean basics") {
  const std::vector<double> single{1.5, -2.0};
  CHECK(gibbs_mean(single, 2, std::vector<double>{3.0}, 7.0) == single);

  const std::vector<double> two{0.0, 2.0};
  const auto mid = gibbs_mean(two, 1, std::vector<double>{5.0, 5.0}, 3.0);
  CHECK(mid[0] == doctest::Approx(1.0).epsilon(1e-15));

  // large alpha recovers the argmin exactly once the other weights underflow
  const std::vector<double> points{0.0, 1.0, 2.0};
  const std::vector<double> energies{4.0, 1.0, 2.5};
  const auto sharp = gibbs_mean(points, 1, energies, 1e4);
  CHECK(sharp[0] == 1.0);

  CHECK_THROWS_AS(gibbs_mean(std::vector<double>{}, 1, std::vector<double>{}, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(gibbs_mean(two, 1, std::vector<double>{1.0, std::nan("")}, 1.0), numeric_error);
  CHECK_THROWS_AS(gibbs_mean(two, 1, std::vector<double>{1.0, 2.0}, -1.0), std::invalid_argument);
}

TEST_CASE("gibbs mean shift invariance and alpha = 0") {
  RngStream rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(20));
    std::vector<double> points(2 * n), energies(n), shifted(n);
    for (double& v : points) v = 4.0 * (rng.uniform() - 0.5);
    for (int i = 0; i < n; ++i) {
      energies[i] = 3.0 * rng.uniform();
      shifted[i] = energies[i] + 17.25;
    }
    const auto a = gibbs_mean(points, 2, energies, 4.0);
    const auto b = gibbs_mean(points, 2, shifted, 4.0);
    for (int j = 0; j < 2; ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-12));

    const auto flat = gibbs_mean(points, 2, energies, 0.0);
    std::vector<double> mean(2, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2; ++j) mean[j] += points[2 * i + j] / n;
    for (int j = 0; j < 2; ++j) CHECK(flat[j] == doctest::Approx(mean[j]).epsilon(1e-12));
  }
}

TEST_CASE("rng streams are deterministic and substreams stable") {
  RngStream a(99), b(99);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  // substream identity does not depend on how far the parent advanced
  RngStream parent1(7), parent2(7);
  parent2.next_u64();
  parent2.normal();
  auto child1 = parent1.substream(13);
  auto child2 = parent2.substream(13);
  for (int i = 0; i < 100; ++i) CHECK(child1.next_u64() == child2.next_u64());

  auto other = parent1.substream(14);
  CHECK(other.next_u64() != parent1.substream(13).next_u64());
}

TEST_CASE("rng moments are sane") {
  RngStream rng(123);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.02));
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(7) < 7);
  }
}

TEST_CASE("ensemble mean and variance are anchored") {
  Ensemble consensus(5, 2);
  for (int i = 0; i < 5; ++i) {
    consensus.particle(i)[0] = 0.1234567890123;
    consensus.particle(i)[1] = -7.5;
  }
  const auto m = consensus.mean();
  CHECK(m[0] == 0.1234567890123);  // bitwise
  CHECK(m[1] == -7.5);
  CHECK(consensus.variance_trace() == 0.0);
}

TEST_CASE("growth conditions on the quadratic") {
  // E = |x|^2/2: the inverse-continuity inequality c_p |x|^p <= E - E*
  // holds exactly up to c_p = 1/2 at p = 2; all other constants below are
  // direct bounds on the quadratic.
  const Objective obj = make_benchmark("quadratic", 2);
  GrowthConstants constants;
  constants.lipschitz = 1.0;
  constants.upper = 0.5;
  constants.lower = 0.4;
  constants.lower_radius = 1.0;
  constants.inverse_coeff = 0.5;
  constants.inverse_power = 2.0;
  constants.inverse_radius = 2.0;
  constants.far_gap = 1.9;
  RngStream rng(3);
  const auto report = verify_growth_conditions(obj, constants, 4000, rng);
  for (const auto& check : report.checks) {
    INFO(check.inequality);
    CHECK(check.satisfied_fraction == 1.0);
  }
}

TEST_CASE("growth conditions on a constant landscape") {
  Objective flat("flat", 1, [](std::span<const double>) { return 1.0; });
  flat.with_known_min({0.0}, 1.0);
  GrowthConstants constants;
  RngStream rng(4);
  const auto report = verify_growth_conditions(flat, constants, 2000, rng);
  CHECK(report.check("inverse_continuity_near").satisfied_fraction == 0.0);
  CHECK(report.check("inverse_continuity_far").satisfied_fraction == 0.0);
  CHECK(report.check("lipschitz").satisfied_fraction == 1.0);
}

TEST_CASE("growth conditions on rastrigin outside the oscillation radius") {
  // rastrigin = |x|^2 + 10 sum(1 - cos) >= |x|^2, so any c_l < 1 works
  const Objective obj = make_benchmark("rastrigin", 1);
  GrowthConstants constants;
  constants.lower = 0.5;
  constants.lower_radius = 7.0;
  constants.inverse_radius = 0.25;
  constants.inverse_coeff = 1.0;
  constants.inverse_power = 2.0;
  constants.far_gap = 0.5;
  RngStream rng(6);
  const auto report = verify_growth_conditions(obj, constants, 4000, rng);
  CHECK(report.check("lower_growth").satisfied_fraction == 1.0);
  CHECK(report.check("lower_growth").checked > 100);
}

TEST_CASE("growth conditions demand a known minimizer") {
  Objective anon("anon", 1, [](std::span<const double> x) { return x[0] * x[0]; });
  GrowthConstants constants;
  RngStream rng(8);
  CHECK_THROWS_AS(verify_growth_conditions(anon, constants, 10, rng), std::invalid_argument);
}
