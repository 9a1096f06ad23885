#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "safecmaes/errors.hpp"
#include "safecmaes/problems.hpp"

using namespace safecmaes;

TEST_CASE("benchmarks: hand values") {
  CHECK(eval_benchmark("sphere", Vector(Eigen::Vector2d(1, 2))) == 5.0);
  CHECK(eval_benchmark("ellipsoid", Vector(Eigen::Vector2d(1, 1))) == doctest::Approx(1.0 + 1e6).epsilon(1e-15));
  CHECK(eval_benchmark("reversed-ellipsoid", Vector(Eigen::Vector2d(1, 0))) == doctest::Approx(1e6).epsilon(1e-15));
  for (const auto& name : benchmark_names()) CHECK(eval_benchmark(name, Vector::Zero(5)) == 0.0);
  // unshifted rosenbrock at (1,1,1) is 0; ours is shifted by one
  CHECK(eval_benchmark("rosenbrock", Vector::Constant(3, -1.0)) == 2.0);
  CHECK(eval_benchmark("rosenbrock", Vector(Eigen::Vector2d(1, 0))) == doctest::Approx(100.0 * 9.0 + 1.0));
  CHECK_THROWS_AS(eval_benchmark("nope", Vector::Zero(2)), Error);
  CHECK_THROWS_AS(make_benchmark("sphere", 1), Error);
}

TEST_CASE("benchmarks: positive away from the origin") {
  std::mt19937_64 gen(1);
  for (const auto& name : benchmark_names()) {
    for (int i = 0; i < 10000; ++i) {
      const Vector x = oracle::uniform_vector(gen, 2 + i % 9, -5, 5);
      CHECK(eval_benchmark(name, x) > 0.0);
    }
  }
}

TEST_CASE("benchmarks: reversed ellipsoid is the ellipsoid on reversed coordinates") {
  std::mt19937_64 gen(2);
  for (int i = 0; i < 1000; ++i) {
    const Vector x = oracle::uniform_vector(gen, 2 + i % 19, -5, 5);
    CHECK(reversed_ellipsoid(x) == doctest::Approx(ellipsoid(x.reverse())).epsilon(1e-14));
  }
}

TEST_CASE("quantile_threshold: constant function and uniform median") {
  RngStream rng(1);
  const auto box1 = BoxBounds::cube(1, -5, 5);
  CHECK(quantile_threshold([](const Vector&) { return 4.25; }, box1, 0.5, rng) == 4.25);
  CHECK(std::abs(quantile_threshold([](const Vector& x) { return x(0); }, box1, 0.5, rng)) < 0.2);
  CHECK_THROWS_AS(quantile_threshold(sphere, box1, 0.0, rng), Error);
}

TEST_CASE("make_safety: first coordinate and objective median") {
  const auto bench = make_benchmark("sphere", 5);
  const auto box = BoxBounds::cube(5, -5, 5);
  RngStream rng(3);
  const auto fc = make_safety(SafetyKind::FirstCoordinate, bench, box, rng);
  REQUIRE(fc.size() == 1);
  Vector x(2);
  x << -1, 3;
  CHECK(fc[0].fn(x) == -1.0);
  CHECK(evaluate_solution(x, sphere, fc).safe);
  x << 0, 7;
  CHECK(evaluate_solution(x, sphere, fc).safe);
  x << 1e-300, 0;
  CHECK(!evaluate_solution(x, sphere, fc).safe);

  const auto med = make_safety(SafetyKind::ObjectiveMedian, bench, box, rng);
  std::mt19937_64 gen(4);
  int safe = 0;
  for (int i = 0; i < 10000; ++i) safe += evaluate_solution(oracle::uniform_vector(gen, 5, -5, 5), sphere, med).safe;
  CHECK(std::abs(safe / 10000.0 - 0.5) < 0.03);
  CHECK(parse_safety_kind("objective-median") == SafetyKind::ObjectiveMedian);
  CHECK_THROWS_AS(parse_safety_kind("x"), Error);
}

TEST_CASE("sample_safe_seeds: all safe, default count, impossible constraint") {
  const auto box = BoxBounds::cube(4, -5, 5);
  std::vector<SafetyConstraint> fc{{[](const Vector& x) { return x(0); }, 0.0, "x1"}};
  RngStream rng(5);
  const auto seeds = sample_safe_seeds(sphere, fc, box, rng);
  CHECK(seeds.size() == 10);
  for (const auto& s : seeds) {
    CHECK(s.x(0) <= 0.0);
    CHECK(s.safe);
    CHECK(s.f == sphere(s.x));
  }
  std::vector<SafetyConstraint> impossible{{sphere, -1.0, "never"}};
  try {
    sample_safe_seeds(sphere, impossible, box, rng, 1);
    FAIL("expected SeedSamplingExhausted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SeedSamplingExhausted);
  }
}
