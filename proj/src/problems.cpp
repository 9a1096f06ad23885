#include "safecmaes/problems.hpp"

#include <algorithm>
#include <cmath>

#include "safecmaes/errors.hpp"

namespace safecmaes {

double sphere(const Vector& x) { return x.squaredNorm(); }

double ellipsoid(const Vector& x) {
  const auto d = x.size();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double c = std::pow(1000.0, static_cast<double>(i) / static_cast<double>(d - 1));
    sum += (c * x(i)) * (c * x(i));
  }
  return sum;
}

double reversed_ellipsoid(const Vector& x) {
  const auto d = x.size();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double c = std::pow(1000.0, static_cast<double>(d - 1 - i) / static_cast<double>(d - 1));
    sum += (c * x(i)) * (c * x(i));
  }
  return sum;
}

// Shifted so that the optimum sits at the origin.
double rosenbrock(const Vector& x) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double a = (x(i + 1) + 1.0) - (x(i) + 1.0) * (x(i) + 1.0);
    sum += 100.0 * a * a + x(i) * x(i);
  }
  return sum;
}

const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names{"sphere", "ellipsoid", "reversed-ellipsoid", "rosenbrock"};
  return names;
}

namespace {

Objective lookup(std::string_view name) {
  if (name == "sphere") return sphere;
  if (name == "ellipsoid") return ellipsoid;
  if (name == "reversed-ellipsoid") return reversed_ellipsoid;
  if (name == "rosenbrock") return rosenbrock;
  fail(ErrorCode::UnknownName, "unknown benchmark '" + std::string(name) + "'");
}

}  // namespace

Benchmark make_benchmark(std::string_view name, int dim) {
  Objective f = lookup(name);
  require(dim >= 2, ErrorCode::ContractViolation, "benchmarks need dimension >= 2");
  return {std::string(name), dim, std::move(f)};
}

double eval_benchmark(std::string_view name, const Vector& x) {
  const Objective f = lookup(name);
  require(x.size() >= 2 && x.allFinite(), ErrorCode::ContractViolation, "benchmarks need a finite x with dimension >= 2");
  return f(x);
}

double quantile_threshold(const Objective& f, const BoxBounds& space, double q, RngStream& rng, int n_samples) {
  require(n_samples >= 1, ErrorCode::ContractViolation, "quantile needs at least one sample");
  require(q > 0.0 && q <= 1.0, ErrorCode::DomainError, "quantile level must lie in (0, 1]");
  std::vector<double> values(static_cast<std::size_t>(n_samples));
  Vector x(space.lower.size());
  for (auto& v : values) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(space.lower(i), space.upper(i));
    v = f(x);
  }
  std::sort(values.begin(), values.end());
  const auto index = static_cast<std::size_t>(std::ceil(q * n_samples)) - 1;
  return values[std::min(index, values.size() - 1)];
}

const std::vector<std::string>& safety_kind_names() {
  static const std::vector<std::string> names{"objective-median", "first-coordinate"};
  return names;
}

SafetyKind parse_safety_kind(std::string_view name) {
  if (name == "objective-median") return SafetyKind::ObjectiveMedian;
  if (name == "first-coordinate") return SafetyKind::FirstCoordinate;
  fail(ErrorCode::UnknownName, "unknown safety kind '" + std::string(name) + "'");
}

std::string_view to_string(SafetyKind kind) {
  return kind == SafetyKind::ObjectiveMedian ? "objective-median" : "first-coordinate";
}

std::vector<SafetyConstraint> make_safety(SafetyKind kind, const Benchmark& benchmark, const BoxBounds& space,
                                          RngStream& threshold_rng) {
  switch (kind) {
    case SafetyKind::ObjectiveMedian: {
      const double h = quantile_threshold(benchmark.f, space, 0.5, threshold_rng, 10000);
      return {SafetyConstraint{benchmark.f, h, benchmark.name}};
    }
    case SafetyKind::FirstCoordinate:
      return {SafetyConstraint{[](const Vector& x) { return x(0); }, 0.0, "x1"}};
  }
  fail(ErrorCode::UnknownName, "unknown safety kind");
}

std::vector<EvaluatedSolution> sample_safe_seeds(const Objective& f, const std::vector<SafetyConstraint>& constraints,
                                                 const BoxBounds& space, RngStream& rng, int n_seed) {
  require(n_seed >= 1, ErrorCode::ContractViolation, "at least one seed must be requested");
  std::vector<EvaluatedSolution> seeds;
  long rejections = 0;
  Vector x(space.lower.size());
  while (static_cast<int>(seeds.size()) < n_seed) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(space.lower(i), space.upper(i));
    EvaluatedSolution sol = evaluate_solution(x, f, constraints);
    if (sol.safe) {
      seeds.push_back(std::move(sol));
    } else if (++rejections >= kMaxSeedRejections) {
      fail(ErrorCode::SeedSamplingExhausted, "no safe seed found after 10^6 uniform draws");
    }
  }
  return seeds;
}

}  // namespace safecmaes
