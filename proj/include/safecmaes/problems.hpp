#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "safecmaes/box_qn.hpp"
#include "safecmaes/rng.hpp"
#include "safecmaes/safe_layer.hpp"

namespace safecmaes {

using Objective = std::function<double(const Vector&)>;

/// All four have a unique minimum f(0) = 0.
double sphere(const Vector& x);
double ellipsoid(const Vector& x);
double reversed_ellipsoid(const Vector& x);
double rosenbrock(const Vector& x);

struct Benchmark {
  std::string name;
  int dim = 0;
  Objective f;
};

/// Names: sphere, ellipsoid, reversed-ellipsoid, rosenbrock.
const std::vector<std::string>& benchmark_names();

/// Throws UnknownName for an unregistered name, ContractViolation for dim < 2.
Benchmark make_benchmark(std::string_view name, int dim);

double eval_benchmark(std::string_view name, const Vector& x);

/// Empirical q-quantile of f over n uniform draws in the box: the sorted value
/// at index ceil(q n) - 1.
double quantile_threshold(const Objective& f, const BoxBounds& space, double q, RngStream& rng,
                          int n_samples = 10000);

enum class SafetyKind { ObjectiveMedian, FirstCoordinate };

/// Names: objective-median (s = f, h = median over the space), first-coordinate (s = x1, h = 0).
const std::vector<std::string>& safety_kind_names();
SafetyKind parse_safety_kind(std::string_view name);
std::string_view to_string(SafetyKind kind);

/// Builds the single-constraint list. For ObjectiveMedian the threshold is
/// estimated from `threshold_rng` with 10,000 uniform samples.
std::vector<SafetyConstraint> make_safety(SafetyKind kind, const Benchmark& benchmark, const BoxBounds& space,
                                          RngStream& threshold_rng);

inline constexpr long kMaxSeedRejections = 1'000'000;

/// Rejection-samples uniform points in the box until `n_seed` safe ones are
/// found. Throws SeedSamplingExhausted after 10^6 rejections.
std::vector<EvaluatedSolution> sample_safe_seeds(const Objective& f, const std::vector<SafetyConstraint>& constraints,
                                                 const BoxBounds& space, RngStream& rng, int n_seed = 10);

struct ProblemInstance {
  Benchmark benchmark;
  BoxBounds space;
  std::vector<SafetyConstraint> constraints;
  std::vector<EvaluatedSolution> seeds;
};

}  // namespace safecmaes
