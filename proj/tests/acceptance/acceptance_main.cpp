// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Every tolerance and seed is fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "safecmaes/cmaes.hpp"
#include "safecmaes/errors.hpp"
#include "safecmaes/gpr.hpp"
#include "safecmaes/harness.hpp"
#include "safecmaes/mathkit.hpp"
#include "safecmaes/problems.hpp"
#include "safecmaes/safe_layer.hpp"

using namespace safecmaes;

namespace {

constexpr std::uint64_t kMasterSeed = 20240601;

// core sanity
constexpr int kCoreDim = 10;
constexpr double kCoreStart = 3.0;
constexpr double kCoreSigma = 2.0;
constexpr long kCoreBudget = 6000;
constexpr int kCoreTrials = 10;
constexpr int kCoreRequired = 9;
constexpr double kCoreSeconds = 10.0;

// exp-2
constexpr long kExp2Budget = 50000;
constexpr int kExp2Trials = 20;
constexpr int kExp2Required = 15;
constexpr double kExp2Seconds = 300.0;

// exp-1
constexpr long kExp1Budget = 1000;
constexpr int kExp1Trials = 20;
constexpr double kExp1ZeroShare = 0.75;
constexpr double kExp1Orders = 2.0;
constexpr double kExp1Seconds = 900.0;

// oracles
constexpr int kGprModels = 50;
constexpr int kGprMaxData = 60;
constexpr int kGprProbes = 20;
constexpr double kGprRelTol = 1e-5;
constexpr double kChi2Tol = 1e-8;
constexpr double kChi2ClosedTol = 1e-12;
constexpr int kProjectionCases = 10000;
constexpr double kProjectionTol = 1e-12;
constexpr int kEquivIters = 10;
constexpr double kEquivTol = 1e-6;
constexpr double kLipTrue = 3.0;
constexpr double kLipGridStep = 0.005;
constexpr double kLipGridRel = 1e-4;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* name, const Outcome& o) {
  std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double median(std::vector<double> v) { return quartiles(std::move(v)).median; }

Outcome core_sanity() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto params = default_params(kCoreDim);
  int reached = 0;
  for (int trial = 0; trial < kCoreTrials; ++trial) {
    RngStream rng(RngStream::derive_seed(kMasterSeed, static_cast<std::uint64_t>(trial), 7));
    auto state = DistributionState::initial(Vector::Constant(kCoreDim, kCoreStart), kCoreSigma);
    double best = std::numeric_limits<double>::infinity();
    long evals = 0;
    while (evals + params.lambda <= kCoreBudget && best > kTargetValue) {
      std::vector<Member> pop;
      for (const Vector& z : sample_raw(params, rng)) {
        const Sample s = decode(state, z);
        pop.push_back({s.z, s.y, s.x, sphere(s.x)});
        best = std::min(best, pop.back().f);
      }
      evals += params.lambda;
      state = tell(state, params, std::move(pop));
    }
    reached += best <= kTargetValue;
  }
  const double secs = seconds_since(t0);
  return {reached >= kCoreRequired && secs < kCoreSeconds,
          fmt("%.0f/%.0f trials reached 1e-8 within 6000 evals (need 9); %.2fs (limit 10s)", reached, kCoreTrials, secs)};
}

ExperimentConfig base_config(const std::string& problem, const std::string& safety, long budget, int trials) {
  ExperimentConfig c;
  c.problem = problem;
  c.dim = 5;
  c.safety = safety;
  c.budget = budget;
  c.trials = trials;
  c.seed = kMasterSeed;
  return c;
}

std::vector<double> final_unsafe(const ExperimentSummary& s) {
  std::vector<double> v;
  for (const auto& t : s.trials) v.push_back(t.rows.empty() ? 0.0 : static_cast<double>(t.rows.back().unsafe_count));
  return v;
}

Outcome exp2() {
  const auto t0 = std::chrono::steady_clock::now();
  auto c = base_config("sphere", "first-coordinate", kExp2Budget, kExp2Trials);
  const auto safe = run_experiment(c);
  c.algorithm = Algorithm::Cmaes;
  const auto naive = run_experiment(c);
  const double secs = seconds_since(t0);

  int reached = 0;
  for (const auto& t : safe.trials) reached += !t.rows.empty() && t.rows.back().best_safe_f <= kTargetValue;
  const double med_safe = median(final_unsafe(safe));
  const double med_naive = median(final_unsafe(naive));
  return {med_safe == 0.0 && reached >= kExp2Required && med_naive > 0.0 && secs < kExp2Seconds,
          fmt("median unsafe %.1f (need 0), %.0f/20 reached 1e-8 (need 15), naive median unsafe %.1f (need > 0); %.1fs",
              med_safe, reached, med_naive, secs)};
}

struct Exp1Result {
  Outcome outcome;
  double sphere_safe_median_unsafe = 0.0;
};

Exp1Result exp1() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  double sphere_unsafe = 0.0;
  for (const auto& name : benchmark_names()) {
    const auto s = run_experiment(base_config(name, "objective-median", kExp1Budget, kExp1Trials));
    const auto unsafe = final_unsafe(s);
    const double zero_share =
        static_cast<double>(std::count(unsafe.begin(), unsafe.end(), 0.0)) / static_cast<double>(unsafe.size());
    ok = ok && zero_share >= kExp1ZeroShare;
    detail += name + " zero-unsafe " + fmt("%.0f%%", 100.0 * zero_share) + "; ";
    if (name == "sphere") {
      sphere_unsafe = median(unsafe);
      std::vector<double> init, fin;
      for (const auto& t : s.trials) {
        init.push_back(t.rows.front().best_f);
        fin.push_back(t.rows.back().best_f);
      }
      const double orders = std::log10(median(init) / median(fin));
      ok = ok && orders >= kExp1Orders;
      detail += fmt("sphere median best-f %.3g -> %.3g (%.1f orders, need 2); ", median(init), median(fin), orders);
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < kExp1Seconds;
  return {{ok, detail + fmt("%.1fs (limit 900s)", secs)}, sphere_unsafe};
}

Outcome avoidance_contrast(double safe_median) {
  auto c = base_config("sphere", "objective-median", kExp1Budget, kExp1Trials);
  c.algorithm = Algorithm::Avoidance;
  const double avoid = median(final_unsafe(run_experiment(c)));
  return {avoid > safe_median, fmt("avoidance median unsafe %.1f vs safe CMA-ES %.1f", avoid, safe_median)};
}

Outcome gpr_gradient() {
  std::mt19937_64 gen(kMasterSeed);
  const int dims[] = {2, 5, 20};
  double worst = 0.0;
  for (int m = 0; m < kGprModels; ++m) {
    const int d = dims[m % 3];
    const int n = 2 + static_cast<int>(gen() % (kGprMaxData - 1));
    const auto model = oracle::random_model(gen, d, n);
    for (int k = 0; k < kGprProbes; ++k) {
      const Vector z = oracle::uniform_vector(gen, d, -3, 3);
      worst = std::max(worst, oracle::relative_gradient_error(model.mean_gradient(z), oracle::gpr_gradient_fd(model, z)));
    }
  }
  return {worst <= kGprRelTol, fmt("max relative error %.2e over 50 models x 20 probes (limit 1e-5)", worst)};
}

Outcome chi2() {
  double worst = 0.0, worst_closed = 0.0;
  for (int k : {1, 2, 5, 20}) {
    for (int i = 1; i <= 99; ++i) {
      const double p = i / 100.0;
      const double x = chi2_ppf(p, k);
      worst = std::max(worst, std::abs(x - oracle::chi2_ppf(p, k)));
      if (k == 2) worst_closed = std::max(worst_closed, std::abs(x + 2.0 * std::log1p(-p)));
    }
  }
  return {worst <= kChi2Tol && worst_closed <= kChi2ClosedTol,
          fmt("max |ppf - quadrature| %.2e (limit 1e-8); k=2 closed form %.2e (limit 1e-12)", worst, worst_closed)};
}

Outcome projection_suite() {
  std::mt19937_64 gen(kMasterSeed + 1);
  std::uniform_real_distribution<double> radius(0.0, 2.5);
  int bad = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < kProjectionCases; ++c) {
    const int d = 1 + c % 10;
    SafeRegion region;
    const int n = 1 + static_cast<int>(gen() % 12);
    for (int k = 0; k < n; ++k)
      region.anchors.push_back({oracle::normal_vector(gen, d) * 2.0, radius(gen), static_cast<std::size_t>(k)});
    const Vector z = oracle::normal_vector(gen, d) * 3.0;
    const auto p = project(z, region);

    std::size_t argmax = 0;
    bool inside = false;
    for (std::size_t k = 0; k < region.anchors.size(); ++k) {
      const auto& a = region.anchors[k];
      inside = inside || (z - a.z).norm() <= a.radius;
      if (a.radius - (z - a.z).norm() > region.anchors[argmax].radius - (z - region.anchors[argmax].z).norm()) argmax = k;
    }
    const auto& near = region.anchors[p.anchor];
    const double excess = (p.z - near.z).norm() - near.radius;
    worst_excess = std::max(worst_excess, excess);
    const bool ok = excess <= kProjectionTol && p.xi >= 0.0 && p.xi <= 1.0 && (!inside || (p.xi == 1.0 && p.z == z)) &&
                    p.anchor == argmax;
    bad += !ok;
  }
  return {bad == 0, fmt("%.0f/10000 cases violated; worst containment excess %.2e (limit 1e-12)", bad, worst_excess)};
}

Outcome affine_equivariance() {
  const int d = 5;
  std::mt19937_64 gen(kMasterSeed + 2);
  const Matrix r = oracle::haar_orthogonal(gen, d);
  const Vector a = oracle::normal_vector(gen, d);
  const double h = 1.0;
  std::vector<SafetyConstraint> cons{{[a](const Vector& x) { return a.dot(x); }, h, "linear"}};
  std::vector<SafetyConstraint> cons_r{{[a, r](const Vector& x) { return a.dot(r.transpose() * x); }, h, "linear"}};
  const Objective f = rosenbrock;
  const Objective f_r = [r](const Vector& x) { return rosenbrock(r.transpose() * x); };

  RngStream seed_rng(kMasterSeed + 3);
  const auto seeds = sample_safe_seeds(f, cons, BoxBounds::cube(d, -5, 5), seed_rng, 10);
  std::vector<EvaluatedSolution> seeds_r;
  for (const auto& s : seeds) seeds_r.push_back(evaluate_solution(r * s.x, f_r, cons_r));

  const auto params = default_params(d);
  const Vector m0 = seeds[init_mean(seeds)].x;
  SafeCmaes x(DistributionState::initial(m0, 2.0), seeds, thresholds_of(cons), params, {}, kMasterSeed);
  SafeCmaes y(DistributionState::with_factor(r * m0, 2.0, r), seeds_r, thresholds_of(cons_r), params, {}, kMasterSeed);
  double worst = 0.0;
  for (int t = 0; t < kEquivIters; ++t) {
    const auto sx = x.ask();
    const auto sy = y.ask();
    std::vector<EvaluatedSolution> ex, ey;
    for (std::size_t i = 0; i < sx.size(); ++i) {
      worst = std::max(worst, (sx[i].sample.z - sy[i].sample.z).norm());
      ex.push_back(evaluate_solution(sx[i].sample.x, f, cons));
      ey.push_back(evaluate_solution(sy[i].sample.x, f_r, cons_r));
    }
    x.tell(sx, ex);
    y.tell(sy, ey);
  }
  return {worst <= kEquivTol, fmt("max |z~ - z~'| over 10 iterations %.2e (limit 1e-6)", worst)};
}

Outcome lipschitz_soundness() {
  const int d = 2;
  std::mt19937_64 gen(kMasterSeed + 4);
  std::vector<Vector> z;
  Vector s(40);
  const auto state = DistributionState::initial(Vector::Zero(d), 1.0);
  for (int i = 0; i < 40; ++i) {
    const Vector x = oracle::uniform_vector(gen, d, -2, 2);
    z.push_back(phi(x, state));
    s(i) = kLipTrue * x(0);
  }
  const auto params = default_params(d);
  SafeHyperParams hp;
  RngStream rng(kMasterSeed + 5);
  const auto raw = estimate_raw_lipschitz(z, s, params.lambda, rng, hp);
  if (!raw) return {false, "estimator returned no value"};

  // dense grid over the same search box on the same surrogate
  const double mean = s.mean();
  const double spread = std::sqrt((s.array() - mean).square().mean());
  const auto model = GprModel::fit(z, (s.array() - mean) / spread, 8.0 * d);
  double grid = 0.0;
  const int steps = static_cast<int>(std::lround(2.0 * hp.search_radius / kLipGridStep));
  Vector q(d);
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; j <= steps; ++j) {
      q << -hp.search_radius + i * kLipGridStep, -hp.search_radius + j * kLipGridStep;
      grid = std::max(grid, model.mean_gradient(q).norm());
    }
  grid *= spread;
  const bool in_band = *raw >= 0.5 * kLipTrue && *raw <= 2.0 * kLipTrue;
  const bool matches = std::abs(*raw - grid) <= kLipGridRel * grid;
  return {in_band && matches, fmt("Lhat %.6f in [1.5, 6]; dense-grid max %.6f (rel diff %.1e, limit 1e-4)", *raw, grid,
                                  std::abs(*raw - grid) / grid)};
}

Outcome coefficient_dynamics() {
  SafeHyperParams hp;  // zeta_init 10, T_data 5, alpha 10
  const int lambda = 8, d = 5;
  bool ok = true;
  for (std::size_t n = 1; n < 60; ++n) {
    const double expected = n < static_cast<std::size_t>(lambda * hp.t_data) ? std::pow(10.0, 1.0 / static_cast<double>(n)) : 1.0;
    ok = ok && update_tau(n, lambda, hp) == expected;
  }
  ok = ok && update_tau(40, lambda, hp) == 1.0 && update_tau(39, lambda, hp) > 1.0;
  for (double nu : {0.125, 0.5, 1.0}) ok = ok && update_rho(3.0, nu, d, hp.alpha) == 3.0 * std::pow(hp.alpha, nu);
  ok = ok && std::abs(update_rho(1.0, 1.0, d, hp.alpha) - hp.alpha) <= 1e-15 * hp.alpha;
  double rho = 100.0;
  for (int k = 1; k <= 20; ++k) {
    const double next = update_rho(rho, 0.0, d, hp.alpha);
    ok = ok && next == std::max(1.0, rho / std::pow(hp.alpha, 1.0 / d)) && next >= 1.0;
    rho = next;
  }
  ok = ok && rho == 1.0 && update_rho(1.0, 0.0, d, hp.alpha) == 1.0;
  return {ok, "tau = zeta^(1/N) below lambda*T_data and 1 from there; rho grows by alpha^nu, decays by alpha^(1/d), floors at 1"};
}

}  // namespace

int main() {
  try {
    report("core CMA-ES sanity (10-d sphere)", core_sanity());
    report("exp-2 reproduction (d=5 sphere, x1 <= 0)", exp2());
    const Exp1Result e1 = exp1();
    report("exp-1 reproduction (d=5, four benchmarks, median threshold)", e1.outcome);
    report("violation-avoidance contrast (exp-1 sphere)", avoidance_contrast(e1.sphere_safe_median_unsafe));
    report("GPR gradient vs finite differences", gpr_gradient());
    report("chi2 ppf vs quadrature oracle", chi2());
    report("projection property suite", projection_suite());
    report("safe-layer affine equivariance (d=5 rosenbrock)", affine_equivariance());
    report("Lipschitz estimator soundness (s = 3 x1)", lipschitz_soundness());
    report("tau / rho coefficient dynamics", coefficient_dynamics());
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d failing criteria\n", failures);
  return failures == 0 ? 0 : 1;
}
