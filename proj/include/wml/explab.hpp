#pragma once

// Monte Carlo moments and superlevel measures of fiber suprema, box
// counting, exponent fitting and the auxiliary checks built on them.

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "wml/discrepancy.hpp"
#include "wml/supopt.hpp"

namespace wml {

/// Runs fn(i) for i in [0, count) on `threads` workers (0 or 1: inline).
/// fn must only write to per-index state.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

/// Neumaier-compensated sum in index order.
double compensated_sum(const std::vector<double>& values);

struct MonteCarloOptions {
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  BudgetSpec budget;
};

/// The i-th Monte Carlo point: dim uniforms from stream (seed, i).
std::vector<double> sample_point(std::uint64_t seed, std::size_t index, std::size_t dim);

struct SampleRecord {
  std::size_t index = 0;
  std::vector<double> x;
  double sup_lower = 0.0;
  double sup_upper = 0.0;
  bool budget_exhausted = false;
};

struct MomentEstimate {
  double mean_lower = 0.0;
  double mean_upper = 0.0;
  double stderr_lower = 0.0;
  double stderr_upper = 0.0;
  std::size_t samples = 0;
  double rho = 0.0;
  std::int64_t N = 0;
  int k = 0;
  std::uint64_t seed = 0;
  std::size_t budget_exhausted = 0;  // samples whose sup hit the budget
  bool beyond_validity = false;      // rho above the theorem's range
  std::vector<SampleRecord> records;
};

struct MeasureEstimate {
  double fraction_lower = 0.0;
  double fraction_upper = 0.0;
  double stderr_lower = 0.0;
  double stderr_upper = 0.0;
  double threshold = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Sample mean and standard error of sup^rho over the records.
MomentEstimate moment_from_records(const std::vector<SampleRecord>& records, double rho);

/// Fiber suprema at `samples` uniform points x in T_k (k = d: |T(x)|).
std::vector<SampleRecord> sample_fiber_sups(const SumEvaluator& ev, int k, const MonteCarloOptions& opt);

/// Fractions of x with sup_fiber lower / upper >= T, for each threshold on
/// shared samples.
std::vector<MeasureEstimate> measure_superlevel(const std::vector<SampleRecord>& records,
                                                const std::vector<double>& thresholds, std::uint64_t seed);
MeasureEstimate measure_superlevel(const PolynomialFamily& family, const WeightSpec& weights, int k,
                                   std::int64_t N, double threshold, const MonteCarloOptions& opt);

MomentEstimate moment_estimate(const PolynomialFamily& family, const WeightSpec& weights, int k, double rho,
                               std::int64_t N, const MonteCarloOptions& opt);

/// Integrand sup over (v_1..v_{d-1}) of |S_d((v, u_d); N)|^rho, sampled over
/// u_d (the other coordinates do not enter).
MomentEstimate short_moment_estimate(int d, double rho, std::int64_t N, const MonteCarloOptions& opt);

/// Integrand sup_y D(x, y; N)^rho. `gap_exponent` sets the grid through
/// 2 eta N <= N^gap_exponent.
MomentEstimate discrepancy_moment_estimate(const PolynomialFamily& family, int k, double rho, std::int64_t N,
                                           const MonteCarloOptions& opt, double gap_exponent = 0.5);

/// int_{T_d} |T(u; N)|^rho du by the tensor rectangle rule with `points`
/// nodes per coordinate (exact for trigonometric polynomials of lower
/// degree than `points` in each variable).
double quadrature_moment(const SumEvaluator& ev, double rho, std::size_t points, std::size_t threads = 1);

// ---------------------------------------------------------------------------

struct BoxCountReport {
  std::vector<std::uint64_t> zeta_inverse;  // 1 / zeta_j
  std::vector<double> zeta;
  std::uint64_t U = 0;
  std::uint64_t marked = 0;          // certified superset count
  std::uint64_t sampled_marked = 0;  // boxes with a probe reaching N^alpha
  double exponent = 0.0;             // s(d)(1 - 2 alpha)
  double slack = 0.0;                // N^{slack_exponent}
  double bound = 0.0;                // U N^exponent slack
  double alpha = 0.0;
  double eps = 0.0;
  std::size_t sampler_density = 1;
  double lipschitz_slack = 0.0;      // added to every probe maximum
  bool pass = false;                 // marked <= bound
};

/// 1 / ceil(N^{e + 1 + eps - alpha}).
std::uint64_t box_count_per_axis(std::int64_t N, int e, double alpha, double eps);

/// Boxes of the partition of T_d with sides zeta_j. Each box is probed at
/// sampler_density^d sub-box centres; it is marked when the probe maximum
/// plus the Lipschitz slack over a sub-box reaches N^alpha.
/// Throws BoxBudgetExceeded when U > box_cap.
BoxCountReport box_count_experiment(const PolynomialFamily& family, const WeightSpec& weights, std::int64_t N,
                                    double alpha, double eps, std::size_t sampler_density = 1,
                                    double slack_exponent = 0.2, std::uint64_t box_cap = 1000000,
                                    std::size_t threads = 1);

// ---------------------------------------------------------------------------

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::vector<std::pair<double, double>> points;  // (ln N, ln value)
};

/// Least squares on (ln N, ln value). Throws DegenerateLadder unless there
/// are at least 3 points with strictly increasing N and positive values.
ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& ladder);

/// rho a / b. Throws InvalidArgument unless 0 < a < b and rho > 0,
/// RhoExceedsB when rho > b.
double level_set_moment_exponent(double a, double b, double rho);

/// f(x) = sum_m c_m e(m x); the test function is f or |f|^2.
struct TrigPolynomial {
  std::vector<std::pair<std::int64_t, std::complex<double>>> terms;
  bool squared_modulus = false;
  std::complex<double> operator()(double x) const;
};

struct DilationCheck {
  std::complex<double> dilated;  // int F(g x) dx
  std::complex<double> plain;    // int F(x) dx
  double difference = 0.0;
};

DilationCheck dilation_invariance_check(std::int64_t g, const TrigPolynomial& F, std::size_t quadrature_points);

/// d = 2: N + sum_{h=1}^N min(1/||2hx||, N), a majorant shape for
/// sup_y |S|^2. d = 3: N^3 + N sum_{gh != 0, |g|,|h| <= N} min(1/||6ghx||, N),
/// for sup |S|^4.
double pointwise_majorant(double x, std::int64_t N, int d);

}  // namespace wml
