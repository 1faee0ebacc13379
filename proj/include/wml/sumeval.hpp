#pragma once

// Evaluation of T(x, y; N) = sum_{n=K+1}^{K+N} a_n e(sum_j u_j phi_j(n)) with a
// certified absolute error bound, by three independent engines.

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "wml/kernels.hpp"
#include "wml/polyfam.hpp"

namespace wml {

/// Reduces t into [0, 1).
double reduce_mod1(double t);
/// Distance from t to the nearest integer.
double dist_to_int(double t);

/// Point of the unit torus; every coordinate is held reduced to [0, 1).
class TorusVector {
 public:
  TorusVector() = default;
  explicit TorusVector(std::vector<double> coords);
  static TorusVector zeros(std::size_t dim) { return TorusVector(std::vector<double>(dim, 0.0)); }

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  const std::vector<double>& coords() const { return coords_; }

  TorusVector concat(const TorusVector& tail) const;
  /// t -> 1 - t for t != 0.
  TorusVector negated() const;

 private:
  std::vector<double> coords_;
};

enum class EngineKind { direct, fixed_point, difference_table };

std::string_view to_string(EngineKind e);
EngineKind parse_engine(std::string_view name);

struct SumValue {
  std::complex<double> value;
  std::int64_t N = 0;
  std::int64_t K = 0;
  EngineKind engine = EngineKind::direct;
  double error_bound = 0.0;  // absolute, worst case
};

/// A coordinate as a 64-bit fraction of a turn, rounded to nearest, together
/// with the exact rounding error |t - q 2^-64|. Zero for every t that is a
/// multiple of 2^-64 (in particular every t >= 2^-12).
struct FixedCoord {
  std::uint64_t q = 0;
  double error = 0.0;
};
FixedCoord to_fixed(double t);

/// Resync period actually used by the difference-table engine for a phase
/// polynomial of the given degree: 1024, shortened for degree >= 3 so that the
/// worst-case drift per term stays below kDriftBudget.
std::size_t default_resync_period(int degree);
inline constexpr double kDriftBudget = 2e-9;
/// Worst-case sum over r < steps of the level-0 rotor error after r steps.
double rotor_drift_sum(int degree, std::size_t steps);

/// Shared per-(family, weights, N, K) state: exact phase tables, weights, and
/// magnitudes. Immutable after construction, safe to share across threads.
class SumEvaluator {
 public:
  SumEvaluator(const PolynomialFamily& family, const WeightSpec& weights, std::int64_t N,
               std::int64_t K = 0);

  std::size_t dim() const { return d_; }
  std::int64_t N() const { return N_; }
  std::int64_t K() const { return K_; }
  int degree() const { return degree_; }
  double abs_weight_sum() const { return abs_weight_sum_; }
  bool unit_weights() const { return w_re_.empty(); }

  /// sum_n |a_n| |phi_j(n)|
  double weighted_phi_abs_sum(std::size_t j) const;
  /// max_n |phi_j(n)| over the summation range.
  double max_phi_abs(std::size_t j) const { return phi_abs_max_[j]; }

  /// u has dimension d.
  SumValue evaluate(std::span<const double> u, EngineKind engine) const;

  /// Difference-table evaluation of many points at once. `points` is
  /// row-major (count x d); returns the common error bound, which assumes
  /// every coordinate is rounded to 64 fractional bits.
  double evaluate_batch(std::span<const double> points, std::span<std::complex<double>> out,
                        const kernels::KernelTable& kt = kernels::active()) const;

  /// Value and partial derivatives dT/du_j for j in `coords`, via exact
  /// fixed-point phases. grad.size() == coords.size().
  std::complex<double> value_and_gradient(std::span<const double> u, std::span<const std::size_t> coords,
                                          std::span<std::complex<double>> grad) const;

  /// Fixed-point phases sum_j q_j phi_j(n) mod 2^64 for n = K+1..K+N.
  void fixed_phases(std::span<const double> u, std::span<std::uint64_t> out) const;
  /// Worst-case phase error in turns of fixed_phases at u, maximized over n.
  double fixed_phase_error(std::span<const double> u) const;

  /// phi_j(n) mod 2^64 for n = K+1..K+N.
  std::span<const std::uint64_t> phi64(std::size_t j) const {
    return {phi64_.data() + j * static_cast<std::size_t>(N_), static_cast<std::size_t>(N_)};
  }

  std::size_t resync_period() const { return resync_; }
  void set_resync_period(std::size_t r);
  void set_kernels(const kernels::KernelTable& kt) { kernels_ = &kt; }

 private:
  SumValue eval_direct(std::span<const double> u) const;
  SumValue eval_fixed(std::span<const double> u) const;
  SumValue eval_difference(std::span<const double> u) const;
  double batch_bound(double max_coord_error) const;

  std::size_t d_;
  std::int64_t N_;
  std::int64_t K_;
  int degree_;
  std::size_t resync_;
  const kernels::KernelTable* kernels_;

  // phi_j(n) mod 2^64, index [j * N + (n - K - 1)]
  std::vector<std::uint64_t> phi64_;
  // phi_j(n) rounded to double, and the exact residual phi - hi (valid when
  // direct_ok_, i.e. every |phi_j(n)| < 2^106), same layout
  std::vector<double> phi_hi_, phi_lo_;
  bool direct_ok_ = true;
  std::vector<double> phi_abs_max_;
  std::vector<double> weighted_phi_abs_;
  double drift_full_ = 0.0;  // rotor_drift_sum(degree, resync)
  // Coefficients of each phi_j mod 2^64, constant term first.
  std::vector<std::vector<std::uint64_t>> coef64_;
  std::vector<double> w_re_, w_im_;
  double abs_weight_sum_ = 0.0;
};

/// Evaluates T(x, y; N) with the shift K (sum over n = K+1..K+N).
/// Throws DimensionMismatch, WeightTableTooShort, or PhasePrecisionLoss when
/// the bound exceeds 1e-6 N.
SumValue eval_sum(const PolynomialFamily& family, const WeightSpec& weights, const TorusVector& x,
                  const TorusVector& y, std::int64_t N, std::int64_t K = 0,
                  EngineKind engine = EngineKind::direct);

/// Coefficients (v_0, ..., v_{d-1}, u_d) of sum_i u_i (T + K)^i. v_j are
/// reduced to [0, 1) and computed exactly for the fixed-point rounding of u;
/// the leading coefficient u_d is passed through unchanged.
std::vector<double> shift_coefficients(std::span<const double> u, std::int64_t K);

struct EngineComparison {
  double max_difference = 0.0;
  std::vector<double> worst_point;
  std::size_t points = 0;
};

/// Max pairwise |difference| between the three engines over `point` (when
/// non-empty) and `trials` random points drawn from `seed`.
EngineComparison compare_engines(const PolynomialFamily& family, const WeightSpec& weights,
                                 std::span<const double> point, std::int64_t N, std::size_t trials,
                                 std::uint64_t seed, std::int64_t K = 0);

}  // namespace wml
