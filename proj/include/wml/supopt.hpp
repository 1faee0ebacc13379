#pragma once

// Certified estimation of sup_y |T(x, y; N)| over the fiber y in T_{d-k}.

#include <cstdint>
#include <span>
#include <vector>

#include "wml/sumeval.hpp"

namespace wml {

struct BudgetSpec {
  /// Cap on grid points; exceeding it coarsens the grid and sets
  /// budget_exhausted.
  std::size_t max_evaluations = std::size_t(1) << 22;
  /// Grid points per fiber coordinate. Empty selects the automatic
  /// resolution; one entry applies to every coordinate.
  std::vector<std::size_t> coarse_grid;
  std::size_t multistarts = 4;
  std::size_t ascent_iterations = 40;
  /// Automatic resolution targets L_j h_j / 2 <= gap_fraction * sum |a_n|.
  double gap_fraction = 0.05;
};

struct SupEstimate {
  double lower = 0.0;  // max of evaluated |T|
  double upper = 0.0;  // grid max + sum_j L_j h_j / 2 + evaluation error
  TorusVector witness;  // y attaining `lower`
  std::size_t evaluations = 0;
  std::vector<double> mesh;  // h_j
  std::vector<std::size_t> grid;  // points per coordinate
  double error_bound = 0.0;  // evaluation error included in `upper`
  bool budget_exhausted = false;
};

/// L_j = 2 pi sum_n |a_n| |phi_{k+j}(n)|, j = 1..d-k.
std::vector<double> lipschitz_bounds(const SumEvaluator& ev, int k);
std::vector<double> lipschitz_bounds(const PolynomialFamily& family, const WeightSpec& weights, std::int64_t N,
                                     int k);

/// Grid resolution per fiber coordinate actually used by sup_fiber.
std::vector<std::size_t> fiber_grid(const SumEvaluator& ev, int k, const BudgetSpec& budget, bool* capped = nullptr);

/// `x` has dimension k. For k = d the value |T(x)| is returned with zero gap.
SupEstimate sup_fiber(const SumEvaluator& ev, int k, std::span<const double> x, const BudgetSpec& budget);
SupEstimate sup_fiber(const PolynomialFamily& family, const WeightSpec& weights, const TorusVector& x,
                      std::int64_t N, const BudgetSpec& budget);

/// (T^d, T, T^2, ..., T^{d-1}): the leading coefficient first, so that the
/// split at k = 1 pins u_d and frees the lower coefficients.
PolynomialFamily short_family(int d);

/// sup over (v_1..v_{d-1}) of |S_d((v, u_d); N)|. `ev` must be built on
/// short_family(d).
SupEstimate sup_short(const SumEvaluator& ev, double u_d, const BudgetSpec& budget);
SupEstimate sup_short(double u_d, int d, std::int64_t N, const BudgetSpec& budget);

}  // namespace wml
