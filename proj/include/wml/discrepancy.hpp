#pragma once

// Extreme discrepancy of finite sequences in [0, 1).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "wml/supopt.hpp"

namespace wml {

class PointSequence {
 public:
  PointSequence() = default;
  /// Throws InvalidArgument unless every value lies in [0, 1).
  explicit PointSequence(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// One value per line; blank lines and lines starting with '#' are skipped.
PointSequence read_sequence(std::istream& in);
void write_sequence(std::ostream& out, const PointSequence& seq);

struct DiscrepancyResult {
  double value = 0.0;  // max(excess, deficit)
  double excess = 0.0;   // sup of count - (b - a) N
  double deficit = 0.0;  // sup of (b - a) N - count
  std::pair<double, double> excess_interval{0.0, 0.0};
  std::pair<double, double> deficit_interval{0.0, 0.0};
};

/// Fractional parts of sum_j u_j phi_j(n), n = K+1..K+N, from the exact
/// 64-bit fixed-point phases.
PointSequence polynomial_fractional_parts(const PolynomialFamily& family, const TorusVector& x,
                                          const TorusVector& y, std::int64_t N, std::int64_t K = 0);
PointSequence polynomial_fractional_parts(const SumEvaluator& ev, std::span<const double> u);

/// Sup over open intervals (a, b) of |#{xi_n in (a, b)} - (b - a) N| in
/// O(N log N). Throws EmptySequence.
DiscrepancyResult exact_discrepancy(const PointSequence& seq);

/// Same quantity by enumerating every pair of endpoints drawn from
/// {0, 1} and the one-sided limits p-, p, p+ at each point. O(N^3).
DiscrepancyResult brute_force_discrepancy(const PointSequence& seq);

/// 3 (N / (G + 1) + sum_{g=1}^G |sum_n e(g xi_n)| / g).
double erdos_turan_bound(const PointSequence& seq, int G);

struct DiscrepancyFiberEstimate {
  double lower = 0.0;  // best discrepancy found
  double upper = 0.0;  // grid max + 2 eta N + 1
  bool heuristic = true;
  TorusVector witness;
  std::vector<std::size_t> grid;
  std::vector<double> mesh;
  double eta = 0.0;  // max phase displacement within a grid cell, in turns
  std::size_t evaluations = 0;
  bool budget_exhausted = false;
};

/// Grid per fiber coordinate so that 2 eta N <= N^{gap_exponent}.
std::vector<std::size_t> discrepancy_grid(const SumEvaluator& ev, int k, const BudgetSpec& budget,
                                          double gap_exponent, bool* capped = nullptr);

/// sup over y in T_{d-k} of D_N of the sequence generated at (x, y).
DiscrepancyFiberEstimate sup_discrepancy_fiber(const SumEvaluator& ev, int k, std::span<const double> x,
                                               const BudgetSpec& budget, double gap_exponent = 0.5);
DiscrepancyFiberEstimate sup_discrepancy_fiber(const PolynomialFamily& family, const TorusVector& x,
                                               std::int64_t N, const BudgetSpec& budget,
                                               double gap_exponent = 0.5);

}  // namespace wml
