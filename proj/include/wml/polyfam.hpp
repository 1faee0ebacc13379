#pragma once

// Exact univariate integer polynomials, polynomial families with their
// weight sequences, and the closed-form exponents attached to a family.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "wml/error.hpp"

namespace wml {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Renders p/q in lowest terms; integers render without a denominator.
std::string to_string(const Rational& r);
Rational parse_rational(std::string_view text);

class IntPolynomial {
 public:
  IntPolynomial() = default;
  explicit IntPolynomial(std::vector<BigInt> coefficients);

  static IntPolynomial monomial(unsigned degree, const BigInt& coefficient = 1);
  static IntPolynomial constant(const BigInt& value);

  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<BigInt>& coefficients() const { return coeffs_; }
  const BigInt& leading() const;
  BigInt coefficient(unsigned power) const;

  IntPolynomial derivative() const;
  BigInt evaluate(const BigInt& t) const;

  /// Value at n reduced mod 2^64 (two's complement wrap). Exact for any n.
  std::uint64_t evaluate_mod64(std::int64_t n) const;
  /// Exact value at n if it fits in 127 bits.
  std::optional<__int128> evaluate_i128(std::int64_t n) const;
  /// Upper bound on |p(n)| for |n| <= n_max, as a double (rounded up).
  double magnitude_bound(std::int64_t n_max) const;

  std::string to_string() const;

  friend IntPolynomial operator+(const IntPolynomial& a, const IntPolynomial& b);
  friend IntPolynomial operator-(const IntPolynomial& a, const IntPolynomial& b);
  friend IntPolynomial operator*(const IntPolynomial& a, const IntPolynomial& b);
  friend IntPolynomial operator-(const IntPolynomial& a);
  friend bool operator==(const IntPolynomial& a, const IntPolynomial& b) = default;

 private:
  void normalize();
  std::vector<BigInt> coeffs_;  // constant term first
};

/// Ordered family (phi_1, ..., phi_d). The order is significant: the split
/// at k puts phi_1..phi_k on the integrated coordinates and the rest on the
/// fiber, so sigma_k depends on it. It is kept exactly as given.
class PolynomialFamily {
 public:
  explicit PolynomialFamily(std::vector<IntPolynomial> polys);

  /// (T, T^2, ..., T^d)
  static PolynomialFamily classical(unsigned d);

  std::size_t size() const { return polys_.size(); }
  const IntPolynomial& operator[](std::size_t i) const { return polys_[i]; }
  const std::vector<IntPolynomial>& polys() const { return polys_; }
  std::vector<int> degrees() const;
  int max_degree() const;
  /// Degrees form a permutation of {1, ..., d}.
  bool is_classical_degree_set() const;

  std::string to_string() const;

 private:
  std::vector<IntPolynomial> polys_;
};

/// Parses "T^3; T^2; T". Coefficients are integers of any size, `*` between
/// coefficient and variable is optional. When `expected_count` is given the
/// number of polynomials must match it.
PolynomialFamily parse_family(std::string_view text,
                              std::optional<std::size_t> expected_count = std::nullopt);
IntPolynomial parse_polynomial(std::string_view text);

struct WeightSpec {
  enum class Kind { unit, table };

  Kind kind = Kind::unit;
  std::vector<std::complex<double>> table;  // a_1 .. a_M

  static WeightSpec unit() { return {}; }
  static WeightSpec from_table(std::vector<std::complex<double>> values) {
    return {Kind::table, std::move(values)};
  }

  bool is_unit() const { return kind == Kind::unit; }
  /// Weight a_n; throws WeightTableTooShort outside the table.
  std::complex<double> at(std::int64_t n) const;
  /// Checks that a_{first} .. a_{first+count-1} all exist.
  void require_range(std::int64_t first, std::int64_t count) const;
  /// sum_{n=first}^{first+count-1} |a_n|
  double abs_sum(std::int64_t first, std::int64_t count) const;
  double max_abs(std::int64_t first, std::int64_t count) const;
};

/// Determinant of (phi_i^{(j-1)}(T)) computed in Z[T]. Identical vanishing is
/// decided by `is_zero()` on the result.
IntPolynomial wronskian(const PolynomialFamily& family);

struct ExponentReport {
  int d = 0;
  int k = 0;
  Rational theta;

  Rational s;                // d(d+1)/2
  long sigma_k = 0;          // sum of deg phi_j, j > k, in the given order
  long sigma_tilde_k = 0;    // sum of the d-k largest degrees
  long sigma_0 = 0;          // sum of all degrees
  long delta = 0;            // min degree
  Rational mu;               // projection onto the first k coordinates
  Rational mu_V;             // projection onto an arbitrary k-dim subspace
  Rational mu_theta;         // theta-Hoelder fibration, at the given theta
  std::optional<Rational> mu_d;  // short-interval sup moments; classical degree sets only
  Rational delta_W;
  Rational delta_CS;
  Rational rho_max;          // 2s + d - k
};

/// Pure arithmetic on the degree sequence; does not test the Wronskian.
/// Throws KOutOfRange unless 1 <= k <= d, InvalidArgument unless 0 < theta <= 1.
ExponentReport exponent_report(const PolynomialFamily& family, int k, const Rational& theta = 1);

/// 1 - d / (d^2 + 2d - 1)
Rational short_interval_exponent(int d);

/// N^{1+eps} (1/q + 1/N + q N^{-nu})^{1/(d(d-1))} with the implied constant
/// taken as 1. A majorant shape only.
double individual_bound(int d, int nu, std::int64_t q, double N, double eps = 0.0);

}  // namespace wml
