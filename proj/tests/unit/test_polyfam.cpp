#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "wml/polyfam.hpp"

using namespace wml;

namespace {

// Cofactor expansion along the first row, as an independent oracle for the
// subset-DP determinant.
IntPolynomial cofactor_det(const std::vector<std::vector<IntPolynomial>>& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  IntPolynomial acc;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<IntPolynomial>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<IntPolynomial> row;
      for (std::size_t cc = 0; cc < n; ++cc)
        if (cc != c) row.push_back(m[r][cc]);
      minor.push_back(row);
    }
    IntPolynomial term = m[0][c] * cofactor_det(minor);
    acc = (c % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

IntPolynomial wronskian_oracle(const PolynomialFamily& f) {
  const std::size_t n = f.size();
  std::vector<std::vector<IntPolynomial>> m(n);
  for (std::size_t i = 0; i < n; ++i) {
    IntPolynomial p = f[i];
    for (std::size_t j = 0; j < n; ++j) {
      m[i].push_back(p);
      p = p.derivative();
    }
  }
  return cofactor_det(m);
}

long triangular(long d) { return d * (d + 1) / 2; }

}  // namespace

TEST_CASE("parse_family") {
  auto f = parse_family("T^2; T");
  CHECK(f.size() == 2);
  CHECK(f.degrees() == std::vector<int>{2, 1});
  auto g = parse_family("T; T^2; T^3", 3);
  CHECK(g.degrees() == std::vector<int>{1, 2, 3});
  CHECK(parse_polynomial("2T^3 - T + 5").to_string() == "2T^3 - T + 5");
  CHECK(parse_polynomial("-3*t^2+100000000000000000000000").coefficient(0) ==
        BigInt("100000000000000000000000"));

  auto code_of = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of([] { parse_family("5; T"); }) == ErrorCode::ConstantPolynomial);
  CHECK(code_of([] { parse_family("T; T"); }) == ErrorCode::DuplicatePolynomial);
  CHECK(code_of([] { parse_family(""); }) == ErrorCode::EmptyFamily);
  CHECK(code_of([] { parse_family("T^"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_family("T; T^2", 3); }) == ErrorCode::ParseError);
}

TEST_CASE("polynomial arithmetic") {
  auto p = parse_polynomial("T^2 + 1");
  auto q = parse_polynomial("T - 1");
  CHECK((p * q).to_string() == "T^3 - T^2 + T - 1");
  CHECK((p - p).is_zero());
  CHECK((p - p).degree() == -1);
  CHECK(p.derivative().to_string() == "2T");
  CHECK(p.evaluate(BigInt(7)) == 50);
  CHECK(p.evaluate_mod64(-3) == 10u);
  auto big = IntPolynomial::monomial(5, BigInt(1) << 30);
  CHECK(!big.evaluate_i128(std::int64_t(1) << 20).has_value());
  CHECK(*big.evaluate_i128(1000) == (static_cast<__int128>(1000000000000000LL) << 30));
}

TEST_CASE("wronskian examples") {
  CHECK(wronskian(parse_family("T; T^2")).to_string() == "T^2");
  CHECK(wronskian(parse_family("T; 2T")).is_zero());
  CHECK(wronskian(parse_family("T; T^2; T^3")).to_string() == "2T^3");
}

TEST_CASE("wronskian matches cofactor expansion") {
  for (unsigned d = 1; d <= 6; ++d) {
    auto f = PolynomialFamily::classical(d);
    CHECK(wronskian(f) == wronskian_oracle(f));
  }
  auto g = parse_family("T^3 + 2T; -T^2 + 5; 4T^4 - T; T^5");
  CHECK(wronskian(g) == wronskian_oracle(g));
  auto h = parse_family("T^2; T; 3T^2 - 2T");
  CHECK(wronskian(h).is_zero());
  CHECK(wronskian_oracle(h).is_zero());
}

TEST_CASE("wronskian nonvanishing for classical d <= 8, zero for proportional pairs") {
  for (unsigned d = 1; d <= 8; ++d) CHECK(!wronskian(PolynomialFamily::classical(d)).is_zero());
  CHECK(wronskian(parse_family("T^3 + T; T^2; -2T^3 - 2T")).is_zero());
}

TEST_CASE("exponent report examples") {
  auto r = exponent_report(parse_family("T^2; T"), 1);
  CHECK(r.s == 3);
  CHECK(r.sigma_k == 1);
  CHECK(r.mu == Rational(5, 7));
  CHECK(r.mu * 2 == Rational(10, 7));
  CHECK(to_string(r.mu) == "5/7");

  auto r3 = exponent_report(parse_family("T^3; T^2; T"), 1);
  CHECK(r3.mu == Rational(11, 14));
  CHECK(r3.mu * 4 == Rational(22, 7));
  CHECK(*r3.mu_d == Rational(11, 14));
  CHECK(*exponent_report(parse_family("T; T^2"), 1).mu_d == Rational(5, 7));

  for (unsigned d = 1; d <= 5; ++d) {
    auto rd = exponent_report(PolynomialFamily::classical(d), static_cast<int>(d));
    CHECK(rd.sigma_k == 0);
    CHECK(rd.mu == Rational(1, 2));
    CHECK(rd.mu * 2 * rd.s == rd.s);
  }
  CHECK(!exponent_report(parse_family("T^2; T^3"), 1).mu_d.has_value());
  CHECK_THROWS_AS(exponent_report(parse_family("T"), 2), Error);
  CHECK_THROWS_AS(exponent_report(parse_family("T"), 0), Error);
}

TEST_CASE("exponent report formulas against direct recomputation") {
  auto f = parse_family("T^2; T^5; T; T^3");
  for (int k = 1; k <= 4; ++k) {
    for (const Rational theta : {Rational(1), Rational(1, 3), Rational(2, 5)}) {
      auto r = exponent_report(f, k, theta);
      const long d = 4, s = 10;
      std::vector<long> deg{2, 5, 1, 3};
      long sigma = 0;
      for (long j = k; j < d; ++j) sigma += deg[j];
      std::vector<long> sorted = deg;
      std::sort(sorted.rbegin(), sorted.rend());
      long sigma_t = std::accumulate(sorted.begin(), sorted.begin() + (d - k), 0L);
      CHECK(r.sigma_k == sigma);
      CHECK(r.sigma_tilde_k == sigma_t);
      CHECK(r.sigma_0 == 11);
      CHECK(r.delta == 1);
      CHECK(r.mu == Rational(s + sigma + d - k, 2 * s + d - k));
      CHECK(r.mu_V == Rational(s + sigma_t + d - k, 2 * s + d - k));
      CHECK(r.mu_theta == (Rational(s + 11 + d) - 2 * theta * k) / (Rational(2 * s + d) - theta * k));
      CHECK(r.delta_W == Rational(2 * sigma + d - k + 1, 2 * s + d - k + 1));
      CHECK(r.delta_CS == std::min(Rational(2 * sigma + d - k, 2 * s + d - k), Rational(sigma + 1, s)));
      CHECK(r.rho_max == 2 * s + d - k);
    }
  }
}

TEST_CASE("exponent invariants over classical families") {
  for (int d = 1; d <= 6; ++d) {
    auto f = PolynomialFamily::classical(static_cast<unsigned>(d));
    for (int k = 1; k <= d; ++k) {
      auto r = exponent_report(f, k);
      CHECK((r.mu < 1) == (Rational(r.sigma_k) < r.s));
      CHECK(r.delta_CS < r.delta_W);
      CHECK(r.s == triangular(d));
    }
  }
}

TEST_CASE("sigma_tilde dominates sigma over every ordering") {
  std::vector<std::string> polys{"T^4", "T", "T^2 + 1", "T^3"};
  std::vector<int> idx{0, 1, 2, 3};
  do {
    std::string text;
    for (int i : idx) text += polys[static_cast<std::size_t>(i)] + ";";
    text.pop_back();
    auto f = parse_family(text);
    for (int k = 1; k <= 4; ++k) {
      auto r = exponent_report(f, k);
      CHECK(r.sigma_tilde_k >= r.sigma_k);
      CHECK(r.mu_V >= r.mu);
    }
  } while (std::next_permutation(idx.begin(), idx.end()));
}

TEST_CASE("short interval exponent") {
  CHECK(short_interval_exponent(2) == Rational(5, 7));
  CHECK(short_interval_exponent(3) == Rational(11, 14));
  CHECK(short_interval_exponent(4) == Rational(19, 23));
}

TEST_CASE("individual bound") {
  auto oracle = [](double d, double nu, double q, double N) {
    return N * std::pow(1 / q + 1 / N + q * std::pow(N, -nu), 1 / (d * (d - 1)));
  };
  CHECK(individual_bound(3, 2, 1000, 1000) == doctest::Approx(oracle(3, 2, 1000, 1000)).epsilon(1e-14));
  CHECK(individual_bound(3, 2, 1000, 1000) == doctest::Approx(379.77).epsilon(1e-4));
  CHECK(individual_bound(2, 2, 31, 100) == doctest::Approx(21.30).epsilon(1e-3));
  CHECK(individual_bound(2, 2, 1, 100) >= 100.0);
  CHECK(individual_bound(3, 2, 7, 50, 0.1) == doctest::Approx(std::pow(50, 0.1) * oracle(3, 2, 7, 50)));
  CHECK_THROWS_AS(individual_bound(3, 4, 5, 10), Error);
  CHECK_THROWS_AS(individual_bound(3, 1, 5, 10), Error);
}

TEST_CASE("weights") {
  auto w = WeightSpec::from_table({{1, 0}, {0, 2}, {-3, 0}});
  CHECK(w.at(2) == std::complex<double>(0, 2));
  CHECK(w.abs_sum(1, 3) == 6.0);
  CHECK(w.max_abs(1, 3) == 3.0);
  CHECK_THROWS_AS(w.at(4), Error);
  CHECK_THROWS_AS(w.require_range(2, 3), Error);
  CHECK(WeightSpec::unit().at(1000000) == std::complex<double>(1, 0));
}

TEST_CASE("rationals") {
  CHECK(parse_rational("3/6") == Rational(1, 2));
  CHECK(parse_rational("0.25") == Rational(1, 4));
  CHECK(parse_rational("-7") == -7);
  CHECK(to_string(Rational(-10, 4)) == "-5/2");
  CHECK(to_string(Rational(4)) == "4");
}
