#include <cmath>
#include <numbers>

#include "doctest.h"
#include "wml/rng.hpp"
#include "wml/sumeval.hpp"

using namespace wml;

namespace {

constexpr EngineKind kEngines[] = {EngineKind::direct, EngineKind::fixed_point, EngineKind::difference_table};

// Exact oracle for coordinates that are multiples of 2^-53: the phase is
// reduced in big integers and only the final cis is rounded (long double).
std::complex<long double> oracle_sum(const PolynomialFamily& f, const std::vector<double>& u, std::int64_t N,
                                     std::int64_t K = 0, const WeightSpec& w = WeightSpec::unit()) {
  const BigInt mod = BigInt(1) << 53;
  std::vector<BigInt> m;
  for (double c : u) m.push_back(BigInt(static_cast<long long>(std::ldexp(c, 53))));
  std::complex<long double> acc = 0;
  for (std::int64_t n = K + 1; n <= K + N; ++n) {
    BigInt p = 0;
    for (std::size_t j = 0; j < f.size(); ++j) p += m[j] * f[j].evaluate(BigInt(n));
    p %= mod;
    if (p < 0) p += mod;
    const long double t = std::ldexp(static_cast<long double>(p.convert_to<long long>()), -53);
    const long double a = 2 * std::numbers::pi_v<long double> * t;
    const auto wn = w.at(n);
    acc += std::complex<long double>(wn.real(), wn.imag()) * std::complex<long double>(std::cos(a), std::sin(a));
  }
  return acc;
}

std::vector<double> random_point(CounterRng& rng, std::size_t d) {
  std::vector<double> u(d);
  for (auto& c : u) c = rng.uniform();
  return u;
}

}  // namespace

TEST_CASE("reference values") {
  for (auto e : kEngines) {
    CAPTURE(to_string(e));
    auto f = parse_family("T^3; T^2; T");
    auto v = eval_sum(f, WeightSpec::unit(), TorusVector({0.0}), TorusVector({0.0, 0.0}), 10, 0, e);
    CHECK(v.value.real() == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(std::abs(v.value.imag()) < 1e-13);

    auto g = parse_family("T^2");
    auto w = SumEvaluator(g, WeightSpec::unit(), 5).evaluate(std::vector<double>{0.2}, e);
    CHECK(std::abs(std::abs(w.value) - std::sqrt(5.0)) < 1e-12);

    auto h = parse_family("T^2; T");
    auto z = eval_sum(h, WeightSpec::unit(), TorusVector({0.5}), TorusVector({0.5}), 8, 0, e);
    CHECK(std::abs(z.value - std::complex<double>(8, 0)) < 1e-12);
  }
}

TEST_CASE("Gauss sums") {
  auto f = parse_family("T; T^2");
  for (int p : {5, 13, 17, 101}) {
    SumEvaluator ev(f, WeightSpec::unit(), p);
    for (auto e : kEngines) {
      auto v = ev.evaluate(std::vector<double>{0.0, 1.0 / p}, e);
      CHECK(std::abs(std::abs(v.value) - std::sqrt(double(p))) < 1e-9);
    }
  }
}

TEST_CASE("engines agree with the exact oracle") {
  CounterRng rng(2024, 7);
  for (const char* text : {"T", "T^2; T", "T^3; T^2; T", "T^4 - 3T; 7T^2", "T^6; T^5 + T"}) {
    auto f = parse_family(text);
    for (std::int64_t N : {1, 37, 1500}) {
      for (std::int64_t K : {0, -20, 1000}) {
        SumEvaluator ev(f, WeightSpec::unit(), N, K);
        for (int t = 0; t < 3; ++t) {
          auto u = random_point(rng, f.size());
          auto ref = oracle_sum(f, u, N, K);
          for (auto e : kEngines) {
            CAPTURE(text);
            CAPTURE(N);
            CAPTURE(to_string(e));
            auto v = ev.evaluate(u, e);
            const double err = static_cast<double>(std::abs(std::complex<long double>(v.value.real(), v.value.imag()) - ref));
            CHECK(err <= v.error_bound + 1e-15);
            CHECK(err <= 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("weighted sums") {
  std::vector<std::complex<double>> table;
  CounterRng rng(3, 3);
  for (int i = 0; i < 3000; ++i) table.emplace_back(rng.uniform() - 0.5, rng.uniform());
  auto w = WeightSpec::from_table(table);
  auto f = parse_family("T^3; T");
  SumEvaluator ev(f, w, 2500, 100);
  for (int t = 0; t < 3; ++t) {
    auto u = random_point(rng, 2);
    auto ref = oracle_sum(f, u, 2500, 100, w);
    for (auto e : kEngines) {
      auto v = ev.evaluate(u, e);
      CHECK(static_cast<double>(std::abs(std::complex<long double>(v.value.real(), v.value.imag()) - ref)) <=
            v.error_bound);
    }
  }
  CHECK_THROWS_AS(SumEvaluator(f, w, 3000, 1), Error);
}

TEST_CASE("errors") {
  auto f = parse_family("T^2; T");
  auto code = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code([&] { eval_sum(f, WeightSpec::unit(), TorusVector({0.1}), TorusVector(), 10); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code([&] {
          eval_sum(f, WeightSpec::from_table({1, 1, 1}), TorusVector({0.1}), TorusVector({0.2}), 10);
        }) == ErrorCode::WeightTableTooShort);
  auto huge = parse_family("T^20");
  CHECK(code([&] { SumEvaluator(huge, WeightSpec::unit(), 1000).evaluate(std::vector<double>{0.3}, EngineKind::direct); }) ==
        ErrorCode::PhasePrecisionLoss);
  auto v = SumEvaluator(f, WeightSpec::unit(), 0).evaluate(std::vector<double>{0.3, 0.1}, EngineKind::difference_table);
  CHECK(v.value == std::complex<double>{});
  CHECK(v.error_bound == 0.0);
}

TEST_CASE("triangle inequality and conjugation") {
  CounterRng rng(1, 1);
  auto f = parse_family("T^3; T^2; T");
  SumEvaluator ev(f, WeightSpec::unit(), 777);
  for (int t = 0; t < 20; ++t) {
    TorusVector u(random_point(rng, 3));
    for (auto e : kEngines) {
      auto a = ev.evaluate(u.coords(), e);
      auto b = ev.evaluate(u.negated().coords(), e);
      CHECK(std::abs(a.value) <= ev.abs_weight_sum() + a.error_bound);
      CHECK(std::abs(a.value - std::conj(b.value)) <= 2 * a.error_bound + 2 * b.error_bound);
    }
  }
}

TEST_CASE("Chasles additivity") {
  CounterRng rng(9, 9);
  auto f = parse_family("T^3; T^2; T");
  for (int t = 0; t < 10; ++t) {
    auto u = random_point(rng, 3);
    const std::int64_t K = static_cast<std::int64_t>(rng.next() % 5000) - 2500;
    const std::int64_t N1 = static_cast<std::int64_t>(rng.next() % 2000), N2 = static_cast<std::int64_t>(rng.next() % 2000);
    for (auto e : kEngines) {
      auto whole = SumEvaluator(f, WeightSpec::unit(), N1 + N2, K).evaluate(u, e);
      auto a = SumEvaluator(f, WeightSpec::unit(), N1, K).evaluate(u, e);
      auto b = SumEvaluator(f, WeightSpec::unit(), N2, K + N1).evaluate(u, e);
      CHECK(std::abs(whole.value - a.value - b.value) <= whole.error_bound + a.error_bound + b.error_bound);
    }
  }
}

TEST_CASE("shift coefficients") {
  auto v = shift_coefficients(std::vector<double>{0.0, 1.0}, 1);
  CHECK(v == std::vector<double>{0.0, 0.0, 1.0});
  auto w = shift_coefficients(std::vector<double>{0.3, 0.7, 0.125}, 0);
  CHECK(w[0] == 0.0);
  CHECK(w[1] == 0.3);
  CHECK(w[2] == 0.7);
  CHECK(w[3] == 0.125);
  auto z = shift_coefficients(std::vector<double>{1.0, 0.0}, 7);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);  // 1 mod 1

  CounterRng rng(4, 4);
  for (unsigned d = 2; d <= 4; ++d) {
    auto f = PolynomialFamily::classical(d);
    for (int t = 0; t < 5; ++t) {
      auto u = random_point(rng, d);
      const std::int64_t K = static_cast<std::int64_t>(rng.next() % 100000);
      auto s = shift_coefficients(u, K);
      std::vector<double> shifted(s.begin() + 1, s.end());
      auto a = SumEvaluator(f, WeightSpec::unit(), 300, K).evaluate(u, EngineKind::fixed_point);
      auto b = SumEvaluator(f, WeightSpec::unit(), 300, 0).evaluate(shifted, EngineKind::fixed_point);
      CHECK(std::abs(std::abs(a.value) - std::abs(b.value)) < 1e-9);
      // including the constant phase the values coincide
      const double ph = 2 * std::numbers::pi * s[0];
      CHECK(std::abs(a.value - b.value * std::complex<double>(std::cos(ph), std::sin(ph))) < 1e-9);
    }
  }
}

TEST_CASE("compare_engines") {
  auto f = parse_family("T^3; T^2; T");
  auto c1 = compare_engines(f, WeightSpec::unit(), std::vector<double>{0.1, 0.2, 0.3}, 1, 20, 1);
  CHECK(c1.max_difference <= 1e-15);
  auto c2 = compare_engines(f, WeightSpec::unit(), {}, 10000, 5, 42);
  CHECK(c2.max_difference <= 1e-8);
  CHECK(c2.points == 5);
  std::vector<double> dyadic{12345.0 / (1 << 20), 777.0 / (1 << 20), 999999.0 / (1 << 20)};
  SumEvaluator ev(f, WeightSpec::unit(), 10000);
  CHECK(std::abs(ev.evaluate(dyadic, EngineKind::direct).value - ev.evaluate(dyadic, EngineKind::fixed_point).value) <=
        1e-10);
}

TEST_CASE("batch evaluation matches single-point engines") {
  CounterRng rng(8, 8);
  for (const char* text : {"T^2; T", "T^3; T^2; T", "T^5; T"}) {
    auto f = parse_family(text);
    SumEvaluator ev(f, WeightSpec::unit(), 3000, 17);
    const std::size_t count = 300;
    std::vector<double> pts(count * f.size());
    for (auto& p : pts) p = rng.uniform();
    std::vector<std::complex<double>> out(count), out_s(count);
    const double bound = ev.evaluate_batch(pts, out);
    ev.evaluate_batch(pts, out_s, kernels::scalar());
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<double> u(pts.begin() + static_cast<long>(i * f.size()),
                            pts.begin() + static_cast<long>((i + 1) * f.size()));
      auto v = ev.evaluate(u, EngineKind::fixed_point);
      CHECK(std::abs(out[i] - v.value) <= bound + v.error_bound);
      CHECK(std::abs(out_s[i] - v.value) <= bound + v.error_bound);
    }
  }
}

TEST_CASE("resync period") {
  CHECK(default_resync_period(1) == 1024);
  CHECK(default_resync_period(2) == 1024);
  CHECK(default_resync_period(3) < 1024);
  for (int D = 1; D <= 8; ++D) {
    const auto R = default_resync_period(D);
    CHECK(rotor_drift_sum(D, R) / static_cast<double>(R) <= kDriftBudget);
  }
}

TEST_CASE("analytic gradient matches finite differences") {
  CounterRng rng(6, 6);
  // Centered differences at step 1e-6 carry a truncation error of order
  // h^2 max|phi|^3 N, so the cubic family is taken at a shorter length.
  for (auto [text, N] : {std::pair{"T^2; T", 32}, std::pair{"T; T^2", 24}, std::pair{"T^3; T^2; T", 10}}) {
    auto f = parse_family(text);
    SumEvaluator ev(f, WeightSpec::unit(), N);
    for (int t = 0; t < 5; ++t) {
      auto u = random_point(rng, f.size());
      std::vector<std::size_t> coords;
      for (std::size_t j = 0; j < f.size(); ++j) coords.push_back(j);
      std::vector<std::complex<double>> grad(coords.size());
      ev.value_and_gradient(u, coords, grad);
      double norm = 0.0;
      for (auto g : grad) norm = std::max(norm, std::abs(g));
      for (std::size_t j = 0; j < f.size(); ++j) {
        const double h = 1e-6;
        auto up = u, dn = u;
        up[j] += h;
        dn[j] -= h;
        auto fd = (ev.evaluate(up, EngineKind::direct).value - ev.evaluate(dn, EngineKind::direct).value) / (2 * h);
        CHECK(std::abs(fd - grad[j]) <= 1e-4 * std::max(1.0, norm));
      }
    }
  }
}
