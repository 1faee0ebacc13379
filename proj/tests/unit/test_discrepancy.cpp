#include <cmath>
#include <sstream>

#include "doctest.h"
#include "wml/discrepancy.hpp"
#include "wml/rng.hpp"

using namespace wml;

namespace {

// Endpoints 0, 1 and p, p +- delta; counts by direct scan of the open
// interval. delta is small enough that the length error 2 delta N stays far
// below the comparison tolerance.
double naive_oracle(const std::vector<double>& xs) {
  const double delta = 1e-13;
  std::vector<double> ends{0.0, 1.0};
  for (double p : xs) {
    ends.push_back(p);
    if (p - delta >= 0.0) ends.push_back(p - delta);
    if (p + delta <= 1.0) ends.push_back(p + delta);
  }
  const double N = static_cast<double>(xs.size());
  double best = 0.0;
  for (double a : ends)
    for (double b : ends) {
      if (!(a < b)) continue;
      int c = 0;
      for (double p : xs) c += (p > a && p < b);
      best = std::max(best, std::abs(c - (b - a) * N));
    }
  return best;
}

std::vector<std::vector<double>> random_sequences(std::size_t count, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  std::vector<std::vector<double>> out;
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t N = 1 + rng.next() % 64;
    std::vector<double> v(N);
    const int mode = static_cast<int>(s % 4);
    for (auto& x : v) {
      if (mode == 0) x = rng.uniform();
      else if (mode == 1) x = static_cast<double>(rng.next() % 8) / 8.0;  // many ties, some zeros
      else if (mode == 2) x = 0.3 + 0.1 * rng.uniform();                   // clustered
      else x = static_cast<double>(rng.next() % 1000) / 1000.0;
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

TEST_CASE("exact discrepancy examples") {
  CHECK(exact_discrepancy(PointSequence({0, 0.25, 0.5, 0.75})).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact_discrepancy(PointSequence({0.5, 0.5, 0.5})).value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(exact_discrepancy(PointSequence({0.5})).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact_discrepancy(PointSequence({0.0})).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(exact_discrepancy(PointSequence()), Error);
  CHECK_THROWS_AS(PointSequence({1.0}), Error);
  auto r = exact_discrepancy(PointSequence({0.5, 0.5, 0.5}));
  CHECK(r.excess_interval.first <= 0.5);
  CHECK(r.excess_interval.second >= 0.5);
}

TEST_CASE("exact discrepancy equals both oracles") {
  for (const auto& xs : random_sequences(500, 99)) {
    PointSequence seq(xs);
    const double fast = exact_discrepancy(seq).value;
    CHECK(std::abs(fast - brute_force_discrepancy(seq).value) <= 1e-9);
    CHECK(std::abs(fast - naive_oracle(xs)) <= 1e-9);
  }
}

TEST_CASE("witness intervals realize the extremes in the limit") {
  for (const auto& xs : random_sequences(100, 3)) {
    auto r = exact_discrepancy(PointSequence(xs));
    const double N = static_cast<double>(xs.size());
    // closed witness for the excess, open for the deficit
    auto [a, b] = r.excess_interval;
    int closed = 0;
    for (double p : xs) closed += (p >= a && p <= b);
    CHECK(std::abs((closed - (b - a) * N) - r.excess) < 1e-9);
    auto [c, e] = r.deficit_interval;
    int open = 0;
    for (double p : xs) open += (p > c && p < e);
    CHECK(std::abs(((e - c) * N - open) - r.deficit) < 1e-9);
  }
}

TEST_CASE("Erdos-Turan majorant") {
  for (const auto& xs : random_sequences(500, 99)) {
    PointSequence seq(xs);
    const double D = exact_discrepancy(seq).value;
    for (int G : {1, 5, 20}) CHECK(erdos_turan_bound(seq, G) >= D);
  }
  const int N = 40;
  std::vector<double> lattice;
  for (int n = 0; n < N; ++n) lattice.push_back(static_cast<double>(n) / N);
  CHECK(erdos_turan_bound(PointSequence(lattice), N - 1) == doctest::Approx(3.0 * N / N).epsilon(1e-9));
  std::vector<double> golden;
  for (int n = 1; n <= 100; ++n) golden.push_back(std::fmod(n * 0.6180339887, 1.0));
  CHECK(erdos_turan_bound(PointSequence(golden), 20) >= exact_discrepancy(PointSequence(golden)).value);
  auto g1 = erdos_turan_bound(PointSequence({0.1, 0.7}), 1);
  auto s = std::polar(1.0, 2 * std::numbers::pi * 0.1) + std::polar(1.0, 2 * std::numbers::pi * 0.7);
  CHECK(g1 == doctest::Approx(3 * (2.0 / 2 + std::abs(s))));
}

TEST_CASE("discrepancy properties") {
  for (const auto& xs : random_sequences(200, 17)) {
    auto doubled = xs;
    doubled.insert(doubled.end(), xs.begin(), xs.end());
    const double D = exact_discrepancy(PointSequence(xs)).value;
    CHECK(exact_discrepancy(PointSequence(doubled)).value == doctest::Approx(2 * D).epsilon(1e-12));
    CHECK(D <= static_cast<double>(xs.size()) + 1e-12);
    bool interior = std::all_of(xs.begin(), xs.end(), [](double p) { return p > 0.0; });
    if (interior) CHECK(D >= 1.0 - 1e-9);
  }
  CHECK(exact_discrepancy(PointSequence(std::vector<double>(17, 0.42))).value == doctest::Approx(17.0));
}

TEST_CASE("polynomial fractional parts") {
  auto f = parse_family("T^2");
  auto s = polynomial_fractional_parts(f, TorusVector({0.5}), TorusVector(), 4);
  CHECK(s.values() == std::vector<double>{0.5, 0.0, 0.5, 0.0});
  auto z = polynomial_fractional_parts(parse_family("T^3; T"), TorusVector({0.0}), TorusVector({0.0}), 6);
  CHECK(z.values() == std::vector<double>(6, 0.0));
  auto p = polynomial_fractional_parts(parse_family("T^2; T"), TorusVector({0.5}), TorusVector({0.5}), 4);
  CHECK(p.values() == std::vector<double>(4, 0.0));
  auto sh = polynomial_fractional_parts(parse_family("T^2"), TorusVector({0.25}), TorusVector(), 3, 10);
  CHECK(sh.values() == std::vector<double>{0.25, 0.0, 0.25});  // 121/4, 144/4, 169/4
  CHECK_THROWS_AS(polynomial_fractional_parts(f, TorusVector({0.5}), TorusVector({0.1}), 4), Error);
}

TEST_CASE("sequence text round trip") {
  PointSequence s({0.1, 0.333333333333333314829616256247, 0.0, 0.999});
  std::stringstream io;
  write_sequence(io, s);
  CHECK(read_sequence(io).values() == s.values());
  std::stringstream bad("0.5\nfoo\n");
  CHECK_THROWS_AS(read_sequence(bad), Error);
}

TEST_CASE("sup_discrepancy_fiber examples") {
  auto f = parse_family("T^2; T");
  BudgetSpec b;
  auto a = sup_discrepancy_fiber(f, TorusVector({0.5}), 4, b);
  CHECK(a.lower == doctest::Approx(4.0));
  CHECK(a.upper == doctest::Approx(4.0));
  auto z = sup_discrepancy_fiber(f, TorusVector({0.0}), 50, b);
  CHECK(z.lower == doctest::Approx(50.0));
  CounterRng rng(1, 2);
  for (int t = 0; t < 5; ++t) {
    auto one = sup_discrepancy_fiber(f, TorusVector({rng.uniform()}), 1, b);
    CHECK(one.lower == doctest::Approx(1.0));
  }
}

TEST_CASE("sup_discrepancy_fiber certificate on dense scans") {
  auto f = parse_family("T^2; T");
  CounterRng rng(8, 1);
  for (std::int64_t N : {8, 20, 40}) {
    SumEvaluator ev(f, WeightSpec::unit(), N);
    for (int t = 0; t < 3; ++t) {
      std::vector<double> x{rng.uniform()};
      auto est = sup_discrepancy_fiber(ev, 1, x, BudgetSpec{});
      CHECK(est.lower <= est.upper);
      CHECK(2 * est.eta * static_cast<double>(N) <= std::sqrt(static_cast<double>(N)) + 1e-9);
      const std::size_t dense = est.grid[0] * 8;
      for (std::size_t i = 0; i < dense; ++i) {
        auto seq = polynomial_fractional_parts(
            ev, std::vector<double>{x[0], static_cast<double>(i) / static_cast<double>(dense)});
        CHECK(exact_discrepancy(seq).value <= est.upper);
      }
    }
  }
}
