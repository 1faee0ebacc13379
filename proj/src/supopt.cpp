#include "wml/supopt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wml {

namespace {

constexpr std::size_t kChunk = 4096;

struct Candidate {
  double value;
  std::size_t index;
};

// Larger value first, then smaller grid index.
bool better(const Candidate& a, const Candidate& b) {
  return a.value > b.value || (a.value == b.value && a.index < b.index);
}

void grid_point(std::size_t index, const std::vector<std::size_t>& grid, double* y) {
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const std::size_t i = index % grid[j];
    index /= grid[j];
    y[j] = static_cast<double>(i) / static_cast<double>(grid[j]);
  }
}

void check_split(const SumEvaluator& ev, int k, std::size_t x_dim) {
  if (k < 1 || static_cast<std::size_t>(k) > ev.dim())
    throw Error(ErrorCode::KOutOfRange, "k = " + std::to_string(k) + " outside [1, " + std::to_string(ev.dim()) + "]");
  if (x_dim != static_cast<std::size_t>(k))
    throw Error(ErrorCode::DimensionMismatch,
                "x has dimension " + std::to_string(x_dim) + ", expected k = " + std::to_string(k));
}

}  // namespace

std::vector<double> lipschitz_bounds(const SumEvaluator& ev, int k) {
  if (k < 0 || static_cast<std::size_t>(k) > ev.dim()) throw Error(ErrorCode::KOutOfRange, "k out of range");
  std::vector<double> L;
  for (std::size_t j = static_cast<std::size_t>(k); j < ev.dim(); ++j)
    L.push_back(2.0 * std::numbers::pi * ev.weighted_phi_abs_sum(j));
  return L;
}

std::vector<double> lipschitz_bounds(const PolynomialFamily& family, const WeightSpec& weights, std::int64_t N,
                                     int k) {
  return lipschitz_bounds(SumEvaluator(family, weights, N), k);
}

std::vector<std::size_t> fiber_grid(const SumEvaluator& ev, int k, const BudgetSpec& budget, bool* capped) {
  const auto L = lipschitz_bounds(ev, k);
  const std::size_t m = L.size();
  std::vector<std::size_t> M(m, 1);
  if (budget.coarse_grid.empty()) {
    const double target = 2.0 * budget.gap_fraction * std::max(ev.abs_weight_sum(), 1e-300);
    for (std::size_t j = 0; j < m; ++j) M[j] = static_cast<std::size_t>(std::max(1.0, std::ceil(L[j] / target)));
  } else if (budget.coarse_grid.size() == 1) {
    std::fill(M.begin(), M.end(), std::max<std::size_t>(1, budget.coarse_grid[0]));
  } else {
    if (budget.coarse_grid.size() != m) throw Error(ErrorCode::DimensionMismatch, "coarse_grid has wrong length");
    for (std::size_t j = 0; j < m; ++j) M[j] = std::max<std::size_t>(1, budget.coarse_grid[j]);
  }
  if (capped) *capped = false;
  auto total = [&] {
    double t = 1.0;
    for (auto v : M) t *= static_cast<double>(v);
    return t;
  };
  const double cap = static_cast<double>(std::max<std::size_t>(1, budget.max_evaluations));
  while (total() > cap) {
    if (capped) *capped = true;
    const double f = std::pow(cap / total(), 1.0 / static_cast<double>(m));
    for (auto& v : M) v = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(v) * f)));
  }
  return M;
}

SupEstimate sup_fiber(const SumEvaluator& ev, int k, std::span<const double> x, const BudgetSpec& budget) {
  check_split(ev, k, x.size());
  const std::size_t d = ev.dim();
  const std::size_t m = d - static_cast<std::size_t>(k);
  SupEstimate est;
  est.witness = TorusVector::zeros(m);

  std::vector<double> u(d, 0.0);
  std::copy(x.begin(), x.end(), u.begin());

  if (ev.N() == 0) return est;
  if (m == 0) {
    auto v = ev.evaluate(u, EngineKind::fixed_point);
    est.lower = est.upper = std::abs(v.value);
    est.error_bound = v.error_bound;
    est.evaluations = 1;
    return est;
  }
  if (ev.N() == 1) {
    // a single term has constant magnitude
    est.lower = est.upper = ev.abs_weight_sum();
    est.evaluations = 1;
    est.grid.assign(m, 1);
    est.mesh.assign(m, 1.0);
    return est;
  }

  const auto L = lipschitz_bounds(ev, k);
  est.grid = fiber_grid(ev, k, budget, &est.budget_exhausted);
  std::size_t total = 1;
  for (auto v : est.grid) total *= v;
  for (auto v : est.grid) est.mesh.push_back(1.0 / static_cast<double>(v));

  // Coarse scan.
  const std::size_t keep = std::max<std::size_t>(1, budget.multistarts);
  std::vector<Candidate> top;
  std::vector<double> pts(kChunk * d);
  std::vector<std::complex<double>> vals(kChunk);
  double grid_bound = 0.0;
  for (std::size_t base = 0; base < total; base += kChunk) {
    const std::size_t cnt = std::min(kChunk, total - base);
    for (std::size_t i = 0; i < cnt; ++i) {
      double* p = pts.data() + i * d;
      std::copy(x.begin(), x.end(), p);
      grid_point(base + i, est.grid, p + k);
    }
    grid_bound = ev.evaluate_batch(std::span<const double>(pts.data(), cnt * d),
                                   std::span<std::complex<double>>(vals.data(), cnt));
    for (std::size_t i = 0; i < cnt; ++i) {
      Candidate c{std::abs(vals[i]), base + i};
      if (top.size() < keep || better(c, top.back())) {
        auto pos = std::lower_bound(top.begin(), top.end(), c, better);
        top.insert(pos, c);
        if (top.size() > keep) top.pop_back();
      }
    }
  }
  est.evaluations = total;
  est.error_bound = grid_bound;

  double slack = 0.0;
  for (std::size_t j = 0; j < m; ++j) slack += L[j] * (est.mesh[j] / 2.0 + 0x1p-52);
  est.upper = std::min(top.front().value + slack + grid_bound, ev.abs_weight_sum());
  est.lower = top.front().value;
  {
    std::vector<double> y(m);
    grid_point(top.front().index, est.grid, y.data());
    est.witness = TorusVector(y);
  }

  // Multistart ascent on |T|^2, steps scaled to the mesh.
  std::vector<std::size_t> coords(m);
  for (std::size_t j = 0; j < m; ++j) coords[j] = static_cast<std::size_t>(k) + j;
  std::vector<std::complex<double>> grad(m);
  std::vector<double> y(m), trial(d), p(m);
  for (const Candidate& start : top) {
    if (budget.ascent_iterations == 0) break;
    grid_point(start.index, est.grid, y.data());
    std::copy(y.begin(), y.end(), u.begin() + k);
    std::complex<double> T = ev.value_and_gradient(u, coords, grad);
    ++est.evaluations;
    double f = std::norm(T);
    for (std::size_t it = 0; it < budget.ascent_iterations; ++it) {
      double scale = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double g = 2.0 * (std::conj(T) * grad[j]).real();
        p[j] = g * est.mesh[j] * est.mesh[j];
        scale = std::max(scale, std::abs(p[j]) / est.mesh[j]);
      }
      if (scale == 0.0) break;
      for (auto& v : p) v /= scale;
      bool improved = false;
      double t = 1.0, f_new = f;
      for (int halving = 0; halving < 40 && !improved; ++halving, t *= 0.5) {
        std::copy(u.begin(), u.end(), trial.begin());
        for (std::size_t j = 0; j < m; ++j) trial[k + j] = reduce_mod1(u[k + j] + t * p[j]);
        auto v = ev.evaluate(trial, EngineKind::fixed_point);
        ++est.evaluations;
        est.error_bound = std::max(est.error_bound, v.error_bound);
        f_new = std::norm(v.value);
        improved = f_new > f;
      }
      if (!improved) break;
      const double gain = (f_new - f) / f;
      u = trial;
      T = ev.value_and_gradient(u, coords, grad);
      ++est.evaluations;
      f = std::norm(T);
      if (gain < 1e-10) break;
    }
    const double val = std::sqrt(f);
    if (val > est.lower) {
      est.lower = val;
      est.witness = TorusVector(std::vector<double>(u.begin() + k, u.end()));
    }
  }
  est.upper = std::max(est.upper, est.lower);
  return est;
}

SupEstimate sup_fiber(const PolynomialFamily& family, const WeightSpec& weights, const TorusVector& x,
                      std::int64_t N, const BudgetSpec& budget) {
  SumEvaluator ev(family, weights, N);
  return sup_fiber(ev, static_cast<int>(x.dim()), x.coords(), budget);
}

PolynomialFamily short_family(int d) {
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "short-interval sums need d >= 2");
  std::vector<IntPolynomial> polys{IntPolynomial::monomial(static_cast<unsigned>(d))};
  for (int j = 1; j < d; ++j) polys.push_back(IntPolynomial::monomial(static_cast<unsigned>(j)));
  return PolynomialFamily(std::move(polys));
}

SupEstimate sup_short(const SumEvaluator& ev, double u_d, const BudgetSpec& budget) {
  const double x[1] = {reduce_mod1(u_d)};
  return sup_fiber(ev, 1, x, budget);
}

SupEstimate sup_short(double u_d, int d, std::int64_t N, const BudgetSpec& budget) {
  SumEvaluator ev(short_family(d), WeightSpec::unit(), N);
  return sup_short(ev, u_d, budget);
}

}  // namespace wml
