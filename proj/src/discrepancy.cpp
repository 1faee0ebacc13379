#include "wml/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace wml {

namespace {

constexpr double kBelowOne = 1.0 - 0x1p-53;

double turns_below_one(std::uint64_t q) { return std::min(kernels::fixed_to_turns(q), kBelowOne); }

// G(t) = #{xi < t} - N t and H(t) = #{xi <= t} - N t at the distinct sorted
// values. Excess pairs a in {0} u {v-} with b in {v+} u {1}; deficit pairs
// a in {0} u {v} with b in {v} u {1}, a < b.
DiscrepancyResult discrepancy_sorted(std::span<const double> xs) {
  const double N = static_cast<double>(xs.size());
  std::vector<double> v, G, H;
  std::size_t i = 0;
  while (i < xs.size()) {
    std::size_t j = i;
    while (j < xs.size() && xs[j] == xs[i]) ++j;
    v.push_back(xs[i]);
    G.push_back(static_cast<double>(i) - N * xs[i]);
    H.push_back(static_cast<double>(j) - N * xs[i]);
    i = j;
  }
  const std::size_t m = v.size();
  const double H0 = v[0] == 0.0 ? H[0] : 0.0;

  DiscrepancyResult r;
  r.excess = -std::numeric_limits<double>::infinity();
  double min_a = H0, min_a_pos = 0.0;
  for (std::size_t q = 0; q < m; ++q) {
    if (v[q] > 0.0 && G[q] < min_a) {
      min_a = G[q];
      min_a_pos = v[q];
    }
    if (H[q] - min_a > r.excess) {
      r.excess = H[q] - min_a;
      r.excess_interval = {min_a_pos, v[q]};
    }
  }
  if (-min_a > r.excess) {
    r.excess = -min_a;
    r.excess_interval = {min_a_pos, 1.0};
  }

  // suffix minima of G over groups q >= i, with b = 1 (G = 0) included
  std::vector<double> suf(m + 1, 0.0), suf_pos(m + 1, 1.0);
  for (std::size_t q = m; q-- > 0;) {
    suf[q] = suf[q + 1];
    suf_pos[q] = suf_pos[q + 1];
    if (G[q] <= suf[q]) {
      suf[q] = G[q];
      suf_pos[q] = v[q];
    }
  }
  const std::size_t first_pos = v[0] == 0.0 ? 1 : 0;
  r.deficit = H0 - suf[first_pos];
  r.deficit_interval = {0.0, suf_pos[first_pos]};
  for (std::size_t a = 0; a < m; ++a) {
    const double val = H[a] - suf[a + 1];
    if (val > r.deficit) {
      r.deficit = val;
      r.deficit_interval = {v[a], suf_pos[a + 1]};
    }
  }
  r.value = std::max(r.excess, r.deficit);
  return r;
}

struct Endpoint {
  double value;
  int side;  // -1: p-, 0: p, +1: p+
  auto operator<=>(const Endpoint&) const = default;
};

void check_nonempty(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::EmptySequence, "discrepancy of an empty sequence");
}

}  // namespace

PointSequence::PointSequence(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    if (!(v >= 0.0 && v < 1.0)) throw Error(ErrorCode::InvalidArgument, "sequence value outside [0, 1)");
}

PointSequence read_sequence(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(line.substr(first), &used));
      if (line.find_first_not_of(" \t\r", first + used) != std::string::npos) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": not a number");
    }
  }
  return PointSequence(std::move(values));
}

void write_sequence(std::ostream& out, const PointSequence& seq) {
  std::ostringstream buf;
  buf.precision(17);
  for (double v : seq.values()) buf << v << '\n';
  out << buf.str();
}

PointSequence polynomial_fractional_parts(const SumEvaluator& ev, std::span<const double> u) {
  if (u.size() != ev.dim()) throw Error(ErrorCode::DimensionMismatch, "point dimension does not match family");
  std::vector<std::uint64_t> ph(static_cast<std::size_t>(ev.N()));
  ev.fixed_phases(u, ph);
  std::vector<double> v(ph.size());
  for (std::size_t i = 0; i < ph.size(); ++i) v[i] = turns_below_one(ph[i]);
  return PointSequence(std::move(v));
}

PointSequence polynomial_fractional_parts(const PolynomialFamily& family, const TorusVector& x,
                                          const TorusVector& y, std::int64_t N, std::int64_t K) {
  if (x.dim() + y.dim() != family.size())
    throw Error(ErrorCode::DimensionMismatch, "x and y dimensions do not match family");
  SumEvaluator ev(family, WeightSpec::unit(), N, K);
  return polynomial_fractional_parts(ev, x.concat(y).coords());
}

DiscrepancyResult exact_discrepancy(const PointSequence& seq) {
  check_nonempty(seq.size());
  std::vector<double> xs = seq.values();
  std::sort(xs.begin(), xs.end());
  return discrepancy_sorted(xs);
}

DiscrepancyResult brute_force_discrepancy(const PointSequence& seq) {
  check_nonempty(seq.size());
  std::vector<double> xs = seq.values();
  std::sort(xs.begin(), xs.end());
  const double N = static_cast<double>(xs.size());
  std::vector<Endpoint> ends{{0.0, 0}, {1.0, 0}};
  for (double p : xs) {
    if (p > 0.0) ends.push_back({p, -1});
    ends.push_back({p, 0});
    ends.push_back({p, +1});
  }
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());

  // #{xi : a < xi < b} with one-sided endpoints
  auto count_above = [&](const Endpoint& a) {
    // xi > a  <=>  xi > a.value, or xi == a.value and a.side < 0
    auto it = a.side < 0 ? std::lower_bound(xs.begin(), xs.end(), a.value)
                         : std::upper_bound(xs.begin(), xs.end(), a.value);
    return static_cast<double>(xs.end() - it);
  };
  DiscrepancyResult r;
  for (std::size_t i = 0; i < ends.size(); ++i) {
    const double above_a = count_above(ends[i]);
    for (std::size_t j = i + 1; j < ends.size(); ++j) {
      // xi < b  <=>  not (xi >= b)
      const Endpoint& b = ends[j];
      auto it = b.side > 0 ? std::upper_bound(xs.begin(), xs.end(), b.value)
                           : std::lower_bound(xs.begin(), xs.end(), b.value);
      const double at_least_b = static_cast<double>(xs.end() - it);
      const double count = above_a - at_least_b;
      const double len = (b.value - ends[i].value) * N;
      if (count - len > r.excess) {
        r.excess = count - len;
        r.excess_interval = {ends[i].value, b.value};
      }
      if (len - count > r.deficit) {
        r.deficit = len - count;
        r.deficit_interval = {ends[i].value, b.value};
      }
    }
  }
  r.value = std::max(r.excess, r.deficit);
  return r;
}

double erdos_turan_bound(const PointSequence& seq, int G) {
  if (G < 1) throw Error(ErrorCode::InvalidArgument, "G must be positive");
  const double N = static_cast<double>(seq.size());
  double sum = 0.0;
  for (int g = 1; g <= G; ++g) {
    std::complex<double> s = 0.0;
    for (double xi : seq.values()) {
      const double t = static_cast<double>(g) * xi;
      const double a = 2.0 * std::numbers::pi * (t - std::nearbyint(t));
      s += std::complex<double>(std::cos(a), std::sin(a));
    }
    sum += std::abs(s) / g;
  }
  return 3.0 * (N / (G + 1) + sum);
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> discrepancy_grid(const SumEvaluator& ev, int k, const BudgetSpec& budget,
                                          double gap_exponent, bool* capped) {
  const std::size_t d = ev.dim();
  const std::size_t m = d - static_cast<std::size_t>(k);
  std::vector<std::size_t> M(m, 1);
  const double N = static_cast<double>(ev.N());
  if (budget.coarse_grid.empty()) {
    const double target = std::pow(N, gap_exponent);
    for (std::size_t j = 0; j < m; ++j) {
      // (h_j / 2) max|phi| 2 N <= target / m
      const double need = static_cast<double>(m) * N * ev.max_phi_abs(static_cast<std::size_t>(k) + j) / target;
      M[j] = static_cast<std::size_t>(std::max(1.0, std::ceil(need)));
    }
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

namespace {

class FiberDiscrepancy {
 public:
  FiberDiscrepancy(const SumEvaluator& ev, int k, std::span<const double> x)
      : ev_(ev), k_(static_cast<std::size_t>(k)), base_(static_cast<std::size_t>(ev.N()), 0),
        work_(base_.size()), xs_(base_.size()) {
    for (std::size_t j = 0; j < k_; ++j) {
      const std::uint64_t q = to_fixed(x[j]).q;
      auto phi = ev.phi64(j);
      for (std::size_t i = 0; i < base_.size(); ++i) base_[i] += q * phi[i];
    }
  }

  double operator()(std::span<const double> y) {
    std::copy(base_.begin(), base_.end(), work_.begin());
    for (std::size_t j = 0; j < y.size(); ++j) {
      const std::uint64_t q = to_fixed(y[j]).q;
      if (q == 0) continue;
      auto phi = ev_.phi64(k_ + j);
      for (std::size_t i = 0; i < work_.size(); ++i) work_[i] += q * phi[i];
    }
    std::sort(work_.begin(), work_.end());
    for (std::size_t i = 0; i < work_.size(); ++i) xs_[i] = turns_below_one(work_[i]);
    return discrepancy_sorted(xs_).value;
  }

 private:
  const SumEvaluator& ev_;
  std::size_t k_;
  std::vector<std::uint64_t> base_, work_;
  std::vector<double> xs_;
};

}  // namespace

DiscrepancyFiberEstimate sup_discrepancy_fiber(const SumEvaluator& ev, int k, std::span<const double> x,
                                               const BudgetSpec& budget, double gap_exponent) {
  const std::size_t d = ev.dim();
  if (k < 1 || static_cast<std::size_t>(k) > d) throw Error(ErrorCode::KOutOfRange, "k out of range");
  if (x.size() != static_cast<std::size_t>(k)) throw Error(ErrorCode::DimensionMismatch, "x has wrong dimension");
  check_nonempty(static_cast<std::size_t>(ev.N()));
  const std::size_t m = d - static_cast<std::size_t>(k);
  const double N = static_cast<double>(ev.N());
  FiberDiscrepancy disc(ev, k, x);

  DiscrepancyFiberEstimate est;
  est.witness = TorusVector::zeros(m);
  if (m == 0) {
    est.lower = est.upper = disc(std::span<const double>());
    est.heuristic = false;
    est.evaluations = 1;
    return est;
  }

  est.grid = discrepancy_grid(ev, k, budget, gap_exponent, &est.budget_exhausted);
  std::size_t total = 1;
  for (auto v : est.grid) total *= v;
  for (auto v : est.grid) est.mesh.push_back(1.0 / static_cast<double>(v));
  for (std::size_t j = 0; j < m; ++j)
    est.eta += (est.mesh[j] / 2.0 + 0x1p-52) * ev.max_phi_abs(static_cast<std::size_t>(k) + j);

  struct Cand {
    double value;
    std::size_t index;
  };
  auto better = [](const Cand& a, const Cand& b) {
    return a.value > b.value || (a.value == b.value && a.index < b.index);
  };
  const std::size_t keep = std::max<std::size_t>(1, budget.multistarts);
  std::vector<Cand> top;
  std::vector<double> y(m);
  auto point = [&](std::size_t index, std::vector<double>& out) {
    for (std::size_t j = 0; j < m; ++j) {
      out[j] = static_cast<double>(index % est.grid[j]) * est.mesh[j];
      index /= est.grid[j];
    }
  };
  for (std::size_t idx = 0; idx < total; ++idx) {
    point(idx, y);
    Cand c{disc(y), idx};
    if (top.size() < keep || better(c, top.back())) {
      top.insert(std::lower_bound(top.begin(), top.end(), c, better), c);
      if (top.size() > keep) top.pop_back();
    }
  }
  est.evaluations = total;
  est.lower = top.front().value;
  point(top.front().index, y);
  est.witness = TorusVector(y);
  est.upper = std::min(N, est.lower + 2.0 * est.eta * N + 1.0);

  // Pattern search below the mesh around the best cells.
  std::vector<double> cur(m), trial(m), step(m);
  for (const Cand& start : top) {
    point(start.index, cur);
    double val = start.value;
    for (std::size_t j = 0; j < m; ++j) step[j] = est.mesh[j] / 2.0;
    for (std::size_t it = 0; it < budget.ascent_iterations; ++it) {
      double best = val;
      std::vector<double> best_y;
      for (std::size_t j = 0; j < m; ++j) {
        for (double sgn : {-1.0, 1.0}) {
          trial = cur;
          trial[j] = reduce_mod1(cur[j] + sgn * step[j]);
          const double v = disc(trial);
          ++est.evaluations;
          if (v > best) {
            best = v;
            best_y = trial;
          }
        }
      }
      if (best_y.empty()) {
        for (auto& s : step) s /= 2.0;
        if (step[0] < 0x1p-50) break;
      } else {
        cur = best_y;
        val = best;
      }
    }
    if (val > est.lower) {
      est.lower = val;
      est.witness = TorusVector(cur);
    }
  }
  est.upper = std::max(est.upper, est.lower);
  return est;
}

DiscrepancyFiberEstimate sup_discrepancy_fiber(const PolynomialFamily& family, const TorusVector& x,
                                               std::int64_t N, const BudgetSpec& budget, double gap_exponent) {
  SumEvaluator ev(family, WeightSpec::unit(), N);
  return sup_discrepancy_fiber(ev, static_cast<int>(x.dim()), x.coords(), budget, gap_exponent);
}

}  // namespace wml
