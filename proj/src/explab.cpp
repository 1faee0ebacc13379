#include "wml/explab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "wml/rng.hpp"

namespace wml {

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr error;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = std::min(threads, count);
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double compensated_sum(const std::vector<double>& values) {
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) comp += (sum - t) + v;
    else comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

std::vector<double> sample_point(std::uint64_t seed, std::size_t index, std::size_t dim) {
  CounterRng rng(seed, index);
  std::vector<double> x(dim);
  for (auto& v : x) v = rng.uniform();
  return x;
}

namespace {

// mean and standard error in index order
std::pair<double, double> mean_stderr(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  if (v.empty()) return {0.0, 0.0};
  const double mean = compensated_sum(v) / n;
  if (v.size() < 2) return {mean, 0.0};
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  return {mean, std::sqrt(compensated_sum(sq) / (n - 1.0) / n)};
}

double s_of(std::size_t d) { return static_cast<double>(d * (d + 1)) / 2.0; }

}  // namespace

MomentEstimate moment_from_records(const std::vector<SampleRecord>& records, double rho) {
  MomentEstimate m;
  m.rho = rho;
  m.samples = records.size();
  std::vector<double> lo(records.size()), up(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    lo[i] = std::pow(records[i].sup_lower, rho);
    up[i] = std::pow(records[i].sup_upper, rho);
    m.budget_exhausted += records[i].budget_exhausted ? 1 : 0;
  }
  std::tie(m.mean_lower, m.stderr_lower) = mean_stderr(lo);
  std::tie(m.mean_upper, m.stderr_upper) = mean_stderr(up);
  return m;
}

std::vector<SampleRecord> sample_fiber_sups(const SumEvaluator& ev, int k, const MonteCarloOptions& opt) {
  if (k < 1 || static_cast<std::size_t>(k) > ev.dim()) throw Error(ErrorCode::KOutOfRange, "k out of range");
  std::vector<SampleRecord> records(opt.samples);
  parallel_for(opt.samples, opt.threads, [&](std::size_t i) {
    SampleRecord& r = records[i];
    r.index = i;
    r.x = sample_point(opt.seed, i, static_cast<std::size_t>(k));
    auto est = sup_fiber(ev, k, r.x, opt.budget);
    r.sup_lower = est.lower;
    r.sup_upper = est.upper;
    r.budget_exhausted = est.budget_exhausted;
  });
  return records;
}

std::vector<MeasureEstimate> measure_superlevel(const std::vector<SampleRecord>& records,
                                                const std::vector<double>& thresholds, std::uint64_t seed) {
  std::vector<MeasureEstimate> out;
  const double n = static_cast<double>(records.size());
  for (double T : thresholds) {
    MeasureEstimate m;
    m.threshold = T;
    m.samples = records.size();
    m.seed = seed;
    std::size_t lo = 0, up = 0;
    for (const auto& r : records) {
      lo += r.sup_lower >= T ? 1 : 0;
      up += r.sup_upper >= T ? 1 : 0;
    }
    if (n > 0) {
      m.fraction_lower = static_cast<double>(lo) / n;
      m.fraction_upper = static_cast<double>(up) / n;
      m.stderr_lower = std::sqrt(m.fraction_lower * (1 - m.fraction_lower) / n);
      m.stderr_upper = std::sqrt(m.fraction_upper * (1 - m.fraction_upper) / n);
    }
    out.push_back(m);
  }
  return out;
}

MeasureEstimate measure_superlevel(const PolynomialFamily& family, const WeightSpec& weights, int k,
                                   std::int64_t N, double threshold, const MonteCarloOptions& opt) {
  SumEvaluator ev(family, weights, N);
  return measure_superlevel(sample_fiber_sups(ev, k, opt), {threshold}, opt.seed).front();
}

MomentEstimate moment_estimate(const PolynomialFamily& family, const WeightSpec& weights, int k, double rho,
                               std::int64_t N, const MonteCarloOptions& opt) {
  if (!(rho > 0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
  SumEvaluator ev(family, weights, N);
  auto records = sample_fiber_sups(ev, k, opt);
  MomentEstimate m = moment_from_records(records, rho);
  const double d = static_cast<double>(family.size());
  m.beyond_validity = rho > 2 * s_of(family.size()) + d - k;
  m.N = N;
  m.k = k;
  m.seed = opt.seed;
  m.records = std::move(records);
  return m;
}

MomentEstimate short_moment_estimate(int d, double rho, std::int64_t N, const MonteCarloOptions& opt) {
  if (!(rho > 0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
  SumEvaluator ev(short_family(d), WeightSpec::unit(), N);
  auto records = sample_fiber_sups(ev, 1, opt);
  MomentEstimate m = moment_from_records(records, rho);
  m.beyond_validity = rho > static_cast<double>(d * d + 2 * d - 1);
  m.N = N;
  m.k = 1;
  m.seed = opt.seed;
  m.records = std::move(records);
  return m;
}

MomentEstimate discrepancy_moment_estimate(const PolynomialFamily& family, int k, double rho, std::int64_t N,
                                           const MonteCarloOptions& opt, double gap_exponent) {
  if (!(rho >= 1)) throw Error(ErrorCode::InvalidArgument, "rho must be at least 1");
  SumEvaluator ev(family, WeightSpec::unit(), N);
  if (k < 1 || static_cast<std::size_t>(k) > ev.dim()) throw Error(ErrorCode::KOutOfRange, "k out of range");
  std::vector<SampleRecord> records(opt.samples);
  parallel_for(opt.samples, opt.threads, [&](std::size_t i) {
    SampleRecord& r = records[i];
    r.index = i;
    r.x = sample_point(opt.seed, i, static_cast<std::size_t>(k));
    auto est = sup_discrepancy_fiber(ev, k, r.x, opt.budget, gap_exponent);
    r.sup_lower = est.lower;
    r.sup_upper = est.upper;
    r.budget_exhausted = est.budget_exhausted;
  });
  MomentEstimate m = moment_from_records(records, rho);
  const double d = static_cast<double>(family.size());
  m.beyond_validity = rho > 2 * s_of(family.size()) + d - k;
  m.N = N;
  m.k = k;
  m.seed = opt.seed;
  m.records = std::move(records);
  return m;
}

double quadrature_moment(const SumEvaluator& ev, double rho, std::size_t points, std::size_t threads) {
  const std::size_t d = ev.dim();
  if (points == 0) throw Error(ErrorCode::InvalidArgument, "quadrature needs at least one node");
  double total_d = std::pow(static_cast<double>(points), static_cast<double>(d));
  if (total_d > 4e9) throw Error(ErrorCode::InvalidArgument, "quadrature grid too large");
  const auto total = static_cast<std::size_t>(total_d);
  constexpr std::size_t kChunk = 8192;
  const std::size_t chunks = (total + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t base = c * kChunk;
    const std::size_t cnt = std::min(kChunk, total - base);
    std::vector<double> pts(cnt * d);
    for (std::size_t i = 0; i < cnt; ++i) {
      std::size_t idx = base + i;
      for (std::size_t j = 0; j < d; ++j) {
        pts[i * d + j] = static_cast<double>(idx % points) / static_cast<double>(points);
        idx /= points;
      }
    }
    std::vector<std::complex<double>> vals(cnt);
    ev.evaluate_batch(pts, vals);
    std::vector<double> p(cnt);
    for (std::size_t i = 0; i < cnt; ++i) p[i] = std::pow(std::abs(vals[i]), rho);
    partial[c] = compensated_sum(p);
  });
  return compensated_sum(partial) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------

std::uint64_t box_count_per_axis(std::int64_t N, int e, double alpha, double eps) {
  const long double v = std::pow(static_cast<long double>(N), static_cast<long double>(e) + 1.0L + eps - alpha);
  return static_cast<std::uint64_t>(std::ceil(v));
}

BoxCountReport box_count_experiment(const PolynomialFamily& family, const WeightSpec& weights, std::int64_t N,
                                    double alpha, double eps, std::size_t sampler_density, double slack_exponent,
                                    std::uint64_t box_cap, std::size_t threads) {
  if (!(alpha > 0 && alpha < 1)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  if (sampler_density == 0) throw Error(ErrorCode::InvalidArgument, "sampler_density must be positive");
  const std::size_t d = family.size();
  BoxCountReport rep;
  rep.alpha = alpha;
  rep.eps = eps;
  rep.sampler_density = sampler_density;
  long double U = 1;
  for (int e : family.degrees()) {
    rep.zeta_inverse.push_back(box_count_per_axis(N, e, alpha, eps));
    rep.zeta.push_back(1.0 / static_cast<double>(rep.zeta_inverse.back()));
    U *= static_cast<long double>(rep.zeta_inverse.back());
  }
  if (U > static_cast<long double>(box_cap))
    throw Error(ErrorCode::BoxBudgetExceeded,
                "partition has " + std::to_string(static_cast<double>(U)) + " boxes, cap is " + std::to_string(box_cap));
  rep.U = static_cast<std::uint64_t>(U);
  const double Nd = static_cast<double>(N);
  rep.exponent = s_of(d) * (1.0 - 2.0 * alpha);
  rep.slack = std::pow(Nd, slack_exponent);
  rep.bound = static_cast<double>(rep.U) * std::pow(Nd, rep.exponent) * rep.slack;

  SumEvaluator ev(family, weights, N);
  const auto L = lipschitz_bounds(ev, 0);
  const double sd = static_cast<double>(sampler_density);
  for (std::size_t j = 0; j < d; ++j) rep.lipschitz_slack += L[j] * (rep.zeta[j] / (2.0 * sd) + 0x1p-52);

  std::size_t probes = 1;
  for (std::size_t j = 0; j < d; ++j) probes *= sampler_density;
  const double threshold = std::pow(Nd, alpha);
  const std::size_t boxes_per_chunk = std::max<std::size_t>(1, 8192 / probes);
  const std::size_t chunks = (rep.U + boxes_per_chunk - 1) / boxes_per_chunk;
  std::vector<std::uint64_t> marked(chunks, 0), sampled(chunks, 0);
  std::vector<double> bounds(chunks, 0.0);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t first = c * boxes_per_chunk;
    const std::size_t cnt = std::min<std::size_t>(boxes_per_chunk, rep.U - first);
    std::vector<double> pts(cnt * probes * d);
    for (std::size_t b = 0; b < cnt; ++b) {
      std::size_t box = first + b;
      std::vector<std::size_t> cell(d);
      for (std::size_t j = 0; j < d; ++j) {
        cell[j] = box % rep.zeta_inverse[j];
        box /= rep.zeta_inverse[j];
      }
      for (std::size_t p = 0; p < probes; ++p) {
        std::size_t sub = p;
        for (std::size_t j = 0; j < d; ++j) {
          const double t = static_cast<double>(sub % sampler_density);
          sub /= sampler_density;
          pts[(b * probes + p) * d + j] = (static_cast<double>(cell[j]) + (t + 0.5) / sd) * rep.zeta[j];
        }
      }
    }
    std::vector<std::complex<double>> vals(cnt * probes);
    bounds[c] = ev.evaluate_batch(pts, vals);
    for (std::size_t b = 0; b < cnt; ++b) {
      double best = 0.0;
      for (std::size_t p = 0; p < probes; ++p) best = std::max(best, std::abs(vals[b * probes + p]));
      sampled[c] += best >= threshold ? 1 : 0;
      marked[c] += best + rep.lipschitz_slack + bounds[c] >= threshold ? 1 : 0;
    }
  });
  for (std::size_t c = 0; c < chunks; ++c) {
    rep.marked += marked[c];
    rep.sampled_marked += sampled[c];
  }
  rep.pass = static_cast<double>(rep.marked) <= rep.bound;
  return rep;
}

// ---------------------------------------------------------------------------

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& ladder) {
  if (ladder.size() < 3)
    throw Error(ErrorCode::DegenerateLadder, "need at least 3 points, got " + std::to_string(ladder.size()));
  ExponentFit fit;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const auto [N, v] = ladder[i];
    if (!(N > 0) || (i > 0 && !(N > ladder[i - 1].first)))
      throw Error(ErrorCode::DegenerateLadder, "ladder N must be positive and strictly increasing");
    if (!(v > 0)) throw Error(ErrorCode::DegenerateLadder, "ladder values must be positive");
    fit.points.emplace_back(std::log(N), std::log(v));
  }
  const double n = static_cast<double>(fit.points.size());
  double mx = 0, my = 0;
  for (auto [x, y] : fit.points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (auto [x, y] : fit.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (auto [x, y] : fit.points) {
    const double r = y - fit.intercept - fit.slope * x;
    rss += r * r;
  }
  fit.stderr_slope = n > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;
  return fit;
}

double level_set_moment_exponent(double a, double b, double rho) {
  if (!(a > 0 && a < b)) throw Error(ErrorCode::InvalidArgument, "need 0 < a < b");
  if (!(rho > 0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
  if (rho > b) throw Error(ErrorCode::RhoExceedsB, "rho exceeds b");
  return rho * a / b;
}

std::complex<double> TrigPolynomial::operator()(double x) const {
  std::complex<double> f = 0.0;
  for (const auto& [m, c] : terms) {
    // m x mod 1 with the integer part removed before rounding
    const double t = std::fma(static_cast<double>(m), x, -std::nearbyint(static_cast<double>(m) * x));
    f += c * std::polar(1.0, 2.0 * std::numbers::pi * t);
  }
  return squared_modulus ? std::complex<double>(std::norm(f), 0.0) : f;
}

DilationCheck dilation_invariance_check(std::int64_t g, const TrigPolynomial& F, std::size_t quadrature_points) {
  if (g == 0) throw Error(ErrorCode::InvalidArgument, "dilation factor must be nonzero");
  if (quadrature_points == 0) throw Error(ErrorCode::InvalidArgument, "quadrature needs at least one node");
  const double Q = static_cast<double>(quadrature_points);
  std::vector<double> dr, di, pr, pi;
  for (std::size_t i = 0; i < quadrature_points; ++i) {
    const double x = static_cast<double>(i) / Q;
    // g x reduced exactly in the integers first
    const auto gi = static_cast<std::int64_t>((static_cast<__int128>(g) * static_cast<__int128>(i)) %
                                              static_cast<__int128>(quadrature_points));
    const double gx = static_cast<double>(gi < 0 ? gi + static_cast<std::int64_t>(quadrature_points) : gi) / Q;
    const auto a = F(gx), b = F(x);
    dr.push_back(a.real());
    di.push_back(a.imag());
    pr.push_back(b.real());
    pi.push_back(b.imag());
  }
  DilationCheck c;
  c.dilated = {compensated_sum(dr) / Q, compensated_sum(di) / Q};
  c.plain = {compensated_sum(pr) / Q, compensated_sum(pi) / Q};
  c.difference = std::abs(c.dilated - c.plain);
  return c;
}

double pointwise_majorant(double x, std::int64_t N, int d) {
  const double Nd = static_cast<double>(N);
  auto term = [&](std::int64_t m) {
    const double t = static_cast<double>(m) * x;
    const double dist = std::abs(std::fma(static_cast<double>(m), x, -std::nearbyint(t)));
    return dist * Nd <= 1.0 ? Nd : 1.0 / dist;
  };
  if (d == 2) {
    std::vector<double> v{Nd};
    for (std::int64_t h = 1; h <= N; ++h) v.push_back(term(2 * h));
    return compensated_sum(v);
  }
  if (d == 3) {
    // ||6ghx|| is even in g and in h
    std::vector<double> v;
    for (std::int64_t g = 1; g <= N; ++g)
      for (std::int64_t h = 1; h <= N; ++h) v.push_back(term(6 * g * h));
    return Nd * Nd * Nd + 4.0 * Nd * compensated_sum(v);
  }
  throw Error(ErrorCode::InvalidArgument, "majorant is defined for d = 2 and d = 3");
}

}  // namespace wml
