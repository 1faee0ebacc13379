#include "wml/sumeval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wml/rng.hpp"

namespace wml {

namespace {

constexpr double kU = 0x1p-53;  // unit roundoff
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Neumaier compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) comp += (sum - t) + v;
    else comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

std::uint64_t wrap_i128(__int128 v) { return static_cast<std::uint64_t>(static_cast<unsigned __int128>(v)); }

std::uint64_t horner_mod64(const std::vector<std::uint64_t>& c, std::int64_t n) {
  const auto un = static_cast<std::uint64_t>(n);
  std::uint64_t acc = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * un + *it;
  return acc;
}

// Exact phi(n) in 127 bits via checked Horner; nullopt on overflow.
std::optional<__int128> horner_i128(const std::vector<__int128>& c, std::int64_t n) {
  __int128 acc = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    __int128 t;
    if (__builtin_mul_overflow(acc, static_cast<__int128>(n), &t)) return std::nullopt;
    if (__builtin_add_overflow(t, *it, &acc)) return std::nullopt;
  }
  return acc;
}

}  // namespace

double reduce_mod1(double t) {
  double r = t - std::floor(t);
  return r >= 1.0 ? 0.0 : r;
}

double dist_to_int(double t) { return std::abs(t - std::nearbyint(t)); }

TorusVector::TorusVector(std::vector<double> coords) : coords_(std::move(coords)) {
  for (double& c : coords_) c = reduce_mod1(c);
}

TorusVector TorusVector::concat(const TorusVector& tail) const {
  std::vector<double> c = coords_;
  c.insert(c.end(), tail.coords_.begin(), tail.coords_.end());
  return TorusVector(std::move(c));
}

TorusVector TorusVector::negated() const {
  std::vector<double> c = coords_;
  for (double& v : c) v = v == 0.0 ? 0.0 : 1.0 - v;
  return TorusVector(std::move(c));
}

std::string_view to_string(EngineKind e) {
  switch (e) {
    case EngineKind::direct: return "direct";
    case EngineKind::fixed_point: return "fixed_point";
    case EngineKind::difference_table: return "difference_table";
  }
  return "?";
}

EngineKind parse_engine(std::string_view name) {
  if (name == "direct") return EngineKind::direct;
  if (name == "fixed_point" || name == "fixed") return EngineKind::fixed_point;
  if (name == "difference_table" || name == "difference") return EngineKind::difference_table;
  throw Error(ErrorCode::InvalidArgument, "unknown engine '" + std::string(name) + "'");
}

FixedCoord to_fixed(double t) {
  t = reduce_mod1(t);
  const double scaled = t * 0x1p64;  // exact
  const double rounded = std::nearbyint(scaled);
  FixedCoord f;
  f.error = std::abs(scaled - rounded) * 0x1p-64;
  f.q = rounded >= 0x1p64 ? 0 : static_cast<std::uint64_t>(rounded);
  return f;
}

// ---------------------------------------------------------------------------
// Rotor drift. e_i(r) bounds |computed - exact| of level i after r steps:
// levels start with the cis error of an exactly known phase, the top level
// never moves, and each product adds the parent's error plus one rounding.

namespace {

std::vector<double> level0_errors(int degree, std::size_t steps) {
  const std::size_t depth = static_cast<std::size_t>(degree) + 1;
  const double init = kTwoPi * 0x1p-54 + std::sqrt(2.0) * kernels::kCisError;
  std::vector<double> e(depth, init);
  std::vector<double> out(steps);
  for (std::size_t r = 0; r < steps; ++r) {
    out[r] = e[0];
    for (std::size_t lev = 0; lev + 1 < depth; ++lev)
      e[lev] = (e[lev] + e[lev + 1] + kernels::kRotorStepError) * (1.0 + 1e-6);
  }
  return out;
}

}  // namespace

double rotor_drift_sum(int degree, std::size_t steps) {
  double s = 0.0;
  for (double v : level0_errors(degree, steps)) s += v;
  return s * (1.0 + 1e-9);
}

std::size_t default_resync_period(int degree) {
  const auto errs = level0_errors(degree, 1024);
  std::size_t r = 1024;
  while (r > 1 && errs[r - 1] > kDriftBudget) r /= 2;
  return r;
}

// ---------------------------------------------------------------------------
// SumEvaluator

SumEvaluator::SumEvaluator(const PolynomialFamily& family, const WeightSpec& weights, std::int64_t N,
                           std::int64_t K)
    : d_(family.size()),
      N_(std::max<std::int64_t>(N, 0)),
      K_(K),
      degree_(family.max_degree()),
      resync_(default_resync_period(family.max_degree())),
      kernels_(&kernels::active()) {
  if (N < 0) throw Error(ErrorCode::InvalidArgument, "N must be non-negative");
  weights.require_range(K + 1, N_);
  const auto n_count = static_cast<std::size_t>(N_);

  coef64_.resize(d_);
  std::vector<std::vector<__int128>> coef128(d_);
  std::vector<bool> small(d_, true);
  static const BigInt limit = BigInt(1) << 100;
  for (std::size_t j = 0; j < d_; ++j) {
    for (const BigInt& c : family[j].coefficients()) {
      BigInt mag = boost::multiprecision::abs(c);
      auto low = static_cast<std::uint64_t>(mag & BigInt(std::numeric_limits<std::uint64_t>::max()));
      coef64_[j].push_back(c < 0 ? ~low + 1 : low);
      if (mag >= limit) {
        small[j] = false;
        coef128[j].push_back(0);
      } else {
        auto hi = static_cast<std::uint64_t>(mag >> 64);
        __int128 v = (static_cast<__int128>(hi) << 64) | low;
        coef128[j].push_back(c < 0 ? -v : v);
      }
    }
  }

  phi64_.resize(d_ * n_count);
  phi_hi_.resize(d_ * n_count);
  phi_lo_.resize(d_ * n_count);
  phi_abs_max_.assign(d_, 0.0);
  weighted_phi_abs_.assign(d_, 0.0);

  if (!weights.is_unit()) {
    w_re_.resize(n_count);
    w_im_.resize(n_count);
    for (std::size_t i = 0; i < n_count; ++i) {
      auto a = weights.at(K + 1 + static_cast<std::int64_t>(i));
      w_re_[i] = a.real();
      w_im_[i] = a.imag();
    }
  }
  auto abs_w = [&](std::size_t i) { return w_re_.empty() ? 1.0 : std::hypot(w_re_[i], w_im_[i]); };
  for (std::size_t i = 0; i < n_count; ++i) abs_weight_sum_ += abs_w(i);

  static const __int128 direct_limit = static_cast<__int128>(1) << 106;
  for (std::size_t j = 0; j < d_; ++j) {
    for (std::size_t i = 0; i < n_count; ++i) {
      const std::int64_t n = K + 1 + static_cast<std::int64_t>(i);
      const std::size_t idx = j * n_count + i;
      std::optional<__int128> v = small[j] ? horner_i128(coef128[j], n) : std::nullopt;
      if (v && (*v < direct_limit && *v > -direct_limit)) {
        phi64_[idx] = wrap_i128(*v);
        const double hi = static_cast<double>(*v);
        phi_hi_[idx] = hi;
        phi_lo_[idx] = static_cast<double>(*v - static_cast<__int128>(hi));
      } else {
        direct_ok_ = false;
        phi64_[idx] = horner_mod64(coef64_[j], n);
        phi_hi_[idx] = family[j].evaluate(BigInt(n)).convert_to<double>();
        phi_lo_[idx] = 0.0;
      }
      const double a = std::abs(phi_hi_[idx]) * (1.0 + 2 * kU);
      phi_abs_max_[j] = std::max(phi_abs_max_[j], a);
      weighted_phi_abs_[j] += abs_w(i) * a;
    }
  }
  drift_full_ = rotor_drift_sum(degree_, resync_);
}

void SumEvaluator::set_resync_period(std::size_t r) {
  if (r == 0) throw Error(ErrorCode::InvalidArgument, "resync period must be positive");
  resync_ = r;
  drift_full_ = rotor_drift_sum(degree_, resync_);
}

double SumEvaluator::weighted_phi_abs_sum(std::size_t j) const { return weighted_phi_abs_[j]; }

SumValue SumEvaluator::evaluate(std::span<const double> u, EngineKind engine) const {
  if (u.size() != d_)
    throw Error(ErrorCode::DimensionMismatch,
                "point has dimension " + std::to_string(u.size()) + ", family has " + std::to_string(d_));
  switch (engine) {
    case EngineKind::direct: return eval_direct(u);
    case EngineKind::fixed_point: return eval_fixed(u);
    case EngineKind::difference_table: return eval_difference(u);
  }
  throw Error(ErrorCode::InvalidArgument, "bad engine");
}

// Each product x * phi is formed exactly as a sum of four doubles (two_prod
// on the hi and lo parts), reduced mod 1 piecewise, and accumulated with
// reductions after every coordinate. Phase error <= 8 u per coordinate.
SumValue SumEvaluator::eval_direct(std::span<const double> u) const {
  SumValue out{{}, N_, K_, EngineKind::direct, 0.0};
  if (N_ == 0) return out;
  if (!direct_ok_)
    throw Error(ErrorCode::PhasePrecisionLoss, "direct engine needs |phi_j(n)| < 2^106");
  const auto n_count = static_cast<std::size_t>(N_);
  std::vector<double> x(d_);
  for (std::size_t j = 0; j < d_; ++j) x[j] = reduce_mod1(u[j]);

  CompensatedSum re, im;
  for (std::size_t i = 0; i < n_count; ++i) {
    double phase = 0.0;
    for (std::size_t j = 0; j < d_; ++j) {
      const double hi = phi_hi_[j * n_count + i];
      const double lo = phi_lo_[j * n_count + i];
      const double p1 = x[j] * hi;
      const double e1 = std::fma(x[j], hi, -p1);
      const double p2 = x[j] * lo;
      const double e2 = std::fma(x[j], lo, -p2);
      double s = (p1 - std::floor(p1)) + (p2 - std::floor(p2));
      s = s + (e1 + e2);
      s -= std::floor(s);
      phase += s;
      phase -= std::floor(phase);
    }
    const double r = phase - std::nearbyint(phase);
    const double c = std::cos(kTwoPi * r);
    const double sn = std::sin(kTwoPi * r);
    if (w_re_.empty()) {
      re.add(c);
      im.add(sn);
    } else {
      re.add(w_re_[i] * c - w_im_[i] * sn);
      im.add(w_re_[i] * sn + w_im_[i] * c);
    }
  }
  out.value = {re.value(), im.value()};
  const double per_term = kTwoPi * (8.0 * static_cast<double>(d_) + 2.0) * kU + 10.0 * kU;
  out.error_bound = abs_weight_sum_ * per_term * (1.0 + 1e-6);
  return out;
}

void SumEvaluator::fixed_phases(std::span<const double> u, std::span<std::uint64_t> out) const {
  const auto n_count = static_cast<std::size_t>(N_);
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n_count), 0);
  for (std::size_t j = 0; j < d_; ++j) {
    const std::uint64_t q = to_fixed(u[j]).q;
    if (q == 0) continue;
    const std::uint64_t* phi = phi64_.data() + j * n_count;
    for (std::size_t i = 0; i < n_count; ++i) out[i] += q * phi[i];
  }
}

double SumEvaluator::fixed_phase_error(std::span<const double> u) const {
  double e = 0.0;
  for (std::size_t j = 0; j < d_; ++j) e += to_fixed(u[j]).error * phi_abs_max_[j];
  return e * (1.0 + 1e-9);
}

SumValue SumEvaluator::eval_fixed(std::span<const double> u) const {
  SumValue out{{}, N_, K_, EngineKind::fixed_point, 0.0};
  if (N_ == 0) return out;
  const auto n_count = static_cast<std::size_t>(N_);
  constexpr std::size_t kChunk = 512;
  std::vector<std::uint64_t> phases(n_count);
  fixed_phases(u, phases);
  double c[kChunk], s[kChunk];
  CompensatedSum re, im;
  for (std::size_t base = 0; base < n_count; base += kChunk) {
    const std::size_t m = std::min(kChunk, n_count - base);
    kernels_->cis_fixed(phases.data() + base, c, s, m);
    if (w_re_.empty()) {
      for (std::size_t i = 0; i < m; ++i) {
        re.add(c[i]);
        im.add(s[i]);
      }
    } else {
      for (std::size_t i = 0; i < m; ++i) {
        const double wr = w_re_[base + i], wi = w_im_[base + i];
        re.add(wr * c[i] - wi * s[i]);
        im.add(wr * s[i] + wi * c[i]);
      }
    }
  }
  out.value = {re.value(), im.value()};
  // Quantization: sum_n |a_n| 2 pi sum_j err_j |phi_j(n)|.
  double quant = 0.0;
  for (std::size_t j = 0; j < d_; ++j) quant += to_fixed(u[j]).error * weighted_phi_abs_[j];
  const double per_term = kTwoPi * 0x1p-54 + 2.0 * kernels::kCisError + 8.0 * kU;
  out.error_bound = (kTwoPi * quant + abs_weight_sum_ * per_term) * (1.0 + 1e-6);
  if (out.error_bound > 1e-6 * static_cast<double>(N_))
    throw Error(ErrorCode::PhasePrecisionLoss, "fixed-point quantization error too large");
  return out;
}

namespace {

// Writes e(Delta^i P(n0)) for every lane into the level-major tables, where
// P(n) = sum_j q_j phi_j(n) over 64-bit fixed point.
void init_tables(const std::vector<std::vector<std::uint64_t>>& coef64, int degree, std::int64_t n0,
                 std::span<const std::uint64_t> lane_q, std::size_t lanes, std::size_t lane_offset,
                 std::size_t table_lanes, std::vector<std::uint64_t>& scratch, double* re, double* im,
                 const kernels::KernelTable& kt) {
  const std::size_t d = coef64.size();
  const std::size_t depth = static_cast<std::size_t>(degree) + 1;
  // Forward differences of each phi_j at n0, exact mod 2^64.
  std::vector<std::uint64_t> diff(d * depth);
  for (std::size_t j = 0; j < d; ++j) {
    std::uint64_t* row = diff.data() + j * depth;
    for (std::size_t i = 0; i < depth; ++i) row[i] = horner_mod64(coef64[j], n0 + static_cast<std::int64_t>(i));
    for (std::size_t lev = 1; lev < depth; ++lev)
      for (std::size_t i = depth - 1; i >= lev; --i) row[i] -= row[i - 1];
  }
  scratch.assign(depth * lanes, 0);
  for (std::size_t l = 0; l < lanes; ++l) {
    const std::uint64_t* q = lane_q.data() + l * d;
    for (std::size_t j = 0; j < d; ++j) {
      if (q[j] == 0) continue;
      const std::uint64_t* row = diff.data() + j * depth;
      for (std::size_t lev = 0; lev < depth; ++lev) scratch[lev * lanes + l] += q[j] * row[lev];
    }
  }
  for (std::size_t lev = 0; lev < depth; ++lev)
    kt.cis_fixed(scratch.data() + lev * lanes, re + lev * table_lanes + lane_offset,
                 im + lev * table_lanes + lane_offset, lanes);
}

}  // namespace

double SumEvaluator::batch_bound(double max_coord_error) const {
  // Rotor drift per block (the tail block is no longer than a full one),
  // quantization, weight products, and naive accumulation.
  const double blocks = std::ceil(static_cast<double>(N_) / static_cast<double>(resync_));
  double max_w = 1.0;
  if (!w_re_.empty()) {
    max_w = 0.0;
    for (std::size_t i = 0; i < w_re_.size(); ++i) max_w = std::max(max_w, std::hypot(w_re_[i], w_im_[i]));
  }
  double quant = 0.0;
  for (std::size_t j = 0; j < d_; ++j) quant += max_coord_error * weighted_phi_abs_[j];
  const double acc = abs_weight_sum_ * (static_cast<double>(std::min<std::size_t>(resync_, static_cast<std::size_t>(N_))) + blocks + 4.0) * kU;
  return (max_w * blocks * drift_full_ + kTwoPi * quant + acc) * (1.0 + 1e-6);
}

SumValue SumEvaluator::eval_difference(std::span<const double> u) const {
  SumValue out{{}, N_, K_, EngineKind::difference_table, 0.0};
  if (N_ == 0) return out;
  const auto n_count = static_cast<std::size_t>(N_);
  const std::size_t depth = static_cast<std::size_t>(degree_) + 1;
  const std::size_t full = n_count / resync_;
  const std::size_t tail = n_count % resync_;

  std::vector<std::uint64_t> q(d_);
  double max_err = 0.0;
  for (std::size_t j = 0; j < d_; ++j) {
    auto f = to_fixed(u[j]);
    q[j] = f.q;
    max_err = std::max(max_err, f.error);
  }

  std::vector<std::uint64_t> scratch;
  std::complex<double> total = 0.0;
  auto run = [&](std::size_t first_block, std::size_t lanes, std::size_t steps) {
    if (lanes == 0 || steps == 0) return;
    std::vector<double> re(depth * lanes), im(depth * lanes), ar(lanes, 0.0), ai(lanes, 0.0);
    std::vector<std::int64_t> wstart(lanes);
    for (std::size_t l = 0; l < lanes; ++l) {
      const std::size_t offset = (first_block + l) * resync_;
      const std::int64_t n0 = K_ + 1 + static_cast<std::int64_t>(offset);
      init_tables(coef64_, degree_, n0, q, 1, l, lanes, scratch, re.data(), im.data(), *kernels_);
      wstart[l] = static_cast<std::int64_t>(offset);
    }
    kernels::RotorBatch b;
    b.lanes = lanes;
    b.depth = depth;
    b.re = re.data();
    b.im = im.data();
    b.acc_re = ar.data();
    b.acc_im = ai.data();
    if (!w_re_.empty()) {
      b.w_re = w_re_.data();
      b.w_im = w_im_.data();
      b.w_start = wstart.data();
    }
    kernels_->rotor_accumulate(b, steps);
    for (std::size_t l = 0; l < lanes; ++l) total += std::complex<double>(ar[l], ai[l]);
  };
  run(0, full, resync_);
  run(full, tail ? 1 : 0, tail);
  out.value = total;
  out.error_bound = batch_bound(max_err);
  if (out.error_bound > 1e-6 * static_cast<double>(N_))
    throw Error(ErrorCode::PhasePrecisionLoss, "difference-table drift bound too large");
  return out;
}

double SumEvaluator::evaluate_batch(std::span<const double> points, std::span<std::complex<double>> out,
                                    const kernels::KernelTable& kt) const {
  if (points.size() % d_ != 0 || points.size() / d_ != out.size())
    throw Error(ErrorCode::DimensionMismatch, "batch shape does not match family dimension");
  const std::size_t count = out.size();
  const double bound = batch_bound(0x1p-65);
  if (N_ == 0) {
    std::fill(out.begin(), out.end(), std::complex<double>{});
    return 0.0;
  }
  const auto n_count = static_cast<std::size_t>(N_);
  const std::size_t depth = static_cast<std::size_t>(degree_) + 1;
  constexpr std::size_t kLanes = 256;

  std::vector<std::uint64_t> q(kLanes * d_), scratch;
  std::vector<double> re(depth * kLanes), im(depth * kLanes), ar(kLanes), ai(kLanes);
  std::vector<std::int64_t> wstart(kLanes);
  for (std::size_t base = 0; base < count; base += kLanes) {
    const std::size_t lanes = std::min(kLanes, count - base);
    for (std::size_t l = 0; l < lanes; ++l)
      for (std::size_t j = 0; j < d_; ++j) q[l * d_ + j] = to_fixed(points[(base + l) * d_ + j]).q;
    std::fill(ar.begin(), ar.end(), 0.0);
    std::fill(ai.begin(), ai.end(), 0.0);
    for (std::size_t offset = 0; offset < n_count; offset += resync_) {
      const std::size_t steps = std::min(resync_, n_count - offset);
      init_tables(coef64_, degree_, K_ + 1 + static_cast<std::int64_t>(offset),
                  std::span<const std::uint64_t>(q.data(), lanes * d_), lanes, 0, lanes, scratch, re.data(),
                  im.data(), kt);
      kernels::RotorBatch b;
      b.lanes = lanes;
      b.depth = depth;
      b.re = re.data();
      b.im = im.data();
      b.acc_re = ar.data();
      b.acc_im = ai.data();
      if (!w_re_.empty()) {
        std::fill(wstart.begin(), wstart.begin() + static_cast<std::ptrdiff_t>(lanes),
                  static_cast<std::int64_t>(offset));
        b.w_re = w_re_.data();
        b.w_im = w_im_.data();
        b.w_start = wstart.data();
      }
      kt.rotor_accumulate(b, steps);
    }
    for (std::size_t l = 0; l < lanes; ++l) out[base + l] = {ar[l], ai[l]};
  }
  return bound;
}

std::complex<double> SumEvaluator::value_and_gradient(std::span<const double> u,
                                                      std::span<const std::size_t> coords,
                                                      std::span<std::complex<double>> grad) const {
  const auto n_count = static_cast<std::size_t>(N_);
  std::fill(grad.begin(), grad.end(), std::complex<double>{});
  if (n_count == 0) return {};
  std::vector<std::uint64_t> phases(n_count);
  fixed_phases(u, phases);
  constexpr std::size_t kChunk = 512;
  double c[kChunk], s[kChunk];
  std::complex<double> value = 0.0;
  std::vector<std::complex<double>> g(coords.size());
  for (std::size_t base = 0; base < n_count; base += kChunk) {
    const std::size_t m = std::min(kChunk, n_count - base);
    kernels_->cis_fixed(phases.data() + base, c, s, m);
    for (std::size_t i = 0; i < m; ++i) {
      std::complex<double> t(c[i], s[i]);
      if (!w_re_.empty()) t *= std::complex<double>(w_re_[base + i], w_im_[base + i]);
      value += t;
      for (std::size_t k = 0; k < coords.size(); ++k) g[k] += phi_hi_[coords[k] * n_count + base + i] * t;
    }
  }
  const std::complex<double> two_pi_i(0.0, kTwoPi);
  for (std::size_t k = 0; k < coords.size(); ++k) grad[k] = two_pi_i * g[k];
  return value;
}

// ---------------------------------------------------------------------------

SumValue eval_sum(const PolynomialFamily& family, const WeightSpec& weights, const TorusVector& x,
                  const TorusVector& y, std::int64_t N, std::int64_t K, EngineKind engine) {
  if (x.dim() + y.dim() != family.size() || x.dim() == 0)
    throw Error(ErrorCode::DimensionMismatch, "x has dimension " + std::to_string(x.dim()) + ", y has " +
                                                  std::to_string(y.dim()) + ", family has " +
                                                  std::to_string(family.size()));
  SumEvaluator ev(family, weights, N, K);
  const TorusVector u = x.concat(y);
  return ev.evaluate(u.coords(), engine);
}

std::vector<double> shift_coefficients(std::span<const double> u, std::int64_t K) {
  const std::size_t d = u.size();
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "empty coefficient vector");
  // u_i are coefficients of T^i, i = 1..d. v_j = sum_{i>=j} u_i C(i,j) K^{i-j}.
  std::vector<std::uint64_t> q(d + 1, 0);
  for (std::size_t i = 1; i <= d; ++i) q[i] = to_fixed(u[i - 1]).q;
  const auto uk = static_cast<std::uint64_t>(K);
  std::vector<double> v(d + 1);
  for (std::size_t j = 0; j < d; ++j) {
    std::uint64_t acc = 0;
    for (std::size_t i = std::max<std::size_t>(j, 1); i <= d; ++i) {
      // C(i, j) K^{i-j} mod 2^64
      BigInt binom = 1;
      for (std::size_t t = 0; t < j; ++t) binom = binom * (i - t) / (t + 1);
      std::uint64_t c = static_cast<std::uint64_t>(binom & BigInt(std::numeric_limits<std::uint64_t>::max()));
      for (std::size_t t = 0; t < i - j; ++t) c *= uk;
      acc += q[i] * c;
    }
    v[j] = kernels::fixed_to_turns(acc);
    if (v[j] >= 1.0) v[j] = 0.0;
  }
  v[d] = u[d - 1];
  return v;
}

EngineComparison compare_engines(const PolynomialFamily& family, const WeightSpec& weights,
                                 std::span<const double> point, std::int64_t N, std::size_t trials,
                                 std::uint64_t seed, std::int64_t K) {
  SumEvaluator ev(family, weights, N, K);
  const std::size_t d = family.size();
  EngineComparison cmp;
  auto check = [&](std::span<const double> u) {
    const auto a = ev.evaluate(u, EngineKind::direct).value;
    const auto b = ev.evaluate(u, EngineKind::fixed_point).value;
    const auto c = ev.evaluate(u, EngineKind::difference_table).value;
    const double m = std::max({std::abs(a - b), std::abs(a - c), std::abs(b - c)});
    if (m > cmp.max_difference || cmp.worst_point.empty()) {
      cmp.max_difference = std::max(cmp.max_difference, m);
      cmp.worst_point.assign(u.begin(), u.end());
    }
    ++cmp.points;
  };
  if (!point.empty()) {
    if (point.size() != d) throw Error(ErrorCode::DimensionMismatch, "comparison point has wrong dimension");
    check(point);
  }
  CounterRng rng(seed, 0x656e67696e6573ULL);
  std::vector<double> u(d);
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& v : u) v = rng.uniform();
    check(u);
  }
  return cmp;
}

}  // namespace wml
