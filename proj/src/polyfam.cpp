#include "wml/polyfam.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace wml {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConstantPolynomial: return "ConstantPolynomial";
    case ErrorCode::DuplicatePolynomial: return "DuplicatePolynomial";
    case ErrorCode::EmptyFamily: return "EmptyFamily";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::NuOutOfRange: return "NuOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::WeightTableTooShort: return "WeightTableTooShort";
    case ErrorCode::PhasePrecisionLoss: return "PhasePrecisionLoss";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::BoxBudgetExceeded: return "BoxBudgetExceeded";
    case ErrorCode::DegenerateLadder: return "DegenerateLadder";
    case ErrorCode::RhoExceedsB: return "RhoExceedsB";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

std::string to_string(const Rational& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

namespace {

// Decimal digits with optional sign; Boost would read a leading 0 as octal.
BigInt decimal_bigint(std::string s) {
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s.erase(0, 1);
  }
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw Error(ErrorCode::ParseError, "not an integer: '" + s + "'");
  s.erase(0, std::min(s.find_first_not_of('0'), s.size() - 1));
  BigInt v(s);
  return neg ? BigInt(-v) : v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw Error(ErrorCode::ParseError, "empty rational");
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      BigInt num = decimal_bigint(s.substr(0, slash));
      BigInt den = decimal_bigint(s.substr(slash + 1));
      if (den == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + s + "'");
      return Rational(num, den);
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
      // Decimal literal, read exactly.
      bool neg = !s.empty() && s[0] == '-';
      std::string digits = s.substr(neg || s[0] == '+' ? 1 : 0);
      dot = digits.find('.');
      std::string frac = digits.substr(dot + 1);
      std::string whole = digits.substr(0, dot);
      if (whole.empty()) whole = "0";
      BigInt den = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
      Rational r(decimal_bigint(whole + frac), den);
      return neg ? Rational(-r) : r;
    }
    return Rational(decimal_bigint(s));
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "not a rational: '" + s + "'");
  }
}

// ---------------------------------------------------------------------------
// IntPolynomial

IntPolynomial::IntPolynomial(std::vector<BigInt> coefficients) : coeffs_(std::move(coefficients)) {
  normalize();
}

IntPolynomial IntPolynomial::monomial(unsigned degree, const BigInt& coefficient) {
  std::vector<BigInt> c(degree + 1);
  c[degree] = coefficient;
  return IntPolynomial(std::move(c));
}

IntPolynomial IntPolynomial::constant(const BigInt& value) { return IntPolynomial({value}); }

void IntPolynomial::normalize() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

const BigInt& IntPolynomial::leading() const {
  static const BigInt zero = 0;
  return coeffs_.empty() ? zero : coeffs_.back();
}

BigInt IntPolynomial::coefficient(unsigned power) const {
  return power < coeffs_.size() ? coeffs_[power] : BigInt(0);
}

IntPolynomial IntPolynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<BigInt> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<unsigned>(i);
  return IntPolynomial(std::move(d));
}

BigInt IntPolynomial::evaluate(const BigInt& t) const {
  BigInt acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + *it;
  return acc;
}

std::uint64_t IntPolynomial::evaluate_mod64(std::int64_t n) const {
  const auto un = static_cast<std::uint64_t>(n);
  std::uint64_t acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    // Reduce the coefficient mod 2^64 in two's complement.
    BigInt c = *it;
    BigInt mag = boost::multiprecision::abs(c);
    auto low = static_cast<std::uint64_t>(mag & BigInt(std::numeric_limits<std::uint64_t>::max()));
    if (c < 0) low = ~low + 1;
    acc = acc * un + low;
  }
  return acc;
}

std::optional<__int128> IntPolynomial::evaluate_i128(std::int64_t n) const {
  BigInt v = evaluate(BigInt(n));
  static const BigInt limit = BigInt(1) << 126;
  if (boost::multiprecision::abs(v) >= limit) return std::nullopt;
  BigInt mag = boost::multiprecision::abs(v);
  auto lo = static_cast<std::uint64_t>(mag & BigInt(std::numeric_limits<std::uint64_t>::max()));
  auto hi = static_cast<std::uint64_t>(mag >> 64);
  __int128 r = (static_cast<__int128>(hi) << 64) | lo;
  return v < 0 ? -r : r;
}

double IntPolynomial::magnitude_bound(std::int64_t n_max) const {
  const double x = std::abs(static_cast<double>(n_max));
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
    acc = acc * x + std::abs(it->convert_to<double>());
  return acc * (1.0 + 1e-12);
}

std::string IntPolynomial::to_string() const {
  if (coeffs_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (int p = degree(); p >= 0; --p) {
    const BigInt& c = coeffs_[static_cast<std::size_t>(p)];
    if (c == 0) continue;
    BigInt mag = boost::multiprecision::abs(c);
    if (first) {
      if (c < 0) out << '-';
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    first = false;
    if (p == 0 || mag != 1) out << mag.str();
    if (p >= 1) out << 'T';
    if (p >= 2) out << '^' << p;
  }
  return out.str();
}

IntPolynomial operator+(const IntPolynomial& a, const IntPolynomial& b) {
  std::vector<BigInt> c(std::max(a.coeffs_.size(), b.coeffs_.size()));
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c[i] += a.coeffs_[i];
  for (std::size_t i = 0; i < b.coeffs_.size(); ++i) c[i] += b.coeffs_[i];
  return IntPolynomial(std::move(c));
}

IntPolynomial operator-(const IntPolynomial& a) {
  std::vector<BigInt> c = a.coeffs_;
  for (auto& v : c) v = -v;
  return IntPolynomial(std::move(c));
}

IntPolynomial operator-(const IntPolynomial& a, const IntPolynomial& b) { return a + (-b); }

IntPolynomial operator*(const IntPolynomial& a, const IntPolynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<BigInt> c(a.coeffs_.size() + b.coeffs_.size() - 1);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return IntPolynomial(std::move(c));
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class PolyParser {
 public:
  explicit PolyParser(std::string_view text) : text_(text) {}

  IntPolynomial parse() {
    skip_ws();
    if (at_end()) fail("empty polynomial");
    IntPolynomial result;
    bool first = true;
    while (!at_end()) {
      int sign = 1;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1 : 1;
        ++pos_;
        skip_ws();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      result = result + parse_term(sign);
      first = false;
      skip_ws();
    }
    return result;
  }

 private:
  IntPolynomial parse_term(int sign) {
    BigInt coeff = 1;
    bool have_coeff = false;
    if (std::isdigit(static_cast<unsigned char>(peek()))) {
      coeff = parse_integer();
      have_coeff = true;
      skip_ws();
      if (peek() == '*') {
        ++pos_;
        skip_ws();
        if (peek() != 'T' && peek() != 't') fail("expected 'T' after '*'");
      }
    }
    unsigned power = 0;
    if (peek() == 'T' || peek() == 't') {
      ++pos_;
      power = 1;
      skip_ws();
      if (peek() == '^') {
        ++pos_;
        skip_ws();
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected exponent");
        BigInt e = parse_integer();
        if (e > 4096) fail("exponent too large");
        power = e.convert_to<unsigned>();
      }
    } else if (!have_coeff) {
      fail("expected coefficient or 'T'");
    }
    return IntPolynomial::monomial(power, sign < 0 ? BigInt(-coeff) : coeff);
  }

  BigInt parse_integer() {
    std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    return decimal_bigint(std::string(text_.substr(start, pos_ - start)));
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError,
                msg + " at offset " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

IntPolynomial parse_polynomial(std::string_view text) { return PolyParser(text).parse(); }

PolynomialFamily parse_family(std::string_view text, std::optional<std::size_t> expected_count) {
  std::vector<IntPolynomial> polys;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(';', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view piece = text.substr(start, end - start);
    bool blank = std::all_of(piece.begin(), piece.end(),
                             [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (!blank) polys.push_back(parse_polynomial(piece));
    else if (end != text.size()) throw Error(ErrorCode::ParseError, "empty entry in family list");
    start = end + 1;
  }
  if (expected_count && polys.size() != *expected_count)
    throw Error(ErrorCode::ParseError, "expected " + std::to_string(*expected_count) +
                                           " polynomials, found " + std::to_string(polys.size()));
  return PolynomialFamily(std::move(polys));
}

// ---------------------------------------------------------------------------
// PolynomialFamily

PolynomialFamily::PolynomialFamily(std::vector<IntPolynomial> polys) : polys_(std::move(polys)) {
  if (polys_.empty()) throw Error(ErrorCode::EmptyFamily, "a family needs at least one polynomial");
  for (std::size_t i = 0; i < polys_.size(); ++i) {
    if (polys_[i].degree() < 1)
      throw Error(ErrorCode::ConstantPolynomial,
                  "entry " + std::to_string(i + 1) + " is constant: " + polys_[i].to_string());
    for (std::size_t j = 0; j < i; ++j)
      if (polys_[i] == polys_[j])
        throw Error(ErrorCode::DuplicatePolynomial, "entries " + std::to_string(j + 1) + " and " +
                                                        std::to_string(i + 1) + " coincide");
  }
}

PolynomialFamily PolynomialFamily::classical(unsigned d) {
  std::vector<IntPolynomial> p;
  for (unsigned i = 1; i <= d; ++i) p.push_back(IntPolynomial::monomial(i));
  return PolynomialFamily(std::move(p));
}

std::vector<int> PolynomialFamily::degrees() const {
  std::vector<int> e;
  e.reserve(polys_.size());
  for (const auto& p : polys_) e.push_back(p.degree());
  return e;
}

int PolynomialFamily::max_degree() const {
  int m = 0;
  for (const auto& p : polys_) m = std::max(m, p.degree());
  return m;
}

bool PolynomialFamily::is_classical_degree_set() const {
  auto e = degrees();
  std::sort(e.begin(), e.end());
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i] != static_cast<int>(i) + 1) return false;
  return true;
}

std::string PolynomialFamily::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < polys_.size(); ++i) {
    if (i) out += "; ";
    out += polys_[i].to_string();
  }
  return out;
}

// ---------------------------------------------------------------------------
// WeightSpec

std::complex<double> WeightSpec::at(std::int64_t n) const {
  if (is_unit()) return {1.0, 0.0};
  if (n < 1 || static_cast<std::size_t>(n) > table.size())
    throw Error(ErrorCode::WeightTableTooShort,
                "weight a_" + std::to_string(n) + " outside table of length " + std::to_string(table.size()));
  return table[static_cast<std::size_t>(n - 1)];
}

void WeightSpec::require_range(std::int64_t first, std::int64_t count) const {
  if (is_unit() || count <= 0) return;
  if (first < 1 || static_cast<std::size_t>(first + count - 1) > table.size())
    throw Error(ErrorCode::WeightTableTooShort,
                "weights a_" + std::to_string(first) + "..a_" + std::to_string(first + count - 1) +
                    " requested, table has " + std::to_string(table.size()));
}

double WeightSpec::abs_sum(std::int64_t first, std::int64_t count) const {
  if (count <= 0) return 0.0;
  if (is_unit()) return static_cast<double>(count);
  require_range(first, count);
  double s = 0.0;
  for (std::int64_t n = first; n < first + count; ++n) s += std::abs(table[static_cast<std::size_t>(n - 1)]);
  return s;
}

double WeightSpec::max_abs(std::int64_t first, std::int64_t count) const {
  if (count <= 0) return 0.0;
  if (is_unit()) return 1.0;
  require_range(first, count);
  double m = 0.0;
  for (std::int64_t n = first; n < first + count; ++n)
    m = std::max(m, std::abs(table[static_cast<std::size_t>(n - 1)]));
  return m;
}

// ---------------------------------------------------------------------------
// Wronskian: division-free Laplace expansion over column subsets. Row i is
// phi_i and its successive derivatives; dp[mask] holds the signed sum over
// all placements of the first popcount(mask) rows into the columns of mask.

IntPolynomial wronskian(const PolynomialFamily& family) {
  const std::size_t d = family.size();
  if (d > 20) throw Error(ErrorCode::InvalidArgument, "Wronskian limited to d <= 20");
  std::vector<std::vector<IntPolynomial>> m(d, std::vector<IntPolynomial>(d));
  for (std::size_t i = 0; i < d; ++i) {
    m[i][0] = family[i];
    for (std::size_t j = 1; j < d; ++j) m[i][j] = m[i][j - 1].derivative();
  }
  std::vector<IntPolynomial> dp(std::size_t{1} << d);
  dp[0] = IntPolynomial::constant(1);
  for (std::size_t mask = 0; mask + 1 < dp.size(); ++mask) {
    if (dp[mask].is_zero()) continue;
    const auto row = static_cast<std::size_t>(std::popcount(mask));
    for (std::size_t col = 0; col < d; ++col) {
      if (mask & (std::size_t{1} << col)) continue;
      if (m[row][col].is_zero()) continue;
      // Sign of inserting `col` after the already-used columns.
      const int above = std::popcount(mask >> (col + 1));
      IntPolynomial term = dp[mask] * m[row][col];
      auto& slot = dp[mask | (std::size_t{1} << col)];
      slot = (above % 2) ? slot - term : slot + term;
    }
  }
  return dp.back();
}

// ---------------------------------------------------------------------------
// Exponents

Rational short_interval_exponent(int d) {
  return Rational(1) - Rational(d, d * d + 2 * d - 1);
}

ExponentReport exponent_report(const PolynomialFamily& family, int k, const Rational& theta) {
  const int d = static_cast<int>(family.size());
  if (k < 1 || k > d)
    throw Error(ErrorCode::KOutOfRange, "k=" + std::to_string(k) + " outside [1, " + std::to_string(d) + "]");
  if (theta <= 0 || theta > 1) throw Error(ErrorCode::InvalidArgument, "theta must lie in (0, 1]");

  const auto deg = family.degrees();
  auto sorted = deg;
  std::sort(sorted.begin(), sorted.end());

  ExponentReport r;
  r.d = d;
  r.k = k;
  r.theta = theta;
  r.s = Rational(d * (d + 1), 2);
  for (int j = k; j < d; ++j) r.sigma_k += deg[static_cast<std::size_t>(j)];
  for (int j = k; j < d; ++j) r.sigma_tilde_k += sorted[static_cast<std::size_t>(j)];
  for (int e : deg) r.sigma_0 += e;
  r.delta = sorted.front();

  const Rational dk = d - k;
  r.rho_max = 2 * r.s + dk;
  r.mu = (r.s + r.sigma_k + dk) / r.rho_max;
  r.mu_V = (r.s + r.sigma_tilde_k + dk) / r.rho_max;
  r.mu_theta = (r.s + r.sigma_0 + d - Rational(r.delta + 1) * theta * k) / (2 * r.s + d - theta * k);
  if (family.is_classical_degree_set()) r.mu_d = short_interval_exponent(d);
  r.delta_W = (2 * Rational(r.sigma_k) + dk + 1) / (2 * r.s + dk + 1);
  r.delta_CS = std::min<Rational>((2 * Rational(r.sigma_k) + dk) / (2 * r.s + dk),
                                  (Rational(r.sigma_k) + 1) / r.s);
  return r;
}

double individual_bound(int d, int nu, std::int64_t q, double N, double eps) {
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "individual bound needs d >= 2");
  if (nu < 2 || nu > d)
    throw Error(ErrorCode::NuOutOfRange, "nu=" + std::to_string(nu) + " outside [2, " + std::to_string(d) + "]");
  if (q < 1 || N < 1) throw Error(ErrorCode::InvalidArgument, "q and N must be positive");
  const double qd = static_cast<double>(q);
  const double inner = 1.0 / qd + 1.0 / N + qd * std::pow(N, -static_cast<double>(nu));
  return std::pow(N, 1.0 + eps) * std::pow(inner, 1.0 / (static_cast<double>(d) * (d - 1)));
}

}  // namespace wml
