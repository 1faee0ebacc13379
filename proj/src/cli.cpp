#include "wml/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "wml/explab.hpp"

namespace wml {

using nlohmann::ordered_json;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"kind", "name"}},
      {"family", {"polys", "k", "weights", "allow_vanishing_wronskian"}},
      {"params",
       {"N", "K", "x", "y", "engine", "rho", "samples", "seed", "threads", "alpha", "thresholds", "eps",
        "sampler_density", "box_cap", "gap_exponent", "slack_exponent", "d", "u_d", "G", "points", "sequence",
        "theta", "nu", "q", "trials"}},
      {"budget", {"max_evaluations", "coarse_grid", "multistarts", "ascent_iterations", "gap_fraction"}},
      {"checks", {"slope_lower_min", "slope_lower_max", "slope_upper_max"}},
      {"output", {"dir", "csv"}},
  };
  return keys;
}

// Execution settings that do not change results.
bool is_execution_setting(const std::string& key) { return key == "params.threads" || key == "output.dir"; }

const std::set<std::string> kKinds{"exponents", "sum",     "sup",        "measure",     "boxcount", "moment",
                                   "short-moment", "discrepancy", "disc-moment", "majorant", "fit"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); }

double to_number(const std::string& key, const std::string& s) {
  try {
    if (s.find('/') != std::string::npos) return parse_rational(s).convert_to<double>();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    invalid(key + ": not a number: '" + s + "'");
  }
}

std::int64_t to_integer(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    invalid(key + ": not an integer: '" + s + "'");
  }
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  invalid(key + ": expected true or false");
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double rat(const Rational& r) { return r.convert_to<double>(); }

// ---------------------------------------------------------------------------

class Context {
 public:
  Context(const ExperimentConfig& cfg, const RunOptions& opt) : cfg_(cfg), opt_(opt) {}

  const ExperimentConfig& cfg() const { return cfg_; }
  bool has(const std::string& k) const { return cfg_.has(k); }
  std::string str(const std::string& k) const { return cfg_.get(k); }
  double num(const std::string& k) const { return to_number(k, cfg_.get(k)); }
  double num_or(const std::string& k, double v) const { return has(k) ? num(k) : v; }
  std::int64_t integer(const std::string& k) const { return to_integer(k, cfg_.get(k)); }
  std::int64_t integer_or(const std::string& k, std::int64_t v) const { return has(k) ? integer(k) : v; }
  std::vector<double> nums(const std::string& k) const {
    std::vector<double> v;
    for (auto& s : split(cfg_.get(k), ',')) v.push_back(to_number(k, s));
    if (v.empty()) invalid(k + ": empty list");
    return v;
  }
  std::vector<std::int64_t> integers(const std::string& k) const {
    std::vector<std::int64_t> v;
    for (auto& s : split(cfg_.get(k), ',')) v.push_back(to_integer(k, s));
    if (v.empty()) invalid(k + ": empty list");
    return v;
  }
  std::vector<std::int64_t> ladder() const {
    auto Ns = integers("params.N");
    for (std::size_t i = 0; i < Ns.size(); ++i) {
      if (Ns[i] < 1) invalid("params.N: lengths must be positive");
      if (i && Ns[i] <= Ns[i - 1]) invalid("params.N: ladder must be strictly increasing");
    }
    return Ns;
  }

  PolynomialFamily family() const {
    auto f = parse_family(str("family.polys"));
    const bool allow = has("family.allow_vanishing_wronskian") &&
                       to_bool("family.allow_vanishing_wronskian", str("family.allow_vanishing_wronskian"));
    if (!allow && wronskian(f).is_zero())
      invalid("family has identically vanishing Wronskian (set family.allow_vanishing_wronskian = true)");
    return f;
  }
  int k(const PolynomialFamily& f) const {
    const auto v = integer("family.k");
    if (v < 1 || v > static_cast<std::int64_t>(f.size())) invalid("family.k must lie in [1, d]");
    return static_cast<int>(v);
  }
  WeightSpec weights() const {
    const std::string w = cfg_.get_or("family.weights", "unit");
    if (w == "unit") return WeightSpec::unit();
    if (w.rfind("table:", 0) != 0) invalid("family.weights must be 'unit' or 'table: re:im, ...'");
    std::vector<std::complex<double>> t;
    for (auto& item : split(w.substr(6), ',')) {
      auto parts = split(item, ':');
      if (parts.empty() || parts.size() > 2) invalid("family.weights: bad entry '" + item + "'");
      t.emplace_back(to_number("family.weights", parts[0]),
                     parts.size() == 2 ? to_number("family.weights", parts[1]) : 0.0);
    }
    return WeightSpec::from_table(std::move(t));
  }
  std::uint64_t seed() const {
    if (opt_.seed) return *opt_.seed;
    if (!has("params.seed")) invalid("params.seed is required for stochastic experiments");
    const auto s = integer("params.seed");
    if (s < 0) invalid("params.seed must be non-negative");
    return static_cast<std::uint64_t>(s);
  }
  std::size_t threads() const {
    if (opt_.threads) return std::max<std::size_t>(1, *opt_.threads);
    if (has("params.threads")) return static_cast<std::size_t>(std::max<std::int64_t>(1, integer("params.threads")));
    return default_threads();
  }
  double slack() const { return num_or("params.slack_exponent", 0.2); }
  BudgetSpec budget() const {
    BudgetSpec b;
    auto positive = [&](const std::string& key, std::size_t& field) {
      if (!has(key)) return;
      const auto v = integer(key);
      if (v < 1) invalid(key + " must be positive");
      field = static_cast<std::size_t>(v);
    };
    positive("budget.max_evaluations", b.max_evaluations);
    positive("budget.multistarts", b.multistarts);
    if (has("budget.ascent_iterations")) {
      const auto v = integer("budget.ascent_iterations");
      if (v < 0) invalid("budget.ascent_iterations must be non-negative");
      b.ascent_iterations = static_cast<std::size_t>(v);
    }
    if (has("budget.coarse_grid"))
      for (auto v : integers("budget.coarse_grid")) {
        if (v < 1) invalid("budget.coarse_grid entries must be positive");
        b.coarse_grid.push_back(static_cast<std::size_t>(v));
      }
    b.gap_fraction = num_or("budget.gap_fraction", b.gap_fraction);
    if (!(b.gap_fraction > 0)) invalid("budget.gap_fraction must be positive");
    return b;
  }
  MonteCarloOptions mc() const {
    MonteCarloOptions o;
    const auto s = integer("params.samples");
    if (s < 1) invalid("params.samples must be positive");
    o.samples = static_cast<std::size_t>(s);
    o.seed = seed();
    o.threads = threads();
    o.budget = budget();
    return o;
  }

  void check(const std::string& name, double value, const std::string& relation, double bound) {
    const bool pass = relation == "<=" ? value <= bound : value >= bound;
    checks_.push_back(ordered_json{{"name", name}, {"value", value}, {"relation", relation}, {"bound", bound},
                                   {"pass", pass}});
    all_pass_ = all_pass_ && pass;
  }
  void warn(const std::string& w) { warnings_.push_back(w); }

  ordered_json checks_ = ordered_json::array();
  ordered_json warnings_ = ordered_json::array();
  bool all_pass_ = true;
  std::vector<std::string> csv_header_;
  std::vector<std::vector<std::string>> csv_rows_;

 private:
  const ExperimentConfig& cfg_;
  const RunOptions& opt_;
};

ordered_json sup_json(const SupEstimate& s) {
  return ordered_json{{"lower", s.lower},
                      {"upper", s.upper},
                      {"witness", s.witness.coords()},
                      {"evaluations", s.evaluations},
                      {"grid", s.grid},
                      {"mesh", s.mesh},
                      {"error_bound", s.error_bound},
                      {"budget_exhausted", s.budget_exhausted}};
}

ordered_json fit_json(const ExponentFit& f) {
  return ordered_json{{"slope", f.slope}, {"intercept", f.intercept}, {"stderr_slope", f.stderr_slope}};
}

void records_csv(Context& ctx, std::int64_t N, const std::vector<SampleRecord>& recs, std::size_t dim,
                 std::optional<double> rho) {
  if (ctx.csv_header_.empty()) {
    ctx.csv_header_ = {"N", "sample"};
    for (std::size_t j = 1; j <= dim; ++j) ctx.csv_header_.push_back("x" + std::to_string(j));
    ctx.csv_header_.insert(ctx.csv_header_.end(), {"sup_lower", "sup_upper"});
    if (rho) ctx.csv_header_.insert(ctx.csv_header_.end(), {"integrand_lower", "integrand_upper"});
    ctx.csv_header_.push_back("budget_exhausted");
  }
  for (const auto& r : recs) {
    std::vector<std::string> row{std::to_string(N), std::to_string(r.index)};
    for (double v : r.x) row.push_back(fmt(v));
    row.push_back(fmt(r.sup_lower));
    row.push_back(fmt(r.sup_upper));
    if (rho) {
      row.push_back(fmt(std::pow(r.sup_lower, *rho)));
      row.push_back(fmt(std::pow(r.sup_upper, *rho)));
    }
    row.push_back(r.budget_exhausted ? "1" : "0");
    ctx.csv_rows_.push_back(std::move(row));
  }
}

// ---------------------------------------------------------------------------

ordered_json run_exponents(Context& ctx) {
  auto f = parse_family(ctx.str("family.polys"));
  const int k = ctx.k(f);
  Rational theta = ctx.has("params.theta") ? parse_rational(ctx.str("params.theta")) : Rational(1);
  auto r = exponent_report(f, k, theta);
  auto W = wronskian(f);
  ordered_json j{{"family", f.to_string()},
                 {"d", r.d},
                 {"k", r.k},
                 {"theta", to_string(r.theta)},
                 {"s", to_string(r.s)},
                 {"sigma_k", r.sigma_k},
                 {"sigma_tilde_k", r.sigma_tilde_k},
                 {"sigma_0", r.sigma_0},
                 {"delta", r.delta},
                 {"mu", to_string(r.mu)},
                 {"mu_V", to_string(r.mu_V)},
                 {"mu_theta", to_string(r.mu_theta)},
                 {"mu_d", r.mu_d ? ordered_json(to_string(*r.mu_d)) : ordered_json(nullptr)},
                 {"delta_W", to_string(r.delta_W)},
                 {"delta_CS", to_string(r.delta_CS)},
                 {"rho_max", to_string(r.rho_max)},
                 {"wronskian", W.to_string()},
                 {"wronskian_nonzero", !W.is_zero()}};
  if (W.is_zero()) ctx.warn("Wronskian vanishes identically; the exponents do not apply to this family");
  if (ctx.has("params.rho")) {
    ordered_json rows = ordered_json::array();
    for (auto& s : split(ctx.str("params.rho"), ',')) {
      Rational rho = parse_rational(s);
      rows.push_back({{"rho", to_string(rho)}, {"mu_rho", to_string(rho * r.mu)}, {"within_range", rho <= r.rho_max}});
    }
    j["moment_exponents"] = rows;
  }
  if (ctx.has("params.nu") || ctx.has("params.q")) {
    const auto nu = ctx.integer("params.nu");
    const auto q = ctx.integer("params.q");
    const double N = ctx.num("params.N");
    j["individual_bound"] = individual_bound(f.max_degree(), static_cast<int>(nu), q, N, ctx.num_or("params.eps", 0.0));
  }
  return j;
}

ordered_json run_sum(Context& ctx) {
  auto f = ctx.family();
  auto w = ctx.weights();
  TorusVector x(ctx.has("params.x") ? ctx.nums("params.x") : std::vector<double>{});
  TorusVector y(ctx.has("params.y") ? ctx.nums("params.y") : std::vector<double>{});
  const auto N = ctx.integer("params.N");
  const auto K = ctx.integer_or("params.K", 0);
  const std::string engine = ctx.cfg().get_or("params.engine", "all");
  std::vector<EngineKind> engines;
  if (engine == "all") engines = {EngineKind::direct, EngineKind::fixed_point, EngineKind::difference_table};
  else engines = {parse_engine(engine)};
  ordered_json rows = ordered_json::array();
  std::vector<std::complex<double>> values;
  const double abs_sum = SumEvaluator(f, w, N, K).abs_weight_sum();
  for (auto e : engines) {
    auto v = eval_sum(f, w, x, y, N, K, e);
    values.push_back(v.value);
    rows.push_back({{"engine", to_string(e)},
                    {"re", v.value.real()},
                    {"im", v.value.imag()},
                    {"abs", std::abs(v.value)},
                    {"error_bound", v.error_bound}});
    ctx.check(std::string("|T| <= sum|a_n| + error_bound (") + std::string(to_string(e)) + ")", std::abs(v.value),
              "<=", abs_sum + v.error_bound);
  }
  ordered_json j{{"N", N}, {"K", K}, {"values", rows}};
  if (values.size() > 1) {
    double diff = 0;
    for (std::size_t a = 0; a < values.size(); ++a)
      for (std::size_t b = a + 1; b < values.size(); ++b) diff = std::max(diff, std::abs(values[a] - values[b]));
    j["max_engine_difference"] = diff;
  }
  return j;
}

ordered_json run_sup(Context& ctx) {
  auto f = ctx.family();
  const int k = ctx.k(f);
  auto x = ctx.nums("params.x");
  if (x.size() != static_cast<std::size_t>(k)) invalid("params.x must have k coordinates");
  const auto N = ctx.integer("params.N");
  SumEvaluator ev(f, ctx.weights(), N);
  auto s = sup_fiber(ev, k, x, ctx.budget());
  ctx.check("lower <= upper", s.lower, "<=", s.upper);
  auto j = sup_json(s);
  j["N"] = N;
  j["lipschitz"] = lipschitz_bounds(ev, k);
  return j;
}

ordered_json run_measure(Context& ctx) {
  auto f = ctx.family();
  const int k = ctx.k(f);
  auto w = ctx.weights();
  auto opt = ctx.mc();
  const auto Ns = ctx.ladder();
  auto r = exponent_report(f, k);
  const double a = rat(r.s) + static_cast<double>(r.sigma_k) + r.d - k;
  const double b = 2 * rat(r.s) + r.d - k;
  const bool by_alpha = ctx.has("params.alpha");
  if (by_alpha == ctx.has("params.thresholds")) invalid("measure needs exactly one of params.alpha, params.thresholds");
  const auto levels = ctx.nums(by_alpha ? "params.alpha" : "params.thresholds");
  ordered_json rows = ordered_json::array();
  for (auto N : Ns) {
    SumEvaluator ev(f, w, N);
    auto recs = sample_fiber_sups(ev, k, opt);
    std::vector<double> Ts;
    const double Nd = static_cast<double>(N);
    for (double l : levels) Ts.push_back(by_alpha ? std::pow(Nd, l) : l);
    auto ms = measure_superlevel(recs, Ts, opt.seed);
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const double T = Ts[i];
      if (T < 1 || T > Nd) ctx.warn("threshold " + fmt(T) + " outside [1, N] at N = " + std::to_string(N));
      const double bound = std::pow(Nd, a + ctx.slack()) * std::pow(T, -b);
      ordered_json row{{"N", N},
                       {"threshold", T},
                       {"fraction_lower", ms[i].fraction_lower},
                       {"fraction_upper", ms[i].fraction_upper},
                       {"stderr_lower", ms[i].stderr_lower},
                       {"stderr_upper", ms[i].stderr_upper},
                       {"samples", ms[i].samples},
                       {"bound", bound}};
      if (by_alpha) row["alpha"] = levels[i];
      rows.push_back(row);
      ctx.check("fraction_upper <= N^(a+slack) T^-b at N=" + std::to_string(N) + ", T=" + fmt(T), ms[i].fraction_upper,
                "<=", bound);
    }
    records_csv(ctx, N, recs, static_cast<std::size_t>(k), std::nullopt);
  }
  return ordered_json{{"a", a}, {"b", b}, {"seed", opt.seed}, {"estimates", rows}};
}

ordered_json run_boxcount(Context& ctx) {
  auto f = ctx.family();
  auto w = ctx.weights();
  const auto Ns = ctx.ladder();
  const auto alphas = ctx.nums("params.alpha");
  const double eps = ctx.num_or("params.eps", 0.05);
  const auto density = ctx.integer_or("params.sampler_density", 1);
  if (density < 1) invalid("params.sampler_density must be positive");
  const auto cap = ctx.integer_or("params.box_cap", 1000000);
  ordered_json rows = ordered_json::array();
  ctx.csv_header_ = {"N", "alpha", "eps", "U", "marked", "sampled_marked", "bound", "pass"};
  for (auto N : Ns) {
    for (double alpha : alphas) {
      auto rep = box_count_experiment(f, w, N, alpha, eps, static_cast<std::size_t>(density), ctx.slack(),
                                      static_cast<std::uint64_t>(cap), ctx.threads());
      rows.push_back({{"N", N},
                      {"alpha", alpha},
                      {"eps", eps},
                      {"zeta_inverse", rep.zeta_inverse},
                      {"U", rep.U},
                      {"marked", rep.marked},
                      {"sampled_marked", rep.sampled_marked},
                      {"exponent", rep.exponent},
                      {"slack", rep.slack},
                      {"bound", rep.bound},
                      {"sampler_density", rep.sampler_density},
                      {"lipschitz_slack", rep.lipschitz_slack}});
      ctx.check("marked <= U N^(s(1-2alpha)) N^slack at N=" + std::to_string(N) + ", alpha=" + fmt(alpha),
                static_cast<double>(rep.marked), "<=", rep.bound);
      ctx.csv_rows_.push_back({std::to_string(N), fmt(alpha), fmt(eps), std::to_string(rep.U),
                               std::to_string(rep.marked), std::to_string(rep.sampled_marked), fmt(rep.bound),
                               rep.pass ? "1" : "0"});
    }
  }
  return ordered_json{{"runs", rows}};
}

// Shared ladder bookkeeping for the three moment kinds.
ordered_json moment_ladder(Context& ctx, const std::vector<MomentEstimate>& ms, double exponent,
                           const std::string& label) {
  ordered_json rows = ordered_json::array();
  std::vector<std::pair<double, double>> lo, up;
  for (const auto& m : ms) {
    const double Nd = static_cast<double>(m.N);
    const double bound = std::pow(Nd, exponent + ctx.slack());
    rows.push_back({{"N", m.N},
                    {"mean_lower", m.mean_lower},
                    {"mean_upper", m.mean_upper},
                    {"stderr_lower", m.stderr_lower},
                    {"stderr_upper", m.stderr_upper},
                    {"samples", m.samples},
                    {"budget_exhausted", m.budget_exhausted},
                    {"bound", bound}});
    if (m.beyond_validity)
      ctx.warn("rho beyond the theorem's range at N = " + std::to_string(m.N) + "; bound not checked");
    else
      ctx.check("mean_upper <= N^(" + label + "+slack) at N=" + std::to_string(m.N), m.mean_upper, "<=", bound);
    lo.emplace_back(Nd, m.mean_lower);
    up.emplace_back(Nd, m.mean_upper);
  }
  ordered_json j{{"exponent", exponent}, {"slack_exponent", ctx.slack()}, {"ladder", rows}};
  const bool valid = std::none_of(ms.begin(), ms.end(), [](const auto& m) { return m.beyond_validity; });
  if (ms.size() >= 3) {
    auto fl = fit_exponent(lo);
    auto fu = fit_exponent(up);
    j["fit_lower"] = fit_json(fl);
    j["fit_upper"] = fit_json(fu);
    const double cap = ctx.has("checks.slope_upper_max") ? ctx.num("checks.slope_upper_max") : exponent + ctx.slack();
    if (valid || ctx.has("checks.slope_upper_max")) ctx.check("fitted slope of mean_upper", fu.slope, "<=", cap);
    if (ctx.has("checks.slope_lower_min")) ctx.check("fitted slope of mean_lower", fl.slope, ">=", ctx.num("checks.slope_lower_min"));
    if (ctx.has("checks.slope_lower_max")) ctx.check("fitted slope of mean_lower", fl.slope, "<=", ctx.num("checks.slope_lower_max"));
  }
  return j;
}

ordered_json run_moment(Context& ctx) {
  auto f = ctx.family();
  const int k = ctx.k(f);
  auto w = ctx.weights();
  const double rho = ctx.num("params.rho");
  auto opt = ctx.mc();
  const auto mu = rat(exponent_report(f, k).mu);
  std::vector<MomentEstimate> ms;
  for (auto N : ctx.ladder()) {
    ms.push_back(moment_estimate(f, w, k, rho, N, opt));
    records_csv(ctx, N, ms.back().records, static_cast<std::size_t>(k), rho);
  }
  auto j = moment_ladder(ctx, ms, mu * rho, "mu*rho");
  j["mu"] = mu;
  j["rho"] = rho;
  j["seed"] = opt.seed;
  return j;
}

ordered_json run_short_moment(Context& ctx) {
  const auto d = ctx.integer("params.d");
  if (d < 2) invalid("params.d must be at least 2");
  const double rho = ctx.num("params.rho");
  auto opt = ctx.mc();
  const double mu_d = rat(short_interval_exponent(static_cast<int>(d)));
  std::vector<MomentEstimate> ms;
  for (auto N : ctx.ladder()) {
    ms.push_back(short_moment_estimate(static_cast<int>(d), rho, N, opt));
    records_csv(ctx, N, ms.back().records, 1, rho);
  }
  auto j = moment_ladder(ctx, ms, mu_d * rho, "mu_d*rho");
  j["mu_d"] = mu_d;
  j["rho"] = rho;
  j["seed"] = opt.seed;
  return j;
}

ordered_json run_disc_moment(Context& ctx) {
  auto f = ctx.family();
  const int k = ctx.k(f);
  const double rho = ctx.num("params.rho");
  auto opt = ctx.mc();
  const double gap = ctx.num_or("params.gap_exponent", 0.5);
  const auto mu = rat(exponent_report(f, k).mu);
  std::vector<MomentEstimate> ms;
  for (auto N : ctx.ladder()) {
    ms.push_back(discrepancy_moment_estimate(f, k, rho, N, opt, gap));
    records_csv(ctx, N, ms.back().records, static_cast<std::size_t>(k), rho);
  }
  auto j = moment_ladder(ctx, ms, mu * rho, "mu*rho");
  j["mu"] = mu;
  j["rho"] = rho;
  j["gap_exponent"] = gap;
  j["upper_is_heuristic"] = true;
  j["seed"] = opt.seed;
  return j;
}

ordered_json disc_json(const DiscrepancyResult& r) {
  return ordered_json{{"value", r.value},
                      {"excess", r.excess},
                      {"deficit", r.deficit},
                      {"excess_interval", {r.excess_interval.first, r.excess_interval.second}},
                      {"deficit_interval", {r.deficit_interval.first, r.deficit_interval.second}}};
}

ordered_json run_discrepancy(Context& ctx) {
  std::vector<std::int64_t> Gs{1, 5, 20};
  if (ctx.has("params.G")) Gs = ctx.integers("params.G");
  PointSequence seq;
  ordered_json j;
  if (ctx.has("params.sequence")) {
    std::ifstream in(ctx.str("params.sequence"));
    if (!in) invalid("cannot open " + ctx.str("params.sequence"));
    seq = read_sequence(in);
  } else {
    auto f = ctx.family();
    const int k = ctx.k(f);
    auto x = ctx.nums("params.x");
    if (x.size() != static_cast<std::size_t>(k)) invalid("params.x must have k coordinates");
    const auto N = ctx.integer("params.N");
    const auto K = ctx.integer_or("params.K", 0);
    if (!ctx.has("params.y") && static_cast<std::size_t>(k) < f.size()) {
      SumEvaluator ev(f, WeightSpec::unit(), N, K);
      auto est = sup_discrepancy_fiber(ev, k, x, ctx.budget(), ctx.num_or("params.gap_exponent", 0.5));
      j["fiber"] = {{"lower", est.lower},       {"upper", est.upper},         {"heuristic", est.heuristic},
                    {"witness", est.witness.coords()}, {"grid", est.grid}, {"eta", est.eta},
                    {"evaluations", est.evaluations}, {"budget_exhausted", est.budget_exhausted}};
      ctx.check("fiber lower <= upper", est.lower, "<=", est.upper);
      ctx.check("fiber upper <= N", est.upper, "<=", static_cast<double>(N));
      auto u = x;
      u.insert(u.end(), est.witness.coords().begin(), est.witness.coords().end());
      seq = polynomial_fractional_parts(ev, u);
    } else {
      TorusVector y(ctx.has("params.y") ? ctx.nums("params.y") : std::vector<double>{});
      seq = polynomial_fractional_parts(f, TorusVector(x), y, N, K);
    }
  }
  auto r = exact_discrepancy(seq);
  j["N"] = seq.size();
  j["discrepancy"] = disc_json(r);
  ordered_json et = ordered_json::array();
  for (auto G : Gs) {
    const double v = erdos_turan_bound(seq, static_cast<int>(G));
    et.push_back({{"G", G}, {"bound", v}});
    ctx.check("Erdos-Turan bound >= D at G=" + std::to_string(G), v, ">=", r.value);
  }
  j["erdos_turan"] = et;
  ctx.csv_header_ = {"n", "value"};
  for (std::size_t i = 0; i < seq.size(); ++i) ctx.csv_rows_.push_back({std::to_string(i + 1), fmt(seq.values()[i])});
  return j;
}

ordered_json run_majorant(Context& ctx) {
  const auto d = ctx.integer("params.d");
  if (d != 2 && d != 3) invalid("params.d must be 2 or 3");
  const auto N = ctx.integer("params.N");
  auto xs = ctx.nums("params.x");
  std::vector<IntPolynomial> polys;
  for (auto e = d; e >= 1; --e) polys.push_back(IntPolynomial::monomial(static_cast<unsigned>(e)));
  PolynomialFamily f(std::move(polys));
  SumEvaluator ev(f, WeightSpec::unit(), N);
  const double power = d == 2 ? 2.0 : 4.0;
  ordered_json rows = ordered_json::array();
  ctx.csv_header_ = {"x", "majorant", "sup_lower", "sup_upper", "ratio_lower", "ratio_upper"};
  for (double x : xs) {
    const double maj = pointwise_majorant(x, N, static_cast<int>(d));
    auto s = sup_fiber(ev, 1, std::vector<double>{reduce_mod1(x)}, ctx.budget());
    const double rl = std::pow(s.lower, power) / maj, ru = std::pow(s.upper, power) / maj;
    rows.push_back({{"x", x},
                    {"majorant", maj},
                    {"sup_lower", s.lower},
                    {"sup_upper", s.upper},
                    {"ratio_lower", rl},
                    {"ratio_upper", ru}});
    ctx.csv_rows_.push_back({fmt(x), fmt(maj), fmt(s.lower), fmt(s.upper), fmt(rl), fmt(ru)});
  }
  return ordered_json{{"d", d}, {"N", N}, {"power", power}, {"points", rows}};
}

ordered_json run_fit(Context& ctx) {
  std::vector<std::pair<double, double>> pts;
  for (auto& item : split(ctx.str("params.points"), ',')) {
    auto p = split(item, ':');
    if (p.size() != 2) invalid("params.points entries must be N:value");
    pts.emplace_back(to_number("params.points", p[0]), to_number("params.points", p[1]));
  }
  auto f = fit_exponent(pts);
  auto j = fit_json(f);
  ordered_json p = ordered_json::array();
  for (auto [x, y] : f.points) p.push_back({x, y});
  j["points"] = p;
  return j;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  std::ofstream out(path, std::ios::binary);
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << field(r[i]);
    out << "\r\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (t.front() == '[') {
      if (t.back() != ']') invalid(where + "unterminated section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (!known_keys().count(section)) invalid(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) invalid(where + "expected key = value");
    if (section.empty()) invalid(where + "key outside any section");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (!known_keys().at(section).count(key)) invalid(where + "unknown key '" + key + "' in [" + section + "]");
    const std::string full = section + "." + key;
    if (cfg.has(full)) invalid(where + "duplicate key '" + full + "'");
    cfg.entries_.emplace_back(full, trim(std::string_view(t).substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) invalid("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (path.extension() == ".json") {
    try {
      return from_json(ordered_json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      invalid(std::string("bad JSON summary: ") + e.what());
    }
  }
  return parse(text);
}

ExperimentConfig ExperimentConfig::from_json(const ordered_json& j) {
  const ordered_json& c = j.contains("config") ? j.at("config") : j;
  std::string text;
  for (auto& [section, body] : c.items()) {
    text += "[" + section + "]\n";
    for (auto& [key, value] : body.items()) text += key + " = " + value.get<std::string>() + "\n";
  }
  return parse(text);
}

bool ExperimentConfig::has(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

const std::string& ExperimentConfig::get(const std::string& key) const {
  for (const auto& e : entries_)
    if (e.first == key) return e.second;
  invalid("missing required key '" + key + "'");
}

std::string ExperimentConfig::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  for (auto& e : entries_)
    if (e.first == key) {
      e.second = value;
      return;
    }
  entries_.emplace_back(key, value);
}

ordered_json ExperimentConfig::to_json() const {
  ordered_json j = ordered_json::object();
  for (const auto& [full, value] : entries_) {
    if (is_execution_setting(full)) continue;
    const auto dot = full.find('.');
    j[full.substr(0, dot)][full.substr(dot + 1)] = value;
  }
  return j;
}

std::string ExperimentConfig::to_text() const {
  std::string out, section;
  for (const auto& [full, value] : entries_) {
    const auto dot = full.find('.');
    if (full.substr(0, dot) != section) {
      section = full.substr(0, dot);
      out += (out.empty() ? "" : "\n") + std::string("[") + section + "]\n";
    }
    out += full.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

std::size_t default_threads() {
  if (const char* env = std::getenv("WML_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  RunResult result;
  try {
    ExperimentConfig cfg = config;
    const std::string kind = cfg.get("experiment.kind");
    if (!kKinds.count(kind)) invalid("unknown experiment kind '" + kind + "'");
    Context ctx(cfg, options);
    static const std::set<std::string> stochastic{"measure", "moment", "short-moment", "disc-moment"};
    if (stochastic.count(kind)) cfg.set("params.seed", std::to_string(ctx.seed()));

    ordered_json results;
    if (kind == "exponents") results = run_exponents(ctx);
    else if (kind == "sum") results = run_sum(ctx);
    else if (kind == "sup") results = run_sup(ctx);
    else if (kind == "measure") results = run_measure(ctx);
    else if (kind == "boxcount") results = run_boxcount(ctx);
    else if (kind == "moment") results = run_moment(ctx);
    else if (kind == "short-moment") results = run_short_moment(ctx);
    else if (kind == "discrepancy") results = run_discrepancy(ctx);
    else if (kind == "disc-moment") results = run_disc_moment(ctx);
    else if (kind == "majorant") results = run_majorant(ctx);
    else results = run_fit(ctx);

    const std::string name = cfg.get_or("experiment.name", kind);
    result.summary = ordered_json{{"kind", kind},
                                  {"name", name},
                                  {"config", cfg.to_json()},
                                  {"results", results},
                                  {"checks", ctx.checks_},
                                  {"warnings", ctx.warnings_},
                                  {"status", ctx.all_pass_ ? "pass" : "bound_violated"}};
    result.exit_code = ctx.all_pass_ ? 0 : 2;

    std::filesystem::path dir = options.out_dir ? *options.out_dir : std::filesystem::path(cfg.get_or("output.dir", "."));
    std::filesystem::create_directories(dir);
    const auto json_path = dir / (name + ".json");
    {
      std::ofstream out(json_path, std::ios::binary);
      out << result.summary.dump(2) << "\n";
      if (!out) invalid("cannot write " + json_path.string());
    }
    result.files.push_back(json_path);
    const bool csv = to_bool("output.csv", cfg.get_or("output.csv", "true"));
    if (csv && !ctx.csv_header_.empty()) {
      const auto csv_path = dir / (name + ".csv");
      write_csv(csv_path, ctx.csv_header_, ctx.csv_rows_);
      result.files.push_back(csv_path);
    }
  } catch (const Error& e) {
    result.exit_code = 1;
    result.error = e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    result.exit_code = 1;
    result.error = e.what();
  }
  return result;
}

RunResult run_discrepancy_oracle(const std::filesystem::path& sequence_file) {
  RunResult result;
  try {
    std::ifstream in(sequence_file);
    if (!in) invalid("cannot read " + sequence_file.string());
    auto seq = read_sequence(in);
    auto fast = exact_discrepancy(seq);
    auto brute = brute_force_discrepancy(seq);
    const double diff = std::abs(fast.value - brute.value);
    result.summary = ordered_json{{"N", seq.size()},
                                  {"exact", disc_json(fast)},
                                  {"brute_force", disc_json(brute)},
                                  {"difference", diff},
                                  {"agree", diff <= 1e-9}};
    result.exit_code = diff <= 1e-9 ? 0 : 2;
  } catch (const Error& e) {
    result.exit_code = 1;
    result.error = e.what();
  }
  return result;
}

}  // namespace wml
