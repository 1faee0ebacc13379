// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance [--configs DIR] [--out DIR] [criterion...]

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "wml/cli.hpp"
#include "wml/explab.hpp"

using namespace wml;
namespace fs = std::filesystem;

namespace {

fs::path g_configs = WML_CONFIG_DIR;
fs::path g_out = fs::temp_directory_path() / "wml_acceptance";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

RunResult run_config(const std::string& name, std::size_t threads = 1, const std::string& subdir = "") {
  RunOptions opt;
  opt.threads = threads;
  opt.out_dir = g_out / (subdir.empty() ? name : subdir);
  return run_experiment(ExperimentConfig::load(g_configs / (name + ".cfg")), opt);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

bool check_named(const RunResult& r, const std::string& prefix) {
  for (const auto& c : r.summary["checks"])
    if (c["name"].get<std::string>().rfind(prefix, 0) == 0 && !c["pass"].get<bool>()) return false;
  return true;
}

Outcome c1() {
  auto quad = exponent_report(parse_family("T^2; T"), 1);
  auto cub = exponent_report(parse_family("T^3; T^2; T"), 1);
  const bool ok = quad.mu == Rational(5, 7) && cub.mu == Rational(11, 14) && Rational(4) * cub.mu == Rational(22, 7) &&
                  short_interval_exponent(2) == Rational(5, 7) && short_interval_exponent(3) == Rational(11, 14);
  return {ok, "mu(T^2,T) = " + to_string(quad.mu) + ", mu(T^3,T^2,T) = " + to_string(cub.mu) +
                  ", 4 mu = " + to_string(Rational(4) * cub.mu) + ", mu_2 = " + to_string(short_interval_exponent(2)) +
                  ", mu_3 = " + to_string(short_interval_exponent(3))};
}

Outcome c2() {
  bool ok = true;
  for (unsigned d = 1; d <= 8; ++d) ok = ok && !wronskian(PolynomialFamily::classical(d)).is_zero();
  const bool zero = wronskian(parse_family("T; 2T")).is_zero();
  return {ok && zero, std::string("classical d <= 8 nonzero: ") + (ok ? "yes" : "no") +
                          ", (T, 2T) identically zero: " + (zero ? "yes" : "no")};
}

Outcome c3() {
  double worst = 0;
  auto f = parse_family("T; T^2");
  for (int p : {5, 13, 17})
    for (auto e : {EngineKind::direct, EngineKind::fixed_point, EngineKind::difference_table}) {
      auto v = eval_sum(f, WeightSpec::unit(), TorusVector({0.0, 1.0 / p}), TorusVector(), p, 0, e);
      worst = std::max(worst, std::abs(std::abs(v.value) - std::sqrt(double(p))));
    }
  return {worst <= 1e-9, "max ||S| - sqrt(p)| = " + num(worst)};
}

Outcome c4() {
  double worst = 0;
  std::uint64_t seed = 400;
  for (const char* fam : {"T", "T^2; T", "T^3; T^2; T"}) {
    auto c = compare_engines(parse_family(fam), WeightSpec::unit(), {}, 10000, 100, seed++);
    worst = std::max(worst, c.max_difference);
  }
  return {worst <= 1e-8, "max pairwise difference over d = 1, 2, 3 at N = 10^4: " + num(worst)};
}

std::vector<PointSequence> random_sequences() {
  std::mt19937_64 rng(20241018);
  std::uniform_int_distribution<int> len(1, 64);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<PointSequence> out;
  for (int s = 0; s < 500; ++s) {
    std::vector<double> v(static_cast<std::size_t>(len(rng)));
    // A third of the sequences use a coarse lattice so that ties and
    // repeated points are exercised.
    for (auto& x : v) x = s % 3 == 0 ? std::floor(u(rng) * 16) / 16 : u(rng);
    out.emplace_back(std::move(v));
  }
  return out;
}

Outcome c5() {
  double worst = 0;
  for (const auto& seq : random_sequences())
    worst = std::max(worst, std::abs(exact_discrepancy(seq).value - brute_force_discrepancy(seq).value));
  return {worst <= 1e-9, "500 sequences, max |exact - brute force| = " + num(worst)};
}

Outcome c6() {
  double min_gap = 1e300;
  for (const auto& seq : random_sequences()) {
    const double D = exact_discrepancy(seq).value;
    for (int G : {1, 5, 20}) min_gap = std::min(min_gap, erdos_turan_bound(seq, G) - D);
  }
  return {min_gap >= 0, "min (bound - D) over 500 sequences and G in {1, 5, 20}: " + num(min_gap)};
}

Outcome c7() {
  auto f = parse_family("T");
  SumEvaluator ev(f, WeightSpec::unit(), 4);
  const double quad = quadrature_moment(ev, 4.0, 20000);
  MonteCarloOptions opt;
  opt.samples = 100000;
  opt.seed = 7;
  auto m = moment_estimate(f, WeightSpec::unit(), 1, 4.0, 4, opt);
  const bool ok = std::abs(quad - 44.0) <= 1e-4 && std::abs(m.mean_lower - 44.0) <= 3 * m.stderr_lower &&
                  m.mean_lower == m.mean_upper;
  return {ok, "quadrature " + num(quad) + ", Monte Carlo " + num(m.mean_lower) + " +- " + num(m.stderr_lower)};
}

Outcome c8() {
  auto f = parse_family("T; T^2");
  MonteCarloOptions opt;
  opt.samples = 100000;
  opt.seed = 8;
  auto m = moment_estimate(f, WeightSpec::unit(), 2, 2.0, 64, opt);
  const bool ok = std::abs(m.mean_lower - 64.0) <= 3 * m.stderr_lower;
  return {ok, "estimate " + num(m.mean_lower) + " +- " + num(m.stderr_lower) + " (exact 64)"};
}

Outcome c9() {
  auto r = run_config("measure_quadratic");
  if (r.exit_code == 1) return {false, r.error};
  double worst = 0;
  for (const auto& e : r.summary["results"]["estimates"])
    worst = std::max(worst, e["fraction_upper"].get<double>() / e["bound"].get<double>());
  return {r.exit_code == 0, "max fraction_upper / bound = " + num(worst)};
}

Outcome c10() {
  auto r = run_config("boxcount_quadratic");
  if (r.exit_code == 1) return {false, r.error};
  bool geometry = true;
  std::string detail;
  for (const auto& run : r.summary["results"]["runs"]) {
    const auto N = run["N"].get<std::int64_t>();
    const double alpha = run["alpha"].get<double>();
    const double eps = run["eps"].get<double>();
    std::uint64_t U = 1;
    const auto degrees = parse_family(r.summary["config"]["family"]["polys"].get<std::string>()).degrees();
    for (std::size_t j = 0; j < degrees.size(); ++j) {
      const int e = degrees[j];
      const auto per_axis = static_cast<std::uint64_t>(
          std::ceil(std::pow(static_cast<long double>(N), static_cast<long double>(e + 1 + eps - alpha))));
      geometry = geometry && run["zeta_inverse"][j].get<std::uint64_t>() == per_axis;
      U *= per_axis;
    }
    geometry = geometry && run["U"].get<std::uint64_t>() == U;
    if (N == 16 && std::abs(alpha - 0.75) < 1e-12) geometry = geometry && U == 21793;
    detail += " N=" + std::to_string(N) + ",a=" + num(alpha) + ": marked " + std::to_string(run["marked"].get<std::uint64_t>()) +
              " (sampled " + std::to_string(run["sampled_marked"].get<std::uint64_t>()) + ") vs bound " +
              num(run["bound"].get<double>()) + ";";
  }
  return {geometry && r.exit_code == 0, std::string("geometry ") + (geometry ? "exact" : "MISMATCH") + ";" + detail};
}

RunResult& moment_run() {
  static RunResult r = run_config("moment_quadratic");
  return r;
}

Outcome c11() {
  auto& r = moment_run();
  if (r.exit_code == 1) return {false, r.error};
  const double slope = r.summary["results"]["fit_lower"]["slope"].get<double>();
  return {slope >= 0.95 && slope <= 1.35, "fitted exponent of mean_lower = " + num(slope) + " +- " +
                                              num(r.summary["results"]["fit_lower"]["stderr_slope"].get<double>())};
}

Outcome c12() {
  auto& r = moment_run();
  if (r.exit_code == 1) return {false, r.error};
  double worst = 0;
  bool ok = true;
  for (const auto& row : r.summary["results"]["ladder"]) {
    const double bound = std::pow(row["N"].get<double>(), 10.0 / 7.0 + 0.2);
    ok = ok && row["mean_upper"].get<double>() <= bound;
    worst = std::max(worst, row["mean_upper"].get<double>() / bound);
  }
  ok = ok && check_named(r, "mean_upper <= ");
  return {ok, "max mean_upper / N^(10/7 + 0.2) = " + num(worst)};
}

Outcome c13() {
  auto r = run_config("disc_moment_quadratic");
  if (r.exit_code == 1) return {false, r.error};
  const double up = r.summary["results"]["fit_upper"]["slope"].get<double>();
  const double lo = r.summary["results"]["fit_lower"]["slope"].get<double>();
  return {up <= 5.0 / 7.0 + 0.2, "fitted exponent of mean_upper = " + num(up) + " (mean_lower " + num(lo) +
                                     "), cap " + num(5.0 / 7.0 + 0.2)};
}

Outcome c14() {
  TrigPolynomial F{{{1, {1.0, 0.0}}, {2, {1.0, 0.0}}}, true};
  double worst = 0;
  for (int g : {2, 3, 5}) worst = std::max(worst, dilation_invariance_check(g, F, 64).difference);
  return {worst <= 1e-9, "max |int F(gx) - int F(x)| = " + num(worst)};
}

Outcome c15() {
  bool ok = true;
  std::string detail;
  for (const std::string name : {"determinism_small", "measure_quadratic_small"}) {
    std::string reference;
    for (std::size_t t : {1u, 4u, 8u}) {
      auto r = run_config(name, t, name + "_t" + std::to_string(t));
      if (r.exit_code == 1) return {false, r.error};
      const auto bytes = slurp(r.files.at(0));
      if (reference.empty()) reference = bytes;
      ok = ok && bytes == reference;
    }
    detail += " " + name + ": " + std::to_string(reference.size()) + " bytes;";
  }
  return {ok, std::string(ok ? "identical" : "DIFFERENT") + " summaries at 1, 4, 8 threads;" + detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> criteria{
      {1, c1}, {2, c2},   {3, c3},   {4, c4},   {5, c5},   {6, c6},   {7, c7},  {8, c8},
      {9, c9}, {10, c10}, {11, c11}, {12, c12}, {13, c13}, {14, c14}, {15, c15}};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--configs" && i + 1 < argc) g_configs = argv[++i];
    else if (a == "--out" && i + 1 < argc) g_out = argv[++i];
    else selected.push_back(std::stoi(a));
  }
  if (selected.empty())
    for (const auto& [id, fn] : criteria) selected.push_back(id);

  int failures = 0;
  for (int id : selected) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria.at(id)();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("criterion %2d: %s  (%.2f s)  %s\n", id, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(selected.size()) - failures, selected.size());
  return failures == 0 ? 0 : 1;
}
