// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when a
// criterion fails that was not named with --expect-fail, or when a named one
// passes (so stale expectations are caught).
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "oracles.hpp"
#include "shellcap/bounds.hpp"
#include "shellcap/caps.hpp"
#include "shellcap/cli.hpp"
#include "shellcap/extremal.hpp"
#include "shellcap/gon.hpp"
#include "shellcap/lattice.hpp"
#include "shellcap/norms.hpp"

using namespace shellcap;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::set<std::string> failed;
std::set<std::string> passed;

void criterion(const char* id, double limit_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > limit_seconds) {
    o.pass = false;
    o.detail += " (over the time limit)";
  }
  (o.pass ? passed : failed).insert(id);
  std::printf("%s %s %s [%.2fs / %.0fs]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs, limit_seconds);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Cap decompositions shared by A5, A6 and A7.
struct CapRun {
  CapDecomposition decomp;
  CapTheoremAudit audit;
  std::vector<CapLattice> lattices;
};

CapRun cap_run(int d, double lambda) {
  const ShellSpec spec{lambda, std::pow(lambda, -0.5), Cutoff::Sharp};
  const auto q = identity_form(d);
  CapRun r;
  r.decomp = assign_points(enumerate_shell(q, spec), build_cap_net(q, spec));
  r.audit = verify_cap_theorem(r.decomp, 4.0);
  return r;
}

double percentile95(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(v.size()))) - 1;
  return v[std::min(idx, v.size() - 1)];
}

const std::vector<std::string> kSweepD2{"sweep-norm", "--d", "2", "--p-list", "4,6,8,inf", "--lambda-grid",
                                        "16:1024:*2", "--delta-exp-list", "-0.25,-0.5", "--families",
                                        "knapp,radial,singlecap,random:2:7", "--format", "json"};
const std::vector<std::string> kSweepD3{"sweep-norm", "--d", "3", "--p-list", "4,6,8,inf", "--lambda-grid",
                                        "8:64:*2", "--delta-exp-list", "-0.25,-0.5", "--families",
                                        "knapp,radial,singlecap,random:2:7", "--format", "json"};

std::vector<std::string> with_threads(std::vector<std::string> args, int threads) {
  args.insert(args.end(), {"--threads", std::to_string(threads)});
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> expected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a.rfind("--expect-fail=", 0) != 0) {
      std::fprintf(stderr, "usage: acceptance [--expect-fail=A7,...]\n");
      return 2;
    }
    std::stringstream ss(a.substr(14));
    for (std::string id; std::getline(ss, id, ',');) expected.insert(id);
  }
  const auto id2 = identity_form(2);

  criterion("A1", 1.0, [&] {
    const std::vector<std::pair<double, std::int64_t>> cases{{1.5, 9}, {5.0, 69}, {5.001, 81}};
    const auto coeffs = oracle::identity_coeffs(2);
    bool ok = true;
    std::string got;
    for (const auto& [lam, want] : cases) {
      const auto n = count_ball(id2, lam);
      const auto brute = oracle::ball_count(coeffs, 2, 6, static_cast<long double>(lam) * lam);
      ok = ok && n == want && brute == want;
      got += std::to_string(n) + " ";
    }
    return Outcome{ok, "N(1.5), N(5), N(5.001) = " + got};
  });

  criterion("A2", 30.0, [&] {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int e = 5; e <= 11; ++e) {
      const double lam = std::ldexp(1.0, e), delta = std::pow(lam, -0.5);
      const double r = static_cast<double>(shell_count_sharp(id2, lam, delta)) / (delta * lam);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    return Outcome{lo >= 0.5 && hi <= 20.0, fmt("count/(delta lambda) in [%.4g, %.4g]", lo, hi)};
  });

  criterion("A3", 30.0, [&] {
    double worst = 0.0;
    for (int e = 4; e <= 11; ++e) {
      const double lam = std::ldexp(1.0, e);
      worst = std::max(worst, std::abs(error_term(id2, lam)) / std::pow(lam, 2.0 / 3.0));
    }
    return Outcome{worst <= 10.0, fmt("max |P|/lambda^(2/3) = %.4g", worst)};
  });

  criterion("A4", 60.0, [&] {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> off(-0.25, 0.25), ul(10.0, 200.0), ud(0.2, 1.0);
    int bad = 0;
    std::size_t points = 0;
    for (int t = 0; t < 20; ++t) {
      const int d = 2 + t % 2;
      Matrix m = Matrix::identity(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) m(i, j) = m(j, i) = off(rng);
      const auto q = make_form(d, m);
      const ShellSpec spec{ul(rng), ud(rng), Cutoff::Sharp};
      const auto shell = enumerate_shell(q, spec);
      const auto decomp = assign_points(shell, build_cap_net(q, spec));
      std::size_t sum = 0;
      for (const auto& c : decomp.caps) sum += c.n_theta();
      if (sum != shell.points.size() || static_cast<std::int64_t>(sum) != shell_count_sharp(q, spec.lambda, spec.delta))
        ++bad;
      points += sum;
    }
    return Outcome{bad == 0, std::to_string(bad) + " mismatches over 20 shells (" + std::to_string(points) + " points)"};
  });

  CapRun run2, run3;
  criterion("A5", 300.0, [&] {
    run2 = cap_run(2, 400.0);
    run3 = cap_run(3, 60.0);
    const double worst = std::max(run2.audit.max_ratio, run3.audit.max_ratio);
    const bool cmax = run2.audit.cmax_ok && run3.audit.cmax_ok;
    return Outcome{worst <= 100.0 && cmax,
                   fmt("max #C_j/bound = %.4g (d=2 %.4g", worst, run2.audit.max_ratio) +
                       fmt(", d=3 %.4g), empty classes beyond 4/delta: ", run3.audit.max_ratio) + (cmax ? "yes" : "no")};
  });

  criterion("A6", 300.0, [&] {
    run2.lattices = analyze_caps(run2.decomp);
    run3.lattices = analyze_caps(run3.decomp);
    std::size_t checked = 0, bad = 0;
    for (const auto* run : {&run2, &run3}) {
      const int d = run->decomp.form.dim();
      for (const auto& lat : run->lattices) {
        if (lat.r_theta < 1 || lat.r_theta >= d) continue;
        ++checked;
        bool ok = std::abs(exact_determinant(lat.basis)) == 1 && std::abs(lat.basis_det) == 1;
        for (int i = 0; i + 1 < d; ++i) {
          std::int64_t dot = 0;
          for (int k = 0; k < d; ++k) dot += lat.wedge[k] * lat.basis[i][k];
          ok = ok && dot == 0;
        }
        if (!ok) ++bad;
      }
    }
    return Outcome{bad == 0 && checked > 0,
                   std::to_string(checked) + " caps with 1 <= r < d, " + std::to_string(bad) + " failures"};
  });

  criterion("A7", 300.0, [&] {
    std::vector<double> size, angle;
    double max_md = 0.0;
    for (const auto& lat : run3.lattices) {
      max_md = std::max(max_md, lat.minima.values.back());
      if (lat.step2) {
        size.push_back(lat.step2->size_ratio);
        angle.push_back(lat.step2->angle_ratio);
      }
    }
    if (size.empty())
      return Outcome{false, "no d=3 cap has 1 <= r < d (" + std::to_string(run3.lattices.size()) +
                                " caps, max M_d = " + fmt("%.3g", max_md) +
                                "), so the Step-2 ratios are undefined"};
    const double ps = percentile95(size), pa = percentile95(angle);
    return Outcome{ps <= 50.0 && pa <= 50.0, fmt("p95 size_ratio = %.4g, angle_ratio = %.4g", ps, pa) + " over " +
                                                 std::to_string(size.size()) + " caps"};
  });

  criterion("A8", 1.0, [&] {
    const auto shell = enumerate_shell(id2, {5.0, 0.01, Cutoff::Sharp});
    const auto c = CoefficientVector::unit_on(shell.points);
    std::vector<oracle::Point> pts;
    for (std::size_t i = 0; i < shell.points.size(); ++i) pts.emplace_back(shell.points[i].begin(), shell.points[i].end());
    const auto inf = linf_nonneg(c), two = l2_norm(c);
    const double e = l4_fourth(c);
    const auto quads = oracle::additive_energy(pts);
    const bool ok = inf.value == 12.0 && inf.method == NormMethod::ExactInf && two.value == std::sqrt(12.0) &&
                    two.method == NormMethod::Exact2 && e == static_cast<double>(quads);
    return Outcome{ok, fmt("linf = %.17g, l2 = %.17g", inf.value, two.value) +
                           ", l4^4 = " + std::to_string(static_cast<long long>(e)) + " vs " + std::to_string(quads) +
                           " quadruples"};
  });

  criterion("A9", 120.0, [&] {
    const auto r = cli_run({"knapp", "--d", "2", "--n-grid", "64:4096:*2", "--delta-exp", "-0.5", "--p", "6",
                            "--format", "json"});
    if (r.code != 0) return Outcome{false, "knapp failed: " + r.err};
    std::vector<std::pair<double, double>> samples;
    for (const auto& row : json::parse(r.out)) {
      const double lam = row.at("lambda").get<double>(), delta = row.at("delta").get<double>();
      samples.emplace_back(1.0 + lam * delta, row.at("ratio").get<double>());
    }
    const auto f = fit_exponent(samples);
    return Outcome{samples.size() == 7 && std::abs(f.slope - 1.0 / 6.0) <= 0.1,
                   fmt("slope %.4g vs 1/6 (r^2 = %.4g)", f.slope, f.r_squared)};
  });

  criterion("A10", 120.0, [&] {
    std::mt19937_64 rng(4242);
    std::normal_distribution<double> g;
    double worst = 0.0;
    int tagged = 0;
    for (int t = 0; t < 200; ++t) {
      const int d = 1 + t % 3;
      const int support = 1 + static_cast<int>(rng() % 500);
      int range = 1;
      while (std::pow(2.0 * range + 1.0, d) < 2.0 * support) ++range;
      std::uniform_int_distribution<int> uk(-range, range);
      CoefficientVector c(d);
      while (static_cast<int>(c.size()) < support) {
        IntVec k(static_cast<std::size_t>(d));
        for (auto& x : k) x = uk(rng);
        c.set(k, {g(rng), g(rng)});
      }
      const double e = l4_energy(c).value;
      const auto q = lp_norm_grid(c, 4.0);
      if (q.method == NormMethod::QuadratureExact) ++tagged;
      worst = std::max(worst, std::abs(e - q.value) / e);
    }
    return Outcome{worst <= 1e-9 && tagged == 200,
                   fmt("max relative gap %.3g over 200 vectors", worst) + ", " + std::to_string(tagged) +
                       " tagged QuadratureExact"};
  });

  criterion("A11", 1.0, [&] {
    double worst = std::abs(exponents(3, 6.0).e_p.value() + 1.0);
    for (int d = 3; d <= 8; ++d)
      worst = std::max(worst, std::abs(large_delta_exponent(d, 2.0 * d / (d - 2)) + 1.0 / (2 * d - 1)));
    worst = std::max(worst, std::abs(d3_min_exponent(8.0) + 0.5));
    return Outcome{worst <= 1e-12, fmt("max deviation %.3g", worst)};
  });

  std::string sweep2, sweep3;
  criterion("A12", 600.0, [&] {
    const auto r2 = cli_run(with_threads(kSweepD2, 1));
    const auto r3 = cli_run(with_threads(kSweepD3, 1));
    if (r2.code != 0 || r3.code != 0) return Outcome{false, "sweep-norm failed: " + r2.err + r3.err};
    sweep2 = r2.out;
    sweep3 = r3.out;
    double worst = 0.0;
    std::size_t rows = 0, violations = 0;
    for (const auto* text : {&sweep2, &sweep3})
      for (const auto& row : json::parse(*text)) {
        ++rows;
        const double lam = row.at("lambda").get<double>();
        const double ratio = row.at("ratio").get<double>(), conj = row.at("conj_rhs").get<double>();
        const double scaled = ratio / (std::pow(lam, 0.1) * conj);
        worst = std::max(worst, scaled);
        if (scaled > 10.0) ++violations;
      }
    return Outcome{violations == 0 && rows > 0,
                   std::to_string(rows) + " rows, max ratio/(lambda^0.1 conj) = " + fmt("%.4g", worst)};
  });

  criterion("A13", 900.0, [&] {
    const auto dir = std::filesystem::temp_directory_path() / "shellcap_acceptance";
    std::filesystem::create_directories(dir);
    std::vector<std::string> differing;
    auto compare = [&](const std::string& label, const std::vector<std::string>& args, const std::string* t1_out) {
      std::string a = t1_out ? *t1_out : cli_run(with_threads(args, 1)).out;
      std::string b = cli_run(with_threads(args, 8)).out;
      if (a.empty() || a != b) differing.push_back(label);
    };
    for (const auto& [label, d, lam] : std::vector<std::tuple<std::string, std::string, std::string>>{
             {"caps d=2", "2", "400"}, {"caps d=3", "3", "60"}}) {
      std::string dumps[2], outs[2];
      for (int i = 0; i < 2; ++i) {
        const auto path = dir / ("caps_" + d + "_" + std::to_string(i) + ".json");
        outs[i] = cli_run({"caps", "--d", d, "--lambda", lam, "--delta-exp", "-0.5", "--K", "4", "--dump-caps",
                           path.string(), "--threads", i == 0 ? "1" : "8"})
                      .out;
        dumps[i] = slurp(path);
      }
      if (outs[0].empty() || outs[0] != outs[1] || dumps[0].empty() || dumps[0] != dumps[1]) differing.push_back(label);
    }
    compare("gon d=3", {"gon", "--d", "3", "--lambda", "60", "--delta-exp", "-0.5", "--all"}, nullptr);
    compare("sweep-norm d=2", kSweepD2, sweep2.empty() ? nullptr : &sweep2);
    compare("sweep-norm d=3", kSweepD3, sweep3.empty() ? nullptr : &sweep3);
    std::string detail = differing.empty() ? "caps, gon and sweep-norm identical at 1 and 8 threads" : "differ:";
    for (const auto& s : differing) detail += " " + s;
    return Outcome{differing.empty(), detail};
  });

  std::vector<std::string> unexpected, stale;
  for (const auto& id : failed)
    if (!expected.count(id)) unexpected.push_back(id);
  for (const auto& id : expected)
    if (passed.count(id)) stale.push_back(id);
  std::printf("%zu passed, %zu failed", passed.size(), failed.size());
  for (const auto& id : failed) std::printf(" %s%s", id.c_str(), expected.count(id) ? " (expected)" : "");
  for (const auto& id : stale) std::printf("; %s expected to fail but passed", id.c_str());
  std::printf("\n");
  return unexpected.empty() && stale.empty() ? 0 : 1;
}
