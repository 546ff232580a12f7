#include "shellcap/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "shellcap/bounds.hpp"
#include "shellcap/caps.hpp"
#include "shellcap/error.hpp"
#include "shellcap/extremal.hpp"
#include "shellcap/gon.hpp"
#include "shellcap/io.hpp"
#include "shellcap/lattice.hpp"
#include "shellcap/norms.hpp"
#include "shellcap/parallel.hpp"

namespace shellcap::cli {

namespace {

using nlohmann::json;

struct Column {
  std::string name;
  std::string meaning;
};

struct Schema {
  std::string command;
  std::string format;
  std::string invocation;
  std::vector<Column> columns;
};

const std::vector<Schema>& schema_list() {
  static const std::vector<Schema> list = {
      {"count", "csv|json", "shellcap count --form identity --d 2 --lambda 5 --delta 0.01 [--smooth]",
       {{"lambda", "shell radius"},
        {"delta", "shell half-thickness"},
        {"count", "points with lambda-delta <= sqrt(Q) < lambda+delta (weighted sum with --smooth)"},
        {"N_plus", "N(lambda+delta) = #{Q(n) < (lambda+delta)^2}"},
        {"N_minus", "N(lambda-delta)"},
        {"P", "N(lambda) - Vol(B_1) lambda^d"},
        {"normalized_P", "|P| / lambda^{d-2d/(d+1)}"}}},
      {"sweep-count", "csv|json", "shellcap sweep-count --d 2 --lambda-grid 16:2048:*2 --delta 0.5",
       {{"lambda", "grid value, ascending"},
        {"delta", "shell half-thickness"},
        {"count", "sharp shell count"},
        {"N_plus", "N(lambda+delta)"},
        {"N_minus", "N(lambda-delta)"},
        {"P", "error term at lambda"},
        {"normalized_P", "|P| / lambda^{d-2d/(d+1)}"}}},
      {"caps", "csv|json", "shellcap caps --d 2 --lambda 400 --delta-exp -0.5 --K 4 [--dump-caps caps.json]",
       {{"j", "dyadic class index (rows only for 2^j > K)"},
        {"count", "#C_j, caps in class j"},
        {"k0", "smallest k >= 1 with (delta lambda)^{k/2} delta 2^j > K (empty if none)"},
        {"bound", "(2^{j/k0} delta)^{-d}"},
        {"ratio", "count / bound"}}},
      {"caps --dump-caps", "json", "array written to the --dump-caps path",
       {{"id", "cap id"},
        {"center", "cap center on sqrt(Q) = lambda"},
        {"normal", "unit normal"},
        {"N_theta", "points assigned to the cap"},
        {"class", "dyadic class j, null when N_theta = 0"}}},
      {"gon", "json", "shellcap gon --d 3 --lambda 60 --delta-exp -0.5 [--cap-id i | --all]",
       {{"cap_id", "cap id"},
        {"M", "successive minima in the theta-norm"},
        {"minima_exact", "false when minima come from reduction only (d > 4)"},
        {"basis", "adapted integer basis, one vector per row"},
        {"det", "exact determinant of the basis (+-1)"},
        {"r_theta", "#{i : M_i <= 1}"},
        {"v", "wedge of the first d-1 basis vectors"},
        {"box_count", "#(Z^d in R_theta)"},
        {"minkowski_product", "prod M_i * prod half-widths, in [1/d!, 1]"},
        {"step1_ratio", "box_count * prod_{i <= r} M_i"},
        {"size_ratio", "|v| over its predicted size (null unless 1 <= r < d)"},
        {"angle_ratio", "|n - v/|v|| over its predicted size (null unless 1 <= r < d)"}}},
      {"knapp / radial", "csv|json",
       "shellcap knapp --d 2 --n-grid 64:4096:*2 --delta-exp -0.5 --p 6; shellcap radial --d 2 --lambda 5 --delta 0.01 --p 4",
       {{"lambda", "shell radius (knapp: n / xi0^d)"},
        {"delta", "shell half-thickness"},
        {"p", "exponent (inf allowed)"},
        {"support_size", "number of nonzero coefficients"},
        {"l2", "||f||_2"},
        {"lp", "||f||_p"},
        {"ratio", "||f||_p / ||f||_2"},
        {"predicted", "knapp: (1+lambda delta)^{(d-1)/2 (1/2-1/p)}; radial: lambda^{sigma/2} delta^{1/2}"},
        {"ratio_over_predicted", "ratio / predicted"}}},
      {"opnorm", "csv|json", "shellcap opnorm --d 2 --lambda 64 --delta 0.125 --p 6 --families knapp,radial,random:16:42",
       {{"lambda", "shell radius"},
        {"delta", "shell half-thickness"},
        {"p", "exponent"},
        {"family", "knapp | radial | singlecap | random:TRIALS:SEED"},
        {"ratio", "best ||f||_p/||f||_2 in the family (lower bound for the projector norm)"},
        {"method", "Exact2 | ExactInf | EnergyEven | QuadratureExact | GridApprox"},
        {"error_bound", "relative error estimate (0 for exact methods)"}}},
      {"bounds", "json", "shellcap bounds --d 3 --p 6 --lambda 1e4 --delta 0.1 [--variant full|simple]",
       {{"inputs", "d, p, lambda, delta"},
        {"exponents", "sigma, p_ST, p_star, p_tilde_inv, alpha, beta, e_p"},
        {"conjecture_rhs", "two-term conjectured bound"},
        {"knapp_term / radial_term", "the two terms"},
        {"dominant_term", "Knapp | Radial"},
        {"euclid_rhs", "Euclidean benchmark"},
        {"thm_main_rhs", "main theorem bound for the chosen variant, null outside its range"},
        {"thm_main_full / thm_main_simple", "both variants"},
        {"coverage", "theorems certifying the conjecture here"},
        {"thresholds", "lambda-exponents of the delta thresholds"},
        {"landau_ok", "delta > lambda^{-(d-1)/(d+1)}"},
        {"epsilon_slack", "explicit lambda^eps factor"}}},
      {"sweep-bounds", "csv|json",
       "shellcap sweep-bounds --d-list 2,3 --p-list 4,6,8,inf --lambda-grid 16:1024:*2 --delta-exp-list -0.25,-0.5",
       {{"d", "dimension"},
        {"p", "exponent"},
        {"lambda", "shell radius"},
        {"delta", "lambda^t for t in --delta-exp-list"},
        {"conj_rhs", "conjectured bound (empty when delta < 1/lambda)"},
        {"dominant", "Knapp | Radial"},
        {"thm_rhs", "main theorem bound (empty outside its range)"},
        {"covered_by", "';'-joined theorem names, or None"},
        {"landau_ok", "delta > lambda^{-(d-1)/(d+1)}"}}},
      {"sweep-norm", "csv|json",
       "shellcap sweep-norm --d 2 --p-list 4,6,8,inf --lambda-grid 16:1024:*2 --delta-exp-list -0.25,-0.5 --families knapp,radial,singlecap,random:2:7",
       {{"d", "dimension"},
        {"lambda", "shell radius"},
        {"delta", "shell half-thickness"},
        {"p", "exponent"},
        {"family", "witness family"},
        {"ratio", "best ||f||_p/||f||_2 in the family"},
        {"method", "norm evaluation method"},
        {"error_bound", "relative error estimate"},
        {"conj_rhs", "conjectured bound"},
        {"ratio_over_conj", "ratio / conj_rhs"}}},
  };
  return list;
}

std::vector<std::string> header_of(const std::string& command) {
  for (const auto& s : schema_list())
    if (s.command == command) {
      std::vector<std::string> h;
      for (const auto& c : s.columns) h.push_back(c.name);
      return h;
    }
  throw Error(ErrorKind::InvalidArgument, "no schema for " + command);
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] void usage(const std::string& flag, const std::string& msg) { throw UsageError("--" + flag + ": " + msg); }

double parse_real(const std::string& flag, const std::string& text) {
  const char* s = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0' || std::isnan(v)) usage(flag, "not a number: '" + text + "'");
  return v;
}

std::int64_t parse_int(const std::string& flag, const std::string& text) {
  const double v = parse_real(flag, text);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) usage(flag, "not an integer: '" + text + "'");
  return static_cast<std::int64_t>(v);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::vector<double> parse_list(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split(text, ',')) out.push_back(parse_real(flag, s));
  if (out.empty()) usage(flag, "empty list");
  return out;
}

/// "a:b:step" (additive), "a:b:*f" (geometric) or a comma list.
std::vector<double> parse_grid(const std::string& flag, const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() == 1) return parse_list(flag, text);
  if (parts.size() != 3) usage(flag, "expected a:b:step, a:b:*factor or a comma list");
  const double a = parse_real(flag, parts[0]), b = parse_real(flag, parts[1]);
  std::vector<double> out;
  if (!parts[2].empty() && parts[2][0] == '*') {
    const double f = parse_real(flag, parts[2].substr(1));
    if (!(f > 1.0) || !(a > 0.0)) usage(flag, "geometric grid needs a > 0 and factor > 1");
    for (double x = a; x <= b * (1.0 + 1e-12); x *= f) out.push_back(x);
  } else {
    const double step = parse_real(flag, parts[2]);
    if (!(step > 0.0)) usage(flag, "step must be positive");
    const auto n = static_cast<std::int64_t>(std::floor((b - a) / step + 1e-9));
    if (n > 10'000'000) usage(flag, "grid too long");
    for (std::int64_t i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
  }
  if (out.empty()) usage(flag, "empty grid");
  return out;
}

QuadraticForm parse_form(const std::string& text, int d, bool d_given) {
  QuadraticForm q;
  try {
    if (text == "identity") {
      if (d < 1 || d > 8) usage("d", "dimension must be in 1..8");
      return identity_form(d);
    }
    if (text.rfind("diag:", 0) == 0) {
      const auto vals = parse_list("form", text.substr(5));
      q = make_form(static_cast<int>(vals.size()), Matrix::diagonal(vals));
    } else {
      q = parse_form_matrix(text.rfind("matrix:", 0) == 0 ? text.substr(7) : text);
    }
  } catch (const Error& e) {
    usage("form", e.what());
  }
  if (d_given && q.dim() != d) usage("d", "form has dimension " + std::to_string(q.dim()));
  return q;
}

struct Common {
  std::string form = "identity";
  int d = 2;
  std::string output;
  std::string format;
  std::string meta;
};

void add_common(CLI::App* sub, Common& c, bool with_form) {
  if (with_form) {
    sub->add_option("--form", c.form, "identity | diag:a,b,.. | b11,b12,...,bdd (row-major)");
    sub->add_option("--d", c.d, "dimension for --form identity");
  }
  sub->add_option("--output", c.output, "output path (default stdout)");
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--meta", c.meta, "metadata sidecar path (default <output>.meta.json)");
}

struct DeltaArg {
  std::string delta;
  std::string delta_exp;

  void add(CLI::App* sub) {
    sub->add_option("--delta", delta, "shell half-thickness");
    sub->add_option("--delta-exp", delta_exp, "delta = lambda^t");
  }
  void require() const {
    if (delta.empty() == delta_exp.empty()) usage("delta", "give exactly one of --delta or --delta-exp");
  }
  double at(double lambda) const {
    require();
    const double v = delta.empty() ? std::pow(lambda, parse_real("delta-exp", delta_exp)) : parse_real("delta", delta);
    if (!(v > 0.0) || !(v < lambda)) usage(delta.empty() ? "delta-exp" : "delta", "need 0 < delta < lambda");
    return v;
  }
};

double parse_p(const std::string& flag, const std::string& text) {
  const double p = parse_real(flag, text);
  if (!(p >= 1.0)) usage(flag, "p must be >= 1");
  return p;
}

std::string render(const Table& t, const std::string& format) {
  return format == "json" ? dump_json(t.json()) : t.csv();
}

json p_json(double p) { return json_number(p); }

json norm_row_fields(const CoefficientVector& c, double p, double lambda, double delta, double predicted) {
  json row = json::array();
  row.push_back(lambda);
  row.push_back(delta);
  row.push_back(p_json(p));
  row.push_back(static_cast<std::int64_t>(c.size()));
  if (c.empty()) {
    for (int i = 0; i < 3; ++i) row.push_back(nullptr);
    row.push_back(json_number(predicted));
    row.push_back(nullptr);
    return row;
  }
  const NormRatio r = norm_ratio(c, p);
  const double l2 = l2_norm(c).value;
  row.push_back(l2);
  row.push_back(json_number(r.ratio * l2));
  row.push_back(json_number(r.ratio));
  row.push_back(json_number(predicted));
  row.push_back(json_number(r.ratio / predicted));
  return row;
}

std::vector<json> to_cells(const json& arr) { return std::vector<json>(arr.begin(), arr.end()); }

std::vector<json> count_row(const QuadraticForm& q, double lambda, double delta, bool smooth) {
  const std::int64_t plus = count_ball(q, lambda + delta);
  const std::int64_t minus = count_ball(q, lambda - delta);
  const double p = error_term(q, lambda);
  json count;
  if (smooth) {
    const LatticeShell s = enumerate_shell(q, {lambda, delta, Cutoff::SmoothBump});
    count = compensated_sum(s.weights);
  } else {
    count = plus - minus;
  }
  return {lambda, delta, count, plus, minus, p, std::abs(p) / std::pow(lambda, landau_error_exponent(q.dim()))};
}

CapDecomposition decompose(const QuadraticForm& q, double lambda, double delta) {
  const ShellSpec spec{lambda, delta, Cutoff::Sharp};
  const LatticeShell shell = enumerate_shell(q, spec);
  return assign_points(shell, build_cap_net(q, spec));
}

json vec_json(const RealVec& v) {
  json a = json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

json gon_json(const CapLattice& lat) {
  json o;
  o["cap_id"] = lat.cap_id;
  o["M"] = vec_json(lat.minima.values);
  o["minima_exact"] = lat.minima.exact;
  o["basis"] = lat.basis;
  o["det"] = lat.basis_det;
  o["r_theta"] = lat.r_theta;
  o["v"] = lat.wedge;
  o["box_count"] = lat.box_count;
  o["minkowski_product"] = lat.minkowski_product;
  o["step1_ratio"] = lat.step1_ratio;
  o["size_ratio"] = lat.step2 ? json(lat.step2->size_ratio) : json(nullptr);
  o["angle_ratio"] = lat.step2 ? json(lat.step2->angle_ratio) : json(nullptr);
  return o;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string config_hash(const std::vector<std::string>& args) {
  // Thread count and output locations do not change results.
  std::string canon;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--threads" || a == "--output" || a == "--meta" || a == "--dump-caps") {
      ++i;
      continue;
    }
    if (a.rfind("--threads=", 0) == 0 || a.rfind("--output=", 0) == 0 || a.rfind("--meta=", 0) == 0) continue;
    canon += a;
    canon += '\x1f';
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(canon);
  return os.str();
}

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int resolve_threads(int flag_value) {
  if (flag_value >= 0) return flag_value;
  const char* env = std::getenv("SHELLCAP_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 0 || v > 4096) usage("threads", std::string("bad SHELLCAP_THREADS value '") + env + "'");
  return static_cast<int>(v);
}

std::string theorem_list(const std::vector<Theorem>& ts) {
  if (ts.empty()) return "None";
  std::string s;
  for (std::size_t i = 0; i < ts.size(); ++i) s += (i ? ";" : "") + to_string(ts[i]);
  return s;
}

json bound_json(const BoundReport& r, Variant variant) {
  json j;
  j["inputs"] = {{"d", r.d}, {"p", p_json(r.p)}, {"lambda", r.lambda}, {"delta", r.delta}};
  json e;
  e["sigma"] = r.exps.sigma;
  e["p_ST"] = r.exps.p_st;
  e["p_star"] = json_number(r.exps.p_star);
  e["p_tilde_inv"] = r.exps.p_tilde_inv;
  e["alpha"] = r.exps.alpha;
  e["beta"] = r.exps.beta;
  e["e_p"] = r.exps.e_p ? json_number(*r.exps.e_p) : json(nullptr);
  j["exponents"] = e;
  j["conjecture_rhs"] = r.conjecture.value;
  j["knapp_term"] = r.conjecture.knapp_term;
  j["radial_term"] = r.conjecture.radial_term;
  j["dominant_term"] = to_string(r.conjecture.dominant);
  j["euclid_rhs"] = r.euclid;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  j["thm_main_full"] = opt(r.thm_main);
  j["thm_main_simple"] = opt(r.thm_main_simple);
  j["thm_main_rhs"] = variant == Variant::Full ? opt(r.thm_main) : opt(r.thm_main_simple);
  j["variant"] = variant == Variant::Full ? "full" : "simple";
  json cov = json::array();
  for (Theorem t : r.cov.covered) cov.push_back(to_string(t));
  j["coverage"] = cov;
  j["thresholds"] = r.cov.thresholds;
  j["landau_ok"] = r.cov.landau_ok;
  j["epsilon_slack"] = r.epsilon;
  return j;
}

}  // namespace

std::string schemas_markdown() {
  std::string md = "# Output schemas\n\n";
  md += "Generated by `shellcap schemas`. Floats are written with 17 significant digits; "
        "`inf` stands for p = infinity. Every file written with `--output` gets a sidecar "
        "`<output>.meta.json` with `version`, `command`, `config_hash` (FNV-1a over the arguments, "
        "ignoring `--threads` and output paths), `threads`, `wall_time_seconds` and `timestamp`.\n\n"
        "Exit codes: 0 success, 2 invalid arguments, 3 resource limit (Overflow, NetTooLarge, "
        "SearchBudgetExceeded, SupportTooLarge, GridTooLarge), 1 other failures.\n";
  for (const auto& s : schema_list()) {
    md += "\n## " + s.command + "\n\n";
    md += "Format: " + s.format + "\n\n";
    md += "Example: `" + s.invocation + "`\n\n";
    md += "| column | meaning |\n|---|---|\n";
    for (const auto& c : s.columns) {
      std::string meaning;
      for (char ch : c.meaning) meaning += ch == '|' ? std::string("\\|") : std::string(1, ch);
      md += "| `" + c.name + "` | " + meaning + " |\n";
    }
  }
  return md;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lattice points in thin shells, cap decompositions and spectral projector bounds", "shellcap"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  app.set_version_flag("--version", kVersion);
  int threads = -1;
  app.add_option("--threads", threads, "worker threads (0 = runtime default; env SHELLCAP_THREADS)")
      ->check(CLI::Range(0, 4096));

  Common common;
  DeltaArg delta;
  std::string lambda_s, lambda_grid, n_s, n_grid, p_s, p_list, d_list, delta_exp_list, families, taper = "sharp",
                                                                                               variant = "full",
                                                                                               dump_caps, cap_id_s;
  bool smooth = false, optimize = false, all_caps = false;
  double K = 4.0, c_const = 0.25, epsilon = kDefaultEpsilon;

  auto* count = app.add_subcommand("count", "shell count and error term at one lambda");
  add_common(count, common, true);
  count->add_option("--lambda", lambda_s, "shell radius")->required();
  delta.add(count);
  count->add_flag("--smooth", smooth, "weight points by the smooth bump");

  auto* sweep_count = app.add_subcommand("sweep-count", "count rows over an ascending lambda grid");
  add_common(sweep_count, common, true);
  sweep_count->add_option("--lambda-grid", lambda_grid, "a:b:step, a:b:*factor or list")->required();
  delta.add(sweep_count);
  sweep_count->add_flag("--smooth", smooth, "weight points by the smooth bump");

  auto* caps = app.add_subcommand("caps", "cap decomposition and the cap-counting audit");
  add_common(caps, common, true);
  caps->add_option("--lambda", lambda_s, "shell radius")->required();
  delta.add(caps);
  caps->add_option("--K", K, "threshold constant");
  caps->add_option("--dump-caps", dump_caps, "write per-cap JSON here");

  auto* gon = app.add_subcommand("gon", "successive minima, adapted bases and wedge vectors per cap");
  add_common(gon, common, true);
  gon->add_option("--lambda", lambda_s, "shell radius")->required();
  delta.add(gon);
  auto* cap_opt = gon->add_option("--cap-id", cap_id_s, "analyze one cap");
  gon->add_flag("--all", all_caps, "analyze every populated cap (default)")->excludes(cap_opt);

  auto* knapp = app.add_subcommand("knapp", "discrete Knapp example");
  auto* radial = app.add_subcommand("radial", "radial example");
  for (auto* sub : {knapp, radial}) {
    add_common(sub, common, true);
    sub->add_option("--lambda", lambda_s, "shell radius");
    sub->add_option("--n", n_s, "integer height n (lambda = n / xi0^d)");
    sub->add_option("--n-grid", n_grid, "grid of n values");
    delta.add(sub);
    sub->add_option("--p", p_s, "exponent (inf allowed)")->required();
  }
  knapp->add_option("--taper", taper, "sharp or fejer")->check(CLI::IsMember({"sharp", "fejer"}));
  knapp->add_option("--c", c_const, "cuboid constant");
  radial->add_flag("--optimize-lambda", optimize, "scan [n-1, n+1] for the largest shell");

  auto* opnorm = app.add_subcommand("opnorm", "lower bounds for the projector norm");
  add_common(opnorm, common, true);
  opnorm->add_option("--lambda", lambda_s, "shell radius")->required();
  delta.add(opnorm);
  opnorm->add_option("--p", p_s, "exponent (inf allowed)")->required();
  opnorm->add_option("--families", families, "knapp,radial,singlecap,random:TRIALS:SEED")->required();

  auto* bounds = app.add_subcommand("bounds", "exponent calculus report");
  add_common(bounds, common, false);
  int bd = 3;
  bounds->add_option("--d", bd, "dimension")->required();
  bounds->add_option("--p", p_s, "exponent (inf allowed)")->required();
  bounds->add_option("--lambda", lambda_s, "spectral parameter")->required();
  delta.add(bounds);
  bounds->add_option("--variant", variant, "full or simple")->check(CLI::IsMember({"full", "simple"}));
  bounds->add_option("--epsilon", epsilon, "explicit lambda^eps slack");

  auto* sweep_bounds = app.add_subcommand("sweep-bounds", "bound table over a parameter grid");
  add_common(sweep_bounds, common, false);
  sweep_bounds->add_option("--d-list", d_list, "dimensions")->required();
  sweep_bounds->add_option("--p-list", p_list, "exponents")->required();
  sweep_bounds->add_option("--lambda-grid", lambda_grid, "lambda grid")->required();
  sweep_bounds->add_option("--delta-exp-list", delta_exp_list, "t values, delta = lambda^t")->required();
  sweep_bounds->add_option("--variant", variant, "full or simple")->check(CLI::IsMember({"full", "simple"}));
  sweep_bounds->add_option("--epsilon", epsilon, "explicit lambda^eps slack");

  auto* sweep_norm = app.add_subcommand("sweep-norm", "projector lower bounds over a grid");
  add_common(sweep_norm, common, true);
  sweep_norm->add_option("--p-list", p_list, "exponents")->required();
  sweep_norm->add_option("--lambda-grid", lambda_grid, "lambda grid")->required();
  sweep_norm->add_option("--delta-exp-list", delta_exp_list, "t values, delta = lambda^t")->required();
  sweep_norm->add_option("--families", families, "witness families")->required();

  auto* schemas = app.add_subcommand("schemas", "write the output schema reference (SCHEMAS.md)");
  schemas->add_option("--output", common.output, "output path (default stdout)");

  std::vector<std::string> argv_store{"shellcap"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const auto start = std::chrono::steady_clock::now();
  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  int used_threads = 0;
  try {
    used_threads = resolve_threads(threads);
    set_threads(used_threads);
    const bool d_given = sub->get_option_no_throw("--d") != nullptr && sub->count("--d") > 0;
    auto form = [&] { return parse_form(common.form, common.d, d_given); };
    std::string format = common.format;
    std::string text;

    if (name == "count" || name == "sweep-count") {
      const QuadraticForm q = form();
      std::vector<double> lambdas =
          name == "count" ? std::vector<double>{parse_real("lambda", lambda_s)} : parse_grid("lambda-grid", lambda_grid);
      for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] > lambdas[i - 1])) usage("lambda-grid", "grid must be ascending");
      Table t(header_of(name));
      for (double l : lambdas) {
        if (!(l > 0.0)) usage(name == "count" ? "lambda" : "lambda-grid", "lambda must be positive");
        t.add(count_row(q, l, delta.at(l), smooth));
      }
      text = render(t, format);
    } else if (name == "caps") {
      const QuadraticForm q = form();
      const double l = parse_real("lambda", lambda_s);
      if (!(K > 0.0)) usage("K", "must be positive");
      const CapDecomposition decomp = decompose(q, l, delta.at(l));
      const CapTheoremAudit audit = verify_cap_theorem(decomp, K);
      Table t(header_of("caps"));
      for (const auto& r : audit.rows)
        t.add({r.j, static_cast<std::int64_t>(r.count), r.k0 ? json(*r.k0) : json(nullptr), json_number(r.bound),
               json_number(r.ratio)});
      text = render(t, format);
      if (!audit.cmax_ok) err << "warning: populated class with 2^j >= K/delta\n";
      if (!dump_caps.empty()) {
        json arr = json::array();
        const double mean = decomp.mean_count();
        for (const Cap& c : decomp.caps)
          arr.push_back({{"id", c.id},
                         {"center", vec_json(c.center)},
                         {"normal", vec_json(c.normal)},
                         {"N_theta", c.n_theta()},
                         {"class", c.n_theta() > 0 ? json(cap_class(c.n_theta(), mean)) : json(nullptr)}});
        write_text(dump_caps, dump_json(arr));
      }
    } else if (name == "gon") {
      const QuadraticForm q = form();
      const double l = parse_real("lambda", lambda_s);
      const CapDecomposition decomp = decompose(q, l, delta.at(l));
      json arr = json::array();
      if (!cap_id_s.empty()) {
        const std::int64_t id = parse_int("cap-id", cap_id_s);
        if (id < 0 || id >= static_cast<std::int64_t>(decomp.caps.size()))
          usage("cap-id", "no cap " + cap_id_s + " (net has " + std::to_string(decomp.caps.size()) + ")");
        arr.push_back(gon_json(analyze_cap(decomp.caps[static_cast<std::size_t>(id)], decomp.spec)));
      } else {
        for (const CapLattice& lat : analyze_caps(decomp)) arr.push_back(gon_json(lat));
      }
      text = dump_json(arr);
      if (format == "csv") usage("format", "gon writes JSON only");
    } else if (name == "knapp" || name == "radial") {
      const QuadraticForm q = form();
      const int d = q.dim();
      const double p = parse_p("p", p_s);
      const int given = !lambda_s.empty() + !n_s.empty() + !n_grid.empty();
      if (given != 1) usage("lambda", "give exactly one of --lambda, --n, --n-grid");
      std::vector<std::int64_t> ns;
      if (!n_s.empty()) ns.push_back(parse_int("n", n_s));
      for (double v : n_grid.empty() ? std::vector<double>{} : parse_grid("n-grid", n_grid)) {
        if (v != std::floor(v)) usage("n-grid", "values must be integers");
        ns.push_back(static_cast<std::int64_t>(v));
      }
      for (auto n : ns)
        if (n < 1) usage(n_s.empty() ? "n-grid" : "n", "n must be >= 1");
      Table t(header_of("knapp / radial"));
      if (name == "knapp") {
        if (!(c_const > 0.0)) usage("c", "must be positive");
        if (!lambda_s.empty()) {
          const double l = parse_real("lambda", lambda_s);
          const AxisPoint ax = find_axis_lambda(q, 1);
          const double h = l * ax.xi0[static_cast<std::size_t>(d - 1)];
          if (std::abs(h - std::round(h)) > 1e-9 || h < 0.5) usage("lambda", "lambda xi0^d must be a positive integer");
          ns.push_back(std::llround(h));
        }
        for (auto n : ns) {
          KnappSpec spec = make_knapp_spec(q, n, taper == "fejer" ? Taper::FejerProduct : Taper::SharpIndicator);
          spec.c = c_const;
          const double l = find_axis_lambda(q, n).lambda;
          const double dl = delta.at(l);
          const KnappResult r = knapp_coefficients(q, l, dl, spec);
          if (r.dropped > 0) err << "warning: dropped " << r.dropped << " cuboid points outside the shell\n";
          if (r.empty_cuboid) err << "warning: empty cuboid at n=" << n << ", using the nearest point\n";
          t.add(to_cells(norm_row_fields(r.coeffs, p, l, dl, knapp_predicted_ratio(d, p, l, dl))));
        }
      } else {
        if (optimize && ns.empty()) usage("optimize-lambda", "requires --n or --n-grid");
        std::vector<double> lambdas;
        if (!lambda_s.empty()) lambdas.push_back(parse_real("lambda", lambda_s));
        for (auto n : ns) lambdas.push_back(static_cast<double>(n));
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
          double l = lambdas[i];
          if (optimize) l = optimize_radial_lambda(q, ns[i], delta.at(l));
          const double dl = delta.at(l);
          const RadialResult r = radial_coefficients(q, l, dl);
          if (r.empty_shell) err << "warning: empty shell at lambda=" << format_double(l) << "\n";
          const double sigma = d - 1 - 2.0 * d * (std::isinf(p) ? 0.0 : 1.0 / p);
          t.add(to_cells(norm_row_fields(r.coeffs, p, l, dl, std::pow(l, sigma / 2.0) * std::sqrt(dl))));
        }
      }
      text = render(t, format);
    } else if (name == "opnorm") {
      const QuadraticForm q = form();
      const double l = parse_real("lambda", lambda_s);
      const double dl = delta.at(l);
      const double p = parse_p("p", p_s);
      std::vector<Family> fams;
      try {
        fams = parse_families(families);
      } catch (const Error& e) {
        usage("families", e.what());
      }
      const OpNormLower res = opnorm_lower(q, l, dl, p, fams);
      Table t(header_of("opnorm"));
      for (const auto& r : res.rows)
        t.add({l, dl, p_json(p), to_string(r.family), json_number(r.ratio), to_string(r.method), r.error_bound});
      text = render(t, format);
    } else if (name == "bounds") {
      const double l = parse_real("lambda", lambda_s);
      const double p = parse_p("p", p_s);
      if (bd < 2) usage("d", "must be >= 2");
      if (!(p >= 2.0)) usage("p", "must be >= 2");
      if (!(l > 1.0)) usage("lambda", "must be > 1");
      const double dl = delta.at(l);
      if (l * dl < 1.0) usage(delta.delta.empty() ? "delta-exp" : "delta", "conjecture needs delta >= 1/lambda");
      const BoundReport r = bound_report(bd, p, l, dl, epsilon);
      text = dump_json(bound_json(r, variant == "full" ? Variant::Full : Variant::Simple));
      if (format == "csv") usage("format", "bounds writes JSON only");
    } else if (name == "sweep-bounds") {
      const auto ds = parse_list("d-list", d_list);
      const auto ps = parse_list("p-list", p_list);
      const auto ls = parse_grid("lambda-grid", lambda_grid);
      const auto ts = parse_list("delta-exp-list", delta_exp_list);
      for (double d : ds)
        if (d != std::floor(d) || d < 2 || d > 8) usage("d-list", "dimensions must be integers in 2..8");
      for (double p : ps)
        if (!(p >= 2.0)) usage("p-list", "p must be >= 2");
      for (double l : ls)
        if (!(l > 1.0)) usage("lambda-grid", "lambda must be > 1");
      const Variant v = variant == "full" ? Variant::Full : Variant::Simple;
      Table t(header_of("sweep-bounds"));
      for (double dd : ds)
        for (double p : ps)
          for (double l : ls)
            for (double tt : ts) {
              const int d = static_cast<int>(dd);
              const double dl = std::pow(l, tt);
              json conj = nullptr, dom = nullptr, thm = nullptr;
              if (l * dl >= 1.0 - 1e-12) {
                const ConjectureValue c = conjecture_rhs(d, p, l, dl);
                conj = c.value;
                dom = to_string(c.dominant);
              }
              try {
                thm = thm_main_rhs(d, p, l, dl, v, epsilon);
              } catch (const Error& e) {
                if (e.kind() != ErrorKind::RangeViolation) throw;
              }
              const Coverage cov = coverage(d, p, l, dl);
              t.add({d, p_json(p), l, dl, conj, dom, thm, theorem_list(cov.covered), cov.landau_ok});
            }
      text = render(t, format);
    } else if (name == "sweep-norm") {
      const QuadraticForm q = form();
      const auto ps = parse_list("p-list", p_list);
      const auto ls = parse_grid("lambda-grid", lambda_grid);
      const auto ts = parse_list("delta-exp-list", delta_exp_list);
      for (double p : ps)
        if (!(p >= 2.0)) usage("p-list", "p must be >= 2");
      std::vector<Family> fams;
      try {
        fams = parse_families(families);
      } catch (const Error& e) {
        usage("families", e.what());
      }
      Table t(header_of("sweep-norm"));
      for (double l : ls)
        for (double tt : ts) {
          const double dl = std::pow(l, tt);
          if (!(dl < l) || !(l > 1.0)) usage("lambda-grid", "need lambda > 1 and delta < lambda");
          for (double p : ps) {
            const OpNormLower res = opnorm_lower(q, l, dl, p, fams);
            const double conj = conjecture_rhs(q.dim(), p, l, dl).value;
            for (const auto& r : res.rows)
              t.add({q.dim(), l, dl, p_json(p), to_string(r.family), json_number(r.ratio), to_string(r.method),
                     r.error_bound, conj, json_number(r.ratio / conj)});
          }
        }
      text = render(t, format);
    } else if (name == "schemas") {
      text = schemas_markdown();
    }

    if (common.output.empty())
      out << text;
    else
      write_text(common.output, text);

    const std::string meta_path = !common.meta.empty() ? common.meta
                                  : common.output.empty() || name == "schemas" ? std::string()
                                                                               : common.output + ".meta.json";
    if (!meta_path.empty()) {
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      json meta = {{"version", kVersion},
                   {"command", name},
                   {"config_hash", config_hash(args)},
                   {"threads", used_threads == 0 ? max_threads() : used_threads},
                   {"wall_time_seconds", wall},
                   {"timestamp", utc_timestamp()}};
      write_text(meta_path, dump_json(meta));
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    set_threads(0);
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    set_threads(0);
    if (is_resource_error(e.kind())) return 3;
    return e.kind() == ErrorKind::IoError ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    set_threads(0);
    return 1;
  }
  set_threads(0);
  return 0;
}

}  // namespace shellcap::cli
