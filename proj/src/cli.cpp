#include "latkit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "latkit/corpus.hpp"
#include "latkit/enumerate.hpp"
#include "latkit/errors.hpp"
#include "latkit/gaussian.hpp"
#include "latkit/io.hpp"
#include "latkit/stability.hpp"
#include "latkit/verify.hpp"
#include "latkit/voronoi.hpp"

namespace latkit {

namespace {

using nlohmann::json;

struct Config {
  std::string lattice;
  std::string output;
  std::string format = "json";
  std::string suite = "all";
  std::string outdir = "corpus";
  std::string center;
  double s = 1;
  double radius = 1;
  double eps = 1e-9;
  double tol = 1e-6;
  double target = 1.5;
  double tau = 1;
  std::optional<double> l_n;
  std::uint64_t samples = 100'000;
  std::uint64_t trials = 2000;
  std::uint64_t seed = 0;
  std::uint64_t budget = SearchOptions{}.budget;
  std::size_t max_points = 10'000;
  int n = 2;
  int threads = 0;
  bool normalize = false;
  bool count_only = false;
};

struct Outcome {
  json result;
  int code = kExitOk;
};

json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::vector<double> parse_center(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw InvalidInput("");
    } catch (const std::exception&) {
      throw InvalidInput("malformed --center entry '" + item + "'");
    }
  }
  return out;
}

json witness_json(const SublatticeWitness& w) {
  json rows = json::array();
  for (std::size_t i = 0; i < w.coefficients.rows(); ++i) {
    json r = json::array();
    for (std::size_t j = 0; j < w.coefficients.cols(); ++j) r.push_back(w.coefficients(i, j).get_str());
    rows.push_back(r);
  }
  json j = {{"rank", w.rank}, {"det", num(w.det())}, {"log_det", num(w.log_det)}, {"coefficients", rows}};
  if (w.gram_det) j["det_squared"] = to_string(*w.gram_det);
  return j;
}

json mass_json(const MassInterval& m) {
  return {{"s", m.s},
          {"lower", m.lower},
          {"upper", m.upper},
          {"log_lower_excess", num(m.log_lower_excess)},
          {"log_upper_excess", num(m.log_upper_excess)},
          {"truncation_radius", m.truncation_radius},
          {"terms", m.terms}};
}

SearchOptions search_options(const Config& c) {
  SearchOptions o;
  o.budget = c.budget;
  return o;
}

Outcome cmd_enum(const LatticeBasis& b, const Config& c) {
  const std::vector<double> center = parse_center(c.center);
  if (!center.empty() && center.size() != b.ambient_dim()) throw InvalidInput("--center has the wrong dimension");
  const std::uint64_t count = count_points_in_ball(b, c.radius, center);
  json r = {{"lattice", b.name()}, {"radius", c.radius}, {"count", count}};
  if (!center.empty()) r["center"] = center;
  if (!c.count_only) {
    json pts = json::array();
    if (count <= c.max_points) {
      BallQuery q;
      q.radius = c.radius;
      q.center = center;
      for (const LatticePoint& p : points_in_ball(b, q).points)
        pts.push_back({{"coefficients", p.coefficients}, {"coordinates", p.coordinates}, {"dist_sq", p.dist_sq}});
    }
    r["points"] = pts;
    r["truncated"] = count > c.max_points;
  }
  return {r};
}

Outcome cmd_theta(const LatticeBasis& b, const Config& c) {
  const std::vector<double> center = parse_center(c.center);
  const MassInterval m = center.empty() ? gaussian_mass(b, c.s, c.eps) : shifted_mass(b, center, c.s, c.eps);
  json r = mass_json(m);
  r["lattice"] = b.name();
  r["eps"] = c.eps;
  if (!center.empty()) r["center"] = center;
  return {r};
}

Outcome cmd_eta(const LatticeBasis& b, const Config& c) {
  const SmoothingResult e = smoothing_parameter(b, c.target, c.tol);
  const CertifiedValue ed = eta_det(b, search_options(c));
  const double t = rm_parameter(b.rank());
  json r = {{"lattice", b.name()},
            {"target", e.target},
            {"eta_star", e.eta_star},
            {"lo", e.lo},
            {"hi", e.hi},
            {"eta_det", ed.value},
            {"eta_det_certified", ed.certified},
            {"t", t}};
  return {r, ed.certified ? kExitOk : kExitBudget};
}

Outcome cmd_stable(const LatticeBasis& b, const Config& c) {
  const CanonicalPlot plot = canonical_plot(b, search_options(c));
  const StabilityCertificate st = is_stable(b, plot);
  json r = {{"lattice", b.name()},
            {"stable", st.stable},
            {"det_one", st.det_one_check},
            {"certified", st.search_certified}};
  r["witness"] = st.failing_witness ? witness_json(*st.failing_witness) : json(nullptr);
  return {r, st.search_certified ? kExitOk : kExitBudget};
}

Outcome cmd_filtration(const LatticeBasis& b, const Config& c) {
  const CanonicalPlot plot = canonical_plot(b, search_options(c));
  const FiltrationChain f = canonical_filtration(b, plot);
  json pts = json::array();
  for (std::size_t k = 0; k < plot.min_log_det.size(); ++k)
    pts.push_back({{"rank", k}, {"log_det", num(plot.min_log_det[k])}, {"certified", bool(plot.certified[k])}});
  json chain = json::array();
  for (std::size_t i = 0; i < f.chain.size(); ++i) {
    json w = witness_json(f.chain[i]);
    if (i > 0) {
      w["scale"] = f.scales[i - 1];
      w["slope"] = f.slopes[i - 1];
    }
    chain.push_back(w);
  }
  json r = {{"lattice", b.name()},
            {"vertices", hull_vertices(b, plot)},
            {"plot", pts},
            {"chain", chain},
            {"nested", f.nested},
            {"certified", f.certified}};
  return {r, f.certified ? kExitOk : kExitBudget};
}

Outcome cmd_voronoi(const LatticeBasis& b, const Config& c) {
  const VoronoiCell cell = relevant_vectors(b);
  json vecs = json::array();
  for (std::size_t i = 0; i < cell.relevant.size(); ++i)
    vecs.push_back({{"coefficients", cell.coefficients[i]}, {"coordinates", cell.relevant[i]}, {"norm_sq", cell.norm_sq[i]}});
  const MonteCarloEstimate g = gamma_voronoi(cell, c.s, c.samples, c.seed);
  const MonteCarloEstimate m = second_moment(b, c.samples, c.seed);
  json r = {{"lattice", b.name()},
            {"relevant_count", cell.relevant.size()},
            {"relevant", vecs},
            {"complete", cell.complete},
            {"gamma", {{"s", c.s}, {"mean", g.mean}, {"std_error", g.std_error}}},
            {"second_moment", {{"mean", m.mean}, {"std_error", m.std_error}}},
            {"seed", c.seed},
            {"samples", c.samples}};
  return {r};
}

Outcome cmd_covering(const LatticeBasis& b, const Config& c) {
  const CoveringRadius mu = covering_radius(b, c.seed + 1);
  const CertifiedValue md = mu_det(b, search_options(c));
  json r = {{"lattice", b.name()},     {"lower", mu.lower},   {"upper", mu.upper},
            {"exact", mu.exact},       {"mu_det", md.value},  {"mu_det_certified", md.certified},
            {"seed", c.seed}};
  return {r, md.certified ? kExitOk : kExitBudget};
}

Outcome cmd_verify(const LatticeBasis& b, const Config& c) {
  VerifyOptions o;
  o.eps = std::min(c.eps, 1e-12);
  o.search = search_options(c);
  o.normalize = c.normalize;
  o.samples = c.samples;
  o.seed = c.seed;
  try {
    const VerificationReport rep = verify_suite(b, c.suite, o, c.l_n);
    json r = report_to_json(rep);
    r["suite"] = c.suite;
    r["normalized"] = c.normalize;
    const int code = !rep.passed() ? (rep.inconclusive() && std::none_of(rep.checks.begin(), rep.checks.end(),
                                                                         [](const Check& k) {
                                                                           return !k.conditional &&
                                                                                  k.status == CheckStatus::fail;
                                                                         })
                                          ? kExitBudget
                                          : kExitCheckFailed)
                                   : kExitOk;
    return {r, code};
  } catch (const PremiseNotMet& e) {
    json r = {{"lattice_name", b.name()},
              {"suite", c.suite},
              {"passed", false},
              {"premise_not_met", {{"message", e.what()}, {"witness_det", e.witness_det}, {"witness_rank", e.witness_rank}}}};
    return {r, kExitCheckFailed};
  }
}

Outcome cmd_random(const Config& c) {
  if (c.n != 2) throw InvalidInput("only n = 2 is supported: exact sampling from the invariant measure");
  const SiegelStats s = siegel_experiment(c.radius, c.trials, c.seed);
  json r = report_to_json(s.report);
  r["n"] = c.n;
  r["trials"] = c.trials;
  return {r, s.report.passed() ? kExitOk : kExitCheckFailed};
}

Outcome cmd_corpus(const Config& c) {
  json files = json::array();
  for (const auto& p : corpus_generate(c.outdir)) files.push_back(p.string());
  return {{{"outdir", c.outdir}, {"files", files}}};
}

// ---- table view ----

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v.get<double>());
    return buf;
  }
  return v.dump();
}

void flatten(const json& v, const std::string& path, std::vector<std::pair<std::string, std::string>>& out) {
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) flatten(it.value(), path.empty() ? it.key() : path + "." + it.key(), out);
  } else if (v.is_array() && std::any_of(v.begin(), v.end(), [](const json& e) { return e.is_structured(); })) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], path + "[" + std::to_string(i) + "]", out);
  } else if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : " ") + scalar_text(e);
    out.emplace_back(path, s);
  } else {
    out.emplace_back(path, scalar_text(v));
  }
}

void print_rows(std::ostream& os, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (w.size() <= i) w.push_back(0);
      w[i] = std::max(w[i], r[i].size());
    }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size()) line += std::string(w[i] - r[i].size() + 2, ' ');
    }
    os << line << "\n";
  }
}

void print_table(std::ostream& os, const json& result) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, std::string>> flat;
  json rest = result;
  if (result.contains("checks")) rest.erase("checks");
  flatten(rest, "", flat);
  for (const auto& [k, v] : flat) rows.push_back({k, v});
  print_rows(os, rows);
  if (!result.contains("checks")) return;
  os << "\n";
  rows = {{"check", "status", "lhs", "rel", "rhs", "scale", "method", "conditional"}};
  auto interval = [](const json& a) {
    const std::string lo = scalar_text(a[0]), hi = scalar_text(a[1]);
    return lo == hi ? lo : "[" + lo + ", " + hi + "]";
  };
  for (const auto& c : result["checks"])
    rows.push_back({c["name"].get<std::string>(), c["status"].get<std::string>(), interval(c["lhs"]),
                    c["relation"].get<std::string>(), interval(c["rhs"]), c["scale"].get<std::string>(),
                    c["method"].get<std::string>(), c["conditional"].get<bool>() ? "yes" : "no"});
  print_rows(os, rows);
}

void emit(const json& result, const Config& c, std::ostream& out) {
  std::ostringstream os;
  if (c.format == "table") {
    print_table(os, result);
  } else {
    os << result.dump(2) << "\n";
  }
  if (c.output.empty()) {
    out << os.str();
    return;
  }
  std::ofstream f(c.output);
  if (!f) throw LatkitError("cannot write " + c.output);
  f << os.str();
}

json error_json(const std::string& kind, const std::string& message) { return {{"error", kind}, {"message", message}}; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Lattice toolkit: enumeration, Gaussian masses, stability, Voronoi cells, verification reports", "latkit"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all");

  auto common = [&](CLI::App* sub, bool needs_lattice) {
    if (needs_lattice) sub->add_option("--lattice", c.lattice, "lattice JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--output", c.output, "write the result here instead of stdout");
    sub->add_option("--format", c.format, "json or table")->check(CLI::IsMember({"json", "table"}));
    sub->add_option("--threads", c.threads, "worker threads (LATKIT_THREADS takes precedence)")
        ->check(CLI::PositiveNumber);
  };
  auto budget = [&](CLI::App* sub) {
    sub->add_option("--budget", c.budget, "candidate budget of the sublattice search")->check(CLI::PositiveNumber);
  };
  auto seeded = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--samples", c.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
  };

  CLI::App* en = app.add_subcommand("enum", "lattice points in a ball");
  common(en, true);
  en->add_option("--radius", c.radius, "ball radius")->required()->check(CLI::PositiveNumber);
  en->add_option("--center", c.center, "comma-separated center");
  en->add_option("--max-points", c.max_points, "list points only up to this count");
  en->add_flag("--count-only", c.count_only, "print only the count");

  CLI::App* th = app.add_subcommand("theta", "certified Gaussian mass rho_s(L)");
  common(th, true);
  th->add_option("--s", c.s, "Gaussian parameter")->required()->check(CLI::PositiveNumber);
  th->add_option("--eps", c.eps, "relative width")->check(CLI::PositiveNumber);
  th->add_option("--center", c.center, "comma-separated shift u for rho_s(L - u)");

  CLI::App* et = app.add_subcommand("eta", "smoothing parameter and eta_det");
  common(et, true);
  budget(et);
  et->add_option("--target", c.target, "mass target")->check(CLI::Range(1.0 + 1e-12, 1e300));
  et->add_option("--tol", c.tol, "bracket width")->check(CLI::PositiveNumber);

  CLI::App* st = app.add_subcommand("stable", "stability certificate");
  common(st, true);
  budget(st);

  CLI::App* fi = app.add_subcommand("filtration", "canonical plot and filtration");
  common(fi, true);
  budget(fi);

  CLI::App* vo = app.add_subcommand("voronoi", "relevant vectors and cell statistics");
  common(vo, true);
  seeded(vo);
  vo->add_option("--s", c.s, "Gaussian parameter for gamma_s(V)")->check(CLI::PositiveNumber);

  CLI::App* co = app.add_subcommand("covering", "covering radius and mu_det");
  common(co, true);
  budget(co);
  co->add_option("--seed", c.seed, "random seed");

  CLI::App* ve = app.add_subcommand("verify", "verification report");
  common(ve, true);
  budget(ve);
  seeded(ve);
  ve->add_option("--suite", c.suite, "all, rm, params, counting, covering or extreme")
      ->check(CLI::IsMember({"all", "rm", "params", "counting", "covering", "extreme"}));
  ve->add_option("--L-n", c.l_n, "slicing constant for the conditional covering check")->check(CLI::PositiveNumber);
  ve->add_option("--eps", c.eps, "relative width of mass enclosures (at most 1e-12 is used)")
      ->check(CLI::PositiveNumber);
  ve->add_flag("--normalize", c.normalize, "rescale to determinant 1 first");

  CLI::App* ra = app.add_subcommand("random", "Siegel mean-value experiment on random 2-D lattices");
  common(ra, false);
  ra->add_option("--n", c.n, "dimension (2)");
  ra->add_option("--trials", c.trials, "number of lattices")->check(CLI::Range(2.0, 1e12));
  ra->add_option("--radius", c.radius, "ball radius")->check(CLI::PositiveNumber);
  ra->add_option("--seed", c.seed, "random seed");

  CLI::App* cp = app.add_subcommand("corpus", "write the bundled test lattices");
  common(cp, false);
  cp->add_option("--out", c.outdir, "output directory");

  // CLI11 consumes the arguments back to front, without the program name
  std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (c.threads > 0 && std::getenv("LATKIT_THREADS") == nullptr)
    setenv("LATKIT_THREADS", std::to_string(c.threads).c_str(), 1);

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    Outcome o;
    if (name == "random") {
      o = cmd_random(c);
    } else if (name == "corpus") {
      o = cmd_corpus(c);
    } else {
      LatticeBasis b;
      try {
        b = read_lattice_file(c.lattice);
      } catch (const LatticeFormatError& e) {
        err << c.lattice;
        if (e.line > 0) err << ":" << e.line << ":" << e.column;
        err << ": " << e.what() << "\n";
        return kExitUsage;
      }
      if (name == "enum") o = cmd_enum(b, c);
      if (name == "theta") o = cmd_theta(b, c);
      if (name == "eta") o = cmd_eta(b, c);
      if (name == "stable") o = cmd_stable(b, c);
      if (name == "filtration") o = cmd_filtration(b, c);
      if (name == "voronoi") o = cmd_voronoi(b, c);
      if (name == "covering") o = cmd_covering(b, c);
      if (name == "verify") o = cmd_verify(b, c);
    }
    emit(o.result, c, out);
    return o.code;
  } catch (const BudgetExceeded& e) {
    json j = error_json("budget_exceeded", e.what());
    if (e.best_interval) j["best_interval"] = {e.best_interval->first, e.best_interval->second};
    emit(j, c, out);
    err << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const Inconclusive& e) {
    emit(error_json("inconclusive", e.what()), c, out);
    err << "inconclusive: " << e.what() << "\n";
    return kExitBudget;
  } catch (const DimensionCap& e) {
    emit(error_json("dimension_cap", e.what()), c, out);
    err << "dimension cap: " << e.what() << "\n";
    return kExitBudget;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidBasis& e) {
    err << "invalid basis: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NotApplicable& e) {
    err << "not applicable: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NotPrimitive& e) {
    err << "not primitive: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitBudget;
  }
}

}  // namespace latkit
