// smci: smallest one-sided confidence limits for two-sample binomial and
// Poisson differences, data-driven orderings, dose-finding, verification.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "smci/barnard.hpp"
#include "smci/engine.hpp"
#include "smci/inversion.hpp"
#include "smci/io.hpp"
#include "smci/med.hpp"
#include "smci/poisson.hpp"
#include "smci/space.hpp"
#include "smci/verify.hpp"

namespace {

namespace eng = smci::engine;
namespace sp = smci::space;
namespace io = smci::io;
using nlohmann::json;

// Scan-resolution flags shared by the computing subcommands.
struct ScanOpts {
  double delta_step = 1e-3;
  int nuisance_points = 1001;
  double tie_tol = -1.0;
  double trunc_mass = 1e-10;

  void attach(CLI::App* cmd) {
    cmd->add_option("--delta-step", delta_step, "Interest grid step")
        ->capture_default_str();
    cmd->add_option("--nuisance-points", nuisance_points,
                    "Points of the per-delta nuisance grid")
        ->capture_default_str();
    cmd->add_option("--tie-tol", tie_tol,
                    "Tie tolerance for merging crossings (negative: use "
                    "--delta-step)")
        ->capture_default_str();
    cmd->add_option("--trunc-mass", trunc_mass,
                    "Tail mass dropped when truncating infinite sums")
        ->capture_default_str();
  }

  eng::ScanConfig config() const {
    eng::ScanConfig c;
    c.delta_step = delta_step;
    c.nuisance_points = nuisance_points;
    c.tie_tol = tie_tol;
    c.trunc_mass = trunc_mass;
    c.validate();
    return c;
  }
};

void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::fputs(content.c_str(), stdout);
  } else {
    io::write_text_atomic(path, content);
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

sp::OrderedPartition resolve_ordering(const std::string& selector, int n,
                                      int m, double alpha) {
  const sp::SampleSpace s(n, m);
  if (selector == "zstat") {
    return sp::partition_from_scores(s, sp::zstat_scores(s));
  }
  if (selector == "asymptotic") {
    return sp::partition_from_scores(s, sp::asymptotic_lower_scores(s, alpha));
  }
  if (selector.rfind("file:", 0) == 0) {
    auto p = io::load_partition(selector.substr(5));
    if (p.n != n || p.m != m) {
      throw std::invalid_argument("ordering file covers a (" +
                                  std::to_string(p.n) + "," +
                                  std::to_string(p.m) +
                                  ") space, not the requested shape");
    }
    return p;
  }
  throw std::invalid_argument(
      "unknown ordering '" + selector +
      "' (expected zstat, asymptotic, barnard or file:<path>)");
}

void self_check(const eng::LowerLimitTable& table) {
  const auto family = eng::binomial_diff_family(table.n, table.m);
  const auto prof = smci::verify::coverage_profile(
      family, table, smci::verify::verification_defaults());
  if (prof.min_coverage < 1.0 - table.alpha - 1e-9) {
    throw std::logic_error(
        "self-check failed: coverage " + std::to_string(prof.min_coverage) +
        " at delta " + std::to_string(prof.argmin_delta) +
        " is below the nominal level");
  }
}

struct TableCmd {
  int n = 0;
  int m = 0;
  double alpha = 0.05;
  std::string ordering = "zstat";
  std::string format = "csv";
  std::string out;
  std::string trace;
  bool no_verify = false;
  ScanOpts scan;

  int run() const {
    const eng::ScanConfig cfg = scan.config();
    eng::LowerLimitTable table;
    std::vector<smci::barnard::BuildStep> steps;
    if (ordering == "barnard") {
      auto build = smci::barnard::build_barnard_partition(n, m, alpha, cfg);
      table = std::move(build.table);
      steps = std::move(build.steps);
    } else {
      if (!trace.empty()) {
        throw std::invalid_argument("--trace requires --ordering barnard");
      }
      const auto family = eng::binomial_diff_family(n, m);
      table = eng::smallest_limits(family,
                                   resolve_ordering(ordering, n, m, alpha),
                                   alpha, cfg);
    }
    if (!no_verify) self_check(table);
    if (!trace.empty()) io::write_text_atomic(trace, io::trace_to_csv(steps));
    emit(out, format == "json" ? dump(io::table_to_json(table))
                               : io::table_to_csv(table));
    return 0;
  }
};

struct BarnardTraceCmd {
  int n = 0;
  int m = 0;
  double alpha = 0.05;
  std::string out;
  std::string partition_out;
  ScanOpts scan;

  int run() const {
    auto build =
        smci::barnard::build_barnard_partition(n, m, alpha, scan.config());
    if (!partition_out.empty()) {
      io::write_text_atomic(partition_out,
                            dump(io::partition_to_json(build.partition)));
    }
    emit(out, io::trace_to_csv(build.steps));
    return 0;
  }
};

struct MedCmd {
  std::string study_path;
  double delta = 0.0;
  double alpha = 0.05;
  bool delta_given = false;
  bool alpha_given = false;
  std::string out;
  ScanOpts scan;

  int run() const {
    smci::med::DoseStudy study = io::load_study(study_path);
    if (delta_given) study.delta = delta;
    if (alpha_given) study.alpha = alpha;
    const auto result = smci::med::step_down_med(study, scan.config());
    emit(out, dump(io::med_result_to_json(result, study)));
    return 0;
  }
};

struct PoissonCmd {
  int x = 0;
  int y = 0;
  double alpha = 0.05;
  std::string out;
  ScanOpts scan;

  int run() const {
    const auto report =
        smci::poisson::improved_report(x, y, alpha, scan.config());
    emit(out, dump(io::poisson_report_to_json(report)));
    return 0;
  }
};

struct VerifyCmd {
  std::string table_path;
  std::string fwer_study;
  double alpha = 0.05;
  bool alpha_given = false;
  bool maximality = false;
  double bump = 0.0;
  bool bump_given = false;
  std::vector<double> probs;
  double control_prob = 0.0;
  std::uint64_t reps = 100000;
  std::uint64_t seed = 1;
  std::string out;
  ScanOpts scan{5e-4, 2001, -1.0, 1e-10};  // verification grid defaults

  int run() const {
    if (table_path.empty() == fwer_study.empty()) {
      throw std::invalid_argument(
          "pass exactly one of --table or --fwer-study");
    }
    const eng::ScanConfig cfg = scan.config();
    if (!fwer_study.empty()) {
      auto study = io::load_study(fwer_study);
      if (alpha_given) study.alpha = alpha;
      const auto est = smci::verify::fwer_simulate(study, probs, control_prob,
                                                   reps, seed, cfg);
      emit(out, dump(io::fwer_to_json(est)));
      return 0;
    }

    const auto table = io::load_table(table_path);
    const double a = alpha_given ? alpha : table.alpha;
    if (std::isnan(a)) {
      throw std::invalid_argument(
          "--alpha required: the table file does not carry one");
    }
    const auto family = eng::binomial_diff_family(table.n, table.m);
    const double floor = 1.0 - a - 1e-9;
    const auto prof = smci::verify::coverage_profile(family, table, cfg);
    const bool covered = prof.min_coverage >= floor;

    json report = io::coverage_report_to_json(prof, floor);
    json verdicts = json::array();
    verdicts.push_back({{"check", "coverage"}, {"ok", covered}});
    const auto cc = smci::verify::check_c_condition(table);
    json cc_pairs = json::array();
    for (const auto& [za, zb] : cc.violations) {
      cc_pairs.push_back(
          {json::array({za.x, za.y}), json::array({zb.x, zb.y})});
    }
    verdicts.push_back({{"check", "c_condition"},
                        {"ok", cc.ok},
                        {"violations", std::move(cc_pairs)}});
    bool maximal = true;
    if (maximality) {
      const double use_bump = bump_given ? bump : 2.0 * cfg.delta_step;
      maximal = smci::verify::maximality_check(family, table, table.partition,
                                               a, use_bump, cfg);
      verdicts.push_back({{"check", "maximality"}, {"ok", maximal}});
    }
    report["verdicts"] = std::move(verdicts);
    emit(out, dump(report));
    return covered && maximal ? 0 : 2;
  }
};

struct CompareCmd {
  std::string a_path;
  std::string b_path;
  std::string expect;
  std::string out;

  int run() const {
    const auto a = io::load_table(a_path);
    const auto b = io::load_table(b_path);
    const auto verdict = smci::verify::set_inclusion_compare(a, b);
    emit(out, dump(io::dominance_to_json(verdict)));
    if (!expect.empty() && expect != io::dominance_name(verdict.verdict)) {
      std::fprintf(stderr, "expected verdict %s, got %s\n", expect.c_str(),
                   io::dominance_name(verdict.verdict));
      return 2;
    }
    return 0;
  }
};

// Loads --config (JSON object, keys = long flag names) and appends one
// "--key value" pair for every key not already present on the command
// line, so explicit flags always win.
std::vector<std::string> with_config_defaults(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) return args;

  json cfg;
  try {
    cfg = json::parse(io::read_text(config_path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in " + config_path + ": " +
                                e.what());
  }
  if (!cfg.is_object()) {
    throw std::invalid_argument("config file must hold a JSON object");
  }
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config") continue;
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        present = true;
        break;
      }
    }
    if (present) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_string()) {
      args.push_back(flag);
      args.push_back(value.get<std::string>());
    } else {
      args.push_back(flag);
      args.push_back(value.dump());
    }
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "smci: smallest one-sided confidence limits for differences of "
      "binomial proportions and Poisson means"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(
      "Exit codes: 0 success, 2 invariant or verification failure, 3 "
      "accuracy failure, 64 usage error.\n"
      "A JSON config file (--config) supplies defaults for any long flag "
      "of the invoked subcommand; explicit flags win.");
  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON file with flag defaults (same keys as flags)");

  TableCmd table;
  auto* t = app.add_subcommand("table",
                               "Compute a smallest lower-limit table for an "
                               "ordered partition");
  t->add_option("--n", table.n, "Treatment group size")->required();
  t->add_option("--m", table.m, "Control group size")->required();
  t->add_option("--alpha", table.alpha, "One-sided level is 1 - alpha")
      ->capture_default_str();
  t->add_option("--ordering", table.ordering,
                "zstat | asymptotic | barnard | file:<path>")
      ->capture_default_str();
  t->add_option("--format", table.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  t->add_option("--out", table.out, "Output path (default: stdout)");
  t->add_option("--trace", table.trace,
                "Also write the builder trace CSV (barnard ordering only)");
  t->add_flag("--no-verify", table.no_verify,
              "Skip the coverage self-check before writing");
  table.scan.attach(t);

  BarnardTraceCmd trace;
  auto* bt = app.add_subcommand("barnard-trace",
                                "Run the data-driven ordering builder and "
                                "emit its trace");
  bt->add_option("--n", trace.n, "Treatment group size")->required();
  bt->add_option("--m", trace.m, "Control group size")->required();
  bt->add_option("--alpha", trace.alpha, "One-sided level is 1 - alpha")
      ->capture_default_str();
  bt->add_option("--out", trace.out, "Trace CSV path (default: stdout)");
  bt->add_option("--partition", trace.partition_out,
                 "Also write the resulting partition as JSON");
  trace.scan.attach(bt);

  MedCmd med;
  auto* md = app.add_subcommand("med",
                                "Step-down minimum effective dose from a "
                                "study file");
  md->add_option("--study", med.study_path, "Study CSV or JSON path")
      ->required();
  auto* md_delta =
      md->add_option("--delta", med.delta, "Skip margin (overrides the file)");
  auto* md_alpha = md->add_option("--alpha", med.alpha,
                                  "Familywise level is 1 - alpha (overrides "
                                  "the file)");
  md->add_option("--out", med.out, "Output path (default: stdout)");
  med.scan.attach(md);

  PoissonCmd pois;
  auto* ps = app.add_subcommand("poisson",
                                "Improved lower limit for a difference of "
                                "Poisson means");
  ps->add_option("--x", pois.x, "Signal count")->required();
  ps->add_option("--y", pois.y, "Background count")->required();
  ps->add_option("--alpha", pois.alpha, "One-sided level is 1 - alpha")
      ->capture_default_str();
  ps->add_option("--out", pois.out, "Output path (default: stdout)");
  pois.scan.attach(ps);

  VerifyCmd ver;
  auto* vf = app.add_subcommand("verify",
                                "Check a table's coverage (or run a FWER "
                                "simulation)");
  vf->add_option("--table", ver.table_path, "Table CSV or JSON to verify");
  auto* vf_alpha = vf->add_option("--alpha", ver.alpha,
                                  "Nominal level override (required for CSV "
                                  "tables)");
  vf->add_flag("--maximality", ver.maximality,
               "Also check that no block limit can be raised");
  auto* vf_bump = vf->add_option("--bump", ver.bump,
                                 "Raise amount for the maximality check "
                                 "(default: 2 * delta-step)");
  vf->add_option("--fwer-study", ver.fwer_study,
                 "Study file defining arm sizes, delta and alpha for a "
                 "familywise error simulation");
  vf->add_option("--p", ver.probs,
                 "True per-dose response probabilities (FWER mode)");
  vf->add_option("--p0", ver.control_prob,
                 "True control response probability (FWER mode)");
  vf->add_option("--reps", ver.reps, "Monte-Carlo replicates")
      ->capture_default_str();
  vf->add_option("--seed", ver.seed, "Simulation seed")->capture_default_str();
  vf->add_option("--out", ver.out, "Output path (default: stdout)");
  ver.scan.attach(vf);

  CompareCmd cmp;
  auto* cp = app.add_subcommand("compare",
                                "Set-inclusion comparison of two tables");
  cp->add_option("--a", cmp.a_path, "First table (CSV or JSON)")->required();
  cp->add_option("--b", cmp.b_path, "Second table (CSV or JSON)")->required();
  cp->add_option("--expect", cmp.expect, "Fail (exit 2) unless the verdict "
                                         "matches")
      ->check(CLI::IsMember(
          {"equal", "A_dominates", "B_dominates", "incomparable"}));
  cp->add_option("--out", cmp.out, "Output path (default: stdout)");

  try {
    const std::vector<std::string> args = with_config_defaults(argc, argv);
    std::vector<const char*> cargv;
    cargv.push_back(argv[0]);
    for (const auto& a : args) cargv.push_back(a.c_str());
    app.parse(static_cast<int>(cargv.size()), cargv.data());

    med.delta_given = md_delta->count() > 0;
    med.alpha_given = md_alpha->count() > 0;
    ver.alpha_given = vf_alpha->count() > 0;
    ver.bump_given = vf_bump->count() > 0;

    if (app.got_subcommand(t)) return table.run();
    if (app.got_subcommand(bt)) return trace.run();
    if (app.got_subcommand(md)) return med.run();
    if (app.got_subcommand(ps)) return pois.run();
    if (app.got_subcommand(vf)) return ver.run();
    if (app.got_subcommand(cp)) return cmp.run();
    return 64;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 64;
  } catch (const smci::poisson::accuracy_error& e) {
    std::fprintf(stderr, "accuracy failure: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 64;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 64;
  } catch (const std::logic_error& e) {
    std::fprintf(stderr, "invariant failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
