#include "qlab/cli.hpp"

#include "qlab/channels.hpp"
#include "qlab/fidelity.hpp"
#include "qlab/io.hpp"
#include "qlab/parallel.hpp"
#include "qlab/products.hpp"
#include "qlab/quantumness.hpp"
#include "qlab/samples.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

namespace qlab::cli {

namespace {

using io::Json;

struct Common {
  std::uint64_t seed = 0;
  std::string json_path;
};

struct FidelityOptions {
  std::string input;
  int outcomes = 0;
  int restarts = 16;
  int rounds = 40;
  int probes = 100000;
  bool allow_nonspanning = false;
};

struct QuantumnessOptions {
  std::string input;
  int starts = 4;
  int max_evaluations = 80;
  bool allow_nonspanning = false;
};

struct VerifyOptions {
  std::string suite;
  int trials = 10;
  std::optional<std::uint64_t> replay;
  std::string csv_path;
  std::string ensemble1;
  std::string ensemble2;
  std::string joint;
  bool with_quantumness = false;
  std::optional<double> tolerance;
};

struct NuInfOptions {
  std::string input;
  int restarts = 32;
  bool no_grid = false;
};

// Output paths do not belong in the report: reruns writing elsewhere must
// produce identical bytes.
Json command_echo(const std::vector<std::string>& args) {
  Json echo = Json::array();
  for (std::size_t k = 0; k < args.size(); ++k) {
    const std::string& a = args[k];
    if (a == "--json" || a == "--csv") {
      ++k;
      continue;
    }
    if (a.rfind("--json=", 0) == 0 || a.rfind("--csv=", 0) == 0) continue;
    echo.push_back(a);
  }
  return echo;
}

Json report_header(const std::vector<std::string>& args, std::uint64_t seed) {
  Json r;
  r["tool"] = "qlab";
  r["version"] = QLAB_VERSION;
  r["command"] = command_echo(args);
  r["seed"] = seed;
  return r;
}

void emit(const Json& report, const std::string& path, const std::string& summary, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError(path + ": cannot write report");
  f << text;
  out << summary << "\n";
}

Json bracket_json(const FidelityBracket& b) {
  Json j;
  j["lower"] = b.lower;
  j["upper"] = b.upper;
  j["width"] = b.width();
  return j;
}

int cmd_fidelity(const FidelityOptions& o, const Common& c, const std::vector<std::string>& args, std::ostream& out) {
  const Ensemble e = io::load_ensemble(o.input);
  FidelityConfig cfg;
  cfg.seesaw.outcomes = o.outcomes;
  cfg.seesaw.restarts = o.restarts;
  cfg.certificate.max_rounds = o.rounds;
  cfg.certificate.random_probes = o.probes;
  cfg.certificate.require_spanning = !o.allow_nonspanning;
  const FidelityBracket b = accessible_fidelity(e, cfg, c.seed);

  Json report = report_header(args, c.seed);
  Json config;
  config["outcomes"] = o.outcomes == 0 ? e.dim() * e.dim() : o.outcomes;
  config["restarts"] = o.restarts;
  config["max_rounds"] = o.rounds;
  config["random_probes"] = o.probes;
  config["verify_restarts"] = cfg.certificate.verify_restarts;
  config["violation_tolerance"] = cfg.certificate.violation_tolerance;
  config["require_spanning"] = cfg.certificate.require_spanning;
  report["config"] = config;
  Json results = bracket_json(b);
  results["ensemble"] = io::to_json(e);
  results["strategy"] = io::to_json(b.strategy);
  results["strategy_fidelity"] = intercept_resend_fidelity(e, b.strategy);
  results["certificate"] = io::to_json(b.certificate);
  report["results"] = results;
  emit(report, c.json_path,
       "fidelity: lower " + io::format_double(b.lower) + " upper " + io::format_double(b.upper), out);
  if (b.lower > b.upper + 1e-8) throw NumericError("fidelity: lower bound exceeds the certified upper bound");
  return kPass;
}

int cmd_quantumness(const QuantumnessOptions& o, const Common& c, const std::vector<std::string>& args,
                    std::ostream& out) {
  const Ensemble e = io::load_ensemble(o.input);
  QuantumnessConfig cfg;
  cfg.starts = o.starts;
  cfg.max_evaluations = o.max_evaluations;
  cfg.search.certificate.require_spanning = !o.allow_nonspanning;
  cfg.final.certificate.require_spanning = !o.allow_nonspanning;
  const QuantumnessReport q = quantumness(e.states(), cfg, c.seed);
  const ExtremePrior top = max_fidelity_over_priors(e.states(), c.seed);

  Json report = report_header(args, c.seed);
  Json config;
  config["starts"] = o.starts;
  config["max_evaluations"] = o.max_evaluations;
  config["tolerance"] = cfg.tolerance;
  config["require_spanning"] = !o.allow_nonspanning;
  report["config"] = config;
  Json results;
  results["value_lower"] = q.value_lower;
  results["value_upper"] = q.value_upper;
  results["worst_prior"] = q.worst_prior;
  results["worst_bracket"] = bracket_json(q.worst_bracket);
  Json maxj;
  maxj["value"] = top.value;
  maxj["prior"] = top.prior;
  results["max_over_priors"] = maxj;
  Json trace = Json::array();
  for (const PriorProbe& p : q.trace) {
    Json t;
    t["prior"] = p.prior;
    t["lower"] = p.lower;
    t["upper"] = p.upper;
    trace.push_back(t);
  }
  results["trace"] = trace;
  report["results"] = results;
  emit(report, c.json_path,
       "quantumness: lower " + io::format_double(q.value_lower) + " upper " + io::format_double(q.value_upper), out);
  if (q.value_lower > q.value_upper + 1e-8) throw NumericError("quantumness: lower bound exceeds upper bound");
  return kPass;
}

int cmd_nu_inf(const NuInfOptions& o, const Common& c, const std::vector<std::string>& args, std::ostream& out) {
  const CpMap m = io::load_channel(o.input);
  NuInfConfig cfg;
  cfg.restarts = o.restarts;
  cfg.bloch_grid = !o.no_grid;
  const NuInfReport r = nu_infinity(m, cfg, c.seed);
  if (!std::isfinite(r.value)) throw NumericError("nu-inf: the maximal output norm is not finite");

  Json report = report_header(args, c.seed);
  Json config;
  config["restarts"] = o.restarts;
  config["bloch_grid"] = cfg.bloch_grid;
  config["max_iterations"] = cfg.max_iterations;
  config["relative_tolerance"] = cfg.relative_tolerance;
  report["config"] = config;
  Json results;
  results["value"] = r.value;
  results["argmax_state"] = io::to_json(r.argmax_state);
  results["restarts_used"] = r.restarts_used;
  results["best_per_restart"] = r.best_per_restart;
  report["results"] = results;
  emit(report, c.json_path, "nu_inf: " + io::format_double(r.value), out);
  return kPass;
}

struct TrialOutcome {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  Json details;
};

using TrialFn = std::function<TrialOutcome(std::uint64_t)>;

std::vector<PureState> qubit_states(int n, Rng& rng) {
  std::vector<PureState> s;
  for (int i = 0; i < n; ++i) s.push_back(random_pure_state(2, rng));
  return s;
}

TrialFn make_trial(const VerifyOptions& o) {
  std::optional<Ensemble> e1;
  std::optional<Ensemble> e2;
  if (!o.ensemble1.empty() || !o.ensemble2.empty()) {
    if (o.ensemble1.empty() || o.ensemble2.empty()) throw InputError("verify: --ensemble1 and --ensemble2 go together");
    e1 = io::load_ensemble(o.ensemble1);
    e2 = io::load_ensemble(o.ensemble2);
  }
  std::optional<io::JointFile> joint;
  if (!o.joint.empty()) joint = io::load_joint(o.joint);
  if (o.tolerance && o.suite != "lemma-eb") throw InputError("verify: --tolerance applies to lemma-eb only");

  if (o.suite == "thm1") {
    return [e1, e2](std::uint64_t seed) {
      Rng rng(derive_seed(seed, 0));
      const Ensemble a = e1 ? *e1 : random_ensemble(2, 2, 3, rng);
      const Ensemble b = e2 ? *e2 : random_ensemble(2, 2, 3, rng);
      const Thm1Report r = verify_thm1(a, b, Thm1Config{}, seed);
      TrialOutcome t;
      t.lhs = r.f12_lower;
      t.rhs = r.f1.upper * r.f2.upper;
      t.gap = t.rhs - t.lhs;
      t.tolerance = Thm1Config{}.tolerance;
      t.pass = r.consistent && r.easy_direction;
      t.details["f1"] = bracket_json(r.f1);
      t.details["f2"] = bracket_json(r.f2);
      t.details["f12_lower"] = r.f12_lower;
      t.details["f12_upper"] = r.f12_upper;
      t.details["easy_direction"] = r.easy_direction;
      t.details["consistent"] = r.consistent;
      return t;
    };
  }
  if (o.suite == "thm2") {
    const bool with_q = o.with_quantumness;
    return [joint, with_q](std::uint64_t seed) {
      Rng rng(derive_seed(seed, 0));
      std::vector<PureState> s1 = joint ? joint->states1 : qubit_states(2, rng);
      std::vector<PureState> s2 = joint ? joint->states2 : qubit_states(2, rng);
      const JointDistribution p = joint ? joint->p : random_joint(2, 2, rng);
      Thm2Config cfg;
      cfg.with_quantumness = with_q;
      const Thm2Report r = verify_thm2(p, s1, s2, cfg, seed);
      TrialOutcome t;
      t.lhs = r.forward.lhs;
      t.rhs = r.forward.rhs_weak;
      t.gap = t.lhs - t.rhs;
      t.tolerance = 1e-9;
      t.pass = r.holds;
      for (const auto& [name, ord] : {std::pair{"forward", &r.forward}, std::pair{"swapped", &r.swapped}}) {
        Json j;
        j["lhs"] = ord->lhs;
        j["rhs_weak"] = ord->rhs_weak;
        j["marginal_value"] = ord->composite.marginal_value;
        j["norms"] = ord->composite.norms;
        j["mixture"] = ord->composite.mixture;
        j["conditional_values"] = ord->composite.conditional_values;
        j["norm_sum_error"] = ord->composite.norm_sum_error;
        j["holds"] = ord->holds;
        t.details[name] = j;
      }
      if (r.q1) {
        t.details["q1"] = {{"lower", r.q1->value_lower}, {"upper", r.q1->value_upper}};
        t.details["q2"] = {{"lower", r.q2->value_lower}, {"upper", r.q2->value_upper}};
        t.details["quantumness_bound"] = *r.quantumness_bound;
      }
      return t;
    };
  }
  if (o.suite == "lemma-eb") {
    const double tolerance = o.tolerance.value_or(1e-5);
    return [tolerance](std::uint64_t seed) {
      Rng rng(derive_seed(seed, 0));
      const CpMap psi = random_holevo_map(2, 2, rng);
      const CpMap omega = random_kraus_map(2, 2, rng);
      const EbMultiplicativityReport r = check_eb_multiplicativity(psi, omega, EbCheckConfig{}, seed);
      TrialOutcome t;
      t.lhs = r.nu12.value;
      t.rhs = r.nu1.value * r.nu2.value;
      t.gap = r.gap;
      t.tolerance = tolerance;
      t.pass = std::abs(r.gap) <= t.tolerance;
      t.details["nu1"] = r.nu1.value;
      t.details["nu2"] = r.nu2.value;
      t.details["nu12"] = r.nu12.value;
      t.details["lower_bound_ok"] = r.lower_bound_ok;
      return t;
    };
  }
  if (o.suite == "lemma-feas") {
    return [e1, e2](std::uint64_t seed) {
      Rng rng(derive_seed(seed, 0));
      const Ensemble a = e1 ? *e1 : random_ensemble(2, 2, 3, rng);
      const Ensemble b = e2 ? *e2 : random_ensemble(2, 2, 3, rng);
      const Certificate x1 = dual_certificate_search(a, CertificateConfig{}, derive_seed(seed, 1));
      const Certificate x2 = dual_certificate_search(b, CertificateConfig{}, derive_seed(seed, 2));
      const ProductFeasibilityReport r = check_feasible_product(a, b, x1, x2, 10000, derive_seed(seed, 3));
      TrialOutcome t;
      t.lhs = r.worst_margin;
      t.rhs = 0.0;
      t.gap = r.worst_margin;
      t.tolerance = 1e-7;
      t.pass = r.feasible;
      t.details["margin1"] = x1.margin;
      t.details["margin2"] = x2.margin;
      t.details["trace1"] = x1.trace();
      t.details["trace2"] = x2.trace();
      t.details["nu_omega1"] = r.nu_omega1;
      t.details["nu_omega2"] = r.nu_omega2;
      t.details["probe_count"] = r.probe_count;
      return t;
    };
  }
  if (o.suite == "appendix") {
    return [](std::uint64_t seed) {
      Rng rng(derive_seed(seed, 0));
      const CpMap psi = random_holevo_map(2, 2, rng);
      const CpMap omega = random_kraus_map(2, 2, rng);
      const HermitianOp tau = random_bipartite_pure(2, 2, rng);
      const AppendixReport r = appendix_chain_check(psi, omega, tau);
      TrialOutcome t;
      t.lhs = r.lhs;
      t.rhs = r.rhs;
      t.gap = r.rhs - r.lhs;
      t.tolerance = 1e-10;
      t.pass = r.holds;
      t.details["terms_kept"] = r.kept.size();
      t.details["reconstruction_error"] = r.reconstruction_error;
      t.details["identity_reconstruction_error"] = r.identity_reconstruction_error;
      t.details["marginal_error"] = r.marginal_error;
      t.details["operator_slack"] = r.operator_slack;
      return t;
    };
  }
  throw InputError("verify: unknown suite '" + o.suite + "' (expected thm1, thm2, lemma-eb, lemma-feas or appendix)");
}

int cmd_verify(const VerifyOptions& o, const Common& c, const std::vector<std::string>& args, std::ostream& out) {
  const TrialFn trial = make_trial(o);
  if (!o.replay && o.trials < 1) throw InputError("verify: --trials must be >= 1");
  std::vector<std::uint64_t> seeds;
  if (o.replay) {
    seeds.push_back(*o.replay);
  } else {
    for (int t = 0; t < o.trials; ++t) seeds.push_back(derive_seed(c.seed, static_cast<std::uint64_t>(t)));
  }
  const std::vector<TrialOutcome> results = parallel_map(seeds.size(), [&](std::size_t k) { return trial(seeds[k]); });

  std::string csv = "suite,trial,seed,lhs,rhs,gap,tolerance,pass\n";
  Json rows = Json::array();
  Json failing = Json::array();
  int passed = 0;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const TrialOutcome& t = results[k];
    csv += o.suite + "," + std::to_string(k) + "," + std::to_string(seeds[k]) + "," + io::format_double(t.lhs) + "," +
           io::format_double(t.rhs) + "," + io::format_double(t.gap) + "," + io::format_double(t.tolerance) + "," +
           (t.pass ? "true" : "false") + "\n";
    Json row;
    row["trial"] = k;
    row["seed"] = seeds[k];
    row["lhs"] = t.lhs;
    row["rhs"] = t.rhs;
    row["gap"] = t.gap;
    row["tolerance"] = t.tolerance;
    row["pass"] = t.pass;
    row["details"] = t.details;
    rows.push_back(row);
    if (t.pass) {
      ++passed;
    } else {
      failing.push_back(seeds[k]);
    }
  }
  if (!o.csv_path.empty()) {
    std::ofstream f(o.csv_path, std::ios::binary);
    if (!f) throw InputError(o.csv_path + ": cannot write CSV");
    f << csv;
  }

  Json report = report_header(args, c.seed);
  Json config;
  config["suite"] = o.suite;
  config["trials"] = seeds.size();
  if (o.replay) config["replay"] = *o.replay;
  if (o.tolerance) config["tolerance"] = *o.tolerance;
  if (!o.ensemble1.empty()) config["ensemble1"] = o.ensemble1;
  if (!o.ensemble2.empty()) config["ensemble2"] = o.ensemble2;
  if (!o.joint.empty()) config["joint"] = o.joint;
  config["with_quantumness"] = o.with_quantumness;
  report["config"] = config;
  Json results_json;
  results_json["passed"] = passed;
  results_json["failed"] = static_cast<int>(seeds.size()) - passed;
  results_json["failing_seeds"] = failing;
  results_json["trials"] = rows;
  report["results"] = results_json;
  emit(report, c.json_path,
       "verify " + o.suite + ": " + std::to_string(passed) + "/" + std::to_string(seeds.size()) + " trials passed",
       out);
  return passed == static_cast<int>(seeds.size()) ? kPass : kVerificationFailure;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Root seed (default 0)");
  cmd->add_option("--json", c.json_path, "Write the JSON report here instead of stdout");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Accessible fidelity, quantumness and maximal output norms of CP maps", "qlab"};
  app.set_version_flag("--version", std::string(QLAB_VERSION));
  app.require_subcommand(1);

  FidelityOptions fo;
  QuantumnessOptions qo;
  VerifyOptions vo;
  NuInfOptions no;
  Common fc, qc, vc, nc;

  CLI::App* fid = app.add_subcommand("fidelity", "Bracket the accessible fidelity of an ensemble");
  fid->add_option("input", fo.input, "Ensemble JSON file")->required();
  fid->add_option("--outcomes", fo.outcomes, "POVM outcomes for the seesaw (0 = d^2)");
  fid->add_option("--restarts", fo.restarts, "Seesaw restarts");
  fid->add_option("--rounds", fo.rounds, "Maximal exchange rounds for the certificate");
  fid->add_option("--probes", fo.probes, "Random probes in the certificate verification");
  fid->add_flag("--allow-nonspanning", fo.allow_nonspanning, "Accept states that do not span the space");
  add_common(fid, fc);

  CLI::App* qua = app.add_subcommand("quantumness", "Minimize the accessible fidelity over priors");
  qua->add_option("input", qo.input, "Ensemble JSON file (weights are ignored)")->required();
  qua->add_option("--starts", qo.starts, "Simplex search starts");
  qua->add_option("--max-evaluations", qo.max_evaluations, "Bracket evaluations per start");
  qua->add_flag("--allow-nonspanning", qo.allow_nonspanning, "Accept states that do not span the space");
  add_common(qua, qc);

  CLI::App* ver = app.add_subcommand("verify", "Run seeded verification trials");
  ver->add_option("suite", vo.suite, "thm1, thm2, lemma-eb, lemma-feas or appendix")->required();
  ver->add_option("--trials", vo.trials, "Number of trials");
  ver->add_option("--replay", vo.replay, "Run the single trial with this trial seed");
  ver->add_option("--csv", vo.csv_path, "Write per-trial CSV here");
  ver->add_option("--ensemble1", vo.ensemble1, "Fixed first ensemble (thm1, lemma-feas)");
  ver->add_option("--ensemble2", vo.ensemble2, "Fixed second ensemble (thm1, lemma-feas)");
  ver->add_option("--joint", vo.joint, "Fixed joint distribution file (thm2)");
  ver->add_option("--tolerance", vo.tolerance, "Gap tolerance for lemma-eb (default 1e-5)");
  ver->add_flag("--with-quantumness", vo.with_quantumness, "Also bracket both quantumness values (thm2)");
  add_common(ver, vc);

  CLI::App* nu = app.add_subcommand("nu-inf", "Maximal output operator norm of a CP map");
  nu->add_option("input", no.input, "Channel JSON file")->required();
  nu->add_option("--restarts", no.restarts, "Ascent restarts");
  nu->add_flag("--no-grid", no.no_grid, "Skip the qubit Bloch-sphere grid");
  add_common(nu, nc);

  std::vector<std::string> argv_store{"qlab"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kInputError;
  }

  const auto start = std::chrono::steady_clock::now();
  int code = kPass;
  try {
    if (*fid) {
      code = cmd_fidelity(fo, fc, args, out);
    } else if (*qua) {
      code = cmd_quantumness(qo, qc, args, out);
    } else if (*ver) {
      code = cmd_verify(vo, vc, args, out);
    } else if (*nu) {
      code = cmd_nu_inf(no, nc, args, out);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumericFailure;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  err << "wall time: " << seconds << " s\n";
  return code;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace qlab::cli
