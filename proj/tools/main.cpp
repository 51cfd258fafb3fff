// Command-line front end for the experiment runner. Every subcommand builds
// an ExperimentConfig (from --config JSON plus flag overrides) and hands it
// to sncert::run(); outputs land in --out-dir as CSV + manifest.json.
#include <deque>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sncert/experiments.hpp"

namespace {

using sncert::ExperimentConfig;
using sncert::ExperimentKind;

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string criteria;
  std::string k_list;
  std::string n_list;
  std::string d_list;
  std::string lambda;
  std::string ensemble_kind;
  static constexpr uint64_t kSeedUnset = ~0ULL;
  uint64_t seed = kSeedUnset;
  int samples = -1;
  int threads = -1;
  double slack = -1.0;
  bool plots = false;
  bool no_audit = false;
  int d = 0, d_b = 0, r = 0, k_ancilla = 0;
  double eps = -1.0, fidelity = -1.0;
  int grid = 0, n_max = 0, r_max = 0;
  int shadow_m = 0, shadow_l = 0, reps = 0, shots = 0;
  int eps_steps = 0, f_steps = 0;
  double psd_tol = -1.0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file (flags override it)");
  cmd->add_option("--seed", f.seed, "RNG seed recorded in every output");
  cmd->add_option("--samples", f.samples, "Monte-Carlo sample count");
  cmd->add_option("--out-dir", f.out_dir, "output directory");
  cmd->add_option("--threads", f.threads, "worker threads (results independent of this)");
  cmd->add_option("--slack", f.slack, "PSD slack for estimated moments");
  cmd->add_flag("--plots", f.plots, "emit SVG plots");
  cmd->add_flag("--no-audit", f.no_audit, "skip the dense-path soundness audit");
  cmd->add_option("--criteria", f.criteria,
                  "comma list: reduction,moment:N,cm,cm-holder,third-order");
  cmd->add_option("--k-list", f.k_list, "comma list of k values");
  cmd->add_option("--n-list", f.n_list, "comma list of moment orders");
  cmd->add_option("--d-list", f.d_list, "comma list of local dimensions");
  cmd->add_option("--ensemble", f.ensemble_kind,
                  "fixed-sn-pure|haar-depolarized|induced|isotropic|me-depolarized");
  cmd->add_option("--d", f.d, "local dimension d_A");
  cmd->add_option("--d-b", f.d_b, "local dimension d_B (defaults to d_A)");
  cmd->add_option("--r", f.r, "Schmidt rank parameter");
  cmd->add_option("--ancilla", f.k_ancilla, "ancilla dimension K (induced ensemble)");
  cmd->add_option("--eps", f.eps, "depolarizing noise strength");
  cmd->add_option("--fidelity", f.fidelity, "isotropic fidelity F");
  cmd->add_option("--lambda", f.lambda, "explicit Schmidt coefficients, comma list");
  cmd->add_option("--grid", f.grid, "triangle grid size");
  cmd->add_option("--n-max", f.n_max, "maximal moment order");
  cmd->add_option("--r-max", f.r_max, "maximal Schmidt number probed");
  cmd->add_option("--m", f.shadow_m, "global shadow samples M");
  cmd->add_option("--l", f.shadow_l, "reduced-state shadow samples L");
  cmd->add_option("--reps", f.reps, "shadow benchmark repetitions");
  cmd->add_option("--shots", f.shots, "permutation-test shots");
  cmd->add_option("--eps-steps", f.eps_steps, "noise grid resolution");
  cmd->add_option("--f-steps", f.f_steps, "fidelity grid resolution");
  cmd->add_option("--psd-tol", f.psd_tol,
                  "relative PSD tolerance of moment criteria (default 1e-9)");
}

ExperimentConfig build_config(ExperimentKind kind, const CommonFlags& f) {
  ExperimentConfig c;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + f.config_path);
    nlohmann::json j;
    try {
      in >> j;
      c = ExperimentConfig::from_json(j);
    } catch (const std::exception& e) {
      throw CLI::ValidationError("--config", e.what());
    }
  }
  c.kind = kind;
  if (f.seed != CommonFlags::kSeedUnset) c.seed = f.seed;
  if (f.samples >= 0) c.samples = f.samples;
  if (!f.out_dir.empty()) c.out_dir = f.out_dir;
  if (f.threads > 0) c.threads = f.threads;
  if (f.slack >= 0.0) c.slack = f.slack;
  if (f.plots) c.plots = true;
  if (f.no_audit) c.audit = false;
  if (!f.criteria.empty()) {
    c.criteria.clear();
    std::stringstream ss(f.criteria);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) c.criteria.push_back(sncert::CriterionSpec::parse(item));
    }
  }
  if (!f.k_list.empty()) c.k_list = parse_int_list(f.k_list);
  if (!f.n_list.empty()) c.n_list = parse_int_list(f.n_list);
  if (!f.d_list.empty()) c.d_list = parse_int_list(f.d_list);
  if (!f.ensemble_kind.empty()) {
    c.ensemble.kind = sncert::ensemble_kind_from_string(f.ensemble_kind);
  }
  if (f.d > 0) {
    c.ensemble.d_a = f.d;
    c.ensemble.d_b = f.d;  // --d-b below overrides for rectangular systems
  }
  if (f.d_b > 0) c.ensemble.d_b = f.d_b;
  if (f.r > 0) c.ensemble.r = f.r;
  if (f.k_ancilla > 0) c.ensemble.k_ancilla = f.k_ancilla;
  if (f.eps >= 0.0) c.ensemble.eps = f.eps;
  if (f.fidelity >= 0.0) c.ensemble.fidelity = f.fidelity;
  if (!f.lambda.empty()) c.pure_lambda = parse_double_list(f.lambda);
  if (f.grid > 0) c.grid_n = f.grid;
  if (f.n_max > 0) c.n_max = f.n_max;
  if (f.r_max > 0) c.r_max = f.r_max;
  if (f.shadow_m > 0) c.shadow_m = f.shadow_m;
  if (f.shadow_l > 0) c.shadow_l = f.shadow_l;
  if (f.reps > 0) c.repetitions = f.reps;
  if (f.shots > 0) c.shots = f.shots;
  if (f.eps_steps > 0) c.eps_steps = f.eps_steps;
  if (f.f_steps > 0) c.f_steps = f.f_steps;
  if (f.psd_tol > 0.0) c.psd_tol = f.psd_tol;
  return c;
}

int run_and_report(const ExperimentConfig& config) {
  try {
    const sncert::RunReport report = sncert::run(config);
    for (const auto& file : report.files_written) {
      std::cout << "wrote " << file << "\n";
    }
    if (config.audit) {
      std::cout << "audit violations: " << report.audit_violations << "\n";
    }
    std::cout << "done in " << report.wall_seconds << " s\n";
    return report.audit_violations == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schmidt number certification via k-reduction moments"};
  app.require_subcommand(1);

  struct Sub {
    ExperimentKind kind;
    CLI::App* cmd;
    CommonFlags flags;
  };
  // deque: flag storage must stay at a stable address once registered
  std::deque<Sub> subs;
  const auto add = [&](const char* name, const char* desc, ExperimentKind kind) {
    subs.push_back({kind, app.add_subcommand(name, desc), {}});
    add_common(subs.back().cmd, subs.back().flags);
  };
  add("certify", "best certified Schmidt-number lower bound for one state",
      ExperimentKind::Certify);
  add("ratio", "detection ratios of the chosen criteria over an ensemble",
      ExperimentKind::DetectionRatio);
  add("triangle", "detectable region over the two-qutrit coefficient simplex",
      ExperimentKind::TriangleScan);
  add("isotropic", "isotropic-state closed forms and criterion verdicts",
      ExperimentKind::IsotropicCheck);
  add("negativity", "k-reduction negativity under depolarizing noise",
      ExperimentKind::NegativityCurve);
  add("threshold", "noise thresholds: reduction vs correlation matrix",
      ExperimentKind::ThresholdCompare);
  add("shadow-bench", "classical-shadow moment estimation benchmark",
      ExperimentKind::ShadowBenchmark);

  CLI11_PARSE(app, argc, argv);

  for (auto& sub : subs) {
    if (sub.cmd->parsed()) {
      ExperimentConfig config;
      try {
        config = build_config(sub.kind, sub.flags);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
      }
      return run_and_report(config);
    }
  }
  return 1;
}
