#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sncert/core.hpp"
#include "sncert/ensembles.hpp"

#include <nlohmann/json_fwd.hpp>

// Experiment runner: reproduces the negativity curves, criterion
// comparisons, detection-ratio sweeps, triangle scans, isotropic checks and
// shadow benchmarks at desk scale, with seeded, thread-count-independent
// outputs (CSV + JSON manifest + optional SVG).
namespace sncert {

enum class ExperimentKind {
  NegativityCurve,
  ThresholdCompare,
  DetectionRatio,
  TriangleScan,
  IsotropicCheck,
  ShadowBenchmark,
  Certify,
};

// Moment is the single-order B_N test; MomentScan sweeps every order
// 3..N (both parities), the way the certification algorithm consumes a
// moment budget.
enum class CriterionId { Reduction, Moment, MomentScan, Cm, CmHolder, ThirdOrder };

struct CriterionSpec {
  CriterionId id = CriterionId::Reduction;
  int n = 0;  // moment order (Moment, MomentScan)

  std::string label() const;
  static CriterionSpec parse(const std::string& text);
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::DetectionRatio;
  EnsembleSpec ensemble;
  std::vector<CriterionSpec> criteria;
  std::vector<int> k_list;
  std::vector<int> n_list;
  std::vector<int> d_list;
  int samples = 500;
  uint64_t seed = 1;
  std::string out_dir = "out";
  double slack = 0.0;
  int threads = 1;
  bool plots = false;
  bool audit = true;
  int grid_n = 60;
  int n_max = 16;
  int r_max = 0;
  int eps_steps = 101;
  int f_steps = 21;
  int shadow_m = 2000;
  int shadow_l = 1000;
  int repetitions = 200;
  int shots = 10000;
  double psd_tol = kPsdTol;  // PSD decision tolerance for moment criteria
  std::optional<std::vector<double>> pure_lambda;  // explicit Schmidt spectrum

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

struct RunReport {
  std::vector<std::string> files_written;
  long long audit_violations = 0;
  double wall_seconds = 0.0;
};

RunReport run(const ExperimentConfig& config);

struct DetectionRatioRow {
  EnsembleSpec ensemble;
  int k = 0;
  std::string criterion;
  int detected = 0;
  int samples = 0;
  double ratio = 0.0;
  uint64_t seed = 0;
};

/// Detection ratios for every (k, criterion) pair over `samples` seeded
/// draws. When audit_violations is non-null, every detection by a moment or
/// third-order criterion is cross-checked against the dense k-reduction
/// criterion and disagreements are counted.
std::vector<DetectionRatioRow> detection_ratio(
    const EnsembleSpec& ensemble, const std::vector<CriterionSpec>& criteria,
    const std::vector<int>& k_list, int samples, uint64_t seed,
    double slack = 0.0, int threads = 1,
    long long* audit_violations = nullptr, double psd_tol = kPsdTol);

struct TriangleCell {
  double x1 = 0.0;
  double x2 = 0.0;
  int n = 0;
  bool detected = false;
};

/// Two-qutrit family sqrt(x1)|00> + sqrt(x2)|11> + sqrt(1-x1-x2)|22> on an
/// interior grid; verdict of B_N[psi, k] for each N in n_list.
std::vector<TriangleCell> triangle_scan(int grid_n,
                                        const std::vector<int>& n_list,
                                        int k = 2,
                                        long long* audit_violations = nullptr);

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// 12-significant-digit float formatting shared by every CSV emitter.
std::string format_double(double value);

}  // namespace sncert
