#include "sncert/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include <nlohmann/json.hpp>

#include "sncert/correlation.hpp"
#include "sncert/moments.hpp"
#include "sncert/reduction.hpp"
#include "sncert/shadows.hpp"

namespace sncert {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

std::string CriterionSpec::label() const {
  switch (id) {
    case CriterionId::Reduction: return "reduction";
    case CriterionId::Moment: return "moment:" + std::to_string(n);
    case CriterionId::MomentScan: return "scan:" + std::to_string(n);
    case CriterionId::Cm: return "cm";
    case CriterionId::CmHolder: return "cm-holder";
    case CriterionId::ThirdOrder: return "third-order";
  }
  return "?";
}

CriterionSpec CriterionSpec::parse(const std::string& text) {
  CriterionSpec out;
  if (text == "reduction") {
    out.id = CriterionId::Reduction;
  } else if (text == "cm") {
    out.id = CriterionId::Cm;
  } else if (text == "cm-holder") {
    out.id = CriterionId::CmHolder;
  } else if (text == "third-order") {
    out.id = CriterionId::ThirdOrder;
  } else if (text.rfind("moment:", 0) == 0 || text.rfind("moment(", 0) == 0) {
    out.id = CriterionId::Moment;
    std::string num = text.substr(7);
    if (!num.empty() && num.back() == ')') num.pop_back();
    out.n = std::stoi(num);
    if (out.n < 3) {
      throw std::invalid_argument("criteria: moment order must be >= 3 in '" + text + "'");
    }
  } else if (text.rfind("scan:", 0) == 0) {
    out.id = CriterionId::MomentScan;
    out.n = std::stoi(text.substr(5));
    if (out.n < 3) {
      throw std::invalid_argument("criteria: scan order must be >= 3 in '" + text + "'");
    }
  } else {
    throw std::invalid_argument("criteria: unknown criterion '" + text + "'");
  }
  return out;
}

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::NegativityCurve: return "negativity-curve";
    case ExperimentKind::ThresholdCompare: return "threshold-compare";
    case ExperimentKind::DetectionRatio: return "detection-ratio";
    case ExperimentKind::TriangleScan: return "triangle-scan";
    case ExperimentKind::IsotropicCheck: return "isotropic-check";
    case ExperimentKind::ShadowBenchmark: return "shadow-benchmark";
    case ExperimentKind::Certify: return "certify";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "negativity-curve") return ExperimentKind::NegativityCurve;
  if (name == "threshold-compare") return ExperimentKind::ThresholdCompare;
  if (name == "detection-ratio") return ExperimentKind::DetectionRatio;
  if (name == "triangle-scan") return ExperimentKind::TriangleScan;
  if (name == "isotropic-check") return ExperimentKind::IsotropicCheck;
  if (name == "shadow-benchmark") return ExperimentKind::ShadowBenchmark;
  if (name == "certify") return ExperimentKind::Certify;
  throw std::invalid_argument("unknown experiment kind: " + name);
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  const auto get = [&j](const char* key) { return j.contains(key); };
  if (get("experiment")) {
    c.kind = experiment_kind_from_string(j.at("experiment").get<std::string>());
  }
  if (get("ensemble")) {
    const json& e = j.at("ensemble");
    if (e.contains("kind")) {
      c.ensemble.kind = ensemble_kind_from_string(e.at("kind").get<std::string>());
    }
    if (e.contains("r")) c.ensemble.r = e.at("r").get<int>();
    if (e.contains("d_a")) c.ensemble.d_a = e.at("d_a").get<int>();
    if (e.contains("d_b")) c.ensemble.d_b = e.at("d_b").get<int>();
    if (e.contains("k_ancilla")) c.ensemble.k_ancilla = e.at("k_ancilla").get<int>();
    if (e.contains("eps")) c.ensemble.eps = e.at("eps").get<double>();
    if (e.contains("fidelity")) c.ensemble.fidelity = e.at("fidelity").get<double>();
  }
  if (get("criteria")) {
    for (const auto& item : j.at("criteria")) {
      c.criteria.push_back(CriterionSpec::parse(item.get<std::string>()));
    }
  }
  if (get("k_list")) c.k_list = j.at("k_list").get<std::vector<int>>();
  if (get("n_list")) c.n_list = j.at("n_list").get<std::vector<int>>();
  if (get("d_list")) c.d_list = j.at("d_list").get<std::vector<int>>();
  if (get("samples")) c.samples = j.at("samples").get<int>();
  if (get("seed")) c.seed = j.at("seed").get<uint64_t>();
  if (get("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  if (get("slack")) c.slack = j.at("slack").get<double>();
  if (get("threads")) c.threads = j.at("threads").get<int>();
  if (get("plots")) c.plots = j.at("plots").get<bool>();
  if (get("audit")) c.audit = j.at("audit").get<bool>();
  if (get("grid_n")) c.grid_n = j.at("grid_n").get<int>();
  if (get("n_max")) c.n_max = j.at("n_max").get<int>();
  if (get("r_max")) c.r_max = j.at("r_max").get<int>();
  if (get("eps_steps")) c.eps_steps = j.at("eps_steps").get<int>();
  if (get("f_steps")) c.f_steps = j.at("f_steps").get<int>();
  if (get("shadow_m")) c.shadow_m = j.at("shadow_m").get<int>();
  if (get("shadow_l")) c.shadow_l = j.at("shadow_l").get<int>();
  if (get("repetitions")) c.repetitions = j.at("repetitions").get<int>();
  if (get("shots")) c.shots = j.at("shots").get<int>();
  if (get("psd_tol")) c.psd_tol = j.at("psd_tol").get<double>();
  if (get("pure_lambda")) {
    c.pure_lambda = j.at("pure_lambda").get<std::vector<double>>();
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json e;
  e["kind"] = sncert::to_string(ensemble.kind);
  e["r"] = ensemble.r;
  e["d_a"] = ensemble.d_a;
  e["d_b"] = ensemble.d_b;
  e["k_ancilla"] = ensemble.k_ancilla;
  e["eps"] = ensemble.eps;
  e["fidelity"] = ensemble.fidelity;

  json j;
  j["experiment"] = sncert::to_string(kind);
  j["ensemble"] = e;
  std::vector<std::string> crit;
  crit.reserve(criteria.size());
  for (const auto& c : criteria) crit.push_back(c.label());
  j["criteria"] = crit;
  j["k_list"] = k_list;
  j["n_list"] = n_list;
  j["d_list"] = d_list;
  j["samples"] = samples;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  j["slack"] = slack;
  j["threads"] = threads;
  j["plots"] = plots;
  j["audit"] = audit;
  j["grid_n"] = grid_n;
  j["n_max"] = n_max;
  j["r_max"] = r_max;
  j["eps_steps"] = eps_steps;
  j["f_steps"] = f_steps;
  j["shadow_m"] = shadow_m;
  j["shadow_l"] = shadow_l;
  j["repetitions"] = repetitions;
  j["shots"] = shots;
  j["psd_tol"] = psd_tol;
  if (pure_lambda) j["pure_lambda"] = *pure_lambda;
  return j;
}

void ExperimentConfig::validate() const {
  if (samples < 1) throw std::invalid_argument("config.samples: must be >= 1");
  if (threads < 1) throw std::invalid_argument("config.threads: must be >= 1");
  if (slack < 0.0) throw std::invalid_argument("config.slack: must be >= 0");
  if (psd_tol <= 0.0) {
    throw std::invalid_argument("config.psd_tol: must be > 0");
  }
  switch (kind) {
    case ExperimentKind::DetectionRatio:
      ensemble.validate();
      if (criteria.empty()) {
        throw std::invalid_argument("config.criteria: detection-ratio needs at least one criterion");
      }
      if (k_list.empty()) {
        throw std::invalid_argument("config.k_list: detection-ratio needs target k values");
      }
      break;
    case ExperimentKind::TriangleScan:
      if (grid_n < 2) throw std::invalid_argument("config.grid_n: must be >= 2");
      if (n_list.empty()) {
        throw std::invalid_argument("config.n_list: triangle-scan needs moment orders");
      }
      break;
    case ExperimentKind::ShadowBenchmark:
      if (!pure_lambda) ensemble.validate();
      if (shadow_m < 3 || shadow_l < 2) {
        throw std::invalid_argument("config.shadow_m/shadow_l: need M >= 3, L >= 2");
      }
      if (repetitions < 2) {
        throw std::invalid_argument("config.repetitions: must be >= 2");
      }
      break;
    case ExperimentKind::Certify:
      if (!pure_lambda) ensemble.validate();
      if (n_max < 3) throw std::invalid_argument("config.n_max: must be >= 3");
      break;
    case ExperimentKind::NegativityCurve:
    case ExperimentKind::ThresholdCompare:
      if (ensemble.r < 2) {
        throw std::invalid_argument("config.ensemble.r: need r >= 2");
      }
      break;
    case ExperimentKind::IsotropicCheck:
      if (f_steps < 2) throw std::invalid_argument("config.f_steps: must be >= 2");
      break;
  }
}

namespace {

void parallel_for(int total, int threads,
                  const std::function<void(int, int, int)>& chunk_fn) {
  threads = std::max(1, std::min(threads, total));
  if (threads == 1) {
    chunk_fn(0, total, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  const int per = (total + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int begin = t * per;
    const int end = std::min(total, begin + per);
    if (begin >= end) break;
    pool.emplace_back(chunk_fn, begin, end, t);
  }
  for (auto& th : pool) th.join();
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    write_cells(header);
  }

  void row(const std::vector<std::string>& cells) { write_cells(cells); }

 private:
  void write_cells(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }
  std::ofstream out_;
};

std::string fmt_int(long long v) { return std::to_string(v); }

// Minimal native SVG emitters; enough for line charts and triangle heatmaps.
struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

void svg_line_chart(const fs::path& path, const std::string& title,
                    const std::vector<Series>& series) {
  const double w = 640, h = 480, ml = 60, mr = 20, mt = 40, mb = 40;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x); xmax = std::max(xmax, x);
      ymin = std::min(ymin, y); ymax = std::max(ymax, y);
    }
  }
  if (xmin > xmax) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  const auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

  std::ofstream out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr
      << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << ml << "\" y=\"" << h - mb + 16 << "\" font-size=\"11\">"
      << format_double(xmin) << "</text>\n";
  out << "<text x=\"" << w - mr << "\" y=\"" << h - mb + 16
      << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(xmax) << "</text>\n";
  out << "<text x=\"" << ml - 6 << "\" y=\"" << h - mb
      << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(ymin) << "</text>\n";
  out << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 4
      << "\" text-anchor=\"end\" font-size=\"11\">" << format_double(ymax) << "</text>\n";
  size_t ci = 0;
  for (const auto& s : series) {
    const char* color = kPalette[ci % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points) out << px(x) << "," << py(y) << " ";
    out << "\"/>\n";
    out << "<text x=\"" << w - mr - 4 << "\" y=\"" << mt + 16 * (ci + 1)
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">"
        << s.name << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
}

void svg_triangle_heatmap(const fs::path& path, const std::string& title,
                          int grid_n,
                          const std::vector<std::tuple<double, double, bool>>& cells) {
  const double w = 520, h = 520, m = 40;
  const double cell = (w - 2 * m) / (grid_n + 1);
  std::ofstream out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  for (const auto& [x1, x2, det] : cells) {
    const double px = m + x1 * (w - 2 * m);
    const double py = h - m - x2 * (h - 2 * m);
    out << "<rect x=\"" << px - cell / 2 << "\" y=\"" << py - cell / 2
        << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
        << (det ? "#d62728" : "#c7c7c7") << "\"/>\n";
  }
  out << "</svg>\n";
}

// Shared criterion evaluation on one state; caches the expensive pieces.
struct StateVerdicts {
  // counts indexed by [k][criterion]
  std::vector<std::vector<bool>> detected;
  long long audit_violations = 0;
};

StateVerdicts evaluate_state(const BipartiteDensity& rho,
                             const std::vector<CriterionSpec>& criteria,
                             const std::vector<int>& k_list, double slack,
                             bool audit, double psd_tol) {
  StateVerdicts out;
  out.detected.assign(k_list.size(),
                      std::vector<bool>(criteria.size(), false));

  int max_order = 0;
  bool need_reduced = false;
  bool need_cm = false;
  bool need_tuple = false;
  for (const auto& c : criteria) {
    switch (c.id) {
      case CriterionId::Reduction: need_reduced = true; break;
      case CriterionId::Moment:
      case CriterionId::MomentScan:
        need_reduced = true;
        max_order = std::max(max_order, c.n);
        break;
      case CriterionId::Cm:
      case CriterionId::CmHolder: need_cm = true; break;
      case CriterionId::ThirdOrder: need_tuple = true; break;
    }
  }
  if (audit && (max_order > 0 || need_tuple)) need_reduced = true;

  double norm1 = 0.0, norm2_sq = 0.0, norm4_quad = 0.0;
  if (need_cm) {
    const CorrelationMatrix t = correlation_matrix(rho);
    norm1 = schatten_norm(t, 1);
    const double n2 = schatten_norm(t, 2);
    const double n4 = schatten_norm(t, 4);
    norm2_sq = n2 * n2;
    norm4_quad = n4 * n4 * n4 * n4;
  }
  MomentTuple tuple;
  if (need_tuple) tuple = exact_moment_tuple(rho);

  for (size_t ki = 0; ki < k_list.size(); ++ki) {
    const int k = k_list[ki];
    RealVector eigs;
    bool reduction_detected = false;
    if (need_reduced) {
      eigs = hermitian_spectrum(k_reduced_operator(rho, k).matrix);
      const double norm = std::max(std::abs(eigs(0)), std::abs(eigs(eigs.size() - 1)));
      reduction_detected = eigs(0) < -kPsdTol * std::max(1.0, norm);
    }
    MomentSequence q;
    if (max_order > 0) {
      q = MomentSequence{k, power_sums(eigs, max_order), MomentSource::Exact};
    }
    for (size_t ci = 0; ci < criteria.size(); ++ci) {
      const CriterionSpec& c = criteria[ci];
      bool det = false;
      switch (c.id) {
        case CriterionId::Reduction:
          det = reduction_detected;
          break;
        case CriterionId::Moment:
          det = moment_criterion(q, c.n, slack, psd_tol).detected;
          if (audit && det && !reduction_detected) ++out.audit_violations;
          break;
        case CriterionId::MomentScan:
          for (int order = 3; order <= c.n && !det; ++order) {
            det = moment_criterion(q, order, slack, psd_tol).detected;
          }
          if (audit && det && !reduction_detected) ++out.audit_violations;
          break;
        case CriterionId::Cm: {
          const double bound = k - 1.0 / rho.d_a;
          det = norm1 > bound + kPsdTol * std::max(1.0, norm1);
          break;
        }
        case CriterionId::CmHolder:
          det = cm_holder_criterion(norm2_sq, norm4_quad, k, rho.d_a).detected;
          break;
        case CriterionId::ThirdOrder:
          det = third_order_criterion(tuple.p2, tuple.p3, tuple.a2, tuple.a3,
                                      tuple.t2, rho.d_b, k, slack, psd_tol)
                    .detected;
          if (audit && det && !reduction_detected) ++out.audit_violations;
          break;
      }
      out.detected[ki][ci] = det;
    }
  }
  return out;
}

}  // namespace

std::vector<DetectionRatioRow> detection_ratio(
    const EnsembleSpec& ensemble, const std::vector<CriterionSpec>& criteria,
    const std::vector<int>& k_list, int samples, uint64_t seed, double slack,
    int threads, long long* audit_violations, double psd_tol) {
  ensemble.validate();
  const bool audit = audit_violations != nullptr;

  std::vector<std::vector<std::atomic<long long>>> counts(k_list.size());
  for (auto& row : counts) {
    row = std::vector<std::atomic<long long>>(criteria.size());
    for (auto& c : row) c.store(0);
  }
  std::atomic<long long> violations{0};

  parallel_for(samples, threads, [&](int begin, int end, int) {
    for (int idx = begin; idx < end; ++idx) {
      const BipartiteDensity rho =
          sample_state(ensemble, seed, static_cast<uint64_t>(idx));
      const StateVerdicts v =
          evaluate_state(rho, criteria, k_list, slack, audit, psd_tol);
      for (size_t ki = 0; ki < k_list.size(); ++ki) {
        for (size_t ci = 0; ci < criteria.size(); ++ci) {
          if (v.detected[ki][ci]) counts[ki][ci].fetch_add(1);
        }
      }
      violations.fetch_add(v.audit_violations);
    }
  });

  if (audit_violations) *audit_violations += violations.load();

  std::vector<DetectionRatioRow> rows;
  rows.reserve(k_list.size() * criteria.size());
  for (size_t ki = 0; ki < k_list.size(); ++ki) {
    for (size_t ci = 0; ci < criteria.size(); ++ci) {
      DetectionRatioRow row;
      row.ensemble = ensemble;
      row.k = k_list[ki];
      row.criterion = criteria[ci].label();
      row.detected = static_cast<int>(counts[ki][ci].load());
      row.samples = samples;
      row.ratio = static_cast<double>(row.detected) / samples;
      row.seed = seed;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<TriangleCell> triangle_scan(int grid_n,
                                        const std::vector<int>& n_list,
                                        int k, long long* audit_violations) {
  if (grid_n < 2) throw std::invalid_argument("triangle_scan: grid_n must be >= 2");
  int max_order = 3;
  for (int n : n_list) max_order = std::max(max_order, n);

  std::vector<TriangleCell> out;
  long long violations = 0;
  for (int i = 1; i <= grid_n; ++i) {
    for (int j = 1; j + i <= grid_n; ++j) {
      const double x1 = static_cast<double>(i) / (grid_n + 1);
      const double x2 = static_cast<double>(j) / (grid_n + 1);
      RealVector lam(3);
      lam << x1, x2, 1.0 - x1 - x2;
      std::sort(lam.begin(), lam.end(), std::greater<double>());
      const SchmidtVector lambda(lam);
      const MomentSequence q = pure_reduction_moments(lambda, k, 3, max_order);
      const bool reduction_detected = theta_k(lambda, k) > 1e-12;
      for (int n : n_list) {
        TriangleCell cell;
        cell.x1 = x1;
        cell.x2 = x2;
        cell.n = n;
        cell.detected = moment_criterion(q, n).detected;
        if (audit_violations && cell.detected && !reduction_detected) {
          ++violations;
        }
        out.push_back(cell);
      }
    }
  }
  if (audit_violations) *audit_violations += violations;
  return out;
}

namespace {

SchmidtVector lambda_from_config(const ExperimentConfig& config) {
  if (config.pure_lambda) {
    RealVector lam(static_cast<Eigen::Index>(config.pure_lambda->size()));
    double total = 0.0;
    for (size_t i = 0; i < config.pure_lambda->size(); ++i) {
      const double v = (*config.pure_lambda)[i];
      if (v < 0.0) {
        throw std::invalid_argument("config.pure_lambda: negative coefficient");
      }
      lam(static_cast<Eigen::Index>(i)) = v;
      total += v;
    }
    if (total <= 0.0) {
      throw std::invalid_argument("config.pure_lambda: coefficients sum to zero");
    }
    lam /= total;  // accept unnormalized command-line input
    std::sort(lam.begin(), lam.end(), std::greater<double>());
    return SchmidtVector(lam);
  }
  const int r = config.ensemble.r;
  RealVector lam = RealVector::Zero(std::max(r, 1));
  for (int i = 0; i < r; ++i) lam(i) = 1.0 / r;
  return SchmidtVector(lam);
}

BipartiteDensity state_from_config(const ExperimentConfig& config) {
  if (config.pure_lambda) {
    const SchmidtVector lam = lambda_from_config(config);
    const int d_a = std::max(config.ensemble.d_a, lam.size());
    const int d_b = std::max(config.ensemble.d_b, d_a);
    Vector amps = Vector::Zero(static_cast<Eigen::Index>(d_a) * d_b);
    for (int i = 0; i < lam.size(); ++i) {
      amps(i * d_b + i) = std::sqrt(lam.lambda(i));
    }
    return BipartiteDensity::from_pure(PureState(d_a, d_b, std::move(amps)));
  }
  return sample_state(config.ensemble, config.seed, 0);
}

std::string csv_path(const ExperimentConfig& config, const std::string& name) {
  return (fs::path(config.out_dir) / name).string();
}

void run_negativity(const ExperimentConfig& config, RunReport& report) {
  const int r = config.ensemble.r;
  const int d_a = config.ensemble.d_a > 0 ? config.ensemble.d_a : r;
  const int d_b = config.ensemble.d_b > 0 ? config.ensemble.d_b : d_a;
  std::vector<int> ks = config.k_list;
  if (ks.empty()) {
    for (int k = 1; k < r; ++k) ks.push_back(k);
  }
  const SchmidtVector lambda = lambda_from_config(config);

  const std::string path = csv_path(config, "negativity_curve.csv");
  CsvWriter csv(path, {"eps", "k", "negativity", "eps_star"});
  std::vector<Series> series;
  for (int k : ks) {
    const double n0 = theta_k(lambda, k);
    const double dd = static_cast<double>(d_a) * d_b;
    const double eps_star = dd * n0 / (k * d_b - 1.0 + dd * n0);
    Series s;
    s.name = "k=" + std::to_string(k);
    for (int i = 0; i < config.eps_steps; ++i) {
      const double eps = static_cast<double>(i) / (config.eps_steps - 1);
      const double neg = depolarized_negativity(lambda, eps, k, d_a, d_b);
      csv.row({format_double(eps), fmt_int(k), format_double(neg),
               format_double(eps_star)});
      s.points.emplace_back(eps, neg);
    }
    series.push_back(std::move(s));
  }
  report.files_written.push_back(path);
  if (config.plots) {
    const std::string svg = csv_path(config, "negativity_curve.svg");
    svg_line_chart(svg, "k-reduction negativity vs depolarizing noise", series);
    report.files_written.push_back(svg);
  }
}

void run_threshold_compare(const ExperimentConfig& config, RunReport& report) {
  const int r = config.ensemble.r;
  std::vector<int> ds = config.d_list;
  if (ds.empty()) {
    for (int d = r; d <= std::max(r, 8); ++d) ds.push_back(d);
  }
  const std::string path = csv_path(config, "threshold_compare.csv");
  CsvWriter csv(path, {"d", "r", "eps_rm", "eps_cm"});
  std::vector<Series> series(2);
  series[0].name = "reduction";
  series[1].name = "cm";
  for (int d : ds) {
    const double rm = noise_threshold_rm(r, d, d);
    const BipartiteDensity plus =
        BipartiteDensity::from_pure(maximally_entangled(r, d, d));
    const double norm1 = schatten_norm(correlation_matrix(plus), 1);
    const double bound = (r - 1) - 1.0 / d;
    const double cm = norm1 > bound ? 1.0 - bound / norm1 : 0.0;
    csv.row({fmt_int(d), fmt_int(r), format_double(rm), format_double(cm)});
    series[0].points.emplace_back(d, rm);
    series[1].points.emplace_back(d, cm);
  }
  report.files_written.push_back(path);
  if (config.plots) {
    const std::string svg = csv_path(config, "threshold_compare.svg");
    svg_line_chart(svg, "noise thresholds for certifying SN = r", series);
    report.files_written.push_back(svg);
  }
}

void run_detection_ratio(const ExperimentConfig& config, RunReport& report) {
  long long violations = 0;
  const auto rows = detection_ratio(
      config.ensemble, config.criteria, config.k_list, config.samples,
      config.seed, config.slack, config.threads,
      config.audit ? &violations : nullptr, config.psd_tol);
  report.audit_violations += violations;

  const std::string path = csv_path(config, "detection_ratio.csv");
  CsvWriter csv(path, {"ensemble", "d_a", "d_b", "r", "k_ancilla", "eps",
                       "fidelity", "k", "criterion", "detected", "samples",
                       "ratio", "seed"});
  for (const auto& row : rows) {
    csv.row({sncert::to_string(row.ensemble.kind), fmt_int(row.ensemble.d_a),
             fmt_int(row.ensemble.d_b), fmt_int(row.ensemble.r),
             fmt_int(row.ensemble.k_ancilla), format_double(row.ensemble.eps),
             format_double(row.ensemble.fidelity), fmt_int(row.k),
             row.criterion, fmt_int(row.detected), fmt_int(row.samples),
             format_double(row.ratio), std::to_string(row.seed)});
  }
  report.files_written.push_back(path);

  if (config.plots) {
    // One series per criterion, ratio vs k.
    std::vector<Series> series;
    for (const auto& c : config.criteria) {
      Series s;
      s.name = c.label();
      for (const auto& row : rows) {
        if (row.criterion == c.label()) s.points.emplace_back(row.k, row.ratio);
      }
      series.push_back(std::move(s));
    }
    const std::string svg = csv_path(config, "detection_ratio.svg");
    svg_line_chart(svg, "detection ratio vs k (" + config.ensemble.label() + ")",
                   series);
    report.files_written.push_back(svg);
  }
}

void run_triangle(const ExperimentConfig& config, RunReport& report) {
  long long violations = 0;
  const int k = config.k_list.empty() ? 2 : config.k_list.front();
  const auto cells = triangle_scan(config.grid_n, config.n_list, k,
                                   config.audit ? &violations : nullptr);
  report.audit_violations += violations;

  const std::string path = csv_path(config, "triangle_scan.csv");
  CsvWriter csv(path, {"x1", "x2", "N", "detected"});
  for (const auto& cell : cells) {
    csv.row({format_double(cell.x1), format_double(cell.x2), fmt_int(cell.n),
             fmt_int(cell.detected ? 1 : 0)});
  }
  report.files_written.push_back(path);

  if (config.plots) {
    for (int n : config.n_list) {
      std::vector<std::tuple<double, double, bool>> pts;
      for (const auto& cell : cells) {
        if (cell.n == n) pts.emplace_back(cell.x1, cell.x2, cell.detected);
      }
      const std::string svg =
          csv_path(config, "triangle_N" + std::to_string(n) + ".svg");
      svg_triangle_heatmap(svg, "detectable region, N=" + std::to_string(n),
                           config.grid_n, pts);
      report.files_written.push_back(svg);
    }
  }
}

void run_isotropic(const ExperimentConfig& config, RunReport& report) {
  std::vector<int> ds = config.d_list;
  if (ds.empty()) {
    for (int d = 2; d <= 8; ++d) ds.push_back(d);
  }
  const std::string norms_path = csv_path(config, "isotropic_norms.csv");
  CsvWriter norms(norms_path,
                  {"d", "F", "norm1_closed", "norm1_numeric", "norm2sq_closed",
                   "norm2sq_numeric", "norm4quad_closed", "norm4quad_numeric"});
  const std::string verdicts_path = csv_path(config, "isotropic_verdicts.csv");
  CsvWriter verdicts(verdicts_path, {"d", "F", "k", "sn_reference",
                                     "third_order_detected", "cm_detected",
                                     "reduction_detected"});
  for (int d : ds) {
    for (int fi = 0; fi < config.f_steps; ++fi) {
      const double f = static_cast<double>(fi) / (config.f_steps - 1);
      const IsotropicCmValues closed = isotropic_cm_values(d, f);
      const BipartiteDensity rho = isotropic_state(d, f);
      const CorrelationMatrix t = correlation_matrix(rho);
      const double n1 = schatten_norm(t, 1);
      const double n2 = schatten_norm(t, 2);
      const double n4 = schatten_norm(t, 4);
      norms.row({fmt_int(d), format_double(f), format_double(closed.norm1),
                 format_double(n1), format_double(closed.norm2_sq),
                 format_double(n2 * n2), format_double(closed.norm4_quad),
                 format_double(n4 * n4 * n4 * n4)});

      const int sn_ref = std::max(
          1, static_cast<int>(std::ceil(d * f - 1e-12)));
      const MomentTuple tuple = exact_moment_tuple(rho);
      for (int k = 1; k < d; ++k) {
        const auto third = third_order_criterion(tuple.p2, tuple.p3, tuple.a2,
                                                 tuple.a3, tuple.t2, d, k);
        const auto cm = cm_criterion(rho, k);
        const auto red = reduction_criterion(rho, k);
        verdicts.row({fmt_int(d), format_double(f), fmt_int(k),
                      fmt_int(sn_ref), fmt_int(third.detected ? 1 : 0),
                      fmt_int(cm.detected ? 1 : 0),
                      fmt_int(red.detected ? 1 : 0)});
      }
    }
  }
  report.files_written.push_back(norms_path);
  report.files_written.push_back(verdicts_path);
}

void run_shadow_benchmark(const ExperimentConfig& config, RunReport& report) {
  const BipartiteDensity rho = state_from_config(config);
  const MomentTuple exact = exact_moment_tuple(rho);
  const int reps = config.repetitions;

  std::vector<MomentTupleEstimate> results(static_cast<size_t>(reps));
  parallel_for(reps, config.threads, [&](int begin, int end, int) {
    for (int i = begin; i < end; ++i) {
      RandomStream rng(config.seed, 1 + static_cast<uint64_t>(i));
      results[static_cast<size_t>(i)] = estimate_moment_tuple(
          rho, config.shadow_m, config.shadow_l, rng);
    }
  });

  std::vector<int> ks = config.k_list;
  if (ks.empty()) {
    for (int k = 1; k < rho.d_a; ++k) ks.push_back(k);
  }

  const std::string path = csv_path(config, "shadow_estimates.csv");
  CsvWriter csv(path, {"rep", "p2", "se_p2", "p3", "se_p3", "a2", "se_a2",
                       "a3", "se_a3", "t2", "se_t2"});
  for (int i = 0; i < reps; ++i) {
    const auto& e = results[static_cast<size_t>(i)];
    csv.row({fmt_int(i), format_double(e.values.p2),
             format_double(e.std_errors.p2), format_double(e.values.p3),
             format_double(e.std_errors.p3), format_double(e.values.a2),
             format_double(e.std_errors.a2), format_double(e.values.a3),
             format_double(e.std_errors.a3), format_double(e.values.t2),
             format_double(e.std_errors.t2)});
  }
  report.files_written.push_back(path);

  const std::string verdict_path = csv_path(config, "shadow_verdicts.csv");
  CsvWriter verdicts(verdict_path,
                     {"rep", "k", "detected_estimated", "detected_exact"});
  for (int i = 0; i < reps; ++i) {
    const auto& e = results[static_cast<size_t>(i)];
    for (int k : ks) {
      const bool est = third_order_criterion(e.values.p2, e.values.p3,
                                             e.values.a2, e.values.a3,
                                             e.values.t2, rho.d_b, k,
                                             config.slack)
                           .detected;
      const bool exa = third_order_criterion(exact.p2, exact.p3, exact.a2,
                                             exact.a3, exact.t2, rho.d_b, k)
                           .detected;
      verdicts.row({fmt_int(i), fmt_int(k), fmt_int(est ? 1 : 0),
                    fmt_int(exa ? 1 : 0)});
    }
  }
  report.files_written.push_back(verdict_path);

  const std::string summary_path = csv_path(config, "shadow_summary.csv");
  CsvWriter summary(summary_path, {"moment", "exact", "mean", "pooled_se",
                                   "empirical_var", "variance_bound"});
  const auto col = [&](const char* name, double exact_v,
                       const std::function<double(const MomentTupleEstimate&)>& get,
                       double bound) {
    double mean = 0.0;
    for (const auto& e : results) mean += get(e);
    mean /= reps;
    double var = 0.0;
    for (const auto& e : results) var += (get(e) - mean) * (get(e) - mean);
    var /= (reps - 1);
    summary.row({name, format_double(exact_v), format_double(mean),
                 format_double(std::sqrt(var / reps)), format_double(var),
                 format_double(bound)});
  };
  const double bound_p2 =
      p2_variance_bound(exact.p2, exact.p3, rho.dim(), config.shadow_m);
  const double bound_a2 =
      p2_variance_bound(exact.a2, exact.a3, rho.d_a, config.shadow_l);
  col("p2", exact.p2, [](const auto& e) { return e.values.p2; }, bound_p2);
  col("p3", exact.p3, [](const auto& e) { return e.values.p3; }, 0.0);
  col("a2", exact.a2, [](const auto& e) { return e.values.a2; }, bound_a2);
  col("a3", exact.a3, [](const auto& e) { return e.values.a3; }, 0.0);
  col("t2", exact.t2, [](const auto& e) { return e.values.t2; }, 0.0);
  report.files_written.push_back(summary_path);
}

void run_certify(const ExperimentConfig& config, RunReport& report) {
  const BipartiteDensity rho = state_from_config(config);
  const int r_max =
      config.r_max > 0 ? config.r_max : std::min(rho.d_a, rho.d_b);

  const std::string path = csv_path(config, "certify.csv");
  CsvWriter csv(path, {"target_sn", "map_k", "N", "detected", "witness"});
  int best = 1;
  for (int target = 2; target <= r_max; ++target) {
    const MomentSequence q = reduction_moments(rho, target - 1, config.n_max);
    bool any = false;
    for (int n = 3; n <= config.n_max; ++n) {
      const CriterionVerdict v = moment_criterion(q, n, config.slack);
      csv.row({fmt_int(target), fmt_int(target - 1), fmt_int(n),
               fmt_int(v.detected ? 1 : 0), format_double(v.witness)});
      if (v.detected) {
        any = true;
        break;
      }
    }
    if (!any) break;
    best = target;
  }
  report.files_written.push_back(path);

  const std::string summary_path = csv_path(config, "certify_summary.csv");
  CsvWriter summary(summary_path, {"best_lower_bound", "n_max", "r_max", "slack"});
  summary.row({fmt_int(best), fmt_int(config.n_max), fmt_int(r_max),
               format_double(config.slack)});
  report.files_written.push_back(summary_path);
}

}  // namespace

RunReport run(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(config.out_dir);

  RunReport report;
  switch (config.kind) {
    case ExperimentKind::NegativityCurve: run_negativity(config, report); break;
    case ExperimentKind::ThresholdCompare: run_threshold_compare(config, report); break;
    case ExperimentKind::DetectionRatio: run_detection_ratio(config, report); break;
    case ExperimentKind::TriangleScan: run_triangle(config, report); break;
    case ExperimentKind::IsotropicCheck: run_isotropic(config, report); break;
    case ExperimentKind::ShadowBenchmark: run_shadow_benchmark(config, report); break;
    case ExperimentKind::Certify: run_certify(config, report); break;
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  json manifest;
  manifest["config"] = config.to_json();
  manifest["versions"] = {
      {"sncert", "0.1.0"},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)}};
  manifest["seed"] = config.seed;
  manifest["wall_seconds"] = report.wall_seconds;
  manifest["audit_violations"] = report.audit_violations;
  manifest["outputs"] = report.files_written;
  const std::string manifest_path = csv_path(config, "manifest.json");
  std::ofstream out(manifest_path);
  out << manifest.dump(2) << "\n";
  report.files_written.push_back(manifest_path);
  return report;
}

}  // namespace sncert
