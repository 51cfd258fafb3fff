#include "sncert/reduction.hpp"

#include <algorithm>
#include <cmath>

namespace sncert {

ReducedOperator k_reduced_operator(const BipartiteDensity& rho, int k) {
  if (k < 1) throw std::invalid_argument("k_reduced_operator: k must be >= 1");
  const Matrix rho_a = rho.reduced_a();
  Matrix out = -rho.rho;
  // k * rho_A (x) I_B added in place.
  for (int i = 0; i < rho.d_a; ++i) {
    for (int ip = 0; ip < rho.d_a; ++ip) {
      const Complex v = static_cast<double>(k) * rho_a(i, ip);
      for (int j = 0; j < rho.d_b; ++j) {
        out(i * rho.d_b + j, ip * rho.d_b + j) += v;
      }
    }
  }
  return ReducedOperator{k, std::move(out)};
}

RealMatrix omega_matrix(const SchmidtVector& lambda, int k) {
  const int d = lambda.size();
  RealMatrix omega(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      omega(i, j) = -std::sqrt(lambda.lambda(i) * lambda.lambda(j));
      if (i == j) omega(i, j) += k * lambda.lambda(i);
    }
  }
  return omega;
}

namespace {

double theta_from_fixed_point(const SchmidtVector& lambda, int k, int r) {
  // G(y) = sum_i lambda_i / (k lambda_i + y) is strictly decreasing in y>0,
  // G(0+) = r/k > 1 and G(1 - k/r) <= 1, so the root lies in (0, 1 - k/r].
  const auto g = [&](double y) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < lambda.lambda.size(); ++i) {
      const double li = lambda.lambda(i);
      if (li > 0.0) s += li / (k * li + y);
    }
    return s;
  };
  double lo = 0.0;
  double hi = 1.0 - static_cast<double>(k) / r;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ThetaResult theta_k_detailed(const SchmidtVector& lambda, int k) {
  const int r = lambda.schmidt_rank();
  ThetaResult out;
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(omega_matrix(lambda, k),
                                                   Eigen::EigenvaluesOnly);
  out.from_spectrum = std::max(0.0, -solver.eigenvalues()(0));
  out.from_fixed_point =
      (k >= r) ? 0.0 : theta_from_fixed_point(lambda, k, r);
  return out;
}

double theta_k(const SchmidtVector& lambda, int k) {
  return theta_k_detailed(lambda, k).from_spectrum;
}

NegativityReport reduction_negativity(const BipartiteDensity& rho, int k) {
  const ReducedOperator red = k_reduced_operator(rho, k);
  NegativityReport out;
  out.spectrum = hermitian_spectrum(red.matrix);
  out.min_eig = out.spectrum(0);
  double neg = 0.0;
  for (Eigen::Index i = 0; i < out.spectrum.size(); ++i) {
    if (out.spectrum(i) < 0.0) neg -= out.spectrum(i);
  }
  out.negativity = neg;
  return out;
}

RealVector pure_reduced_spectrum(const SchmidtVector& lambda, int k, int d_b) {
  const int d = lambda.size();
  if (d_b < d) {
    throw std::invalid_argument("pure_reduced_spectrum: requires d_b >= d");
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(omega_matrix(lambda, k),
                                                   Eigen::EigenvaluesOnly);
  RealVector out(static_cast<Eigen::Index>(d) * d_b);
  Eigen::Index pos = 0;
  for (int i = 0; i < d; ++i) out(pos++) = solver.eigenvalues()(i);
  for (int rep = 0; rep < d_b - 1; ++rep) {
    for (int i = 0; i < d; ++i) out(pos++) = k * lambda.lambda(i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<DistinctCoefficient> distinct_schmidt_coefficients(
    const SchmidtVector& lambda, double tol) {
  std::vector<DistinctCoefficient> out;
  for (Eigen::Index i = 0; i < lambda.lambda.size(); ++i) {
    const double v = lambda.lambda(i);
    if (v <= tol) continue;  // zeros are dropped
    if (!out.empty() && std::abs(out.back().value - v) <= tol) {
      ++out.back().multiplicity;
    } else {
      out.push_back(DistinctCoefficient{v, 1});
    }
  }
  return out;
}

RealMatrix tilde_omega(const std::vector<DistinctCoefficient>& coeffs, int k) {
  const int rt = static_cast<int>(coeffs.size());
  double sum = 0.0;
  for (const auto& c : coeffs) {
    if (c.value <= 0.0) {
      throw std::invalid_argument("tilde_omega: coefficients must be positive");
    }
    sum += c.multiplicity * c.value;
  }
  if (std::abs(sum - 1.0) > 1e-10) {
    throw std::invalid_argument("tilde_omega: sum_j m_j l_j != 1");
  }
  RealMatrix out(rt, rt);
  for (int i = 0; i < rt; ++i) {
    for (int j = 0; j < rt; ++j) {
      out(i, j) = -std::sqrt(coeffs[i].multiplicity * coeffs[j].multiplicity *
                             coeffs[i].value * coeffs[j].value);
      if (i == j) out(i, j) += k * coeffs[i].value;
    }
  }
  return out;
}

double depolarized_negativity(const SchmidtVector& psi_lambda, double eps,
                              int k, int d_a, int d_b) {
  if (eps < 0.0 || eps > 1.0) {
    throw std::invalid_argument("depolarized_negativity: eps outside [0,1]");
  }
  const double n_psi = theta_k(psi_lambda, k);
  const double dd = static_cast<double>(d_a) * d_b;
  const double eps_star = dd * n_psi / (k * d_b - 1.0 + dd * n_psi);
  if (eps >= eps_star) return 0.0;
  return (1.0 - eps) * n_psi - eps * (d_b * k - 1.0) / dd;
}

double noise_threshold_rm(int r, int d_a, int d_b) {
  const double u = 1.0 + (static_cast<double>(r) * r - r) / d_a -
                   static_cast<double>(r) / (static_cast<double>(d_a) * d_b);
  return 1.0 / u;
}

std::pair<int, int> schmidt_number_bounds_medp(int r, double eps, int d_a,
                                               int d_b) {
  if (eps < 0.0 || eps >= 1.0) {
    throw std::invalid_argument(
        "schmidt_number_bounds_medp: requires 0 <= eps < 1");
  }
  const double u = eps / ((1.0 - eps) * d_a * d_b);
  const double lower = (1.0 + u) * r / (1.0 + d_b * r * u);
  const double upper = (1.0 + u) * r / (1.0 + static_cast<double>(r) * r * u);
  return {static_cast<int>(std::ceil(lower - 1e-12)),
          static_cast<int>(std::ceil(upper - 1e-12))};
}

CriterionVerdict reduction_criterion(const BipartiteDensity& rho, int k,
                                     double tol) {
  const ReducedOperator red = k_reduced_operator(rho, k);
  const RealVector eigs = hermitian_spectrum(red.matrix);
  const double norm = std::max(std::abs(eigs(0)), std::abs(eigs(eigs.size() - 1)));
  CriterionVerdict v;
  v.k = k;
  v.witness = eigs(0);
  v.threshold = tol * std::max(1.0, norm);
  v.detected = eigs(0) < -v.threshold;
  return v;
}

}  // namespace sncert
