#pragma once

#include <utility>
#include <vector>

#include "sncert/core.hpp"

// The k-reduction map R_k(rho) = k rho_A (x) I_B - rho, its spectrum on pure
// states, the k-reduction negativity, and the depolarizing-noise closed forms.
namespace sncert {

struct ReducedOperator {
  int k = 0;
  Matrix matrix;
};

struct NegativityReport {
  double negativity = 0.0;
  double min_eig = 0.0;
  RealVector spectrum;  // sorted nondecreasing
};

ReducedOperator k_reduced_operator(const BipartiteDensity& rho, int k);

/// Omega_k(lambda)_{ij} = k lambda_i delta_{ij} - sqrt(lambda_i lambda_j).
RealMatrix omega_matrix(const SchmidtVector& lambda, int k);

/// theta_k computed two independent ways: eigensolve of Omega_k (primary)
/// and the fixed-point equation sum_i lambda_i / (k lambda_i + y) = 1 solved
/// by bisection on (0, 1 - k/r]. Both are zero when k >= Schmidt rank.
struct ThetaResult {
  double from_spectrum = 0.0;
  double from_fixed_point = 0.0;
};
ThetaResult theta_k_detailed(const SchmidtVector& lambda, int k);
double theta_k(const SchmidtVector& lambda, int k);

/// N_k(rho) = (||R_k(rho)||_1 - k d_B + 1) / 2, from the eigenvalue multiset.
NegativityReport reduction_negativity(const BipartiteDensity& rho, int k);

/// sigma(R_k(psi)) = sigma(Omega_k(lambda)) u [k sigma(psi)]^{x(d_B-1)},
/// assembled without forming the D x D operator. Sorted nondecreasing.
RealVector pure_reduced_spectrum(const SchmidtVector& lambda, int k, int d_b);

struct DistinctCoefficient {
  double value = 0.0;   // distinct nonzero Schmidt coefficient l_j
  int multiplicity = 0; // m_j
};

/// Distinct nonzero coefficients of lambda, largest first. Zero entries are
/// dropped; clustering uses an absolute gap tolerance.
std::vector<DistinctCoefficient> distinct_schmidt_coefficients(
    const SchmidtVector& lambda, double tol = 1e-8);

/// Compressed r~ x r~ matrix with entries
/// k l_i delta_{ij} - sqrt(m_i m_j l_i l_j). Requires sum_j m_j l_j = 1.
RealMatrix tilde_omega(const std::vector<DistinctCoefficient>& coeffs, int k);

/// Closed-form negativity of (1-eps)|psi><psi| + eps I/(d_A d_B).
double depolarized_negativity(const SchmidtVector& psi_lambda, double eps,
                              int k, int d_a, int d_b);

/// Critical noise for certifying SN(rho_{eps,r}) = r with the reduction map:
/// (1 + (r^2-r)/d_A - r/(d_A d_B))^{-1}.
double noise_threshold_rm(int r, int d_a, int d_b);

/// Integer Schmidt-number bounds for the maximally-entangled depolarized
/// state. eps = 1 is rejected (the bound parameter u is undefined there).
std::pair<int, int> schmidt_number_bounds_medp(int r, double eps, int d_a,
                                               int d_b);

/// Exact k-reduction criterion: detected iff R_k(rho) is not PSD.
CriterionVerdict reduction_criterion(const BipartiteDensity& rho, int k,
                                     double tol = kPsdTol);

}  // namespace sncert
