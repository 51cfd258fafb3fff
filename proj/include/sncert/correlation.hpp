#pragma once

#include <vector>

#include "sncert/core.hpp"

// Correlation matrix criterion and its moment variants, the comparison
// baseline for the reduction-map criteria.
namespace sncert {

/// d^2 - 1 traceless Hermitian operators with Tr(P_i P_j) = d delta_ij.
struct OperatorBasis {
  int d = 0;
  std::vector<Matrix> ops;
};

/// Generalized Gell-Mann matrices scaled by sqrt(d/2); memoized per d
/// (read-mostly cache, safe for concurrent readers).
const OperatorBasis& gellmann_basis(int d);

/// T_ij = (1/d) Tr[rho (P_i^(A) x P_j^(B))] with singular values computed at
/// construction, sorted nonincreasing.
struct CorrelationMatrix {
  RealMatrix t;
  RealVector singular_values;
};

CorrelationMatrix correlation_matrix_in_bases(const BipartiteDensity& rho,
                                              const OperatorBasis& basis_a,
                                              const OperatorBasis& basis_b);
/// Gell-Mann basis on both sides; requires d_A = d_B.
CorrelationMatrix correlation_matrix(const BipartiteDensity& rho);

/// Schatten p-norm from the singular values.
double schatten_norm(const CorrelationMatrix& t, int p);

/// CM criterion: SN(rho) <= k implies ||T||_1 <= k - 1/d.
CriterionVerdict cm_criterion(const BipartiteDensity& rho, int k,
                              double tol = kPsdTol);

/// Moment variant via Hoelder: SN(rho) <= k implies
/// ||T||_2^3 / ||T||_4^2 <= k - 1/d. The 0/0 case counts as not detected.
CriterionVerdict cm_holder_criterion(double norm2_sq, double norm4_quad, int k,
                                     int d, double tol = kPsdTol);

struct IsotropicCmValues {
  double norm1 = 0.0;
  double norm2_sq = 0.0;
  double norm4_quad = 0.0;
};

/// Closed forms for the isotropic state: every singular value of T equals
/// |d^2 F - 1| / [d (d^2 - 1)].
IsotropicCmValues isotropic_cm_values(int d, double fidelity);

}  // namespace sncert
