#pragma once

#include <array>
#include <vector>

#include "sncert/core.hpp"
#include "sncert/reduction.hpp"

// Moment sequences q_n = Tr[R_k(rho)^n], the Hankel matrices B_N built from
// them, the certification criteria, and the third-order polynomial form.
namespace sncert {

enum class MomentSource { Exact, AnalyticPure, Estimated };

/// q holds (q_1, ..., q_N); q_n(n) is 1-indexed to match the math.
struct MomentSequence {
  int k = 0;
  std::vector<double> q;
  MomentSource source = MomentSource::Exact;

  double q_n(int n) const { return q.at(static_cast<size_t>(n) - 1); }
  int max_order() const { return static_cast<int>(q.size()); }
};

/// Power sums of a spectrum: (sum_i x_i^1, ..., sum_i x_i^n_max).
std::vector<double> power_sums(const RealVector& spectrum, int n_max);

/// Moments of R_k(rho) from one dense eigensolve.
MomentSequence reduction_moments(const BipartiteDensity& rho, int k, int n_max);

/// Moments of R_k(psi) for a pure state from the d x d matrix Omega_k:
/// q_n = tr[Omega_k^n] + (d_B - 1) k^n sum_i lambda_i^n.
MomentSequence pure_reduction_moments(const SchmidtVector& lambda, int k,
                                      int d_b, int n_max);

/// B_N: for odd N the Hankel of (q_1..q_N); for even N the Hankel of
/// (k q_1 - q_2, ..., k q_{N-1} - q_N).
RealMatrix hankel_bn(const MomentSequence& q, int n);

/// Lemma-style truncated [a,b]-moment test on a sequence (s_0, ..., s_N).
bool truncated_moment_check(const std::vector<double>& s, double a, double b,
                            double tol = kPsdTol);

/// N-th order moment criterion: detected iff B_N[rho,k] is not PSD. The PSD
/// test runs on the k-normalized sequence q_n / k^n (a positive diagonal
/// congruence of B_N, so the verdict is unchanged but the conditioning is
/// independent of k and N). `slack` loosens the threshold for moments that
/// carry statistical noise; it is expressed on the normalized scale.
CriterionVerdict moment_criterion(const MomentSequence& q, int n,
                                  double slack = 0.0, double tol = kPsdTol);

/// Number of distinct nonzero eigenvalue clusters (gap tolerance tol).
int distinct_nonzero_values(const RealVector& spectrum, double tol = 1e-8);
int distinct_nonzero_eigs(const Matrix& m, double tol = 1e-8);

/// Certifies SN(rho) >= target_sn by testing B_N[rho, target_sn - 1] for
/// N = 3..n_max; returns at the first violated order. Requires target_sn >= 2.
CriterionVerdict certify_sn_ge(const BipartiteDensity& rho, int target_sn,
                               int n_max, double slack = 0.0);

/// Largest s such that SN(rho) >= s is certified for every step 2..s,
/// stopping at the first failure.
int best_lower_bound(const BipartiteDensity& rho, int n_max, int r_max,
                     double slack = 0.0);

/// det(B_3[rho,k]) as a quartic in k with coefficients built from the
/// moments p_2, p_3, a_2, a_3, t_2. beta[i] multiplies k^i.
struct DetB3Polynomial {
  std::array<double, 5> beta{};
  double eval(double k) const {
    return beta[0] + k * (beta[1] + k * (beta[2] + k * (beta[3] + k * beta[4])));
  }
};
DetB3Polynomial det_b3_coeffs(double p2, double p3, double a2, double a3,
                              double t2, int d_b);

/// Third-order criterion: q_1 = k d_B - 1 > 0, so B_3 >= 0 iff det(B_3) >= 0.
CriterionVerdict third_order_criterion(double p2, double p3, double a2,
                                       double a3, double t2, int d_b, int k,
                                       double slack = 0.0, double tol = kPsdTol);

enum class Detectability { DetectGuaranteed, NondetectGuaranteed, Indeterminate };

/// Pure-state detectability of the N-th order criterion: guaranteed to
/// detect for every k < r when N >= 4 r~ - 1; guaranteed not to detect at
/// k = r - 1 when N <= 2 r~ and d_B exceeds 1 + r r~ N_{r-1}(psi) /
/// sigma_min(A_0). A Schmidt-rank-1 state is never detectable.
Detectability pure_detect_bounds(const SchmidtVector& lambda, int d_b, int n);

}  // namespace sncert
