#include "sncert/shadows.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace sncert {

namespace {

// v = U^dag |b>, the unit vector carrying the whole snapshot:
// rho-hat = (D+1) v v^dag - I.
Vector shadow_vector(const ShadowSample& s) {
  return s.unitary.row(s.outcome).adjoint();
}

double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return var / static_cast<double>(xs.size() - 1);
}

double median_inplace(std::vector<double>& xs) {
  std::sort(xs.begin(), xs.end());
  const size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

ShadowSample sample_shadow(const Matrix& rho, RandomStream& rng) {
  const int dim = static_cast<int>(rho.rows());
  ShadowSample s;
  s.unitary = haar_unitary(dim, rng);
  const Matrix rotated = s.unitary * rho * s.unitary.adjoint();
  // Born probabilities along the computational basis.
  double total = 0.0;
  std::vector<double> probs(static_cast<size_t>(dim));
  for (int b = 0; b < dim; ++b) {
    probs[static_cast<size_t>(b)] = std::max(0.0, rotated(b, b).real());
    total += probs[static_cast<size_t>(b)];
  }
  double u = rng.uniform() * total;
  int outcome = dim - 1;
  for (int b = 0; b < dim; ++b) {
    u -= probs[static_cast<size_t>(b)];
    if (u <= 0.0) {
      outcome = b;
      break;
    }
  }
  s.outcome = outcome;
  return s;
}

ShadowSample sample_shadow(const BipartiteDensity& rho, RandomStream& rng) {
  return sample_shadow(rho.rho, rng);
}

Matrix expand_shadow(const ShadowSample& s) {
  const int dim = static_cast<int>(s.unitary.rows());
  const Vector v = shadow_vector(s);
  Matrix out = (dim + 1.0) * (v * v.adjoint());
  out -= Matrix::Identity(dim, dim);
  return out;
}

ShadowEstimate estimate_p2(const std::vector<ShadowSample>& shadows,
                           Aggregation agg, int groups) {
  const int m = static_cast<int>(shadows.size());
  if (m < 2) throw std::invalid_argument("estimate_p2: need at least 2 shadows");
  const int dim = static_cast<int>(shadows.front().unitary.rows());
  const double c = dim + 1.0;

  if (agg == Aggregation::MedianOfMeans && groups > 1 && m >= 2 * groups) {
    std::vector<double> means;
    means.reserve(static_cast<size_t>(groups));
    const int per = m / groups;
    for (int g = 0; g < groups; ++g) {
      std::vector<ShadowSample> part(shadows.begin() + g * per,
                                     shadows.begin() + (g + 1) * per);
      means.push_back(estimate_p2(part).value);
    }
    ShadowEstimate out;
    out.m = m;
    out.std_error = std::sqrt(sample_variance(means) / groups);
    out.value = median_inplace(means);
    return out;
  }

  // sum_{j<k} Tr(rho-hat_j rho-hat_k)
  //   = [Tr(S^2) - sum_i Tr(rho-hat_i^2)] / 2 with S = sum_i rho-hat_i.
  // Tr(rho-hat_i^2) = D^2 + D - 1 for every rank-one shadow.
  Matrix s_v = Matrix::Zero(dim, dim);
  std::vector<Vector> vs;
  vs.reserve(static_cast<size_t>(m));
  for (const auto& s : shadows) {
    vs.push_back(shadow_vector(s));
    s_v.noalias() += vs.back() * vs.back().adjoint();
  }
  // S = c S_v - M I.
  const double tr_sv = s_v.trace().real();           // = M
  const double tr_sv2 = (s_v * s_v).trace().real();
  const double tr_s2 =
      c * c * tr_sv2 - 2.0 * c * m * tr_sv + static_cast<double>(m) * m * dim;
  const double tr_self = static_cast<double>(dim) * dim + dim - 1.0;
  const double value =
      (tr_s2 - m * tr_self) / (static_cast<double>(m) * (m - 1));

  // Projection-based standard error: row means of the pair kernel.
  std::vector<double> row_means(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    const Vector& v = vs[static_cast<size_t>(i)];
    // Tr(rho-hat_i S) = c v^dag S v - Tr(S); S = c S_v - M I.
    const double vsv = (v.adjoint() * s_v * v).value().real();
    const double tr_is = c * (c * vsv - static_cast<double>(m)) -
                         (c * tr_sv - static_cast<double>(m) * dim);
    row_means[static_cast<size_t>(i)] = (tr_is - tr_self) / (m - 1.0);
  }
  ShadowEstimate out;
  out.value = value;
  out.m = m;
  out.std_error = std::sqrt(std::max(0.0, 4.0 * sample_variance(row_means) / m));
  return out;
}

namespace {

// Full symmetrized triple U-statistic for Tr(rho^3) from rank-one shadows,
// via the identity over ordered distinct triples
//   sum Tr(X_i X_j X_k) = Tr(S^3) - 3 sum_i Tr(X_i^2 S) + 2 sum_i Tr(X_i^3).
// Equals the explicit triple enumeration because Tr is cyclic.
double p3_full_value(const std::vector<Vector>& vs, int dim) {
  const int m = static_cast<int>(vs.size());
  const double c = dim + 1.0;
  Matrix s_v = Matrix::Zero(dim, dim);
  for (const auto& v : vs) s_v.noalias() += v * v.adjoint();
  const double tr_sv = s_v.trace().real();  // = M up to rounding
  const Matrix s_v2 = s_v * s_v;
  const double tr_sv2 = s_v2.trace().real();
  const double tr_sv3 = (s_v2 * s_v).trace().real();
  // S = c S_v - M I.
  const double tr_s = c * tr_sv - static_cast<double>(m) * dim;
  const double tr_s3 = c * c * c * tr_sv3 - 3.0 * c * c * m * tr_sv2 +
                       3.0 * c * m * m * tr_sv -
                       static_cast<double>(m) * m * m * dim;
  // A shadow has eigenvalues {D, -1 x (D-1)}, so Tr(X_i^3) = D^3 - D + 1.
  const double tr_self3 =
      std::pow(static_cast<double>(dim), 3) - (dim - 1.0);
  double sum_x2s = 0.0;
  for (const auto& v : vs) {
    // Tr(X_i^2 S) with X_i^2 = (c^2 - 2c) v v^dag + I.
    const double vsv = (v.adjoint() * s_v * v).value().real();
    sum_x2s += (c * c - 2.0 * c) * (c * vsv - static_cast<double>(m)) + tr_s;
  }
  const double ordered_sum = tr_s3 - 3.0 * sum_x2s + 2.0 * m * tr_self3;
  return ordered_sum / (static_cast<double>(m) * (m - 1) * (m - 2));
}

}  // namespace

ShadowEstimate estimate_p3(const std::vector<ShadowSample>& shadows,
                           RandomStream& rng, uint64_t triple_budget,
                           Aggregation agg, int groups) {
  const int m = static_cast<int>(shadows.size());
  if (m < 3) throw std::invalid_argument("estimate_p3: need at least 3 shadows");
  const int dim = static_cast<int>(shadows.front().unitary.rows());
  const double c = dim + 1.0;

  if (agg == Aggregation::MedianOfMeans && groups > 1 && m >= 3 * groups) {
    std::vector<double> means;
    means.reserve(static_cast<size_t>(groups));
    const int per = m / groups;
    for (int g = 0; g < groups; ++g) {
      std::vector<ShadowSample> part(shadows.begin() + g * per,
                                     shadows.begin() + (g + 1) * per);
      means.push_back(estimate_p3(part, rng, triple_budget).value);
    }
    ShadowEstimate out;
    out.m = m;
    out.std_error = std::sqrt(sample_variance(means) / groups);
    out.value = median_inplace(means);
    return out;
  }

  std::vector<Vector> vs;
  vs.reserve(static_cast<size_t>(m));
  for (const auto& s : shadows) vs.push_back(shadow_vector(s));

  const double ordered_count = static_cast<double>(m) * (m - 1) * (m - 2);
  if (ordered_count <= static_cast<double>(triple_budget)) {
    ShadowEstimate out;
    out.value = p3_full_value(vs, dim);
    out.m = m;
    if (m >= 4) {
      // Jackknife standard error over leave-one-out re-evaluations.
      std::vector<double> loo(static_cast<size_t>(m));
      std::vector<Vector> rest(vs.begin() + 1, vs.end());
      for (int i = 0; i < m; ++i) {
        if (i > 0) rest[static_cast<size_t>(i) - 1] = vs[static_cast<size_t>(i) - 1];
        loo[static_cast<size_t>(i)] = p3_full_value(rest, dim);
      }
      double mean = 0.0;
      for (double x : loo) mean += x;
      mean /= m;
      double ss = 0.0;
      for (double x : loo) ss += (x - mean) * (x - mean);
      out.std_error = std::sqrt(ss * (m - 1.0) / m);
    }
    return out;
  }

  // Uniform subsample of distinct ordered triples, without replacement.
  std::unordered_set<uint64_t> seen;
  std::vector<double> kernels;
  kernels.reserve(triple_budget);
  const uint64_t mm = static_cast<uint64_t>(m);
  while (kernels.size() < triple_budget) {
    const uint64_t i = rng.next_u64() % mm;
    const uint64_t j = rng.next_u64() % mm;
    const uint64_t k = rng.next_u64() % mm;
    if (i == j || j == k || i == k) continue;
    const uint64_t key = (i * mm + j) * mm + k;
    if (!seen.insert(key).second) continue;
    const Vector& vi = vs[static_cast<size_t>(i)];
    const Vector& vj = vs[static_cast<size_t>(j)];
    const Vector& vk = vs[static_cast<size_t>(k)];
    const Complex gij = vi.dot(vj);  // <vi|vj>
    const Complex gjk = vj.dot(vk);
    const Complex gki = vk.dot(vi);
    const double cubic = (gij * gjk * gki).real();
    const double kernel = c * c * c * cubic -
                          c * c * (std::norm(gij) + std::norm(gjk) + std::norm(gki)) +
                          3.0 * c - dim;
    kernels.push_back(kernel);
  }
  double mean = 0.0;
  for (double x : kernels) mean += x;
  mean /= static_cast<double>(kernels.size());
  ShadowEstimate out;
  out.value = mean;
  out.m = m;
  out.std_error =
      std::sqrt(sample_variance(kernels) / static_cast<double>(kernels.size()));
  return out;
}

ShadowEstimate estimate_t2(const std::vector<ShadowSample>& shadows_ab,
                           const std::vector<ShadowSample>& shadows_a,
                           int d_a, int d_b) {
  const int m = static_cast<int>(shadows_ab.size());
  const int l = static_cast<int>(shadows_a.size());
  if (m < 2 || l < 1) {
    throw std::invalid_argument("estimate_t2: need M >= 2 and L >= 1");
  }
  const int dim = d_a * d_b;
  if (shadows_ab.front().unitary.rows() != dim ||
      shadows_a.front().unitary.rows() != d_a) {
    throw std::invalid_argument("estimate_t2: dimension mismatch");
  }
  const double c = dim + 1.0;
  const double ca = d_a + 1.0;

  Matrix s_v = Matrix::Zero(dim, dim);
  std::vector<Vector> vs;
  vs.reserve(static_cast<size_t>(m));
  for (const auto& s : shadows_ab) {
    vs.push_back(shadow_vector(s));
    s_v.noalias() += vs.back() * vs.back().adjoint();
  }
  // K = Tr_B(S^2 - sum_i X_i^2) with S = c S_v - M I and
  // X_i^2 = (c^2 - 2c) v_i v_i^dag + I:
  //   S^2 = c^2 S_v^2 - 2 c M S_v + M^2 I,
  //   sum X_i^2 = (c^2 - 2c) S_v + M I.
  const Matrix s_v2 = s_v * s_v;
  Matrix pair_op = c * c * s_v2 -
                   (2.0 * c * m + c * c - 2.0 * c) * s_v;
  pair_op += (static_cast<double>(m) * m - m) * Matrix::Identity(dim, dim);
  const Matrix k_mat = partial_trace(pair_op, d_a, d_b, Side::A);

  // Per-ell contribution: Tr_A(a-hat_ell K) with a-hat = ca w w^dag - I_A.
  const double denom = static_cast<double>(m) * (m - 1);
  std::vector<double> t_ell(static_cast<size_t>(l));
  Matrix a_bar = Matrix::Zero(d_a, d_a);
  for (int e = 0; e < l; ++e) {
    const Vector w = shadow_vector(shadows_a[static_cast<size_t>(e)]);
    const double waw = (w.adjoint() * k_mat * w).value().real();
    const double tr_ak = ca * waw - k_mat.trace().real();
    t_ell[static_cast<size_t>(e)] = tr_ak / denom;
    a_bar.noalias() += ca * (w * w.adjoint());
    a_bar -= Matrix::Identity(d_a, d_a);
  }
  double value = 0.0;
  for (double x : t_ell) value += x;
  value /= static_cast<double>(l);

  // Two projection pieces: the spread over the L single-party shadows and
  // the pair-projection over the M global shadows.
  double se2 = l >= 2 ? sample_variance(t_ell) / l : 0.0;
  if (m >= 3) {
    const Matrix b = kron(a_bar / static_cast<double>(l),
                          Matrix::Identity(d_b, d_b));
    const Matrix s_full =
        c * s_v - static_cast<double>(m) * Matrix::Identity(dim, dim);
    const Matrix sb = s_full * b;
    const Matrix bs = b * s_full;
    const double tr_sb = sb.trace().real();
    std::vector<double> g(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
      const Vector& v = vs[static_cast<size_t>(i)];
      // psi_i = Tr[B (X_i S + S X_i - 2 X_i^2)] / (2 (M-1)) with
      // Tr[B X_i S] = c v^dag (S B) v - Tr(B S), etc.
      const double tr_bxs = (c * (v.adjoint() * sb * v).value().real() - tr_sb) +
                            (c * (v.adjoint() * bs * v).value().real() - tr_sb);
      const double tr_bx2 =
          (c * c - 2.0 * c) * (v.adjoint() * b * v).value().real() +
          b.trace().real();
      g[static_cast<size_t>(i)] = (tr_bxs - 2.0 * tr_bx2) / (2.0 * (m - 1.0));
    }
    se2 += 4.0 * sample_variance(g) / m;
  }

  ShadowEstimate out;
  out.value = value;
  out.std_error = std::sqrt(std::max(0.0, se2));
  out.m = m;
  out.l = l;
  return out;
}

ShadowEstimate estimate_p2_from_matrices(const std::vector<Matrix>& x) {
  const int m = static_cast<int>(x.size());
  if (m < 2) throw std::invalid_argument("estimate_p2: need at least 2 inputs");
  const int dim = static_cast<int>(x.front().rows());
  Matrix s = Matrix::Zero(dim, dim);
  double self = 0.0;
  for (const auto& xi : x) {
    s += xi;
    self += (xi * xi).trace().real();
  }
  const double tr_s2 = (s * s).trace().real();
  ShadowEstimate out;
  out.value = (tr_s2 - self) / (static_cast<double>(m) * (m - 1));
  out.m = m;
  std::vector<double> row_means(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    const auto& xi = x[static_cast<size_t>(i)];
    row_means[static_cast<size_t>(i)] =
        ((xi * s).trace().real() - (xi * xi).trace().real()) / (m - 1.0);
  }
  out.std_error = std::sqrt(std::max(0.0, 4.0 * sample_variance(row_means) / m));
  return out;
}

ShadowEstimate estimate_p3_from_matrices(const std::vector<Matrix>& x) {
  const int m = static_cast<int>(x.size());
  if (m < 3) throw std::invalid_argument("estimate_p3: need at least 3 inputs");
  const int dim = static_cast<int>(x.front().rows());
  Matrix s = Matrix::Zero(dim, dim);
  for (const auto& xi : x) s += xi;
  const Matrix s2 = s * s;
  double sum_x2s = 0.0;
  double sum_x3 = 0.0;
  for (const auto& xi : x) {
    const Matrix xi2 = xi * xi;
    sum_x2s += (xi2 * s).trace().real();
    sum_x3 += (xi2 * xi).trace().real();
  }
  const double ordered_sum = (s2 * s).trace().real() - 3.0 * sum_x2s + 2.0 * sum_x3;
  ShadowEstimate out;
  out.value = ordered_sum / (static_cast<double>(m) * (m - 1) * (m - 2));
  out.m = m;
  return out;
}

ShadowEstimate estimate_t2_from_matrices(const std::vector<Matrix>& x_ab,
                                         const std::vector<Matrix>& x_a,
                                         int d_a, int d_b) {
  const int m = static_cast<int>(x_ab.size());
  const int l = static_cast<int>(x_a.size());
  if (m < 2 || l < 1) {
    throw std::invalid_argument("estimate_t2: need M >= 2 and L >= 1");
  }
  const int dim = d_a * d_b;
  Matrix s = Matrix::Zero(dim, dim);
  Matrix x2 = Matrix::Zero(dim, dim);
  for (const auto& xi : x_ab) {
    s += xi;
    x2 += xi * xi;
  }
  const Matrix k_mat = partial_trace(s * s - x2, d_a, d_b, Side::A);
  const double denom = static_cast<double>(m) * (m - 1);
  std::vector<double> t_ell(static_cast<size_t>(l));
  for (int e = 0; e < l; ++e) {
    t_ell[static_cast<size_t>(e)] =
        (x_a[static_cast<size_t>(e)] * k_mat).trace().real() / denom;
  }
  ShadowEstimate out;
  double total = 0.0;
  for (double t : t_ell) total += t;
  out.value = total / l;
  out.m = m;
  out.l = l;
  out.std_error = l >= 2 ? std::sqrt(sample_variance(t_ell) / l) : 0.0;
  return out;
}

double p2_variance_bound(double p2, double p3, int dim, int m) {
  if (m < 2) throw std::invalid_argument("p2_variance_bound: M must be >= 2");
  const double mm = m;
  const double dd = dim;
  return 4.0 * (mm - 2.0) / (mm * (mm - 1.0)) * (p2 + 2.0 * p3) +
         2.0 / (mm * (mm - 1.0)) * ((dd + 1.0) * (dd + 1.0) + 2.0 * dd * p2);
}

MomentTupleEstimate estimate_moment_tuple(const BipartiteDensity& rho, int m,
                                          int l, RandomStream& rng,
                                          uint64_t triple_budget) {
  if (rho.d_a != rho.d_b) {
    throw std::invalid_argument("estimate_moment_tuple: requires d_a = d_b");
  }
  std::vector<ShadowSample> ab;
  ab.reserve(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) ab.push_back(sample_shadow(rho.rho, rng));

  const Matrix rho_a = rho.reduced_a();
  std::vector<ShadowSample> a;
  a.reserve(static_cast<size_t>(l));
  for (int i = 0; i < l; ++i) a.push_back(sample_shadow(rho_a, rng));

  const ShadowEstimate p2 = estimate_p2(ab);
  const ShadowEstimate p3 = estimate_p3(ab, rng, triple_budget);
  const ShadowEstimate a2 = estimate_p2(a);
  const ShadowEstimate a3 = estimate_p3(a, rng, triple_budget);
  const ShadowEstimate t2 = estimate_t2(ab, a, rho.d_a, rho.d_b);

  MomentTupleEstimate out;
  out.values = MomentTuple{p2.value, p3.value, a2.value, a3.value, t2.value};
  out.std_errors = MomentTuple{p2.std_error, p3.std_error, a2.std_error,
                               a3.std_error, t2.std_error};
  out.m = m;
  out.l = l;
  return out;
}

MomentTuple exact_moment_tuple(const BipartiteDensity& rho) {
  MomentTuple out;
  const Matrix rho2 = rho.rho * rho.rho;
  out.p2 = rho2.trace().real();
  out.p3 = (rho2 * rho.rho).trace().real();
  const Matrix rho_a = rho.reduced_a();
  const Matrix rho_a2 = rho_a * rho_a;
  out.a2 = rho_a2.trace().real();
  out.a3 = (rho_a2 * rho_a).trace().real();
  out.t2 = (rho_a * partial_trace(rho2, rho.d_a, rho.d_b, Side::A))
               .trace()
               .real();
  return out;
}

ShadowEstimate permutation_test_estimate(const std::vector<Matrix>& states,
                                         int shots, RandomStream& rng) {
  if (states.empty() || shots < 1) {
    throw std::invalid_argument("permutation_test_estimate: need states and shots >= 1");
  }
  const Eigen::Index dim = states.front().rows();
  Matrix prod = states.front();
  for (size_t i = 1; i < states.size(); ++i) {
    if (states[i].rows() != dim || states[i].cols() != dim) {
      throw std::invalid_argument("permutation_test_estimate: dimension mismatch");
    }
    prod = prod * states[i];
  }
  const double trace = prod.trace().real();
  const double p_plus = std::clamp(0.5 + 0.5 * trace, 0.0, 1.0);
  int plus = 0;
  for (int s = 0; s < shots; ++s) {
    if (rng.uniform() < p_plus) ++plus;
  }
  const double phat = static_cast<double>(plus) / shots;
  ShadowEstimate out;
  out.value = 2.0 * phat - 1.0;
  out.std_error = 2.0 * std::sqrt(std::max(phat * (1.0 - phat), 1.0 / shots) /
                                  shots);
  out.m = shots;
  return out;
}

}  // namespace sncert
