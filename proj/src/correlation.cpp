#include "sncert/correlation.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace sncert {

namespace {

OperatorBasis build_gellmann(int d) {
  if (d < 2) throw std::invalid_argument("gellmann_basis: d must be >= 2");
  OperatorBasis basis;
  basis.d = d;
  basis.ops.reserve(static_cast<size_t>(d) * d - 1);
  const double scale = std::sqrt(d / 2.0);
  const Complex im(0.0, 1.0);
  // Symmetric and antisymmetric pairs.
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      Matrix x = Matrix::Zero(d, d);
      x(j, k) = scale;
      x(k, j) = scale;
      basis.ops.push_back(std::move(x));
      Matrix y = Matrix::Zero(d, d);
      y(j, k) = -im * scale;
      y(k, j) = im * scale;
      basis.ops.push_back(std::move(y));
    }
  }
  // Diagonal family: sqrt(2/(l(l+1))) (sum_{m<l} |m><m| - l |l><l|).
  for (int l = 1; l < d; ++l) {
    Matrix z = Matrix::Zero(d, d);
    const double c = scale * std::sqrt(2.0 / (static_cast<double>(l) * (l + 1)));
    for (int m = 0; m < l; ++m) z(m, m) = c;
    z(l, l) = -c * l;
    basis.ops.push_back(std::move(z));
  }
  return basis;
}

}  // namespace

const OperatorBasis& gellmann_basis(int d) {
  static std::mutex mutex;
  static std::map<int, OperatorBasis> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(d);
  if (it == cache.end()) {
    it = cache.emplace(d, build_gellmann(d)).first;
  }
  return it->second;
}

CorrelationMatrix correlation_matrix_in_bases(const BipartiteDensity& rho,
                                              const OperatorBasis& basis_a,
                                              const OperatorBasis& basis_b) {
  if (basis_a.d != rho.d_a || basis_b.d != rho.d_b) {
    throw std::invalid_argument("correlation_matrix: basis dimension mismatch");
  }
  const int d_a = rho.d_a;
  const int d_b = rho.d_b;
  const int na = static_cast<int>(basis_a.ops.size());
  const int nb = static_cast<int>(basis_b.ops.size());

  // Reshuffle rho into S with S[(a,b),(c,e)] = rho[(a,c),(b,e)] so that
  // Tr[rho (P x Q)] = vec(P^T)^dag' S vec(Q^T); avoids an O(d^8) entry loop.
  Matrix s(static_cast<Eigen::Index>(d_a) * d_a,
           static_cast<Eigen::Index>(d_b) * d_b);
  for (int a = 0; a < d_a; ++a) {
    for (int b = 0; b < d_a; ++b) {
      for (int c = 0; c < d_b; ++c) {
        for (int e = 0; e < d_b; ++e) {
          s(a * d_a + b, c * d_b + e) = rho.rho(a * d_b + c, b * d_b + e);
        }
      }
    }
  }
  Matrix pa(static_cast<Eigen::Index>(d_a) * d_a, na);
  for (int i = 0; i < na; ++i) {
    for (int a = 0; a < d_a; ++a) {
      for (int b = 0; b < d_a; ++b) {
        pa(a * d_a + b, i) = basis_a.ops[static_cast<size_t>(i)](b, a);
      }
    }
  }
  Matrix pb(static_cast<Eigen::Index>(d_b) * d_b, nb);
  for (int j = 0; j < nb; ++j) {
    for (int c = 0; c < d_b; ++c) {
      for (int e = 0; e < d_b; ++e) {
        pb(c * d_b + e, j) = basis_b.ops[static_cast<size_t>(j)](e, c);
      }
    }
  }
  const Matrix raw = pa.transpose() * s * pb;

  CorrelationMatrix out;
  out.t = raw.real() / static_cast<double>(std::min(d_a, d_b));
  Eigen::JacobiSVD<RealMatrix> svd(out.t);
  out.singular_values = svd.singularValues();
  return out;
}

CorrelationMatrix correlation_matrix(const BipartiteDensity& rho) {
  if (rho.d_a != rho.d_b) {
    throw std::invalid_argument("correlation_matrix: requires d_A = d_B");
  }
  const OperatorBasis& basis = gellmann_basis(rho.d_a);
  return correlation_matrix_in_bases(rho, basis, basis);
}

double schatten_norm(const CorrelationMatrix& t, int p) {
  if (p < 1) throw std::invalid_argument("schatten_norm: p must be >= 1");
  double s = 0.0;
  for (Eigen::Index i = 0; i < t.singular_values.size(); ++i) {
    s += std::pow(t.singular_values(i), p);
  }
  return std::pow(s, 1.0 / p);
}

CriterionVerdict cm_criterion(const BipartiteDensity& rho, int k, double tol) {
  const CorrelationMatrix t = correlation_matrix(rho);
  const double norm1 = schatten_norm(t, 1);
  const double bound = k - 1.0 / rho.d_a;
  CriterionVerdict v;
  v.k = k;
  v.witness = bound - norm1;  // negative when violated
  v.threshold = tol * std::max(1.0, norm1);
  v.detected = norm1 > bound + v.threshold;
  return v;
}

CriterionVerdict cm_holder_criterion(double norm2_sq, double norm4_quad, int k,
                                     int d, double tol) {
  if (norm2_sq < 0.0 || norm4_quad < 0.0) {
    throw std::invalid_argument("cm_holder_criterion: norms must be >= 0");
  }
  double ratio = 0.0;
  if (norm4_quad > 0.0) {
    ratio = std::pow(norm2_sq, 1.5) / std::sqrt(norm4_quad);
  }
  const double bound = k - 1.0 / d;
  CriterionVerdict v;
  v.k = k;
  v.witness = bound - ratio;
  v.threshold = tol * std::max(1.0, ratio);
  v.detected = ratio > bound + v.threshold;
  return v;
}

IsotropicCmValues isotropic_cm_values(int d, double fidelity) {
  if (fidelity < 0.0 || fidelity > 1.0) {
    throw std::invalid_argument("isotropic_cm_values: F outside [0,1]");
  }
  const double dd = d;
  // Singular value |d^2 F - 1| / [d (d^2-1)] with multiplicity d^2 - 1.
  const double num = dd * dd * fidelity - 1.0;
  IsotropicCmValues out;
  out.norm1 = std::abs(num) / dd;
  out.norm2_sq = num * num / (dd * dd * (dd * dd - 1.0));
  out.norm4_quad =
      num * num * num * num / (std::pow(dd, 4) * std::pow(dd * dd - 1.0, 3));
  return out;
}

}  // namespace sncert
