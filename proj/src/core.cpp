#include "sncert/core.hpp"

#include <algorithm>
#include <cmath>

namespace sncert {

bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

RealVector hermitian_spectrum(const Matrix& m, double herm_tol) {
  if (!is_hermitian(m, herm_tol)) {
    throw std::invalid_argument("hermitian_spectrum: matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();  // sorted nondecreasing
}

bool is_psd(const Matrix& m, double tol) {
  const RealVector eigs = hermitian_spectrum(m);
  if (eigs.size() == 0) return true;
  const double norm = std::max(std::abs(eigs(0)), std::abs(eigs(eigs.size() - 1)));
  return eigs(0) >= -tol * std::max(1.0, norm);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix partial_trace(const Matrix& m, int d_a, int d_b, Side side) {
  const int dim = d_a * d_b;
  if (m.rows() != dim || m.cols() != dim) {
    throw std::invalid_argument("partial_trace: dimension mismatch");
  }
  if (side == Side::A) {
    Matrix out = Matrix::Zero(d_a, d_a);
    for (int i = 0; i < d_a; ++i) {
      for (int ip = 0; ip < d_a; ++ip) {
        Complex s = 0.0;
        for (int j = 0; j < d_b; ++j) s += m(i * d_b + j, ip * d_b + j);
        out(i, ip) = s;
      }
    }
    return out;
  }
  Matrix out = Matrix::Zero(d_b, d_b);
  for (int j = 0; j < d_b; ++j) {
    for (int jp = 0; jp < d_b; ++jp) {
      Complex s = 0.0;
      for (int i = 0; i < d_a; ++i) s += m(i * d_b + j, i * d_b + jp);
      out(j, jp) = s;
    }
  }
  return out;
}

PureState::PureState(int d_a_, int d_b_, Vector amps)
    : d_a(d_a_), d_b(d_b_), amplitudes(std::move(amps)) {
  if (d_a < 1 || d_b < 1) {
    throw std::invalid_argument("PureState: dimensions must be positive");
  }
  if (amplitudes.size() != static_cast<Eigen::Index>(d_a) * d_b) {
    throw std::invalid_argument("PureState: amplitude length != d_a*d_b");
  }
  if (std::abs(amplitudes.norm() - 1.0) > kHermitianTol * dim()) {
    throw std::invalid_argument("PureState: amplitudes are not normalized");
  }
}

BipartiteDensity::BipartiteDensity(int d_a_, int d_b_, Matrix rho_)
    : d_a(d_a_), d_b(d_b_), rho(std::move(rho_)) {
  if (d_a < 1 || d_b < 1) {
    throw std::invalid_argument("BipartiteDensity: dimensions must be positive");
  }
  const int dim = d_a * d_b;
  if (rho.rows() != dim || rho.cols() != dim) {
    throw std::invalid_argument("BipartiteDensity: matrix size != d_a*d_b");
  }
  if (!is_hermitian(rho)) {
    throw std::invalid_argument("BipartiteDensity: matrix is not Hermitian");
  }
  if (std::abs(rho.trace().real() - 1.0) > 1e-10 ||
      std::abs(rho.trace().imag()) > 1e-10) {
    throw std::invalid_argument("BipartiteDensity: trace != 1");
  }
}

BipartiteDensity BipartiteDensity::from_pure(const PureState& psi) {
  return BipartiteDensity(psi.d_a, psi.d_b, psi.density());
}

SchmidtVector::SchmidtVector(RealVector lam) : lambda(std::move(lam)) {
  if (lambda.size() == 0) {
    throw std::invalid_argument("SchmidtVector: empty");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < -1e-14) {
      throw std::invalid_argument("SchmidtVector: negative entry");
    }
    if (i > 0 && lambda(i) > lambda(i - 1) + 1e-14) {
      throw std::invalid_argument("SchmidtVector: not sorted nonincreasing");
    }
    sum += lambda(i);
  }
  if (std::abs(sum - 1.0) > 1e-12 * lambda.size()) {
    throw std::invalid_argument("SchmidtVector: entries do not sum to 1");
  }
}

int SchmidtVector::schmidt_rank(double tol) const {
  int r = 0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > tol) ++r;
  }
  return r;
}

SchmidtDecomposition schmidt_decompose(const PureState& psi, double rank_tol) {
  const int d_a = psi.d_a;
  const int d_b = psi.d_b;
  const int d = std::min(d_a, d_b);

  // Amplitude matrix M with M(i,j) = <i,j|psi>; rho_A = M M^dagger.
  Matrix amp(d_a, d_b);
  for (int i = 0; i < d_a; ++i) {
    for (int j = 0; j < d_b; ++j) amp(i, j) = psi.amplitudes(i * d_b + j);
  }
  const Matrix rho_a = amp * amp.adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho_a);

  // Eigen sorts ascending; we want nonincreasing Schmidt coefficients.
  RealVector lam(d);
  Matrix basis_a(d_a, d_a);
  for (int i = 0; i < d_a; ++i) {
    const int src = d_a - 1 - i;
    if (i < d) lam(i) = std::max(0.0, solver.eigenvalues()(src));
    basis_a.col(i) = solver.eigenvectors().col(src);
  }
  const double total = lam.sum();
  if (total > 0) lam /= total;  // remove rounding drift

  // |i>_B = M^T conj(|i>_A) / sqrt(lambda_i) for nonzero coefficients, which
  // makes sum_i sqrt(lambda_i) |i>_A (x) |i>_B reproduce psi exactly; the
  // remaining columns are completed to an orthonormal set.
  Matrix basis_b = Matrix::Zero(d_b, d_b);
  int built = 0;
  for (int i = 0; i < d; ++i) {
    if (lam(i) > rank_tol) {
      basis_b.col(i) =
          (amp.transpose() * basis_a.col(i).conjugate()) / std::sqrt(lam(i));
      ++built;
    }
  }
  // Gram-Schmidt completion over the computational basis.
  for (int j = 0; built < d_b && j < d_b; ++j) {
    Vector cand = Vector::Zero(d_b);
    cand(j) = 1.0;
    for (int i = 0; i < built; ++i) {
      cand -= basis_b.col(i).dot(cand) * basis_b.col(i);
    }
    const double nrm = cand.norm();
    if (nrm > 1e-8) {
      basis_b.col(built++) = cand / nrm;
    }
  }

  SchmidtDecomposition out{SchmidtVector(lam), std::move(basis_a),
                           std::move(basis_b), 0};
  out.schmidt_number = out.coefficients.schmidt_rank(rank_tol);
  return out;
}

PureState maximally_entangled(int r, int d_a, int d_b) {
  if (r < 1 || r > std::min(d_a, d_b)) {
    throw std::invalid_argument("maximally_entangled: r out of range");
  }
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(d_a) * d_b);
  const double c = 1.0 / std::sqrt(static_cast<double>(r));
  for (int i = 0; i < r; ++i) amps(i * d_b + i) = c;
  return PureState(d_a, d_b, std::move(amps));
}

}  // namespace sncert
