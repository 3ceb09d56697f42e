#include "irslab/numerics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace irslab {

bool is_hermitian(const ComplexMatrix& a, double zero_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.norm();
  if (scale == 0.0) return true;
  return (a - a.adjoint()).norm() <= zero_tol * scale;
}

HermitianEig hermitian_eig(const ComplexMatrix& a, const ToleranceConfig& tol) {
  require(a.rows() == a.cols(), "hermitian_eig: matrix must be square");
  require(all_finite(a), "hermitian_eig: entries must be finite");
  require(is_hermitian(a, tol.zero_tol), "hermitian_eig: matrix must be Hermitian");

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a);
  if (es.info() != Eigen::Success) throw DecompositionError("hermitian_eig: solver failed");

  const Eigen::Index n = a.rows();
  HermitianEig out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {  // Eigen sorts ascending; we want descending
    out.eigenvalues(i) = es.eigenvalues()(n - 1 - i);
    out.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return out;
}

Svd svd(const ComplexMatrix& a) {
  require(all_finite(a), "svd: entries must be finite");
  Eigen::JacobiSVD<ComplexMatrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return Svd{solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

ComplexMatrix hpd_solve(const ComplexMatrix& a, const ComplexMatrix& b,
                        const ToleranceConfig& tol) {
  require(a.rows() == a.cols(), "hpd_solve: A must be square");
  require(a.cols() == b.rows(), "hpd_solve: dimension mismatch");
  require(is_hermitian(a, tol.zero_tol), "hpd_solve: A must be Hermitian");

  Eigen::LLT<ComplexMatrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw DecompositionError("hpd_solve: Cholesky failed, A is not positive definite");
  return llt.solve(b);
}

double log2_det_hpd(const ComplexMatrix& a) {
  Eigen::LLT<ComplexMatrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw DecompositionError("log2_det_hpd: matrix is not positive definite");
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < a.rows(); ++i) acc += std::log(l(i, i).real());
  return 2.0 * acc / std::log(2.0);
}

}  // namespace irslab
