#pragma once

#include <Eigen/Dense>
#include <complex>

#include "irslab/errors.hpp"

namespace irslab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Single home for the numerical thresholds used across the library.
struct ToleranceConfig {
  double zero_tol = 1e-12;  ///< relative magnitude below which a value counts as zero
  double psd_tol = 1e-9;    ///< eigenvalue floor (relative) for PSD checks
  double rank_tol = 1e-9;   ///< singular values below rank_tol * sigma_max do not count

  void validate() const {
    if (!(zero_tol > 0 && zero_tol < 1e-3) || !(psd_tol > 0 && psd_tol < 1e-3) ||
        !(rank_tol > 0 && rank_tol < 1e-3))
      throw ConfigError("ToleranceConfig: thresholds must lie in (0, 1e-3)");
  }
};

inline bool all_finite(const ComplexMatrix& a) { return a.allFinite(); }

/// ||A - A^H||_F <= zero_tol * ||A||_F (zero matrix counts as Hermitian).
bool is_hermitian(const ComplexMatrix& a, double zero_tol = 1e-12);

struct HermitianEig {
  RealVector eigenvalues;      ///< sorted descending
  ComplexMatrix eigenvectors;  ///< columns, unitary
};

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
HermitianEig hermitian_eig(const ComplexMatrix& a, const ToleranceConfig& tol = {});

struct Svd {
  ComplexMatrix u;
  RealVector singular_values;  ///< descending, >= 0, min(rows, cols) of them
  ComplexMatrix v;
};

/// Thin SVD, A = U * diag(s) * V^H.
Svd svd(const ComplexMatrix& a);

/// Solve A X = B for Hermitian positive-definite A via Cholesky.
ComplexMatrix hpd_solve(const ComplexMatrix& a, const ComplexMatrix& b,
                        const ToleranceConfig& tol = {});

/// log2(det(A)) for Hermitian positive-definite A.
double log2_det_hpd(const ComplexMatrix& a);

}  // namespace irslab
