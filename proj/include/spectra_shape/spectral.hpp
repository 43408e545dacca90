#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "spectra_shape/pencil.hpp"

namespace spectra_shape
{

struct SolveOptions
{
  /// Eigenvalues below kernel_tol * lambda_scale are deflated as kernel modes.
  double kernel_tol = 1e-8;
};

/// Positive spectrum of a pencil after kernel deflation. eigenvalues(i) is the
/// 1-based eigenvalue number first_index + i.
struct EigenDecomposition
{
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  ///< M-orthonormal columns
  int kernel_dim = 0;
  int first_index = 1;
  double lambda_scale = 1.0;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  int last_index() const { return first_index + size() - 1; }
  double eigenvalue(int k) const;
  Eigen::VectorXd eigenvector(int k) const;
};

/// trace(K) / trace(M)
double lambda_scale(const Pencil &pencil);

/// Full dense solve. Throws PencilError when M is not positive definite.
EigenDecomposition solve_pencil(const Pencil &pencil, const SolveOptions &opts = {});

/// Eigenpairs k_lo..k_hi (1-based, positive spectrum) given the kernel
/// dimension of a nearby pencil. Falls back to a full solve when the kernel
/// dimension differs.
EigenDecomposition solve_pencil_window(const Pencil &pencil, int k_lo, int k_hi,
                                       int kernel_dim_hint, const SolveOptions &opts = {});

/// All generalized eigenvalues (kernel included), ascending.
Eigen::VectorXd pencil_eigenvalues(const Pencil &pencil);

/// Dense resolvent x = (K - zeta M)^{-1} M b with a spectrum-distance guard.
class ResolventOperator
{
public:
  explicit ResolventOperator(const Pencil &pencil);

  Eigen::MatrixXcd apply(std::complex<double> zeta, const Eigen::MatrixXcd &b) const;
  const Eigen::VectorXd &spectrum() const { return spectrum_; }
  double scale() const { return scale_; }

private:
  Eigen::MatrixXd k_;
  Eigen::MatrixXd m_;
  Eigen::VectorXd spectrum_;
  double scale_ = 1.0;
};

Eigen::VectorXcd resolvent_apply(const Pencil &pencil, std::complex<double> zeta,
                                 const Eigen::VectorXcd &b);

struct Circle
{
  std::complex<double> center;
  double radius = 1.0;
};

/// -(1/2 pi i) \oint (T - zeta)^{-1} dzeta with T = M^{-1} K, trapezoidal rule.
Eigen::MatrixXd riesz_projector(const Pencil &pencil, const Circle &contour, int nquad = 64);

/// Symmetric gap between span(U) and span(V) in the M inner product.
double subspace_gap(const Eigen::MatrixXd &u, const Eigen::MatrixXd &v, const Eigen::MatrixXd &m);
double subspace_gap(const Eigen::MatrixXd &u, const Eigen::MatrixXd &v, const SparseMatrix &m);

/// Re-orthonormalizes the columns of v in the M inner product.
Eigen::MatrixXd m_orthonormalize(const Eigen::MatrixXd &v, const SparseMatrix &m);

struct EigenCluster
{
  int first_index = 1;  ///< 1-based index k of the first member
  int multiplicity = 1;
  double mean = 0.0;
  double width = 0.0;  ///< max - min
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;

  int last_index() const { return first_index + multiplicity - 1; }
  std::vector<int> indices() const;
};

/// Maximal runs of eigenvalues whose consecutive relative gaps are <= cluster_tol.
std::vector<EigenCluster> cluster_spectrum(const EigenDecomposition &decomposition,
                                           double cluster_tol = 1e-6);

}  // namespace spectra_shape
