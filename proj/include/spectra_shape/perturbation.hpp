#pragma once

#include <Eigen/Dense>

#include <vector>

#include "spectra_shape/pencil.hpp"
#include "spectra_shape/spectral.hpp"

namespace spectra_shape
{

/// e_0..e_m of the values, via the coefficients of prod (1 + t lambda_i).
Eigen::VectorXd elementary_symmetric_all(const Eigen::VectorXd &values);

/// Lambda_{F,s}: sum over increasing s-subsets of products, 1 <= s <= m.
double elementary_symmetric(const Eigen::VectorXd &values, int s);

struct HatValue
{
  double lambda_hat = 0.0;  ///< e_s(lambda_i + 1)
  double m_hat = 0.0;       ///< e_s(1 / (lambda_i + 1))
};

/// Throws DomainError when some value equals -1 and when the direct and the
/// ratio evaluation of the hat function disagree beyond 1e-12 relative.
HatValue hat_functions(const Eigen::VectorXd &values, int s);

/// Lambda-hat_{F,0..m} of the values (entry 0 is 1).
Eigen::VectorXd hat_lambda_all(const Eigen::VectorXd &values);

/// Inverts the hat transform: Lambda_s = sum_p (-1)^{s-p} C(m-p, s-p) Lambda-hat_p
/// for hat values indexed 0..m. Returns Lambda_{F,0..m}.
Eigen::VectorXd reconstruct_lambda(const Eigen::VectorXd &hat_values);

double binomial(int n, int k);

/// R_hl = u_l^T dK u_h - lambda_bar u_l^T dM u_h, symmetrized.
Eigen::MatrixXd rellich_matrix(const PencilDerivative &deriv, const Eigen::MatrixXd &vectors,
                               double lambda_bar);
Eigen::MatrixXd rellich_matrix(const PencilDerivative &deriv, const EigenCluster &cluster);

/// Ascending eigenvalues of a symmetric matrix.
Eigen::VectorXd branch_slopes(const Eigen::MatrixXd &rellich);

/// u^T dK u - lambda u^T dM u for an M-normalized eigenvector.
double hellmann_feynman(const PencilDerivative &deriv, double lambda, const Eigen::VectorXd &u);
/// Throws MultiplicityError unless the cluster is simple.
double hellmann_feynman(const PencilDerivative &deriv, const EigenCluster &cluster);

/// lambda_bar^{s-1} C(m-1, s-1) trace(R)
double symmetric_function_derivative(const EigenCluster &cluster, const PencilDerivative &deriv,
                                     int s);
double symmetric_function_derivative(double lambda_bar, int m, const Eigen::MatrixXd &rellich,
                                     int s);

}  // namespace spectra_shape
