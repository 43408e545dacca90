#include "spectra_shape/perturbation.hpp"

#include <cmath>

#include "spectra_shape/errors.hpp"

namespace spectra_shape
{

Eigen::VectorXd elementary_symmetric_all(const Eigen::VectorXd &values)
{
  const Eigen::Index m = values.size();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(m + 1);
  e(0) = 1.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index s = i + 1; s >= 1; --s) e(s) += values(i) * e(s - 1);
  return e;
}

double elementary_symmetric(const Eigen::VectorXd &values, int s)
{
  if (s < 1 || s > values.size())
    throw DomainError("symmetric function order " + std::to_string(s) + " outside [1, " +
                      std::to_string(values.size()) + "]");
  return elementary_symmetric_all(values)(s);
}

Eigen::VectorXd hat_lambda_all(const Eigen::VectorXd &values)
{
  return elementary_symmetric_all(values.array() + 1.0);
}

HatValue hat_functions(const Eigen::VectorXd &values, int s)
{
  const Eigen::Index m = values.size();
  if (s < 0 || s > m)
    throw DomainError("hat function order " + std::to_string(s) + " outside [0, " +
                      std::to_string(m) + "]");
  for (Eigen::Index i = 0; i < m; ++i)
    if (values(i) == -1.0) throw DomainError("hat functions are undefined for eigenvalue -1");
  const Eigen::VectorXd direct = hat_lambda_all(values);
  const Eigen::VectorXd inverse = elementary_symmetric_all((values.array() + 1.0).inverse());
  const double ratio = inverse(m - s) / inverse(m);
  if (std::abs(ratio - direct(s)) > 1e-12 * std::max(1.0, std::abs(direct(s))))
    throw DomainError("hat function evaluations disagree: direct " + std::to_string(direct(s)) +
                      ", ratio " + std::to_string(ratio));
  return {direct(s), inverse(s)};
}

double binomial(int n, int k)
{
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

Eigen::VectorXd reconstruct_lambda(const Eigen::VectorXd &hat_values)
{
  const int m = static_cast<int>(hat_values.size()) - 1;
  if (m < 0) throw DomainError("reconstruct_lambda needs at least the zeroth hat value");
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m + 1);
  for (int s = 0; s <= m; ++s)
    for (int p = 0; p <= s; ++p)
    {
      const double sign = ((s - p) % 2 == 0) ? 1.0 : -1.0;
      lambda(s) += sign * binomial(m - p, s - p) * hat_values(p);
    }
  return lambda;
}

Eigen::MatrixXd rellich_matrix(const PencilDerivative &deriv, const Eigen::MatrixXd &vectors,
                               double lambda_bar)
{
  if (deriv.dK.rows() != vectors.rows() || deriv.dM.rows() != vectors.rows())
    throw ContractViolation("rellich_matrix: derivative has " + std::to_string(deriv.dK.rows()) +
                            " rows, eigenvector block has " + std::to_string(vectors.rows()));
  const Eigen::MatrixXd dk = vectors.transpose() * (deriv.dK * vectors);
  const Eigen::MatrixXd dm = vectors.transpose() * (deriv.dM * vectors);
  const Eigen::MatrixXd r = dk - lambda_bar * dm;
  return 0.5 * (r + r.transpose());
}

Eigen::MatrixXd rellich_matrix(const PencilDerivative &deriv, const EigenCluster &cluster)
{
  return rellich_matrix(deriv, cluster.vectors, cluster.mean);
}

Eigen::VectorXd branch_slopes(const Eigen::MatrixXd &rellich)
{
  if (rellich.size() == 0) return {};
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(rellich, Eigen::EigenvaluesOnly)
      .eigenvalues();
}

double hellmann_feynman(const PencilDerivative &deriv, double lambda, const Eigen::VectorXd &u)
{
  if (deriv.dK.rows() != u.size())
    throw ContractViolation("hellmann_feynman: dimension mismatch");
  return u.dot(deriv.dK * u) - lambda * u.dot(deriv.dM * u);
}

double hellmann_feynman(const PencilDerivative &deriv, const EigenCluster &cluster)
{
  if (cluster.multiplicity != 1)
    throw MultiplicityError("eigenvalue " + std::to_string(cluster.first_index) +
                            " belongs to a cluster of multiplicity " +
                            std::to_string(cluster.multiplicity) + "; use rellich_matrix");
  return hellmann_feynman(deriv, cluster.mean, cluster.vectors.col(0));
}

double symmetric_function_derivative(double lambda_bar, int m, const Eigen::MatrixXd &rellich,
                                     int s)
{
  if (s < 1 || s > m)
    throw DomainError("symmetric function order " + std::to_string(s) + " outside [1, " +
                      std::to_string(m) + "]");
  return std::pow(lambda_bar, s - 1) * binomial(m - 1, s - 1) * rellich.trace();
}

double symmetric_function_derivative(const EigenCluster &cluster, const PencilDerivative &deriv,
                                     int s)
{
  return symmetric_function_derivative(cluster.mean, cluster.multiplicity,
                                       rellich_matrix(deriv, cluster), s);
}

}  // namespace spectra_shape
