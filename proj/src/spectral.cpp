#include "spectra_shape/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spectra_shape/errors.hpp"

namespace spectra_shape
{

double EigenDecomposition::eigenvalue(int k) const
{
  if (k < first_index || k > last_index())
    throw DomainError("eigenvalue index " + std::to_string(k) + " outside computed range [" +
                      std::to_string(first_index) + ", " + std::to_string(last_index()) + "]");
  return eigenvalues(k - first_index);
}

Eigen::VectorXd EigenDecomposition::eigenvector(int k) const
{
  eigenvalue(k);
  return eigenvectors.col(k - first_index);
}

double lambda_scale(const Pencil &pencil)
{
  double tk = 0.0, tm = 0.0;
  for (Eigen::Index i = 0; i < pencil.K.rows(); ++i)
  {
    tk += pencil.K.coeff(i, i);
    tm += pencil.M.coeff(i, i);
  }
  if (!(tm > 0.0)) throw PencilError("mass matrix has non-positive trace");
  return tk > 0.0 ? tk / tm : 1.0;
}

namespace
{

void check_square(const Pencil &pencil)
{
  if (pencil.K.rows() != pencil.K.cols() || pencil.M.rows() != pencil.M.cols() ||
      pencil.K.rows() != pencil.M.rows() || pencil.K.rows() == 0)
    throw PencilError("pencil matrices must be square, non-empty and of equal size");
}

void check_info(lapack_int info, lapack_int n, const char *routine)
{
  if (info == 0) return;
  if (info > n) throw PencilError("mass matrix is not positive definite");
  if (info < 0)
    throw PencilError(std::string(routine) + ": invalid argument " + std::to_string(-info));
  throw PencilError(std::string(routine) + " failed to converge (info " + std::to_string(info) +
                    ")");
}

EigenDecomposition split_kernel(const Eigen::VectorXd &values, const Eigen::MatrixXd &vectors,
                                int first_global, double scale, double kernel_tol,
                                int kernel_dim)
{
  EigenDecomposition d;
  d.lambda_scale = scale;
  d.kernel_dim = kernel_dim;
  const int skip = std::max(0, kernel_dim - (first_global - 1));
  const int count = static_cast<int>(values.size()) - skip;
  d.eigenvalues = values.tail(count);
  d.eigenvectors = vectors.rightCols(count);
  d.first_index = first_global + skip - kernel_dim;
  (void)kernel_tol;
  return d;
}

}  // namespace

EigenDecomposition solve_pencil(const Pencil &pencil, const SolveOptions &opts)
{
  check_square(pencil);
  const double scale = lambda_scale(pencil);
  Eigen::MatrixXd a = Eigen::MatrixXd(pencil.K);
  Eigen::MatrixXd b = Eigen::MatrixXd(pencil.M);
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  const lapack_int info =
      LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'V', 'L', n, a.data(), n, b.data(), n, w.data());
  check_info(info, n, "dsygvd");
  const double threshold = opts.kernel_tol * scale;
  int kernel = 0;
  while (kernel < n && w(kernel) < threshold) ++kernel;
  return split_kernel(w, a, 1, scale, opts.kernel_tol, kernel);
}

EigenDecomposition solve_pencil_window(const Pencil &pencil, int k_lo, int k_hi,
                                       int kernel_dim_hint, const SolveOptions &opts)
{
  check_square(pencil);
  const lapack_int n = static_cast<lapack_int>(pencil.K.rows());
  if (k_lo < 1 || k_hi < k_lo || kernel_dim_hint < 0 || kernel_dim_hint + k_hi > n)
    throw DomainError("eigenvalue window out of range");
  const double scale = lambda_scale(pencil);
  const double threshold = opts.kernel_tol * scale;

  Eigen::MatrixXd a = Eigen::MatrixXd(pencil.K);
  Eigen::MatrixXd b = Eigen::MatrixXd(pencil.M);
  // Include the last kernel mode and the first positive one so the kernel
  // dimension can be confirmed.
  const lapack_int il = std::max(1, std::min(kernel_dim_hint, kernel_dim_hint + k_lo));
  const lapack_int iu = kernel_dim_hint + k_hi;
  lapack_int found = 0;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, iu - il + 1);
  std::vector<lapack_int> ifail(n);
  const lapack_int info = LAPACKE_dsygvx(
      LAPACK_COL_MAJOR, 1, 'V', 'I', 'L', n, a.data(), n, b.data(), n, 0.0, 0.0, il, iu,
      2.0 * LAPACKE_dlamch('S'), &found, w.data(), z.data(), n, ifail.data());
  check_info(info, n, "dsygvx");

  const Eigen::VectorXd values = w.head(found);
  bool consistent = true;
  if (kernel_dim_hint > 0) consistent = values(0) < threshold;
  const int first_positive = kernel_dim_hint > 0 ? 1 : 0;
  if (first_positive < found) consistent = consistent && values(first_positive) >= threshold;
  if (!consistent) return solve_pencil(pencil, opts);

  auto d = split_kernel(values, z.leftCols(found), il, scale, opts.kernel_tol, kernel_dim_hint);
  return d;
}

Eigen::VectorXd pencil_eigenvalues(const Pencil &pencil)
{
  check_square(pencil);
  Eigen::MatrixXd a = Eigen::MatrixXd(pencil.K);
  Eigen::MatrixXd b = Eigen::MatrixXd(pencil.M);
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  const lapack_int info =
      LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'N', 'L', n, a.data(), n, b.data(), n, w.data());
  check_info(info, n, "dsygvd");
  return w;
}

ResolventOperator::ResolventOperator(const Pencil &pencil)
  : k_(Eigen::MatrixXd(pencil.K)),
    m_(Eigen::MatrixXd(pencil.M)),
    spectrum_(pencil_eigenvalues(pencil)),
    scale_(lambda_scale(pencil))
{
}

Eigen::MatrixXcd ResolventOperator::apply(std::complex<double> zeta,
                                          const Eigen::MatrixXcd &b) const
{
  double distance = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < spectrum_.size(); ++i)
    distance = std::min(distance, std::abs(spectrum_(i) - zeta));
  if (distance <= 1e-12 * scale_)
    throw NearSingularError("resolvent point lies within 1e-12 * lambda_scale of an eigenvalue");

  const Eigen::MatrixXcd shifted = k_.cast<std::complex<double>>() - zeta * m_;
  const Eigen::MatrixXcd rhs = m_.cast<std::complex<double>>() * b;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted);
  Eigen::MatrixXcd x = lu.solve(rhs);
  const double residual = (shifted * x - rhs).norm();
  const double ref = shifted.norm() * x.norm() + rhs.norm();
  if (residual > 1e-10 * ref)
    throw NearSingularError("resolvent solve residual " + std::to_string(residual / ref) +
                            " exceeds 1e-10");
  return x;
}

Eigen::VectorXcd resolvent_apply(const Pencil &pencil, std::complex<double> zeta,
                                 const Eigen::VectorXcd &b)
{
  if (b.size() != pencil.num_dofs()) throw ContractViolation("resolvent_apply: size mismatch");
  return ResolventOperator(pencil).apply(zeta, b);
}

Eigen::MatrixXd riesz_projector(const Pencil &pencil, const Circle &contour, int nquad)
{
  if (nquad < 4) throw ConfigError("riesz_projector needs at least 4 quadrature nodes");
  if (!(contour.radius > 0.0)) throw ConfigError("contour radius must be positive");
  const ResolventOperator resolvent(pencil);
  for (Eigen::Index i = 0; i < resolvent.spectrum().size(); ++i)
  {
    const double d = std::abs(std::abs(resolvent.spectrum()(i) - contour.center) - contour.radius);
    if (d <= 1e-8 * contour.radius)
      throw ContourError("eigenvalue " + std::to_string(resolvent.spectrum()(i)) +
                         " lies on the contour");
  }
  const Eigen::Index n = pencil.num_dofs();
  const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(n, n);
  // zeta = c + r e^{i theta}, dzeta = i r e^{i theta} dtheta; the i cancels 1/(2 pi i).
  for (int q = 0; q < nquad; ++q)
  {
    const double theta = 2.0 * std::numbers::pi * (q + 0.5) / nquad;
    const std::complex<double> e = std::polar(1.0, theta);
    const std::complex<double> zeta = contour.center + contour.radius * e;
    sum += (contour.radius * e) * resolvent.apply(zeta, identity);
  }
  return (-sum / static_cast<double>(nquad)).real();
}

double subspace_gap(const Eigen::MatrixXd &u, const Eigen::MatrixXd &v, const Eigen::MatrixXd &m)
{
  if (u.rows() != m.rows() || v.rows() != m.rows())
    throw ContractViolation("subspace_gap: dimension mismatch");
  auto check = [&](const Eigen::MatrixXd &x, const char *name) {
    const Eigen::MatrixXd g = x.transpose() * m * x;
    if ((g - Eigen::MatrixXd::Identity(x.cols(), x.cols())).cwiseAbs().maxCoeff() > 1e-8)
      throw ContractViolation(std::string("subspace_gap: block ") + name +
                              " is not M-orthonormal");
  };
  check(u, "U");
  check(v, "V");
  const Eigen::LLT<Eigen::MatrixXd> chol(m);
  if (chol.info() != Eigen::Success)
    throw ContractViolation("subspace_gap: M is not positive definite");
  const Eigen::MatrixXd lt = chol.matrixU();
  // sup over unit x in span(X) of dist_M(x, span(Y)) is the largest singular value
  // of L^T (X - Y Y^T M X) for M = L L^T.
  auto directed = [&](const Eigen::MatrixXd &x, const Eigen::MatrixXd &y) {
    const Eigen::MatrixXd residual = x - y * (y.transpose() * m * x);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(lt * residual);
    return std::min(1.0, svd.singularValues()(0));
  };
  return std::max(directed(u, v), directed(v, u));
}

double subspace_gap(const Eigen::MatrixXd &u, const Eigen::MatrixXd &v, const SparseMatrix &m)
{
  return subspace_gap(u, v, Eigen::MatrixXd(m));
}

Eigen::MatrixXd m_orthonormalize(const Eigen::MatrixXd &v, const SparseMatrix &m)
{
  const Eigen::MatrixXd g = v.transpose() * (m * v);
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw ContractViolation("block is rank deficient in M");
  // v L^{-T}
  return llt.matrixU().solve<Eigen::OnTheRight>(v);
}

std::vector<int> EigenCluster::indices() const
{
  std::vector<int> idx(multiplicity);
  for (int i = 0; i < multiplicity; ++i) idx[i] = first_index + i;
  return idx;
}

std::vector<EigenCluster> cluster_spectrum(const EigenDecomposition &d, double cluster_tol)
{
  std::vector<EigenCluster> clusters;
  const int n = d.size();
  int start = 0;
  for (int i = 1; i <= n; ++i)
  {
    bool split = i == n;
    if (!split)
    {
      const double a = d.eigenvalues(i - 1), b = d.eigenvalues(i);
      split = (b - a) > cluster_tol * std::max(std::abs(a), std::abs(b));
    }
    if (!split) continue;
    EigenCluster c;
    c.first_index = d.first_index + start;
    c.multiplicity = i - start;
    c.values = d.eigenvalues.segment(start, c.multiplicity);
    c.vectors = d.eigenvectors.middleCols(start, c.multiplicity);
    c.mean = c.values.mean();
    c.width = c.values.maxCoeff() - c.values.minCoeff();
    clusters.push_back(std::move(c));
    start = i;
  }
  return clusters;
}

}  // namespace spectra_shape
