#include <doctest.h>

#include <cmath>
#include <random>

#include "spectra_shape/errors.hpp"
#include "spectra_shape/perturbation.hpp"
#include "support.hpp"

using namespace spectra_shape;
using namespace test_support;

namespace
{

Eigen::VectorXd vec(std::initializer_list<double> v)
{
  Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r[i++] = x;
  return r;
}

// Lambda_s by enumeration of all s-subsets.
double brute_symmetric(const Eigen::VectorXd &values, int s)
{
  const int m = static_cast<int>(values.size());
  double sum = 0.0;
  for (unsigned mask = 0; mask < (1u << m); ++mask)
  {
    if (__builtin_popcount(mask) != s) continue;
    double prod = 1.0;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) prod *= values[i];
    sum += prod;
  }
  return sum;
}

}  // namespace

TEST_CASE("elementary symmetric functions: examples")
{
  CHECK(elementary_symmetric(vec({2, 3}), 1) == doctest::Approx(5.0));
  CHECK(elementary_symmetric(vec({2, 3}), 2) == doctest::Approx(6.0));
  CHECK(elementary_symmetric(vec({1, 1, 1}), 2) == doctest::Approx(3.0));
  CHECK_THROWS_AS(elementary_symmetric(vec({1, 2}), 3), DomainError);
  CHECK_THROWS_AS(elementary_symmetric(vec({1, 2}), 0), DomainError);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 3.0);
  Eigen::VectorXd v(6);
  for (int i = 0; i < 6; ++i) v[i] = u(rng);
  const auto all = elementary_symmetric_all(v);
  CHECK(all[0] == 1.0);
  for (int s = 1; s <= 6; ++s) CHECK(all[s] == doctest::Approx(brute_symmetric(v, s)).epsilon(1e-12));
}

TEST_CASE("hat functions: examples")
{
  const auto h1 = hat_functions(vec({2, 3}), 1);
  const auto h2 = hat_functions(vec({2, 3}), 2);
  CHECK(h1.m_hat == doctest::Approx(7.0 / 12.0));
  CHECK(h2.m_hat == doctest::Approx(1.0 / 12.0));
  CHECK(h1.lambda_hat == doctest::Approx(7.0));
  for (int s = 0; s <= 2; ++s)
    CHECK(hat_functions(vec({0, 0}), s).lambda_hat == doctest::Approx(binomial(2, s)));
  const auto h3 = hat_functions(vec({1, 2, 4}), 3);
  CHECK(h3.lambda_hat == doctest::Approx(30.0));
  CHECK(1.0 / h3.m_hat == doctest::Approx(30.0));
  CHECK_THROWS_AS(hat_functions(vec({-1.0, 2.0}), 1), DomainError);
}

TEST_CASE("hat reconstruction: examples")
{
  const auto lam = reconstruct_lambda(vec({1, 7, 12}));
  CHECK(lam[1] == doctest::Approx(5.0));
  CHECK(lam[2] == doctest::Approx(6.0));
  const double a = 4.25;
  CHECK(reconstruct_lambda(hat_lambda_all(vec({a})))[1] == doctest::Approx(a));
  CHECK(reconstruct_lambda(hat_lambda_all(vec({a})))[1] ==
        doctest::Approx(hat_lambda_all(vec({a}))[1] - 1.0));
  const auto ones = reconstruct_lambda(hat_lambda_all(vec({1, 1, 1})));
  CHECK(ones[1] == doctest::Approx(3.0));
  CHECK(ones[2] == doctest::Approx(3.0));
  CHECK(ones[3] == doctest::Approx(1.0));
}

TEST_CASE("hat reconstruction round-trips for random clusters up to m = 6")
{
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int m = 1; m <= 6; ++m)
    for (int trial = 0; trial < 20; ++trial)
    {
      Eigen::VectorXd v(m);
      for (int i = 0; i < m; ++i) v[i] = u(rng);
      const auto lam = reconstruct_lambda(hat_lambda_all(v));
      const auto exact = elementary_symmetric_all(v);
      for (int s = 0; s <= m; ++s)
        CHECK(std::abs(lam[s] - exact[s]) <= 1e-10 * std::max(1.0, std::abs(exact[s])));
    }
}

TEST_CASE("hat inversion binomial is the only linear convention consistent with brute force")
{
  // Solve for coefficients c_{s,p} with Lambda_s = sum_p c_{s,p} Lambda-hat_p from random
  // samples and compare with (-1)^{s-p} C(m-p, s-p).
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int m = 1; m <= 4; ++m)
  {
    const int samples = 3 * (m + 1);
    Eigen::MatrixXd hats(samples, m + 1), lams(samples, m + 1);
    for (int r = 0; r < samples; ++r)
    {
      Eigen::VectorXd v(m);
      for (int i = 0; i < m; ++i) v[i] = u(rng);
      hats.row(r) = hat_lambda_all(v).transpose();
      lams.row(r) = elementary_symmetric_all(v).transpose();
    }
    const Eigen::MatrixXd coeff = hats.colPivHouseholderQr().solve(lams);
    for (int s = 0; s <= m; ++s)
      for (int p = 0; p <= m; ++p)
      {
        const double expected = p > s ? 0.0 : ((s - p) % 2 ? -1.0 : 1.0) * binomial(m - p, s - p);
        CHECK(coeff(p, s) == doctest::Approx(expected).epsilon(1e-8));
      }
  }
}

TEST_CASE("binomial coefficients")
{
  CHECK(binomial(5, 2) == 10.0);
  CHECK(binomial(6, 0) == 1.0);
  CHECK(binomial(6, 6) == 1.0);
  CHECK(binomial(3, 4) == 0.0);
}

TEST_CASE("Rellich matrix: closed-form examples")
{
  const auto crossing = PencilDerivative::from_dense((Eigen::Matrix2d() << 0, 1, 1, 0).finished(),
                                                     Eigen::Matrix2d::Zero());
  const Eigen::MatrixXd r = rellich_matrix(crossing, Eigen::Matrix2d::Identity(), 1.0);
  CHECK((r - (Eigen::Matrix2d() << 0, 1, 1, 0).finished()).norm() < 1e-15);
  CHECK((branch_slopes(r) - Eigen::Vector2d(-1, 1)).norm() < 1e-12);

  const auto simple = PencilDerivative::from_dense(Eigen::Vector2d(1, 0).asDiagonal(),
                                                   Eigen::Matrix2d::Zero());
  const Eigen::MatrixXd e1 = Eigen::Vector2d(1, 0);
  CHECK(rellich_matrix(simple, e1, 1.0)(0, 0) == doctest::Approx(1.0));
  CHECK(hellmann_feynman(simple, 1.0, Eigen::Vector2d(1, 0)) == doctest::Approx(1.0));

  const auto zero = PencilDerivative::from_dense(Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero());
  CHECK(rellich_matrix(zero, Eigen::Matrix3d::Identity(), 2.0).norm() == 0.0);
  CHECK(branch_slopes(rellich_matrix(zero, Eigen::Matrix3d::Identity(), 2.0)).norm() == 0.0);

  CHECK_THROWS_AS(rellich_matrix(crossing, Eigen::Matrix3d::Identity(), 1.0), ContractViolation);
}

TEST_CASE("Hellmann-Feynman on a scaled pencil gives -2 lambda")
{
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd k = random_spd(6, rng), m = random_spd(6, rng, 2.0);
  const Pencil p = Pencil::from_dense(k, m);
  const auto deriv = PencilDerivative::from_dense(k, 3.0 * m);
  const auto d = solve_pencil(p);
  for (int i = 1; i <= d.size(); ++i)
    CHECK(hellmann_feynman(deriv, d.eigenvalue(i), d.eigenvector(i)) ==
          doctest::Approx(-2.0 * d.eigenvalue(i)).epsilon(1e-12));

  EigenCluster pair;
  pair.multiplicity = 2;
  pair.mean = 1.0;
  pair.values = Eigen::Vector2d(1, 1);
  pair.vectors = Eigen::Matrix<double, 6, 2>::Zero();
  CHECK_THROWS_AS(hellmann_feynman(deriv, pair), MultiplicityError);
}

TEST_CASE("symmetric-function derivatives: examples")
{
  const Eigen::MatrixXd crossing = (Eigen::Matrix2d() << 0, 1, 1, 0).finished();
  CHECK(symmetric_function_derivative(1.0, 2, crossing, 1) == 0.0);
  CHECK(symmetric_function_derivative(1.0, 2, crossing, 2) == 0.0);
  const Eigen::MatrixXd diag = Eigen::Vector3d(0.5, -1.5, 2.25).asDiagonal();
  CHECK(symmetric_function_derivative(3.0, 3, diag, 1) == doctest::Approx(1.25));
  CHECK(symmetric_function_derivative(3.0, 3, diag, 3) == doctest::Approx(9.0 * 1.25));
  const Eigen::MatrixXd one = Eigen::Matrix<double, 1, 1>(0.7);
  CHECK(symmetric_function_derivative(5.0, 1, one, 1) == doctest::Approx(0.7));
}

TEST_CASE("trace formula matches central differences on a degenerate synthetic pencil")
{
  // K(chi) = K0 + chi K1 + chi^2 K2 with a triple eigenvalue 2 at chi = 0.
  const Eigen::Matrix4d k0 = Eigen::Vector4d(2, 2, 2, 6).asDiagonal();
  const Eigen::Matrix4d k1 = (Eigen::Matrix4d() << 1.0, 0.3, -0.2, 0.5, 0.3, -0.5, 0.4, 0.1,
                              -0.2, 0.4, 0.2, -0.3, 0.5, 0.1, -0.3, 0.7)
                                 .finished();
  const Eigen::Matrix4d m1 = (Eigen::Matrix4d() << 0.2, 0.05, 0, 0, 0.05, 0.1, 0, 0, 0, 0, -0.1,
                              0.02, 0, 0, 0.02, 0.3)
                                 .finished();
  auto values = [&](double chi) {
    const Pencil p = Pencil::from_dense(k0 + chi * k1 + 0.1 * chi * chi * Eigen::Matrix4d::Identity(),
                                        Eigen::Matrix4d::Identity() + chi * m1);
    return solve_pencil(p).eigenvalues.head(3).eval();
  };
  const Pencil p0 = Pencil::from_dense(k0, Eigen::Matrix4d::Identity());
  const auto d0 = solve_pencil(p0);
  const auto deriv = PencilDerivative::from_dense(k1, m1);
  const Eigen::MatrixXd r = rellich_matrix(deriv, d0.eigenvectors.leftCols(3), 2.0);
  const double h = 1e-4;
  const Eigen::VectorXd plus = values(h), minus = values(-h);
  for (int s = 1; s <= 3; ++s)
  {
    const double fd = (elementary_symmetric(plus, s) - elementary_symmetric(minus, s)) / (2 * h);
    CHECK(symmetric_function_derivative(2.0, 3, r, s) == doctest::Approx(fd).epsilon(1e-5));
  }
  // Branch slopes from one-sided sorting only hold for chi > 0 near a crossing, so the
  // sorted differences are compared against the sorted Rellich slopes.
  const Eigen::VectorXd slopes = branch_slopes(r);
  const Eigen::VectorXd right = (values(h) - values(0.0)) / h;
  CHECK((right - slopes).cwiseAbs().maxCoeff() < 1e-3);
}
