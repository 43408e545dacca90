#include "spectra_shape/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <mutex>

#include "spectra_shape/errors.hpp"

namespace spectra_shape
{

void gauss_legendre_unit(int n, std::vector<double> &nodes, std::vector<double> &weights)
{
  // Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k)
  {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  nodes.resize(n);
  weights.resize(n);
  for (int k = 0; k < n; ++k)
  {
    nodes[k] = 0.5 * (solver.eigenvalues()(k) + 1.0);
    const double v0 = solver.eigenvectors()(0, k);
    weights[k] = v0 * v0;  // 2 v0^2 on [-1,1], halved on [0,1]
  }
}

namespace
{

TetQuadrature make_tet(int order)
{
  TetQuadrature rule;
  rule.order = order;
  if (order <= 1)
  {
    rule.order = 1;
    rule.points.push_back({0.25, 0.25, 0.25, 0.25});
    rule.weights.push_back(1.0 / 6.0);
    return rule;
  }
  if (order == 2)
  {
    const double a = 0.5854101966249685;
    const double b = 0.1381966011250105;
    for (int k = 0; k < 4; ++k)
    {
      std::array<double, 4> p{b, b, b, b};
      p[k] = a;
      rule.points.push_back(p);
      rule.weights.push_back(1.0 / 24.0);
    }
    return rule;
  }
  // Collapsed coordinates x = u, y = v(1-u), z = w(1-u)(1-v) with Jacobian
  // (1-u)^2 (1-v); the u-direction carries two extra degrees.
  const int nu = (order + 3 + 1) / 2;
  const int nv = (order + 2 + 1) / 2;
  const int nw = (order + 1 + 1) / 2;
  std::vector<double> xu, wu, xv, wv, xw, ww;
  gauss_legendre_unit(nu, xu, wu);
  gauss_legendre_unit(nv, xv, wv);
  gauss_legendre_unit(nw, xw, ww);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j)
      for (int k = 0; k < nw; ++k)
      {
        const double u = xu[i], v = xv[j], w = xw[k];
        const double x = u;
        const double y = v * (1.0 - u);
        const double z = w * (1.0 - u) * (1.0 - v);
        rule.points.push_back({1.0 - x - y - z, x, y, z});
        rule.weights.push_back(wu[i] * wv[j] * ww[k] * (1.0 - u) * (1.0 - u) * (1.0 - v));
      }
  return rule;
}

TriangleQuadrature make_triangle(int order)
{
  TriangleQuadrature rule;
  rule.order = order;
  if (order <= 1)
  {
    rule.order = 1;
    rule.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    rule.weights.push_back(0.5);
    return rule;
  }
  if (order == 2)
  {
    for (int k = 0; k < 3; ++k)
    {
      std::array<double, 3> p{1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
      p[k] = 2.0 / 3.0;
      rule.points.push_back(p);
      rule.weights.push_back(1.0 / 6.0);
    }
    return rule;
  }
  const int nu = (order + 2 + 1) / 2;
  const int nv = (order + 1 + 1) / 2;
  std::vector<double> xu, wu, xv, wv;
  gauss_legendre_unit(nu, xu, wu);
  gauss_legendre_unit(nv, xv, wv);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j)
    {
      const double x = xu[i];
      const double y = xv[j] * (1.0 - xu[i]);
      rule.points.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(wu[i] * wv[j] * (1.0 - xu[i]));
    }
  return rule;
}

template <typename Rule, typename Factory>
const Rule &cached(int order, Factory factory)
{
  if (order < 1 || order > kMaxQuadratureOrder)
  {
    throw ConfigError("quadrature order must lie in [1, " +
                      std::to_string(kMaxQuadratureOrder) + "], got " +
                      std::to_string(order));
  }
  static std::once_flag flags[kMaxQuadratureOrder];
  static Rule rules[kMaxQuadratureOrder];
  std::call_once(flags[order - 1], [&] { rules[order - 1] = factory(order); });
  return rules[order - 1];
}

}  // namespace

const TetQuadrature &tet_quadrature(int order)
{
  return cached<TetQuadrature>(order, make_tet);
}

const TriangleQuadrature &triangle_quadrature(int order)
{
  return cached<TriangleQuadrature>(order, make_triangle);
}

const TetQuadrature &tet_vertex_rule()
{
  static const TetQuadrature rule = [] {
    TetQuadrature r;
    r.order = 1;
    for (int v = 0; v < 4; ++v)
    {
      std::array<double, 4> bary{0.0, 0.0, 0.0, 0.0};
      bary[v] = 1.0;
      r.points.push_back(bary);
      r.weights.push_back(1.0 / 24.0);
    }
    return r;
  }();
  return rule;
}

}  // namespace spectra_shape
