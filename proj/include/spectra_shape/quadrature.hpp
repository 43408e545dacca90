#pragma once

#include <array>
#include <vector>

namespace spectra_shape
{

/// Quadrature on the reference tetrahedron (measure 1/6) or reference triangle
/// (measure 1/2). Points are stored in barycentric coordinates.
template <int NumVertices>
struct QuadratureRule
{
  std::vector<std::array<double, NumVertices>> points;
  std::vector<double> weights;
  int order = 0;

  std::size_t size() const { return weights.size(); }
};

using TetQuadrature = QuadratureRule<4>;
using TriangleQuadrature = QuadratureRule<3>;

inline constexpr int kMaxQuadratureOrder = 4;

// Order 1 is the centroid rule, order 2 the classical 4-point (3-point) rule,
// orders 3 and 4 are collapsed Gauss-Legendre products with positive weights.
const TetQuadrature &tet_quadrature(int order);
const TriangleQuadrature &triangle_quadrature(int order);

/// Trapezoidal rule at the four vertices (exact for linear integrands); used
/// as the P1 lumped-mass rule.
const TetQuadrature &tet_vertex_rule();

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_unit(int n, std::vector<double> &nodes, std::vector<double> &weights);

}  // namespace spectra_shape
