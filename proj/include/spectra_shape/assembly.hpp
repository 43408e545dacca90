#pragma once

#include "spectra_shape/mesh.hpp"
#include "spectra_shape/pencil.hpp"
#include "spectra_shape/quadrature.hpp"
#include "spectra_shape/transforms.hpp"

namespace spectra_shape
{

struct AssemblyOptions
{
  int quadrature_order = 0;  ///< 0 selects the default for the family
  int threads = 1;
  bool lumped_mass = false;  ///< Helmholtz mass form by the vertex rule
};

/// Order 2 for affine families, 4 otherwise; an explicit order wins.
int select_quadrature_order(const TransformationFamily &family, const AssemblyOptions &opts);

/// Rule for the Helmholtz mass-type terms: the vertex rule when lumping,
/// otherwise the stiffness rule.
const TetQuadrature &helmholtz_mass_rule(const TransformationFamily &family,
                                         const AssemblyOptions &opts);

// Helmholtz pencil from P1 elements: K = (eps_Phi grad u, grad v), M = (nu_Phi u, v),
// with vertices on the closure of the T boundary eliminated.
Pencil assemble_helmholtz(const Mesh &mesh, const TransformationFamily &family,
                          const ParamVec &chi, const MatrixField &eps, const ScalarField &nu,
                          const AssemblyOptions &opts = {});

PencilDerivative assemble_helmholtz_derivative(const Mesh &mesh,
                                               const TransformationFamily &family,
                                               const ParamVec &chi, const ParamVec &direction,
                                               const MatrixField &eps, const ScalarField &nu,
                                               const AssemblyOptions &opts = {});

// Maxwell pencil from lowest-order edge elements: K = (mu_Phi^{-1} rot E, rot F),
// M = (eps_Phi E, F), with edges in T facets eliminated.
Pencil assemble_maxwell(const Mesh &mesh, const TransformationFamily &family,
                        const ParamVec &chi, const MatrixField &eps, const MatrixField &mu_inv,
                        const AssemblyOptions &opts = {});

PencilDerivative assemble_maxwell_derivative(const Mesh &mesh,
                                             const TransformationFamily &family,
                                             const ParamVec &chi, const ParamVec &direction,
                                             const MatrixField &eps, const MatrixField &mu_inv,
                                             const AssemblyOptions &opts = {});

struct GradientBasis
{
  /// Free-edge circulations of the gradients of free vertex hat functions.
  Eigen::MatrixXd columns;
  /// Vertex of each column.
  std::vector<int> vertices;
  /// Dimension of the span (columns minus components without T vertices).
  int rank = 0;
};

GradientBasis gradient_kernel_basis(const Mesh &mesh);

/// Free-dof layout used by the assemblers.
std::vector<int> helmholtz_free_vertices(const Mesh &mesh);
std::vector<int> maxwell_free_edges(const Mesh &mesh);

// Element-level basis values used by assembly and the shape-derivative forms.
struct EdgeBasisAt
{
  Eigen::Matrix<double, 3, 6> values;  ///< Whitney functions (columns)
  Eigen::Matrix<double, 3, 6> curls;   ///< constant per tet
};

/// Whitney edge functions of tet t oriented low -> high global vertex index.
EdgeBasisAt edge_basis(const Mesh &mesh, int t, const Eigen::Matrix<double, 3, 4> &grads,
                       const std::array<double, 4> &bary);

}  // namespace spectra_shape
