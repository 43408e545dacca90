#include "spectra_shape/assembly.hpp"

#include <Eigen/Dense>

#include "spectra_shape/errors.hpp"
#include "spectra_shape/parallel.hpp"
#include "spectra_shape/quadrature.hpp"

namespace spectra_shape
{

int select_quadrature_order(const TransformationFamily &family, const AssemblyOptions &opts)
{
  if (opts.quadrature_order > 0) return opts.quadrature_order;
  return family.is_affine() ? 2 : 4;
}

const TetQuadrature &helmholtz_mass_rule(const TransformationFamily &family,
                                         const AssemblyOptions &opts)
{
  if (opts.lumped_mass) return tet_vertex_rule();
  return tet_quadrature(select_quadrature_order(family, opts));
}

std::vector<int> helmholtz_free_vertices(const Mesh &mesh)
{
  std::vector<int> free;
  const auto &fixed = mesh.tangential_vertices();
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (!fixed[v]) free.push_back(v);
  return free;
}

std::vector<int> maxwell_free_edges(const Mesh &mesh)
{
  std::vector<int> free;
  const auto &fixed = mesh.tangential_edges();
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (!fixed[e]) free.push_back(e);
  return free;
}

EdgeBasisAt edge_basis(const Mesh &mesh, int t, const Eigen::Matrix<double, 3, 4> &grads,
                       const std::array<double, 4> &bary)
{
  const auto &tet = mesh.tets()[t];
  EdgeBasisAt b;
  for (int e = 0; e < 6; ++e)
  {
    int i = kTetLocalEdges[e][0], j = kTetLocalEdges[e][1];
    if (tet[i] > tet[j]) std::swap(i, j);
    b.values.col(e) = bary[i] * grads.col(j) - bary[j] * grads.col(i);
    b.curls.col(e) = 2.0 * grads.col(i).cross(grads.col(j));
  }
  return b;
}

namespace
{

template <int N>
struct ElementPair
{
  Eigen::Matrix<double, N, N> a = Eigen::Matrix<double, N, N>::Zero();
  Eigen::Matrix<double, N, N> b = Eigen::Matrix<double, N, N>::Zero();
};

// Element loop with per-element storage and an index-ordered scatter; the
// result is bit-identical for every thread count.
template <int N, typename LocalDofs, typename ElementFn>
std::pair<SparseMatrix, SparseMatrix> assemble_pair(const Mesh &mesh, int num_dofs,
                                                    const std::vector<int> &entity_dof,
                                                    LocalDofs local_dofs, ElementFn element,
                                                    int threads)
{
  const int nt = mesh.num_tets();
  std::vector<ElementPair<N>> local(nt);
  parallel_for(nt, threads, [&](int t) {
    local[t] = element(t);
    local[t].a = (0.5 * (local[t].a + local[t].a.transpose())).eval();
    local[t].b = (0.5 * (local[t].b + local[t].b.transpose())).eval();
  });

  std::vector<Eigen::Triplet<double>> ta, tb;
  ta.reserve(static_cast<std::size_t>(nt) * N * N);
  tb.reserve(static_cast<std::size_t>(nt) * N * N);
  for (int t = 0; t < nt; ++t)
  {
    const auto ents = local_dofs(t);
    for (int i = 0; i < N; ++i)
    {
      const int di = entity_dof[ents[i]];
      if (di < 0) continue;
      for (int j = 0; j < N; ++j)
      {
        const int dj = entity_dof[ents[j]];
        if (dj < 0) continue;
        ta.emplace_back(di, dj, local[t].a(i, j));
        tb.emplace_back(di, dj, local[t].b(i, j));
      }
    }
  }
  SparseMatrix a(num_dofs, num_dofs), b(num_dofs, num_dofs);
  a.setFromTriplets(ta.begin(), ta.end());
  b.setFromTriplets(tb.begin(), tb.end());
  return {std::move(a), std::move(b)};
}

Pencil make_layout(const std::vector<int> &free, int num_entities, ProblemKind kind)
{
  if (free.empty())
    throw DegenerateProblem(std::string("no free dofs for the ") + to_string(kind) +
                            " problem (all entities constrained)");
  Pencil p;
  p.problem = kind;
  p.dof_entity = free;
  p.entity_dof.assign(num_entities, -1);
  for (std::size_t i = 0; i < free.size(); ++i) p.entity_dof[free[i]] = static_cast<int>(i);
  return p;
}

// Coefficient callbacks receive the reference point and return the pulled-back
// (or differentiated) coefficient.
template <typename StiffCoef, typename MassCoef>
std::pair<SparseMatrix, SparseMatrix> helmholtz_forms(const Mesh &mesh, const Pencil &layout,
                                                      const TetQuadrature &rule,
                                                      const TetQuadrature &mass_rule, int threads,
                                                      StiffCoef stiff, MassCoef mass)
{
  auto element = [&](int t) {
    ElementPair<4> out;
    const auto grads = mesh.barycentric_gradients(t);
    const double scale = 6.0 * mesh.tet_volume(t);
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      const Vec3 x = mesh.point(t, rule.points[q]);
      out.a.noalias() += (rule.weights[q] * scale) * grads.transpose() * stiff(x) * grads;
    }
    for (std::size_t q = 0; q < mass_rule.size(); ++q)
    {
      const auto &bary = mass_rule.points[q];
      const Vec3 x = mesh.point(t, bary);
      const Eigen::Vector4d phi(bary[0], bary[1], bary[2], bary[3]);
      out.b.noalias() += (mass_rule.weights[q] * scale * mass(x)) * phi * phi.transpose();
    }
    return out;
  };
  return assemble_pair<4>(
      mesh, static_cast<int>(layout.dof_entity.size()), layout.entity_dof,
      [&](int t) { return mesh.tets()[t]; }, element, threads);
}

template <typename StiffCoef, typename MassCoef>
std::pair<SparseMatrix, SparseMatrix> maxwell_forms(const Mesh &mesh, const Pencil &layout,
                                                    int order, int threads, StiffCoef stiff,
                                                    MassCoef mass)
{
  const auto &rule = tet_quadrature(order);
  auto element = [&](int t) {
    ElementPair<6> out;
    const auto grads = mesh.barycentric_gradients(t);
    const double scale = 6.0 * mesh.tet_volume(t);
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      const auto &bary = rule.points[q];
      const Vec3 x = mesh.point(t, bary);
      const double w = rule.weights[q] * scale;
      const auto basis = edge_basis(mesh, t, grads, bary);
      out.a.noalias() += w * basis.curls.transpose() * stiff(x) * basis.curls;
      out.b.noalias() += w * basis.values.transpose() * mass(x) * basis.values;
    }
    return out;
  };
  return assemble_pair<6>(
      mesh, static_cast<int>(layout.dof_entity.size()), layout.entity_dof,
      [&](int t) { return mesh.tet_edges()[t]; }, element, threads);
}

}  // namespace

Pencil assemble_helmholtz(const Mesh &mesh, const TransformationFamily &family,
                          const ParamVec &chi, const MatrixField &eps, const ScalarField &nu,
                          const AssemblyOptions &opts)
{
  Pencil p = make_layout(helmholtz_free_vertices(mesh), mesh.num_vertices(),
                         ProblemKind::Helmholtz);
  auto [k, m] = helmholtz_forms(
      mesh, p, tet_quadrature(select_quadrature_order(family, opts)),
      helmholtz_mass_rule(family, opts), opts.threads,
      [&](const Vec3 &x) { return transformed_epsilon(family, chi, eps, x); },
      [&](const Vec3 &x) { return transformed_nu(family, chi, nu, x); });
  p.K = std::move(k);
  p.M = std::move(m);
  return p;
}

PencilDerivative assemble_helmholtz_derivative(const Mesh &mesh,
                                               const TransformationFamily &family,
                                               const ParamVec &chi, const ParamVec &direction,
                                               const MatrixField &eps, const ScalarField &nu,
                                               const AssemblyOptions &opts)
{
  const Pencil layout = make_layout(helmholtz_free_vertices(mesh), mesh.num_vertices(),
                                    ProblemKind::Helmholtz);
  auto [dk, dm] = helmholtz_forms(
      mesh, layout, tet_quadrature(select_quadrature_order(family, opts)),
      helmholtz_mass_rule(family, opts), opts.threads,
      [&](const Vec3 &x) { return directional_coefficient_epsilon(family, chi, direction, eps, x); },
      [&](const Vec3 &x) { return directional_coefficient_nu(family, chi, direction, nu, x); });
  return {std::move(dk), std::move(dm)};
}

Pencil assemble_maxwell(const Mesh &mesh, const TransformationFamily &family,
                        const ParamVec &chi, const MatrixField &eps, const MatrixField &mu_inv,
                        const AssemblyOptions &opts)
{
  Pencil p = make_layout(maxwell_free_edges(mesh), mesh.num_edges(), ProblemKind::Maxwell);
  auto [k, m] = maxwell_forms(
      mesh, p, select_quadrature_order(family, opts), opts.threads,
      [&](const Vec3 &x) { return transformed_mu_inv(family, chi, mu_inv, x); },
      [&](const Vec3 &x) { return transformed_epsilon(family, chi, eps, x); });
  p.K = std::move(k);
  p.M = std::move(m);
  return p;
}

PencilDerivative assemble_maxwell_derivative(const Mesh &mesh,
                                             const TransformationFamily &family,
                                             const ParamVec &chi, const ParamVec &direction,
                                             const MatrixField &eps, const MatrixField &mu_inv,
                                             const AssemblyOptions &opts)
{
  const Pencil layout =
      make_layout(maxwell_free_edges(mesh), mesh.num_edges(), ProblemKind::Maxwell);
  auto [dk, dm] = maxwell_forms(
      mesh, layout, select_quadrature_order(family, opts), opts.threads,
      [&](const Vec3 &x) {
        return directional_coefficient_mu_inv(family, chi, direction, mu_inv, x);
      },
      [&](const Vec3 &x) { return directional_coefficient_epsilon(family, chi, direction, eps, x); });
  return {std::move(dk), std::move(dm)};
}

GradientBasis gradient_kernel_basis(const Mesh &mesh)
{
  const auto free_edges = maxwell_free_edges(mesh);
  const auto free_vertices = helmholtz_free_vertices(mesh);
  std::vector<int> vertex_col(mesh.num_vertices(), -1);
  for (std::size_t c = 0; c < free_vertices.size(); ++c)
    vertex_col[free_vertices[c]] = static_cast<int>(c);

  GradientBasis g;
  g.vertices = free_vertices;
  g.columns = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(free_edges.size()),
                                    static_cast<Eigen::Index>(free_vertices.size()));
  for (std::size_t r = 0; r < free_edges.size(); ++r)
  {
    const auto &edge = mesh.edges()[free_edges[r]];
    // circulation of grad(phi_v) along low -> high is phi_v(high) - phi_v(low)
    if (vertex_col[edge[1]] >= 0) g.columns(r, vertex_col[edge[1]]) += 1.0;
    if (vertex_col[edge[0]] >= 0) g.columns(r, vertex_col[edge[0]]) -= 1.0;
  }
  g.rank = static_cast<int>(free_vertices.size()) - mesh.free_components();
  return g;
}

}  // namespace spectra_shape
