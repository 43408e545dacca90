#include "spectra_shape/hadamard.hpp"

#include <algorithm>

#include "spectra_shape/errors.hpp"
#include "spectra_shape/parallel.hpp"
#include "spectra_shape/quadrature.hpp"

namespace spectra_shape
{

namespace
{

std::vector<int> entity_to_dof(const std::vector<int> &free, int num_entities)
{
  std::vector<int> map(num_entities, -1);
  for (std::size_t i = 0; i < free.size(); ++i) map[free[i]] = static_cast<int>(i);
  return map;
}

void check_rows(const Eigen::MatrixXd &vectors, std::size_t dofs)
{
  if (static_cast<std::size_t>(vectors.rows()) != dofs)
    throw ContractViolation("eigenvector block has " + std::to_string(vectors.rows()) +
                            " rows, the dof layout has " + std::to_string(dofs));
}

/// Local coefficients (N x m) of the cluster fields on tet t.
template <int N>
Eigen::Matrix<double, N, Eigen::Dynamic> local_block(const std::array<int, N> &entities,
                                                     const std::vector<int> &dof_of,
                                                     const Eigen::MatrixXd &vectors)
{
  Eigen::Matrix<double, N, Eigen::Dynamic> u =
      Eigen::Matrix<double, N, Eigen::Dynamic>::Zero(N, vectors.cols());
  for (int i = 0; i < N; ++i)
    if (const int d = dof_of[entities[i]]; d >= 0) u.row(i) = vectors.row(d);
  return u;
}

/// Deterministic sum of per-item m x m contributions.
template <typename Fn>
Eigen::MatrixXd reduce_items(int count, int threads, Eigen::Index m, Fn fn)
{
  std::vector<Eigen::MatrixXd> parts(count);
  parallel_for(count, threads, [&](int i) { parts[i] = fn(i); });
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m, m);
  for (const auto &p : parts)
    if (p.size() > 0) sum += p;
  return sum;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd &a) { return 0.5 * (a + a.transpose()); }

/// Tet barycentric coordinates of a point of the owner's facet.
std::array<double, 4> facet_to_tet(const Mesh &mesh, const BoundaryFacet &facet,
                                   const std::array<double, 3> &bary)
{
  const auto &tet = mesh.tets()[facet.owner];
  std::array<double, 4> out{0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < 3; ++i)
  {
    const auto it = std::find(tet.begin(), tet.end(), facet.vertices[i]);
    out[static_cast<std::size_t>(it - tet.begin())] = bary[i];
  }
  return out;
}

/// (n . Psi) dsigma_Phi / dsigma_ref at reference point x.
double normal_flux(const ShapeSetting &s, const Vec3 &n_ref, const Vec3 &x)
{
  const PointGeometry g = evaluate_geometry(s.family, s.chi, x);
  const Vec3 psi = s.family.velocity(s.direction, x);
  return g.det * psi.dot(g.inverse.transpose() * n_ref);
}

struct PhysicalPoint
{
  PointGeometry geometry;
  PhysicalPerturbation perturbation;
};

PhysicalPoint physical_point(const ShapeSetting &s, const Vec3 &x)
{
  return {evaluate_geometry(s.family, s.chi, x),
          psi_on_physical(s.family, s.chi, s.direction, x)};
}

}  // namespace

Eigen::MatrixXd maxwell_volume_matrix(const ShapeSetting &s, const MatrixField &eps,
                                      const MatrixField &mu_inv, const Eigen::MatrixXd &vectors,
                                      double lambda_bar)
{
  const auto free = maxwell_free_edges(s.mesh);
  check_rows(vectors, free.size());
  const auto dof_of = entity_to_dof(free, s.mesh.num_edges());
  const auto &rule = tet_quadrature(select_quadrature_order(s.family, s.options));

  auto element = [&](int t) -> Eigen::MatrixXd {
    const auto u = local_block<6>(s.mesh.tet_edges()[t], dof_of, vectors);
    if (u.isZero(0.0)) return {};
    const auto grads = s.mesh.barycentric_gradients(t);
    const double scale = 6.0 * s.mesh.tet_volume(t);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(vectors.cols(), vectors.cols());
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      const Vec3 x = s.mesh.point(t, rule.points[q]);
      const auto p = physical_point(s, x);
      const auto &g = p.geometry;
      const auto basis = edge_basis(s.mesh, t, grads, rule.points[q]);
      const Eigen::MatrixXd e = g.inverse.transpose() * basis.values * u;
      const Eigen::MatrixXd rot = g.jacobian * basis.curls * u / g.det;
      const Mat3 b_mu = mu_inv_shape_bracket(mu_inv.value(g.y),
                                             mu_inv.directional(g.y, p.perturbation.psi),
                                             p.perturbation);
      const Mat3 b_eps = epsilon_shape_bracket(eps.value(g.y),
                                               eps.directional(g.y, p.perturbation.psi),
                                               p.perturbation);
      const double w = rule.weights[q] * scale * g.det;
      r.noalias() += w * (rot.transpose() * b_mu * rot - lambda_bar * e.transpose() * b_eps * e);
    }
    return r;
  };
  return symmetrized(
      reduce_items(s.mesh.num_tets(), s.options.threads, vectors.cols(), element));
}

Eigen::MatrixXd helmholtz_volume_matrix(const ShapeSetting &s, const MatrixField &eps,
                                        const ScalarField &nu, const Eigen::MatrixXd &vectors,
                                        double lambda_bar)
{
  const auto free = helmholtz_free_vertices(s.mesh);
  check_rows(vectors, free.size());
  const auto dof_of = entity_to_dof(free, s.mesh.num_vertices());
  const auto &rule = tet_quadrature(select_quadrature_order(s.family, s.options));

  const auto &mass_rule = helmholtz_mass_rule(s.family, s.options);

  auto element = [&](int t) -> Eigen::MatrixXd {
    const auto u = local_block<4>(s.mesh.tets()[t], dof_of, vectors);
    if (u.isZero(0.0)) return {};
    const auto grads = s.mesh.barycentric_gradients(t);
    const double scale = 6.0 * s.mesh.tet_volume(t);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(vectors.cols(), vectors.cols());
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      const Vec3 x = s.mesh.point(t, rule.points[q]);
      const auto p = physical_point(s, x);
      const auto &g = p.geometry;
      const Eigen::MatrixXd grad = g.inverse.transpose() * grads * u;
      const Mat3 b_eps = epsilon_shape_bracket(eps.value(g.y),
                                               eps.directional(g.y, p.perturbation.psi),
                                               p.perturbation);
      r.noalias() += (rule.weights[q] * scale * g.det) * grad.transpose() * b_eps * grad;
    }
    for (std::size_t q = 0; q < mass_rule.size(); ++q)
    {
      const auto &bary = mass_rule.points[q];
      const Vec3 x = s.mesh.point(t, bary);
      const auto p = physical_point(s, x);
      const auto &g = p.geometry;
      const Eigen::RowVector4d phi(bary[0], bary[1], bary[2], bary[3]);
      const Eigen::RowVectorXd val = phi * u;
      const double b_nu = nu_shape_bracket(nu.value(g.y),
                                           nu.gradient(g.y).dot(p.perturbation.psi),
                                           p.perturbation);
      r.noalias() -= (mass_rule.weights[q] * scale * g.det * lambda_bar * b_nu) *
                     val.transpose() * val;
    }
    return r;
  };
  return symmetrized(
      reduce_items(s.mesh.num_tets(), s.options.threads, vectors.cols(), element));
}

Eigen::MatrixXd maxwell_surface_matrix(const ShapeSetting &s, const MatrixField &eps,
                                       const MatrixField &mu_inv, const Eigen::MatrixXd &vectors,
                                       double lambda_bar)
{
  const auto free = maxwell_free_edges(s.mesh);
  check_rows(vectors, free.size());
  const auto dof_of = entity_to_dof(free, s.mesh.num_edges());
  const auto &rule = triangle_quadrature(select_quadrature_order(s.family, s.options));
  const auto &facets = s.mesh.boundary_facets();

  auto item = [&](int f) -> Eigen::MatrixXd {
    const auto &facet = facets[f];
    const int t = facet.owner;
    const auto u = local_block<6>(s.mesh.tet_edges()[t], dof_of, vectors);
    if (u.isZero(0.0)) return {};
    const auto geo = facet_geometry(s.mesh, f);
    const auto grads = s.mesh.barycentric_gradients(t);
    const double sign = facet.tag == BoundaryTag::N ? 1.0 : -1.0;
    const double scale = 2.0 * geo.area;
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(vectors.cols(), vectors.cols());
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      const auto bary = facet_to_tet(s.mesh, facet, rule.points[q]);
      const Vec3 x = s.mesh.point(t, bary);
      const PointGeometry g = evaluate_geometry(s.family, s.chi, x);
      const auto basis = edge_basis(s.mesh, t, grads, bary);
      const Eigen::MatrixXd e = g.inverse.transpose() * basis.values * u;
      const Eigen::MatrixXd rot = g.jacobian * basis.curls * u / g.det;
      const double w = sign * rule.weights[q] * scale * normal_flux(s, geo.normal, x);
      r.noalias() += w * (rot.transpose() * mu_inv.value(g.y) * rot -
                          lambda_bar * e.transpose() * eps.value(g.y) * e);
    }
    return r;
  };
  return symmetrized(
      reduce_items(static_cast<int>(facets.size()), s.options.threads, vectors.cols(), item));
}

Eigen::MatrixXd helmholtz_surface_matrix(const ShapeSetting &s, const MatrixField &eps,
                                         const ScalarField &nu, const Eigen::MatrixXd &vectors,
                                         double lambda_bar)
{
  const auto free = helmholtz_free_vertices(s.mesh);
  check_rows(vectors, free.size());
  const auto dof_of = entity_to_dof(free, s.mesh.num_vertices());
  const auto &rule = triangle_quadrature(select_quadrature_order(s.family, s.options));
  const auto &facets = s.mesh.boundary_facets();

  auto item = [&](int f) -> Eigen::MatrixXd {
    const auto &facet = facets[f];
    const int t = facet.owner;
    const auto u = local_block<4>(s.mesh.tets()[t], dof_of, vectors);
    if (u.isZero(0.0)) return {};
    const auto geo = facet_geometry(s.mesh, f);
    const auto grads = s.mesh.barycentric_gradients(t);
    const bool natural = facet.tag == BoundaryTag::N;
    const double scale = 2.0 * geo.area;
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(vectors.cols(), vectors.cols());
    for (std::size_t q = 0; q < rule.size(); ++q)
    {
      const auto bary = facet_to_tet(s.mesh, facet, rule.points[q]);
      const Vec3 x = s.mesh.point(t, bary);
      const PointGeometry g = evaluate_geometry(s.family, s.chi, x);
      const Eigen::MatrixXd grad = g.inverse.transpose() * grads * u;
      Eigen::MatrixXd integrand = grad.transpose() * eps.value(g.y) * grad;
      if (natural)
      {
        const Eigen::RowVector4d phi(bary[0], bary[1], bary[2], bary[3]);
        const Eigen::RowVectorXd val = phi * u;
        integrand -= lambda_bar * nu.value(g.y) * val.transpose() * val;
      }
      const double w =
          (natural ? 1.0 : -1.0) * rule.weights[q] * scale * normal_flux(s, geo.normal, x);
      r.noalias() += w * integrand;
    }
    return r;
  };
  return symmetrized(
      reduce_items(static_cast<int>(facets.size()), s.options.threads, vectors.cols(), item));
}

}  // namespace spectra_shape
