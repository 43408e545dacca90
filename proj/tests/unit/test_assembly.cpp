#include <doctest.h>

#include <cmath>

#include "spectra_shape/assembly.hpp"
#include "spectra_shape/errors.hpp"
#include "spectra_shape/spectral.hpp"
#include "support.hpp"

using namespace spectra_shape;
using namespace test_support;

namespace
{

const ParamVec kZero = scalar_param(0.0);
const ParamVec kOne = scalar_param(1.0);

TransformationFamily bump_family()
{
  const Mat3 shear = (Mat3() << 0, 0.3, 0, 0, 0, 0, 0.1, 0, 0).finished();
  return TransformationFamily::bump(
      {VectorFieldTerm::sine(0, {0, 1, 2}, 0.4, 0.5), VectorFieldTerm::linear(shear)});
}

const ParamVec kChi = (ParamVec(2) << 0.2, -0.4).finished();
const ParamVec kDir = (ParamVec(2) << 1.0, 0.6).finished();

const MatrixField kEps = MatrixField::affine_diagonal(
    Vec3(1.0, 1.3, 0.9), (Mat3() << 0.2, 0.0, 0.1, 0.0, 0.1, 0.0, -0.1, 0.0, 0.2).finished());
const MatrixField kMuInv = MatrixField::scalar_affine(1.1, Vec3(-0.2, 0.1, 0.1));
const ScalarField kNu = ScalarField::affine(1.2, Vec3(0.1, -0.1, 0.2));

double fd_error(const SparseMatrix &exact, const SparseMatrix &plus, const SparseMatrix &minus,
                double h, const SparseMatrix &ref)
{
  return (dense(exact) - (dense(plus) - dense(minus)) / (2 * h)).norm() / dense(ref).norm();
}

}  // namespace

TEST_CASE("Helmholtz mass matrix on the all-N unit cell")
{
  const Mesh mesh = unit_cube(1, BoundaryTag::N);
  const auto id = TransformationFamily::identity();
  const Pencil p = assemble_helmholtz(mesh, id, kZero, MatrixField::identity(),
                                      ScalarField::constant(1.0));
  REQUIRE(p.num_dofs() == 8);
  CHECK(dense(p.M).sum() == doctest::Approx(1.0).epsilon(1e-14));
  for (int v = 0; v < 8; ++v)
  {
    double expected = 0.0;
    for (int t = 0; t < mesh.num_tets(); ++t)
      for (int i : mesh.tets()[t])
        if (i == v) expected += mesh.tet_volume(t) / 10.0;
    CHECK(p.M.coeff(p.entity_dof[v], p.entity_dof[v]) == doctest::Approx(expected));
  }
  CHECK((dense(p.K) * Eigen::VectorXd::Ones(8)).norm() < 1e-14);
}

TEST_CASE("all-T unit cell has no Helmholtz dofs")
{
  CHECK_THROWS_AS(assemble_helmholtz(unit_cube(1), TransformationFamily::identity(), kZero,
                                     MatrixField::identity(), ScalarField::constant(1.0)),
                  DegenerateProblem);
}

TEST_CASE("lumped mass is the row-sum diagonal of the consistent mass for P1")
{
  const Mesh mesh = unit_cube(3, BoundaryTag::N);
  const auto id = TransformationFamily::identity();
  AssemblyOptions lumped;
  lumped.lumped_mass = true;
  const Pencil c = assemble_helmholtz(mesh, id, kZero, MatrixField::identity(),
                                      ScalarField::constant(1.0));
  const Pencil l = assemble_helmholtz(mesh, id, kZero, MatrixField::identity(),
                                      ScalarField::constant(1.0), lumped);
  const Eigen::MatrixXd ml = dense(l.M);
  CHECK((ml - Eigen::MatrixXd(ml.diagonal().asDiagonal())).norm() == 0.0);
  CHECK((ml.diagonal() - dense(c.M).rowwise().sum()).norm() < 1e-14);
  CHECK(relative_error(dense(l.K), dense(c.K)) == 0.0);
}

TEST_CASE("Dirichlet cube lowest Helmholtz eigenvalue brackets 3 pi^2 from above")
{
  auto lowest = [](BoxSplit split) {
    const Pencil p =
        assemble_helmholtz(unit_cube(4, BoundaryTag::T, split), TransformationFamily::identity(),
                           kZero, MatrixField::identity(), ScalarField::constant(1.0));
    return solve_pencil(p).eigenvalue(1);
  };
  const double mirrored = lowest(BoxSplit::Mirrored);
  CHECK(mirrored >= 3 * kPi * kPi);
  CHECK(mirrored <= 1.25 * 3 * kPi * kPi);
  const double kuhn = lowest(BoxSplit::Kuhn);
  CHECK(kuhn >= 3 * kPi * kPi);
  CHECK(kuhn == doctest::Approx(37.49923).epsilon(1e-6));
}

TEST_CASE("pencil derivatives: translation and scaling laws")
{
  const Mesh mesh = build_box_mesh(Vec3(1.0, 0.8, 1.2), 2, partition_from("TNTTNT"));
  const auto translation = TransformationFamily::translation(Vec3(0.3, -0.2, 0.5));
  const auto scaling = TransformationFamily::scaling();
  const MatrixField eps_c = MatrixField::constant(
      (Mat3() << 2.0, 0.2, 0.0, 0.2, 1.0, 0.1, 0.0, 0.1, 1.5).finished());

  const auto dh = assemble_helmholtz_derivative(mesh, translation, kZero, kOne, eps_c,
                                                ScalarField::constant(1.3));
  CHECK(dense(dh.dK).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(dense(dh.dM).cwiseAbs().maxCoeff() < 1e-12);
  const auto dm = assemble_maxwell_derivative(mesh, translation, kZero, kOne, eps_c, eps_c);
  CHECK(dense(dm.dK).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(dense(dm.dM).cwiseAbs().maxCoeff() < 1e-12);

  const auto id = MatrixField::identity();
  const auto one = ScalarField::constant(1.0);
  const Pencil h = assemble_helmholtz(mesh, scaling, kZero, id, one);
  const auto hs = assemble_helmholtz_derivative(mesh, scaling, kZero, kOne, id, one);
  CHECK(relative_error(dense(hs.dK), dense(h.K)) < 1e-14);
  CHECK(relative_error(dense(hs.dM), 3.0 * dense(h.M)) < 1e-14);

  const Pencil m = assemble_maxwell(mesh, scaling, kZero, id, id);
  const auto ms = assemble_maxwell_derivative(mesh, scaling, kZero, kOne, id, id);
  CHECK(relative_error(dense(ms.dK), -dense(m.K)) < 1e-14);
  CHECK(relative_error(dense(ms.dM), dense(m.M)) < 1e-14);
}

TEST_CASE("pencil derivatives match central differences for a nonaffine family")
{
  const Mesh mesh = build_box_mesh(Vec3::Ones(), 2, partition_from("NTTNTT"));
  const auto family = bump_family();
  const double h = 1e-5;
  const ParamVec plus = kChi + h * kDir, minus = kChi - h * kDir;

  for (bool lumped : {false, true})
  {
    AssemblyOptions opts;
    opts.lumped_mass = lumped;
    const auto d = assemble_helmholtz_derivative(mesh, family, kChi, kDir, kEps, kNu, opts);
    const Pencil p = assemble_helmholtz(mesh, family, plus, kEps, kNu, opts);
    const Pencil q = assemble_helmholtz(mesh, family, minus, kEps, kNu, opts);
    CHECK(fd_error(d.dK, p.K, q.K, h, p.K) < 1e-6);
    CHECK(fd_error(d.dM, p.M, q.M, h, p.M) < 1e-6);
  }

  const auto d = assemble_maxwell_derivative(mesh, family, kChi, kDir, kEps, kMuInv);
  const Pencil p = assemble_maxwell(mesh, family, plus, kEps, kMuInv);
  const Pencil q = assemble_maxwell(mesh, family, minus, kEps, kMuInv);
  CHECK(fd_error(d.dK, p.K, q.K, h, p.K) < 1e-6);
  CHECK(fd_error(d.dM, p.M, q.M, h, p.M) < 1e-6);
}

TEST_CASE("Maxwell kernel on the all-N unit cell is the discrete gradient space")
{
  const Mesh mesh = unit_cube(1, BoundaryTag::N);
  const auto id = MatrixField::identity();
  const Pencil p = assemble_maxwell(mesh, TransformationFamily::identity(), kZero, id, id);
  CHECK(p.num_dofs() == 19);
  const auto d = solve_pencil(p);
  CHECK(d.kernel_dim == 8 - 1);
  const auto g = gradient_kernel_basis(mesh);
  CHECK(g.columns.cols() == 8);
  CHECK(g.rank == 7);
}

TEST_CASE("gradient kernel basis")
{
  const auto id = MatrixField::identity();
  for (BoundaryTag tag : {BoundaryTag::N, BoundaryTag::T})
  {
    const Mesh mesh = unit_cube(2, tag);
    const auto g = gradient_kernel_basis(mesh);
    CHECK(g.columns.cols() == (tag == BoundaryTag::N ? 27 : 1));
    const Pencil p = assemble_maxwell(mesh, TransformationFamily::identity(), kZero, id, id);
    CHECK((dense(p.K) * g.columns).cwiseAbs().maxCoeff() < 1e-12 * dense(p.K).norm());
  }
  const Mesh mixed = build_box_mesh(Vec3(1.0, 0.7, 0.9), 3, partition_from("NNTNTN"));
  const auto g = gradient_kernel_basis(mixed);
  const Pencil p = assemble_maxwell(mixed, bump_family(), kChi, kEps, kMuInv);
  CHECK((dense(p.K) * g.columns).cwiseAbs().maxCoeff() < 1e-12 * dense(p.K).norm());
  CHECK(solve_pencil(p).kernel_dim == g.rank);
}

TEST_CASE("PEC cube lowest nonzero Maxwell eigenvalue")
{
  const auto id = MatrixField::identity();
  for (BoxSplit split : {BoxSplit::Kuhn, BoxSplit::Mirrored})
  {
    const Mesh mesh = unit_cube(6, BoundaryTag::T, split);
    const Pencil p = assemble_maxwell(mesh, TransformationFamily::identity(), kZero, id, id);
    const auto d = solve_pencil(p);
    CHECK(d.kernel_dim == 125);
    CHECK(std::abs(d.eigenvalue(1) / (2 * kPi * kPi) - 1.0) < 0.05);
    if (split == BoxSplit::Mirrored)
      CHECK((d.eigenvalue(3) - d.eigenvalue(1)) < 1e-10 * d.eigenvalue(1));
  }
}

TEST_CASE("Maxwell nonzero spectrum follows the exact scaling law")
{
  const Mesh mesh = build_box_mesh(Vec3(1.0, 0.9, 0.8), 2, partition_from("TTNTTN"));
  const auto id = MatrixField::identity();
  const auto scaling = TransformationFamily::scaling();
  const auto d0 = solve_pencil(assemble_maxwell(mesh, scaling, kZero, id, id));
  const double chi = 0.35;
  const auto d1 = solve_pencil(assemble_maxwell(mesh, scaling, scalar_param(chi), id, id));
  REQUIRE(d0.size() == d1.size());
  CHECK(d0.kernel_dim == d1.kernel_dim);
  const Eigen::VectorXd predicted = d0.eigenvalues / ((1 + chi) * (1 + chi));
  CHECK(((d1.eigenvalues - predicted).cwiseQuotient(predicted)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("assembly is bit-identical across thread counts")
{
  const Mesh mesh = build_box_mesh(Vec3::Ones(), 3, partition_from("NTTNTT"));
  AssemblyOptions one, four;
  four.threads = 4;
  const auto family = bump_family();
  const Pencil a = assemble_maxwell(mesh, family, kChi, kEps, kMuInv, one);
  const Pencil b = assemble_maxwell(mesh, family, kChi, kEps, kMuInv, four);
  CHECK((dense(a.K) - dense(b.K)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((dense(a.M) - dense(b.M)).cwiseAbs().maxCoeff() == 0.0);
  const auto da = assemble_helmholtz_derivative(mesh, family, kChi, kDir, kEps, kNu, one);
  const auto db = assemble_helmholtz_derivative(mesh, family, kChi, kDir, kEps, kNu, four);
  CHECK((dense(da.dK) - dense(db.dK)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((dense(da.dM) - dense(db.dM)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("inadmissible parameters are reported")
{
  const Mesh mesh = unit_cube(2, BoundaryTag::N);
  const auto id = MatrixField::identity();
  CHECK_THROWS_AS(assemble_maxwell(mesh, TransformationFamily::scaling(), scalar_param(-1.2), id, id),
                  InadmissibleParameter);
}
