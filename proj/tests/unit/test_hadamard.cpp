#include <doctest.h>

#include <cmath>
#include <string>

#include "spectra_shape/hadamard.hpp"
#include "spectra_shape/perturbation.hpp"
#include "spectra_shape/spectral.hpp"
#include "support.hpp"

using namespace spectra_shape;
using namespace test_support;

namespace
{

struct Routes
{
  Eigen::MatrixXd rellich, volume, surface;
  double lambda_bar = 0.0;
};

struct Case
{
  std::string name;
  ProblemKind problem;
  Mesh mesh;
  TransformationFamily family;
  ParamVec chi, direction;
  MatrixField eps = MatrixField::identity();
  MatrixField mu_inv = MatrixField::identity();
  ScalarField nu = ScalarField::constant(1.0);
  int first = 1, last = 1;
  bool lumped = false;
};

Routes routes(const Case &c)
{
  AssemblyOptions opts;
  opts.lumped_mass = c.lumped;
  const bool maxwell = c.problem == ProblemKind::Maxwell;
  const Pencil p = maxwell ? assemble_maxwell(c.mesh, c.family, c.chi, c.eps, c.mu_inv, opts)
                           : assemble_helmholtz(c.mesh, c.family, c.chi, c.eps, c.nu, opts);
  const PencilDerivative d =
      maxwell ? assemble_maxwell_derivative(c.mesh, c.family, c.chi, c.direction, c.eps, c.mu_inv, opts)
              : assemble_helmholtz_derivative(c.mesh, c.family, c.chi, c.direction, c.eps, c.nu, opts);
  const auto dec = solve_pencil(p);
  Routes r;
  const int m = c.last - c.first + 1;
  const Eigen::MatrixXd vectors = dec.eigenvectors.middleCols(c.first - dec.first_index, m);
  r.lambda_bar = dec.eigenvalues.segment(c.first - dec.first_index, m).mean();
  r.rellich = rellich_matrix(d, vectors, r.lambda_bar);
  const ShapeSetting setting{c.mesh, c.family, c.chi, c.direction, opts};
  if (maxwell)
  {
    r.volume = maxwell_volume_matrix(setting, c.eps, c.mu_inv, vectors, r.lambda_bar);
    r.surface = maxwell_surface_matrix(setting, c.eps, c.mu_inv, vectors, r.lambda_bar);
  }
  else
  {
    r.volume = helmholtz_volume_matrix(setting, c.eps, c.nu, vectors, r.lambda_bar);
    r.surface = helmholtz_surface_matrix(setting, c.eps, c.nu, vectors, r.lambda_bar);
  }
  return r;
}

TransformationFamily stretch(int axis)
{
  Mat3 a1 = Mat3::Zero();
  a1(axis, axis) = 1.0;
  return TransformationFamily::affine(Mat3::Identity(), a1, Vec3::Zero(), Vec3::Zero());
}

TransformationFamily general_affine()
{
  const Mat3 a0 = (Mat3() << 1.1, 0.1, 0.0, 0.0, 0.9, 0.05, 0.02, 0.0, 1.0).finished();
  const Mat3 a1 = (Mat3() << 0.2, 0.0, 0.1, 0.3, -0.1, 0.0, 0.0, 0.1, 0.15).finished();
  return TransformationFamily::affine(a0, a1, Vec3(0.1, 0, 0), Vec3(0.0, 0.2, -0.1));
}

TransformationFamily sine_bump()
{
  return TransformationFamily::bump({VectorFieldTerm::sine(0, {0, 1, 2}, 1.0, 0.5)});
}

TransformationFamily two_field_bump()
{
  const Mat3 g = (Mat3() << 0, 0.4, 0, 0.1, 0, 0, 0, 0, -0.2).finished();
  return TransformationFamily::bump(
      {VectorFieldTerm::sine(1, {0, 2}, 0.3, 1.0), VectorFieldTerm::linear(g)});
}

std::vector<Case> route_cases()
{
  const MatrixField eps_var = MatrixField::affine_diagonal(
      Vec3(1.2, 1.0, 0.8), (Mat3() << 0.2, 0.1, 0, 0, -0.1, 0.2, 0.1, 0, 0.1).finished());
  const MatrixField eps_aniso =
      MatrixField::constant((Mat3() << 2.0, 0.3, 0.0, 0.3, 1.2, 0.1, 0.0, 0.1, 1.5).finished());
  const MatrixField mu_var = MatrixField::scalar_affine(0.9, Vec3(0.2, 0.1, -0.1));
  const ScalarField nu_var = ScalarField::affine(1.1, Vec3(0.2, -0.1, 0.1));
  const ParamVec zero = scalar_param(0.0), one = scalar_param(1.0), mid = scalar_param(0.15);
  const ParamVec chi2 = (ParamVec(2) << 0.1, 0.2).finished();
  const ParamVec dir2 = (ParamVec(2) << 1.0, -0.5).finished();
  const Mesh cube = unit_cube(3);
  const Mesh mixed = build_box_mesh(Vec3(1.0, 0.9, 0.8), 3, partition_from("NTTNTT"));
  const Mesh open = build_box_mesh(Vec3(1.0, 1.0, 0.7), 3, partition_from("NNTTNT"));

  std::vector<Case> cases;
  for (ProblemKind problem : {ProblemKind::Helmholtz, ProblemKind::Maxwell})
  {
    const std::string tag = problem == ProblemKind::Helmholtz ? "helmholtz" : "maxwell";
    cases.push_back({tag + " scaling identity coefficients", problem, cube,
                     TransformationFamily::scaling(), zero, one});
    cases.push_back({tag + " translation anisotropic constant", problem, mixed,
                     TransformationFamily::translation(Vec3(0.2, -0.3, 0.1)), zero, one, eps_aniso,
                     eps_aniso, ScalarField::constant(1.4)});
    cases.push_back({tag + " stretch variable coefficients", problem, mixed, stretch(0), mid, one,
                     eps_var, mu_var, nu_var, 1, 2});
    cases.push_back({tag + " general affine variable coefficients", problem, open,
                     general_affine(), mid, one, eps_var, mu_var, nu_var, 1, 3});
    cases.push_back({tag + " sine bump", problem, mixed, sine_bump(), mid, one, eps_aniso,
                     MatrixField::identity(), ScalarField::constant(1.0), 2, 2});
    cases.push_back({tag + " two-field bump variable coefficients", problem, open,
                     two_field_bump(), chi2, dir2, eps_var, mu_var, nu_var, 1, 2});
  }
  Case lumped{"helmholtz lumped two-field bump", ProblemKind::Helmholtz, mixed, two_field_bump(),
              chi2, dir2, eps_var, mu_var, nu_var, 1, 3};
  lumped.lumped = true;
  cases.push_back(lumped);
  return cases;
}

}  // namespace

TEST_CASE("volume forms equal the pencil-derivative Rellich matrix")
{
  const auto cases = route_cases();
  CHECK(cases.size() >= 12);
  for (const auto &c : cases)
  {
    CAPTURE(c.name);
    const Routes r = routes(c);
    const double scale = std::max(r.rellich.norm(), 1e-12 * r.lambda_bar);
    CHECK((r.volume - r.rellich).norm() <= 1e-10 * scale);
    CHECK((r.volume - r.volume.transpose()).norm() == 0.0);
    CHECK((r.surface - r.surface.transpose()).norm() == 0.0);
  }
}

TEST_CASE("translation gives vanishing volume forms and small surface forms")
{
  for (ProblemKind problem : {ProblemKind::Helmholtz, ProblemKind::Maxwell})
  {
    const Case c{"translation", problem, unit_cube(4),
                 TransformationFamily::translation(Vec3(1.0, 0.5, -0.25)), scalar_param(0.0),
                 scalar_param(1.0)};
    const Routes r = routes(c);
    CHECK(r.volume.norm() < 1e-10 * r.lambda_bar);
    CHECK(r.rellich.norm() < 1e-10 * r.lambda_bar);
    CHECK(r.surface.norm() <= 0.05 * r.lambda_bar);
  }
}

TEST_CASE("scaling on the cube gives -2 lambda on every route")
{
  const Case h{"helmholtz", ProblemKind::Helmholtz, unit_cube(4), TransformationFamily::scaling(),
               scalar_param(0.0), scalar_param(1.0)};
  const Routes rh = routes(h);
  CHECK(rh.volume(0, 0) == doctest::Approx(-2.0 * rh.lambda_bar).epsilon(1e-8));
  CHECK(std::abs(rh.surface(0, 0) / (-2.0 * rh.lambda_bar) - 1.0) < 0.2);

  const Case m{"maxwell", ProblemKind::Maxwell, unit_cube(4, BoundaryTag::T, BoxSplit::Mirrored),
               TransformationFamily::scaling(), scalar_param(0.0), scalar_param(1.0), {}, {}, {},
               1, 3};
  const Routes rm = routes(m);
  CHECK((rm.volume + 2.0 * rm.lambda_bar * Eigen::Matrix3d::Identity()).norm() <
        1e-8 * rm.lambda_bar);
}

TEST_CASE("surface forms approach the volume forms under refinement")
{
  std::vector<double> helm, maxw;
  for (int n : {3, 4, 6})
  {
    const Case h{"helmholtz", ProblemKind::Helmholtz, unit_cube(n), TransformationFamily::scaling(),
                 scalar_param(0.0), scalar_param(1.0)};
    const Routes rh = routes(h);
    helm.push_back((rh.surface - rh.volume).norm() / rh.volume.norm());
    const Case m{"maxwell bump", ProblemKind::Maxwell,
                 build_box_mesh(Vec3(1.0, 0.9, 0.8), n, BoxPartition::all(BoundaryTag::T)),
                 sine_bump(), scalar_param(0.0), scalar_param(1.0)};
    const Routes rm = routes(m);
    maxw.push_back((rm.surface - rm.volume).norm() / rm.volume.norm());
  }
  for (std::size_t i = 1; i < helm.size(); ++i)
  {
    CHECK(helm[i] < helm[i - 1]);
    CHECK(maxw[i] < maxw[i - 1]);
  }
  CHECK(helm.back() <= 0.1);
  CHECK(maxw.back() <= 0.1);
}
