#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spectra_shape/mesh.hpp"
#include "spectra_shape/pencil.hpp"
#include "spectra_shape/transforms.hpp"

namespace spectra_shape
{

/// Synthetic pencil family K(chi) = K0 + chi K1 + chi^2 K2, M(chi) = M0 + chi M1.
struct AbstractPencilSpec
{
  std::string preset;
  Eigen::MatrixXd k0, k1, k2, m0, m1;

  Pencil pencil(double chi) const;
  PencilDerivative derivative(double chi, double direction) const;
};

/// Built-in synthetic families: "crossing2", "simple2", "degenerate3".
AbstractPencilSpec abstract_preset(const std::string &name);

struct RunConfig
{
  ProblemKind problem = ProblemKind::Helmholtz;

  std::optional<std::string> mesh_file;
  Vec3 box_dims = Vec3::Ones();
  int box_n = 4;
  BoxSplit box_split = BoxSplit::Kuhn;
  BoxPartition partition;

  MatrixField epsilon = MatrixField::identity();
  MatrixField mu_inv = MatrixField::identity();
  ScalarField nu = ScalarField::constant(1.0);

  std::string family_kind = "identity";
  TransformationFamily family = TransformationFamily::identity();
  ParamVec chi = scalar_param(0.0);
  ParamVec direction = scalar_param(1.0);

  int k_first = 1;
  int k_last = 1;

  double kernel_tol = 1e-8;
  double cluster_tol = 1e-6;
  double fd_step = 1e-3;
  std::vector<double> fd_steps{2e-3, 1e-3, 5e-4};
  std::vector<int> refinement;
  std::optional<double> reference_eigenvalue;

  int quadrature_order = 0;
  bool lumped_mass = false;
  int nquad = 64;
  bool surface_trusted = false;

  AbstractPencilSpec abstract_spec;

  /// Canonical JSON echo of the parsed configuration.
  std::string canonical_json;
};

/// Parses and validates a JSON configuration; unknown keys and malformed
/// values raise ConfigError.
RunConfig parse_config(const std::string &json_text);
RunConfig load_config(const std::string &path);

}  // namespace spectra_shape
