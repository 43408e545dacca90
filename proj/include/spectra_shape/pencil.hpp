#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <vector>

namespace spectra_shape
{

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class ProblemKind
{
  Helmholtz,
  Maxwell,
  Abstract
};

const char *to_string(ProblemKind kind);

/// Symmetric stiffness/mass pair over the free (unconstrained) dofs.
struct Pencil
{
  SparseMatrix K;
  SparseMatrix M;
  /// Mesh entity (vertex or edge) of each free dof.
  std::vector<int> dof_entity;
  /// Free dof index of each mesh entity, -1 when constrained.
  std::vector<int> entity_dof;
  ProblemKind problem = ProblemKind::Abstract;

  int num_dofs() const { return static_cast<int>(K.rows()); }

  static Pencil from_dense(const Eigen::MatrixXd &k, const Eigen::MatrixXd &m);
};

/// Directional derivatives (dK, dM) of a pencil family.
struct PencilDerivative
{
  SparseMatrix dK;
  SparseMatrix dM;

  static PencilDerivative from_dense(const Eigen::MatrixXd &dk, const Eigen::MatrixXd &dm);
};

/// Writes "i j value" lines (0-based) for the stored entries.
void write_coordinate(const SparseMatrix &a, std::ostream &out);

}  // namespace spectra_shape
