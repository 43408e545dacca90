#include "spectra_shape/pencil.hpp"

#include <iomanip>
#include <ostream>

namespace spectra_shape
{

const char *to_string(ProblemKind kind)
{
  switch (kind)
  {
    case ProblemKind::Helmholtz: return "helmholtz";
    case ProblemKind::Maxwell: return "maxwell";
    case ProblemKind::Abstract: return "abstract-pencil";
  }
  return "unknown";
}

Pencil Pencil::from_dense(const Eigen::MatrixXd &k, const Eigen::MatrixXd &m)
{
  Pencil p;
  p.K = k.sparseView(0.0, 0.0);
  p.M = m.sparseView(0.0, 0.0);
  p.problem = ProblemKind::Abstract;
  p.dof_entity.resize(k.rows());
  p.entity_dof.resize(k.rows());
  for (Eigen::Index i = 0; i < k.rows(); ++i)
  {
    p.dof_entity[i] = static_cast<int>(i);
    p.entity_dof[i] = static_cast<int>(i);
  }
  return p;
}

PencilDerivative PencilDerivative::from_dense(const Eigen::MatrixXd &dk,
                                              const Eigen::MatrixXd &dm)
{
  PencilDerivative d;
  d.dK = dk.sparseView(0.0, 0.0);
  d.dM = dm.sparseView(0.0, 0.0);
  return d;
}

void write_coordinate(const SparseMatrix &a, std::ostream &out)
{
  out << std::setprecision(17);
  for (int col = 0; col < a.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(a, col); it; ++it)
      out << it.row() << " " << it.col() << " " << it.value() << "\n";
}

}  // namespace spectra_shape
