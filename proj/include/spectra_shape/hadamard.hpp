#pragma once

#include <Eigen/Dense>

#include "spectra_shape/assembly.hpp"
#include "spectra_shape/spectral.hpp"

namespace spectra_shape
{

// Shape-derivative matrices evaluated on the physical domain Phi(Omega) from
// the discrete eigenfields of a cluster. Fields are pushed forward with
//   u -> u,  grad u -> J^{-T} grad u,  E -> J^{-T} E,  rot E -> J rot E / det J,
// integrals use dy = det J dx at the reference quadrature points, and boundary
// terms use n dsigma_Phi = det J J^{-T} n_ref dsigma_ref.
//
// `vectors` holds the cluster eigenvectors in the free-dof layout of the
// corresponding assembler; `lambda_bar` is the cluster reference value.

struct ShapeSetting
{
  const Mesh &mesh;
  const TransformationFamily &family;
  ParamVec chi;
  ParamVec direction;
  AssemblyOptions options;
};

Eigen::MatrixXd maxwell_volume_matrix(const ShapeSetting &setting, const MatrixField &eps,
                                      const MatrixField &mu_inv, const Eigen::MatrixXd &vectors,
                                      double lambda_bar);

/// int_{Gamma_n} (mu^{-1} rot E_h . rot E_l - lambda eps E_h . E_l)(n . Psi)
/// minus the same integral over Gamma_t; symmetrized.
Eigen::MatrixXd maxwell_surface_matrix(const ShapeSetting &setting, const MatrixField &eps,
                                       const MatrixField &mu_inv, const Eigen::MatrixXd &vectors,
                                       double lambda_bar);

Eigen::MatrixXd helmholtz_volume_matrix(const ShapeSetting &setting, const MatrixField &eps,
                                        const ScalarField &nu, const Eigen::MatrixXd &vectors,
                                        double lambda_bar);

/// int_{Gamma_n} (eps grad u_h . grad u_l - lambda nu u_h u_l)(n . Psi)
/// minus int_{Gamma_t} (eps grad u_h . grad u_l)(n . Psi); symmetrized.
Eigen::MatrixXd helmholtz_surface_matrix(const ShapeSetting &setting, const MatrixField &eps,
                                         const ScalarField &nu, const Eigen::MatrixXd &vectors,
                                         double lambda_bar);

}  // namespace spectra_shape
