#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <vector>

#include "spectra_shape/mesh.hpp"

namespace spectra_shape
{

using ParamVec = Eigen::VectorXd;

inline ParamVec scalar_param(double v) { return ParamVec::Constant(1, v); }

/// One parameter's contribution to a transformation, x -> f(x).
struct VectorFieldTerm
{
  enum class Kind
  {
    Affine,    ///< A x + b
    Constant,  ///< b
    Linear,    ///< G x
    Sine       ///< amplitude * prod_d sin(pi * frequency * x_d) e_axis
  };

  Kind kind = Kind::Constant;
  Mat3 matrix = Mat3::Zero();
  Vec3 shift = Vec3::Zero();
  int axis = 0;
  std::vector<int> depends_on;
  double amplitude = 0.0;
  double frequency = 1.0;

  static VectorFieldTerm affine(const Mat3 &a, const Vec3 &b);
  static VectorFieldTerm constant(const Vec3 &b);
  static VectorFieldTerm linear(const Mat3 &g);
  static VectorFieldTerm sine(int axis, std::vector<int> depends_on, double amplitude,
                              double frequency);

  Vec3 value(const Vec3 &x) const;
  Mat3 jacobian(const Vec3 &x) const;
  bool is_affine() const { return kind != Kind::Sine; }
};

/// Phi_chi(x) = A0 x + b0 + sum_k chi_k f_k(x). The affine family uses a single
/// affine term; the bump family uses A0 = I, b0 = 0 and catalog fields.
class TransformationFamily
{
public:
  TransformationFamily() = default;
  TransformationFamily(const Mat3 &base_matrix, const Vec3 &base_shift,
                       std::vector<VectorFieldTerm> terms);

  static TransformationFamily identity();
  static TransformationFamily affine(const Mat3 &a0, const Mat3 &a1, const Vec3 &b0,
                                     const Vec3 &b1);
  static TransformationFamily bump(std::vector<VectorFieldTerm> fields);
  /// (1 + chi) x
  static TransformationFamily scaling();
  /// x + chi b
  static TransformationFamily translation(const Vec3 &b);

  int num_parameters() const { return static_cast<int>(terms_.size()); }
  bool is_affine() const;

  Vec3 map(const ParamVec &chi, const Vec3 &x) const;
  Mat3 jacobian(const ParamVec &chi, const Vec3 &x) const;
  /// Reference perturbation field d/dtau Phi_{chi + tau dir}(x).
  Vec3 velocity(const ParamVec &direction, const Vec3 &x) const;
  Mat3 velocity_jacobian(const ParamVec &direction, const Vec3 &x) const;

  void set_admissible_interval(double lo, double hi) { interval_ = {lo, hi}; }
  std::optional<std::array<double, 2>> admissible_interval() const { return interval_; }

private:
  void check_dims(const ParamVec &v) const;

  Mat3 base_matrix_ = Mat3::Identity();
  Vec3 base_shift_ = Vec3::Zero();
  std::vector<VectorFieldTerm> terms_;
  std::optional<std::array<double, 2>> interval_;
};

/// Symmetric 3x3 coefficient field with analytic spatial gradient.
class MatrixField
{
public:
  enum class Kind
  {
    ConstantSpd,
    AffineDiagonal,       ///< diag(d0 + D x): row i of D is grad of entry (i,i)
    ScalarAffineIdentity  ///< (a + g.x) I
  };

  static MatrixField constant(const Mat3 &value);
  static MatrixField identity() { return constant(Mat3::Identity()); }
  static MatrixField affine_diagonal(const Vec3 &d0, const Mat3 &slopes);
  static MatrixField scalar_affine(double a, const Vec3 &g);

  Kind kind() const { return kind_; }
  bool is_constant() const;
  Mat3 value(const Vec3 &y) const;
  /// d(value)/dy_k for k = 0, 1, 2.
  std::array<Mat3, 3> gradient(const Vec3 &y) const;
  /// sum_k v_k d(value)/dy_k, i.e. the entrywise grad . v
  Mat3 directional(const Vec3 &y, const Vec3 &v) const;

private:
  Kind kind_ = Kind::ConstantSpd;
  Mat3 constant_ = Mat3::Identity();
  Vec3 d0_ = Vec3::Ones();
  Mat3 slopes_ = Mat3::Zero();
  double a_ = 1.0;
  Vec3 g_ = Vec3::Zero();
};

class ScalarField
{
public:
  static ScalarField constant(double a) { return affine(a, Vec3::Zero()); }
  static ScalarField affine(double a, const Vec3 &g);

  bool is_constant() const { return g_.isZero(0.0); }
  double value(const Vec3 &y) const { return a_ + g_.dot(y); }
  Vec3 gradient(const Vec3 &) const { return g_; }

private:
  double a_ = 1.0;
  Vec3 g_ = Vec3::Zero();
};

/// Geometry of Phi at a reference point.
struct PointGeometry
{
  Vec3 y;
  Mat3 jacobian;
  Mat3 inverse;
  double det = 1.0;
};

/// Throws InadmissibleParameter when det J <= 0 at x.
PointGeometry evaluate_geometry(const TransformationFamily &family, const ParamVec &chi,
                                const Vec3 &x);

/// det J J^{-1} eps(Phi(x)) J^{-T}
Mat3 transformed_epsilon(const TransformationFamily &family, const ParamVec &chi,
                         const MatrixField &eps, const Vec3 &x);
/// det J nu(Phi(x))
double transformed_nu(const TransformationFamily &family, const ParamVec &chi,
                      const ScalarField &nu, const Vec3 &x);
/// det J^{-1} J^T mu^{-1}(Phi(x)) J
Mat3 transformed_mu_inv(const TransformationFamily &family, const ParamVec &chi,
                        const MatrixField &mu_inv, const Vec3 &x);

/// Perturbation field pushed to the physical domain, evaluated at y = Phi(x).
struct PhysicalPerturbation
{
  Vec3 psi;
  Mat3 jacobian;
  double divergence = 0.0;
};

PhysicalPerturbation psi_on_physical(const TransformationFamily &family, const ParamVec &chi,
                                     const ParamVec &direction, const Vec3 &x);

// Physical-domain brackets of the shape derivative forms, given the coefficient
// value, its directional derivative along Psi, and the perturbation.
Mat3 epsilon_shape_bracket(const Mat3 &eps, const Mat3 &d_eps, const PhysicalPerturbation &p);
Mat3 mu_inv_shape_bracket(const Mat3 &mu_inv, const Mat3 &d_mu_inv,
                          const PhysicalPerturbation &p);
double nu_shape_bracket(double nu, double d_nu, const PhysicalPerturbation &p);

Mat3 directional_coefficient_epsilon(const TransformationFamily &family, const ParamVec &chi,
                                     const ParamVec &direction, const MatrixField &eps,
                                     const Vec3 &x);
Mat3 directional_coefficient_mu_inv(const TransformationFamily &family, const ParamVec &chi,
                                    const ParamVec &direction, const MatrixField &mu_inv,
                                    const Vec3 &x);
double directional_coefficient_nu(const TransformationFamily &family, const ParamVec &chi,
                                  const ParamVec &direction, const ScalarField &nu,
                                  const Vec3 &x);

inline Mat3 sym(const Mat3 &a) { return 0.5 * (a + a.transpose()); }

}  // namespace spectra_shape
