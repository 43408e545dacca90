#include "spectra_shape/transforms.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <sstream>

#include "spectra_shape/errors.hpp"

namespace spectra_shape
{

VectorFieldTerm VectorFieldTerm::affine(const Mat3 &a, const Vec3 &b)
{
  VectorFieldTerm t;
  t.kind = Kind::Affine;
  t.matrix = a;
  t.shift = b;
  return t;
}

VectorFieldTerm VectorFieldTerm::constant(const Vec3 &b)
{
  VectorFieldTerm t;
  t.kind = Kind::Constant;
  t.shift = b;
  return t;
}

VectorFieldTerm VectorFieldTerm::linear(const Mat3 &g)
{
  VectorFieldTerm t;
  t.kind = Kind::Linear;
  t.matrix = g;
  return t;
}

VectorFieldTerm VectorFieldTerm::sine(int axis, std::vector<int> depends_on, double amplitude,
                                      double frequency)
{
  if (axis < 0 || axis > 2) throw ConfigError("sine field axis must be 0, 1 or 2");
  for (int d : depends_on)
    if (d < 0 || d > 2) throw ConfigError("sine field dependsOn entries must be 0, 1 or 2");
  VectorFieldTerm t;
  t.kind = Kind::Sine;
  t.axis = axis;
  t.depends_on = std::move(depends_on);
  t.amplitude = amplitude;
  t.frequency = frequency;
  return t;
}

Vec3 VectorFieldTerm::value(const Vec3 &x) const
{
  switch (kind)
  {
    case Kind::Affine: return matrix * x + shift;
    case Kind::Constant: return shift;
    case Kind::Linear: return matrix * x;
    case Kind::Sine:
    {
      double s = amplitude;
      for (int d : depends_on) s *= std::sin(std::numbers::pi * frequency * x[d]);
      Vec3 v = Vec3::Zero();
      v[axis] = s;
      return v;
    }
  }
  return Vec3::Zero();
}

Mat3 VectorFieldTerm::jacobian(const Vec3 &x) const
{
  switch (kind)
  {
    case Kind::Affine:
    case Kind::Linear: return matrix;
    case Kind::Constant: return Mat3::Zero();
    case Kind::Sine:
    {
      const double k = std::numbers::pi * frequency;
      Mat3 j = Mat3::Zero();
      // product rule, repeated axes in depends_on allowed
      for (std::size_t i = 0; i < depends_on.size(); ++i)
      {
        double term = amplitude * k * std::cos(k * x[depends_on[i]]);
        for (std::size_t l = 0; l < depends_on.size(); ++l)
          if (l != i) term *= std::sin(k * x[depends_on[l]]);
        j(axis, depends_on[i]) += term;
      }
      return j;
    }
  }
  return Mat3::Zero();
}

TransformationFamily::TransformationFamily(const Mat3 &base_matrix, const Vec3 &base_shift,
                                           std::vector<VectorFieldTerm> terms)
  : base_matrix_(base_matrix), base_shift_(base_shift), terms_(std::move(terms))
{
  if (terms_.empty()) terms_.push_back(VectorFieldTerm::constant(Vec3::Zero()));
}

TransformationFamily TransformationFamily::identity()
{
  return TransformationFamily(Mat3::Identity(), Vec3::Zero(), {});
}

TransformationFamily TransformationFamily::affine(const Mat3 &a0, const Mat3 &a1,
                                                  const Vec3 &b0, const Vec3 &b1)
{
  return TransformationFamily(a0, b0, {VectorFieldTerm::affine(a1, b1)});
}

TransformationFamily TransformationFamily::bump(std::vector<VectorFieldTerm> fields)
{
  return TransformationFamily(Mat3::Identity(), Vec3::Zero(), std::move(fields));
}

TransformationFamily TransformationFamily::scaling()
{
  return affine(Mat3::Identity(), Mat3::Identity(), Vec3::Zero(), Vec3::Zero());
}

TransformationFamily TransformationFamily::translation(const Vec3 &b)
{
  return affine(Mat3::Identity(), Mat3::Zero(), Vec3::Zero(), b);
}

bool TransformationFamily::is_affine() const
{
  for (const auto &t : terms_)
    if (!t.is_affine()) return false;
  return true;
}

void TransformationFamily::check_dims(const ParamVec &v) const
{
  if (v.size() != num_parameters())
    throw ConfigError("parameter vector has size " + std::to_string(v.size()) +
                      ", family expects " + std::to_string(num_parameters()));
}

Vec3 TransformationFamily::map(const ParamVec &chi, const Vec3 &x) const
{
  check_dims(chi);
  Vec3 y = base_matrix_ * x + base_shift_;
  for (int k = 0; k < num_parameters(); ++k) y += chi[k] * terms_[k].value(x);
  return y;
}

Mat3 TransformationFamily::jacobian(const ParamVec &chi, const Vec3 &x) const
{
  check_dims(chi);
  Mat3 j = base_matrix_;
  for (int k = 0; k < num_parameters(); ++k) j += chi[k] * terms_[k].jacobian(x);
  return j;
}

Vec3 TransformationFamily::velocity(const ParamVec &direction, const Vec3 &x) const
{
  check_dims(direction);
  Vec3 v = Vec3::Zero();
  for (int k = 0; k < num_parameters(); ++k) v += direction[k] * terms_[k].value(x);
  return v;
}

Mat3 TransformationFamily::velocity_jacobian(const ParamVec &direction, const Vec3 &x) const
{
  check_dims(direction);
  Mat3 j = Mat3::Zero();
  for (int k = 0; k < num_parameters(); ++k) j += direction[k] * terms_[k].jacobian(x);
  return j;
}

MatrixField MatrixField::constant(const Mat3 &value)
{
  if (!value.isApprox(value.transpose(), 1e-14))
    throw ConfigError("constant coefficient matrix must be symmetric");
  if (Eigen::LLT<Mat3>(value).info() != Eigen::Success)
    throw ConfigError("constant coefficient matrix must be positive definite");
  MatrixField f;
  f.kind_ = Kind::ConstantSpd;
  f.constant_ = sym(value);
  return f;
}

MatrixField MatrixField::affine_diagonal(const Vec3 &d0, const Mat3 &slopes)
{
  MatrixField f;
  f.kind_ = Kind::AffineDiagonal;
  f.d0_ = d0;
  f.slopes_ = slopes;
  return f;
}

MatrixField MatrixField::scalar_affine(double a, const Vec3 &g)
{
  MatrixField f;
  f.kind_ = Kind::ScalarAffineIdentity;
  f.a_ = a;
  f.g_ = g;
  return f;
}

bool MatrixField::is_constant() const
{
  switch (kind_)
  {
    case Kind::ConstantSpd: return true;
    case Kind::AffineDiagonal: return slopes_.isZero(0.0);
    case Kind::ScalarAffineIdentity: return g_.isZero(0.0);
  }
  return true;
}

Mat3 MatrixField::value(const Vec3 &y) const
{
  Mat3 v;
  switch (kind_)
  {
    case Kind::ConstantSpd: return constant_;
    case Kind::AffineDiagonal: v = (d0_ + slopes_ * y).asDiagonal(); break;
    case Kind::ScalarAffineIdentity: v = (a_ + g_.dot(y)) * Mat3::Identity(); break;
  }
  if (v.diagonal().minCoeff() <= 0.0)
  {
    std::ostringstream msg;
    msg << "coefficient is not positive definite at (" << y.transpose() << ")";
    throw DomainError(msg.str());
  }
  return v;
}

std::array<Mat3, 3> MatrixField::gradient(const Vec3 &) const
{
  std::array<Mat3, 3> g{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  switch (kind_)
  {
    case Kind::ConstantSpd: break;
    case Kind::AffineDiagonal:
      for (int k = 0; k < 3; ++k) g[k].diagonal() = slopes_.col(k);
      break;
    case Kind::ScalarAffineIdentity:
      for (int k = 0; k < 3; ++k) g[k] = g_[k] * Mat3::Identity();
      break;
  }
  return g;
}

Mat3 MatrixField::directional(const Vec3 &y, const Vec3 &v) const
{
  const auto g = gradient(y);
  return v[0] * g[0] + v[1] * g[1] + v[2] * g[2];
}

ScalarField ScalarField::affine(double a, const Vec3 &g)
{
  ScalarField f;
  f.a_ = a;
  f.g_ = g;
  return f;
}

PointGeometry evaluate_geometry(const TransformationFamily &family, const ParamVec &chi,
                                const Vec3 &x)
{
  PointGeometry g;
  g.y = family.map(chi, x);
  g.jacobian = family.jacobian(chi, x);
  g.det = g.jacobian.determinant();
  if (!(g.det > 0.0))
  {
    std::ostringstream msg;
    msg << "inadmissible parameter: det J_Phi = " << g.det << " at x = (" << x.transpose()
        << ")";
    throw InadmissibleParameter(msg.str());
  }
  g.inverse = g.jacobian.inverse();
  return g;
}

Mat3 transformed_epsilon(const TransformationFamily &family, const ParamVec &chi,
                         const MatrixField &eps, const Vec3 &x)
{
  const auto g = evaluate_geometry(family, chi, x);
  return sym(g.det * g.inverse * eps.value(g.y) * g.inverse.transpose());
}

double transformed_nu(const TransformationFamily &family, const ParamVec &chi,
                      const ScalarField &nu, const Vec3 &x)
{
  const auto g = evaluate_geometry(family, chi, x);
  const double v = nu.value(g.y);
  if (!(v > 0.0)) throw DomainError("scalar coefficient nu is not positive");
  return g.det * v;
}

Mat3 transformed_mu_inv(const TransformationFamily &family, const ParamVec &chi,
                        const MatrixField &mu_inv, const Vec3 &x)
{
  const auto g = evaluate_geometry(family, chi, x);
  return sym(g.jacobian.transpose() * mu_inv.value(g.y) * g.jacobian / g.det);
}

PhysicalPerturbation psi_on_physical(const TransformationFamily &family, const ParamVec &chi,
                                     const ParamVec &direction, const Vec3 &x)
{
  const auto g = evaluate_geometry(family, chi, x);
  PhysicalPerturbation p;
  p.psi = family.velocity(direction, x);
  p.jacobian = family.velocity_jacobian(direction, x) * g.inverse;
  p.divergence = p.jacobian.trace();
  return p;
}

Mat3 epsilon_shape_bracket(const Mat3 &eps, const Mat3 &d_eps, const PhysicalPerturbation &p)
{
  return d_eps + p.divergence * eps - 2.0 * sym(p.jacobian * eps);
}

Mat3 mu_inv_shape_bracket(const Mat3 &mu_inv, const Mat3 &d_mu_inv,
                          const PhysicalPerturbation &p)
{
  return d_mu_inv - p.divergence * mu_inv + 2.0 * sym(mu_inv * p.jacobian);
}

double nu_shape_bracket(double nu, double d_nu, const PhysicalPerturbation &p)
{
  return d_nu + p.divergence * nu;
}

Mat3 directional_coefficient_epsilon(const TransformationFamily &family, const ParamVec &chi,
                                     const ParamVec &direction, const MatrixField &eps,
                                     const Vec3 &x)
{
  const auto g = evaluate_geometry(family, chi, x);
  const auto p = psi_on_physical(family, chi, direction, x);
  const Mat3 bracket = epsilon_shape_bracket(eps.value(g.y), eps.directional(g.y, p.psi), p);
  return sym(g.det * g.inverse * bracket * g.inverse.transpose());
}

Mat3 directional_coefficient_mu_inv(const TransformationFamily &family, const ParamVec &chi,
                                    const ParamVec &direction, const MatrixField &mu_inv,
                                    const Vec3 &x)
{
  const auto g = evaluate_geometry(family, chi, x);
  const auto p = psi_on_physical(family, chi, direction, x);
  const Mat3 bracket =
      mu_inv_shape_bracket(mu_inv.value(g.y), mu_inv.directional(g.y, p.psi), p);
  return sym(g.jacobian.transpose() * bracket * g.jacobian / g.det);
}

double directional_coefficient_nu(const TransformationFamily &family, const ParamVec &chi,
                                  const ParamVec &direction, const ScalarField &nu,
                                  const Vec3 &x)
{
  const auto g = evaluate_geometry(family, chi, x);
  const auto p = psi_on_physical(family, chi, direction, x);
  return g.det * nu_shape_bracket(nu.value(g.y), nu.gradient(g.y).dot(p.psi), p);
}

}  // namespace spectra_shape
