#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "spectra_shape/assembly.hpp"
#include "spectra_shape/mesh.hpp"
#include "spectra_shape/pencil.hpp"

namespace test_support
{

using namespace spectra_shape;

inline constexpr double kPi = 3.14159265358979323846;

inline Mesh unit_cube(int n, BoundaryTag tag = BoundaryTag::T, BoxSplit split = BoxSplit::Kuhn)
{
  return build_box_mesh(Vec3::Ones(), n, BoxPartition::all(tag), split);
}

inline BoxPartition partition_from(const char *tags)
{
  BoxPartition p;
  for (int f = 0; f < 6; ++f) p.faces[f] = tags[f] == 'N' ? BoundaryTag::N : BoundaryTag::T;
  return p;
}

inline Eigen::MatrixXd random_spd(int n, std::mt19937_64 &rng, double shift = 1.0)
{
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return a * a.transpose() + shift * Eigen::MatrixXd::Identity(n, n);
}

inline Eigen::MatrixXd random_symmetric(int n, std::mt19937_64 &rng)
{
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return 0.5 * (a + a.transpose());
}

inline double relative_error(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b)
{
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

inline Eigen::MatrixXd dense(const SparseMatrix &a) { return Eigen::MatrixXd(a); }

}  // namespace test_support
