#pragma once

#include <Eigen/Core>

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace spectra_shape
{

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Boundary part a facet belongs to: T carries the essential condition
/// (u = 0, n x E = 0), N the natural one.
enum class BoundaryTag
{
  T,
  N
};

char to_char(BoundaryTag tag);

struct BoundaryFacet
{
  std::array<int, 3> vertices;
  BoundaryTag tag = BoundaryTag::T;
  int owner = -1;       ///< owning tet
  int local_face = -1;  ///< local index of the owner's vertex opposite the facet
};

/// Tags for the six faces of an axis-aligned box, ordered x=0, x=max, y=0,
/// y=max, z=0, z=max.
struct BoxPartition
{
  std::array<BoundaryTag, 6> faces{BoundaryTag::T, BoundaryTag::T, BoundaryTag::T,
                                   BoundaryTag::T, BoundaryTag::T, BoundaryTag::T};

  static BoxPartition all(BoundaryTag tag);
};

/// Local edges of a tet as pairs of local vertex indices.
inline constexpr std::array<std::array<int, 2>, 6> kTetLocalEdges{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Immutable tetrahedral mesh with a tagged boundary. Construction validates
/// orientation, facet ownership and boundary coverage.
class Mesh
{
public:
  Mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets,
       std::vector<std::pair<std::array<int, 3>, BoundaryTag>> tagged_facets);

  const std::vector<Vec3> &vertices() const { return vertices_; }
  const std::vector<std::array<int, 4>> &tets() const { return tets_; }
  const std::vector<BoundaryFacet> &boundary_facets() const { return facets_; }
  /// Global edges, each stored once as (low, high) and sorted lexicographically.
  const std::vector<std::array<int, 2>> &edges() const { return edges_; }
  /// Global edge index of each local edge (kTetLocalEdges order).
  const std::vector<std::array<int, 6>> &tet_edges() const { return tet_edges_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_tets() const { return static_cast<int>(tets_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  double tet_volume(int t) const;
  /// Constant gradients of the barycentric coordinates of tet t (columns).
  Eigen::Matrix<double, 3, 4> barycentric_gradients(int t) const;
  Vec3 point(int t, const std::array<double, 4> &bary) const;

  /// Vertices on the closure of the T part of the boundary.
  const std::vector<bool> &tangential_vertices() const { return t_vertex_; }
  /// Edges lying in a T-tagged facet.
  const std::vector<bool> &tangential_edges() const { return t_edge_; }

  /// Number of tets sharing the face with the given vertices (0, 1 or 2).
  int face_multiplicity(std::array<int, 3> face) const;
  /// Index into boundary_facets() of the given face, or -1.
  int find_boundary_facet(std::array<int, 3> face) const;

  /// Connected components (via shared faces) that touch no T facet.
  int free_components() const { return free_components_; }

  bool operator==(const Mesh &other) const;

private:
  struct FaceRecord
  {
    int count = 0;
    int tet = -1;
    int local_face = -1;
    int facet = -1;
  };

  void validate_and_index(std::vector<std::pair<std::array<int, 3>, BoundaryTag>> tagged);

  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 4>> tets_;
  std::vector<BoundaryFacet> facets_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 6>> tet_edges_;
  std::map<std::array<int, 3>, FaceRecord> faces_;
  std::vector<bool> t_vertex_;
  std::vector<bool> t_edge_;
  int free_components_ = 0;
};

/// How each structured cell is cut into 6 tets.
enum class BoxSplit
{
  Kuhn,     ///< every cell cut along its main diagonal
  Mirrored  ///< Kuhn cut reflected in each axis with odd cell index
};

/// Structured box [0,a]x[0,b]x[0,c] with n cells per axis, each cube split
/// into 6 tets. The mirrored split is invariant under all symmetries of the
/// box grid when n is even.
Mesh build_box_mesh(const Vec3 &dims, int n, const BoxPartition &partition,
                    BoxSplit split = BoxSplit::Kuhn);

Mesh load_mesh(const std::string &path);
Mesh read_mesh(std::istream &in);
void save_mesh(const Mesh &mesh, const std::string &path);
void write_mesh(const Mesh &mesh, std::ostream &out);

struct FacetGeometry
{
  Vec3 normal;  ///< unit, pointing out of the owning tet
  double area = 0.0;
};

FacetGeometry facet_geometry(const Mesh &mesh, int boundary_facet);
/// Looks the face up by vertices; throws DomainError for interior faces.
FacetGeometry facet_geometry(const Mesh &mesh, const std::array<int, 3> &face);

}  // namespace spectra_shape
