#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "spectra_shape/errors.hpp"
#include "spectra_shape/mesh.hpp"
#include "support.hpp"

using namespace spectra_shape;
using test_support::partition_from;
using test_support::unit_cube;

namespace
{

int count_tag(const Mesh &mesh, BoundaryTag tag)
{
  return static_cast<int>(std::count_if(mesh.boundary_facets().begin(),
                                        mesh.boundary_facets().end(),
                                        [&](const BoundaryFacet &f) { return f.tag == tag; }));
}

int facet_on_plane(const Mesh &mesh, int axis, double value)
{
  for (std::size_t i = 0; i < mesh.boundary_facets().size(); ++i)
  {
    bool on = true;
    for (int v : mesh.boundary_facets()[i].vertices)
      on = on && std::abs(mesh.vertices()[v][axis] - value) < 1e-14;
    if (on) return static_cast<int>(i);
  }
  return -1;
}

std::string serialize(const Mesh &mesh)
{
  std::ostringstream out;
  write_mesh(mesh, out);
  return out.str();
}

}  // namespace

TEST_CASE("box mesh counts")
{
  const Mesh one = unit_cube(1);
  CHECK(one.num_vertices() == 8);
  CHECK(one.num_tets() == 6);
  CHECK(one.boundary_facets().size() == 12);
  CHECK(count_tag(one, BoundaryTag::T) == 12);

  const Mesh two = unit_cube(2);
  CHECK(two.num_vertices() == 27);
  CHECK(two.num_tets() == 48);

  const Mesh slab = build_box_mesh(Vec3(2, 1, 1), 1, partition_from("NTTTTT"));
  CHECK(count_tag(slab, BoundaryTag::N) == 2);
  CHECK(count_tag(slab, BoundaryTag::T) == 10);
}

TEST_CASE("box meshes satisfy the structural invariants")
{
  for (BoxSplit split : {BoxSplit::Kuhn, BoxSplit::Mirrored})
  {
    const Mesh mesh = build_box_mesh(Vec3(1.0, 0.9, 0.8), 3, partition_from("TNTNTT"), split);
    double volume = 0.0;
    for (int t = 0; t < mesh.num_tets(); ++t)
    {
      CHECK(mesh.tet_volume(t) > 0.0);
      volume += mesh.tet_volume(t);
    }
    CHECK(volume == doctest::Approx(0.72).epsilon(1e-13));
    CHECK(mesh.num_vertices() == 64);
    CHECK(mesh.num_tets() == 6 * 27);
    CHECK(mesh.boundary_facets().size() == 6u * 2u * 9u);
    for (const auto &e : mesh.edges()) CHECK(e[0] < e[1]);
    CHECK(std::is_sorted(mesh.edges().begin(), mesh.edges().end()));
    // Euler characteristic of a ball: V - E + F - T = 1
    std::set<std::array<int, 3>> faces;
    for (const auto &tet : mesh.tets())
      for (int skip = 0; skip < 4; ++skip)
      {
        std::array<int, 3> f{};
        int k = 0;
        for (int i = 0; i < 4; ++i)
          if (i != skip) f[k++] = tet[i];
        std::sort(f.begin(), f.end());
        faces.insert(f);
      }
    CHECK(mesh.num_vertices() - mesh.num_edges() + static_cast<int>(faces.size()) -
              mesh.num_tets() ==
          1);
  }
}

TEST_CASE("mirrored split is symmetric under the reflections of the cube")
{
  const int n = 4;
  const Mesh mesh = unit_cube(n, BoundaryTag::T, BoxSplit::Mirrored);
  std::map<std::array<long, 3>, int> index;
  auto key = [&](const Vec3 &x) {
    return std::array<long, 3>{std::lround(x[0] * n), std::lround(x[1] * n), std::lround(x[2] * n)};
  };
  for (int v = 0; v < mesh.num_vertices(); ++v) index[key(mesh.vertices()[v])] = v;
  std::set<std::array<int, 2>> edges(mesh.edges().begin(), mesh.edges().end());
  for (int axis = 0; axis < 3; ++axis)
  {
    bool symmetric = true;
    for (const auto &e : mesh.edges())
    {
      Vec3 a = mesh.vertices()[e[0]], b = mesh.vertices()[e[1]];
      a[axis] = 1.0 - a[axis];
      b[axis] = 1.0 - b[axis];
      int i = index.at(key(a)), j = index.at(key(b));
      if (!edges.count({std::min(i, j), std::max(i, j)})) symmetric = false;
    }
    CHECK(symmetric);
  }
}

TEST_CASE("mesh file round trip reproduces the mesh")
{
  const Mesh mesh = build_box_mesh(Vec3::Ones(), 1, BoxPartition::all(BoundaryTag::T));
  std::istringstream in(serialize(mesh));
  const Mesh loaded = read_mesh(in);
  CHECK(loaded == mesh);
  CHECK(serialize(loaded) == serialize(mesh));
}

TEST_CASE("invalid mesh files are rejected")
{
  const Mesh mesh = unit_cube(1);
  std::string text = serialize(mesh);

  SUBCASE("negatively oriented tet names the tet")
  {
    const auto &t = mesh.tets()[2];
    std::ostringstream line, swapped;
    line << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
    swapped << t[1] << " " << t[0] << " " << t[2] << " " << t[3] << "\n";
    const auto pos = text.find(line.str(), text.find("tets"));
    REQUIRE(pos != std::string::npos);
    text.replace(pos, line.str().size(), swapped.str());
    std::istringstream in(text);
    try
    {
      read_mesh(in);
      FAIL("expected a validation error");
    }
    catch (const ValidationError &e)
    {
      CHECK(std::string(e.what()).find("tet 2") != std::string::npos);
    }
  }

  SUBCASE("untagged boundary facet")
  {
    const auto pos = text.find("bfacets 12");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 10, "bfacets 11");
    text.erase(text.rfind('\n', text.size() - 2) + 1);
    std::istringstream in(text);
    CHECK_THROWS_AS(read_mesh(in), ValidationError);
  }

  SUBCASE("bad header and tags are parse errors")
  {
    std::istringstream bad_header("tetmesh v2\n");
    CHECK_THROWS_AS(read_mesh(bad_header), ParseError);
    std::string tagged = text;
    tagged.replace(tagged.rfind('T'), 1, "X");
    std::istringstream in(tagged);
    CHECK_THROWS_AS(read_mesh(in), ParseError);
  }

  SUBCASE("missing file")
  {
    CHECK_THROWS_AS(load_mesh("/nonexistent/mesh.txt"), ParseError);
  }
}

TEST_CASE("box arguments are validated")
{
  CHECK_THROWS_AS(build_box_mesh(Vec3(1, 0, 1), 2, BoxPartition{}), InvalidGeometry);
  CHECK_THROWS_AS(build_box_mesh(Vec3::Ones(), 0, BoxPartition{}), InvalidGeometry);
}

TEST_CASE("facet normals and areas")
{
  const Mesh mesh = unit_cube(2);
  const int right = facet_on_plane(mesh, 0, 1.0);
  const int bottom = facet_on_plane(mesh, 2, 0.0);
  REQUIRE(right >= 0);
  REQUIRE(bottom >= 0);
  CHECK((facet_geometry(mesh, right).normal - Vec3(1, 0, 0)).norm() < 1e-14);
  CHECK((facet_geometry(mesh, bottom).normal - Vec3(0, 0, -1)).norm() < 1e-14);

  for (std::size_t i = 0; i < mesh.boundary_facets().size(); ++i)
  {
    const auto &f = mesh.boundary_facets()[i];
    const auto &x = mesh.vertices();
    const double area =
        0.5 * (x[f.vertices[1]] - x[f.vertices[0]]).cross(x[f.vertices[2]] - x[f.vertices[0]]).norm();
    CHECK(facet_geometry(mesh, static_cast<int>(i)).area == doctest::Approx(area));
    CHECK(facet_geometry(mesh, f.vertices).area == doctest::Approx(area));
  }
  CHECK_THROWS_AS(facet_geometry(mesh, std::array<int, 3>{0, 1, 999}), DomainError);
}

TEST_CASE("tangential entities follow the boundary partition")
{
  const Mesh all_t = unit_cube(2);
  CHECK(std::count(all_t.tangential_vertices().begin(), all_t.tangential_vertices().end(), false) == 1);
  CHECK(all_t.free_components() == 0);

  const Mesh all_n = unit_cube(2, BoundaryTag::N);
  CHECK(std::count(all_n.tangential_vertices().begin(), all_n.tangential_vertices().end(), true) == 0);
  CHECK(std::count(all_n.tangential_edges().begin(), all_n.tangential_edges().end(), true) == 0);
  CHECK(all_n.free_components() == 1);

  const Mesh mixed = build_box_mesh(Vec3::Ones(), 2, partition_from("NTTTTT"));
  for (int e = 0; e < mixed.num_edges(); ++e)
  {
    const auto &edge = mixed.edges()[e];
    const bool on_x0 = mixed.vertices()[edge[0]][0] == 0.0 && mixed.vertices()[edge[1]][0] == 0.0;
    const bool on_other_face =
        [&] {
          for (int axis = 0; axis < 3; ++axis)
            for (double v : {0.0, 1.0})
            {
              if (axis == 0 && v == 0.0) continue;
              if (mixed.vertices()[edge[0]][axis] == v && mixed.vertices()[edge[1]][axis] == v)
                return true;
            }
          return false;
        }();
    if (on_x0 && !on_other_face) CHECK_FALSE(mixed.tangential_edges()[e]);
    if (on_other_face) CHECK(mixed.tangential_edges()[e]);
  }
}
