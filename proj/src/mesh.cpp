#include "spectra_shape/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "spectra_shape/errors.hpp"

namespace spectra_shape
{

char to_char(BoundaryTag tag) { return tag == BoundaryTag::T ? 'T' : 'N'; }

BoxPartition BoxPartition::all(BoundaryTag tag)
{
  BoxPartition p;
  p.faces.fill(tag);
  return p;
}

namespace
{

std::array<int, 3> sorted(std::array<int, 3> f)
{
  std::sort(f.begin(), f.end());
  return f;
}

std::string face_string(const std::array<int, 3> &f)
{
  return "(" + std::to_string(f[0]) + "," + std::to_string(f[1]) + "," +
         std::to_string(f[2]) + ")";
}

std::array<int, 3> face_opposite(const std::array<int, 4> &tet, int local)
{
  std::array<int, 3> f{};
  int k = 0;
  for (int i = 0; i < 4; ++i)
    if (i != local) f[k++] = tet[i];
  return f;
}

int find_root(std::vector<int> &parent, int i)
{
  while (parent[i] != i)
  {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<std::array<int, 4>> tets,
           std::vector<std::pair<std::array<int, 3>, BoundaryTag>> tagged_facets)
  : vertices_(std::move(vertices)), tets_(std::move(tets))
{
  validate_and_index(std::move(tagged_facets));
}

void Mesh::validate_and_index(std::vector<std::pair<std::array<int, 3>, BoundaryTag>> tagged)
{
  const int nv = num_vertices();
  if (tets_.empty()) throw ValidationError("mesh has no tets");

  for (int t = 0; t < num_tets(); ++t)
  {
    for (int v : tets_[t])
      if (v < 0 || v >= nv)
        throw ValidationError("tet " + std::to_string(t) + " references vertex " +
                              std::to_string(v) + " out of range");
    const double vol = tet_volume(t);
    if (!(vol > 0.0))
      throw ValidationError("tet " + std::to_string(t) +
                            " has non-positive signed volume " + std::to_string(vol));
  }

  for (int t = 0; t < num_tets(); ++t)
    for (int local = 0; local < 4; ++local)
    {
      auto &rec = faces_[sorted(face_opposite(tets_[t], local))];
      if (++rec.count > 2)
        throw ValidationError("face shared by more than two tets (tet " + std::to_string(t) +
                              ")");
      rec.tet = t;
      rec.local_face = local;
    }

  facets_.clear();
  facets_.reserve(tagged.size());
  for (std::size_t i = 0; i < tagged.size(); ++i)
  {
    const auto key = sorted(tagged[i].first);
    auto it = faces_.find(key);
    if (it == faces_.end())
      throw ValidationError("boundary facet " + std::to_string(i) + " " + face_string(key) +
                            " is not a face of any tet");
    if (it->second.count != 1)
      throw ValidationError("boundary facet " + std::to_string(i) + " " + face_string(key) +
                            " is an interior face");
    if (it->second.facet >= 0)
      throw ValidationError("boundary facet " + std::to_string(i) + " " + face_string(key) +
                            " is tagged twice");
    it->second.facet = static_cast<int>(i);
    BoundaryFacet f;
    f.vertices = tagged[i].first;
    f.tag = tagged[i].second;
    f.owner = it->second.tet;
    f.local_face = it->second.local_face;
    facets_.push_back(f);
  }
  for (const auto &[key, rec] : faces_)
    if (rec.count == 1 && rec.facet < 0)
      throw ValidationError("boundary face " + face_string(key) + " of tet " +
                            std::to_string(rec.tet) + " is untagged");

  // Edges, lexicographic and oriented low -> high.
  std::vector<std::array<int, 2>> all;
  all.reserve(6 * tets_.size());
  for (const auto &tet : tets_)
    for (const auto &le : kTetLocalEdges)
    {
      int a = tet[le[0]], b = tet[le[1]];
      if (a > b) std::swap(a, b);
      all.push_back({a, b});
    }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  edges_ = std::move(all);
  tet_edges_.resize(tets_.size());
  for (int t = 0; t < num_tets(); ++t)
    for (int e = 0; e < 6; ++e)
    {
      int a = tets_[t][kTetLocalEdges[e][0]], b = tets_[t][kTetLocalEdges[e][1]];
      if (a > b) std::swap(a, b);
      const std::array<int, 2> key{a, b};
      tet_edges_[t][e] = static_cast<int>(
          std::lower_bound(edges_.begin(), edges_.end(), key) - edges_.begin());
    }

  t_vertex_.assign(nv, false);
  t_edge_.assign(edges_.size(), false);
  for (const auto &f : facets_)
  {
    if (f.tag != BoundaryTag::T) continue;
    for (int v : f.vertices) t_vertex_[v] = true;
    for (int i = 0; i < 3; ++i)
    {
      int a = f.vertices[i], b = f.vertices[(i + 1) % 3];
      if (a > b) std::swap(a, b);
      const std::array<int, 2> key{a, b};
      t_edge_[std::lower_bound(edges_.begin(), edges_.end(), key) - edges_.begin()] = true;
    }
  }

  std::vector<int> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<bool> used(nv, false);
  for (const auto &tet : tets_)
  {
    for (int v : tet) used[v] = true;
    for (int i = 1; i < 4; ++i)
      parent[find_root(parent, tet[i])] = find_root(parent, tet[0]);
  }
  std::map<int, bool> component_touches_t;
  for (int v = 0; v < nv; ++v)
  {
    if (!used[v]) continue;
    auto &touch = component_touches_t[find_root(parent, v)];
    touch = touch || t_vertex_[v];
  }
  free_components_ = 0;
  for (const auto &[root, touch] : component_touches_t)
    if (!touch) ++free_components_;
}

double Mesh::tet_volume(int t) const
{
  const auto &tet = tets_[t];
  const Vec3 &p0 = vertices_[tet[0]];
  Mat3 d;
  d.col(0) = vertices_[tet[1]] - p0;
  d.col(1) = vertices_[tet[2]] - p0;
  d.col(2) = vertices_[tet[3]] - p0;
  return d.determinant() / 6.0;
}

Eigen::Matrix<double, 3, 4> Mesh::barycentric_gradients(int t) const
{
  const auto &tet = tets_[t];
  const Vec3 &p0 = vertices_[tet[0]];
  Mat3 d;
  d.col(0) = vertices_[tet[1]] - p0;
  d.col(1) = vertices_[tet[2]] - p0;
  d.col(2) = vertices_[tet[3]] - p0;
  const Mat3 inv_t = d.inverse().transpose();
  Eigen::Matrix<double, 3, 4> g;
  g.col(1) = inv_t.col(0);
  g.col(2) = inv_t.col(1);
  g.col(3) = inv_t.col(2);
  g.col(0) = -(g.col(1) + g.col(2) + g.col(3));
  return g;
}

Vec3 Mesh::point(int t, const std::array<double, 4> &bary) const
{
  Vec3 x = Vec3::Zero();
  for (int i = 0; i < 4; ++i) x += bary[i] * vertices_[tets_[t][i]];
  return x;
}

int Mesh::face_multiplicity(std::array<int, 3> face) const
{
  auto it = faces_.find(sorted(face));
  return it == faces_.end() ? 0 : it->second.count;
}

int Mesh::find_boundary_facet(std::array<int, 3> face) const
{
  auto it = faces_.find(sorted(face));
  return it == faces_.end() ? -1 : it->second.facet;
}

bool Mesh::operator==(const Mesh &other) const
{
  if (vertices_.size() != other.vertices_.size() || tets_ != other.tets_ ||
      facets_.size() != other.facets_.size())
    return false;
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    if (vertices_[i] != other.vertices_[i]) return false;
  for (std::size_t i = 0; i < facets_.size(); ++i)
    if (facets_[i].vertices != other.facets_[i].vertices ||
        facets_[i].tag != other.facets_[i].tag)
      return false;
  return true;
}

Mesh build_box_mesh(const Vec3 &dims, int n, const BoxPartition &partition, BoxSplit split)
{
  if (!(dims.minCoeff() > 0.0) || !dims.allFinite())
    throw InvalidGeometry("box dimensions must be positive");
  if (n < 1) throw InvalidGeometry("box subdivision count must be >= 1");

  const int np = n + 1;
  auto vid = [np](int i, int j, int k) { return i + np * (j + np * k); };
  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>(np) * np * np);
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        vertices.emplace_back(dims[0] * i / n, dims[1] * j / n, dims[2] * k / n);

  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  static constexpr std::array<bool, 6> odd{false, true, true, false, false, true};

  std::vector<std::array<int, 4>> tets;
  tets.reserve(6 * static_cast<std::size_t>(n) * n * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
      {
        const std::array<int, 3> cell{i, j, k};
        std::array<bool, 3> flip{false, false, false};
        if (split == BoxSplit::Mirrored)
          for (int a = 0; a < 3; ++a) flip[a] = (cell[a] % 2) == 1;
        const bool reflected = (flip[0] != flip[1]) != flip[2];
        auto corner = [&](const std::array<int, 3> &off) {
          std::array<int, 3> g{};
          for (int a = 0; a < 3; ++a) g[a] = cell[a] + (flip[a] ? 1 - off[a] : off[a]);
          return vid(g[0], g[1], g[2]);
        };
        for (int p = 0; p < 6; ++p)
        {
          std::array<int, 3> off{0, 0, 0};
          std::array<int, 4> tet{};
          tet[0] = corner(off);
          for (int s = 0; s < 3; ++s)
          {
            ++off[perms[p][s]];
            tet[s + 1] = corner(off);
          }
          if (odd[p] != reflected) std::swap(tet[2], tet[3]);
          tets.push_back(tet);
        }
      }

  auto grid = [np](int v) { return std::array<int, 3>{v % np, (v / np) % np, v / (np * np)}; };
  std::vector<std::pair<std::array<int, 3>, BoundaryTag>> facets;
  std::map<std::array<int, 3>, int> count;
  for (const auto &tet : tets)
    for (int local = 0; local < 4; ++local) ++count[sorted(face_opposite(tet, local))];
  for (const auto &tet : tets)
    for (int local = 0; local < 4; ++local)
    {
      const auto f = face_opposite(tet, local);
      if (count[sorted(f)] != 1) continue;
      int face_id = -1;
      for (int axis = 0; axis < 3 && face_id < 0; ++axis)
        for (int side = 0; side < 2; ++side)
        {
          const int target = side == 0 ? 0 : n;
          if (grid(f[0])[axis] == target && grid(f[1])[axis] == target &&
              grid(f[2])[axis] == target)
          {
            face_id = 2 * axis + side;
            break;
          }
        }
      facets.emplace_back(f, partition.faces[face_id]);
    }
  return Mesh(std::move(vertices), std::move(tets), std::move(facets));
}

namespace
{

struct LineReader
{
  std::istream &in;
  int line_no = 0;

  // Next non-empty, comment-stripped line split into tokens; false at EOF.
  bool next(std::vector<std::string> &tokens)
  {
    std::string line;
    while (std::getline(in, line))
    {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      tokens.clear();
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string &msg) const
  {
    throw ParseError("mesh parse error at line " + std::to_string(line_no) + ": " + msg);
  }

  std::vector<std::string> expect(const std::string &what)
  {
    std::vector<std::string> tokens;
    if (!next(tokens)) fail("unexpected end of file, expected " + what);
    return tokens;
  }

  long count_header(const std::string &keyword)
  {
    auto tokens = expect("'" + keyword + " <count>'");
    if (tokens.size() != 2 || tokens[0] != keyword)
      fail("expected '" + keyword + " <count>'");
    return to_int(tokens[1]);
  }

  long to_int(const std::string &s) const
  {
    std::size_t pos = 0;
    long v = 0;
    try
    {
      v = std::stol(s, &pos);
    }
    catch (const std::exception &)
    {
      fail("invalid integer '" + s + "'");
    }
    if (pos != s.size()) fail("invalid integer '" + s + "'");
    return v;
  }

  double to_double(const std::string &s) const
  {
    std::size_t pos = 0;
    double v = 0;
    try
    {
      v = std::stod(s, &pos);
    }
    catch (const std::exception &)
    {
      fail("invalid number '" + s + "'");
    }
    if (pos != s.size()) fail("invalid number '" + s + "'");
    return v;
  }
};

}  // namespace

Mesh read_mesh(std::istream &in)
{
  LineReader r{in};
  auto header = r.expect("header");
  if (header.size() != 2 || header[0] != "tetmesh" || header[1] != "v1")
    r.fail("expected header 'tetmesh v1'");

  const long nv = r.count_header("vertices");
  if (nv < 0) r.fail("negative vertex count");
  std::vector<Vec3> vertices;
  vertices.reserve(nv);
  for (long i = 0; i < nv; ++i)
  {
    auto t = r.expect("vertex");
    if (t.size() != 3) r.fail("vertex line needs 3 coordinates");
    vertices.emplace_back(r.to_double(t[0]), r.to_double(t[1]), r.to_double(t[2]));
  }

  const long nt = r.count_header("tets");
  if (nt < 0) r.fail("negative tet count");
  std::vector<std::array<int, 4>> tets;
  tets.reserve(nt);
  for (long i = 0; i < nt; ++i)
  {
    auto t = r.expect("tet");
    if (t.size() != 4) r.fail("tet line needs 4 vertex indices");
    std::array<int, 4> tet{};
    for (int k = 0; k < 4; ++k) tet[k] = static_cast<int>(r.to_int(t[k]));
    tets.push_back(tet);
  }

  const long nf = r.count_header("bfacets");
  if (nf < 0) r.fail("negative facet count");
  std::vector<std::pair<std::array<int, 3>, BoundaryTag>> facets;
  facets.reserve(nf);
  for (long i = 0; i < nf; ++i)
  {
    auto t = r.expect("boundary facet");
    if (t.size() != 4) r.fail("bfacet line needs 3 vertex indices and a tag");
    std::array<int, 3> f{};
    for (int k = 0; k < 3; ++k) f[k] = static_cast<int>(r.to_int(t[k]));
    BoundaryTag tag;
    if (t[3] == "T")
      tag = BoundaryTag::T;
    else if (t[3] == "N")
      tag = BoundaryTag::N;
    else
      r.fail("facet tag must be T or N, got '" + t[3] + "'");
    facets.emplace_back(f, tag);
  }
  std::vector<std::string> extra;
  if (r.next(extra)) r.fail("trailing content after boundary facets");

  return Mesh(std::move(vertices), std::move(tets), std::move(facets));
}

Mesh load_mesh(const std::string &path)
{
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

void write_mesh(const Mesh &mesh, std::ostream &out)
{
  out << "tetmesh v1\n";
  out << "vertices " << mesh.num_vertices() << "\n" << std::setprecision(17);
  for (const auto &v : mesh.vertices()) out << v[0] << " " << v[1] << " " << v[2] << "\n";
  out << "tets " << mesh.num_tets() << "\n";
  for (const auto &t : mesh.tets())
    out << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
  out << "bfacets " << mesh.boundary_facets().size() << "\n";
  for (const auto &f : mesh.boundary_facets())
    out << f.vertices[0] << " " << f.vertices[1] << " " << f.vertices[2] << " "
        << to_char(f.tag) << "\n";
}

void save_mesh(const Mesh &mesh, const std::string &path)
{
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write mesh file '" + path + "'");
  write_mesh(mesh, out);
}

FacetGeometry facet_geometry(const Mesh &mesh, int boundary_facet)
{
  const auto &f = mesh.boundary_facets().at(boundary_facet);
  const auto &x = mesh.vertices();
  const Vec3 cross = (x[f.vertices[1]] - x[f.vertices[0]]).cross(x[f.vertices[2]] - x[f.vertices[0]]);
  FacetGeometry g;
  g.area = 0.5 * cross.norm();
  g.normal = cross / cross.norm();
  const Vec3 &opposite = x[mesh.tets()[f.owner][f.local_face]];
  if (g.normal.dot(opposite - x[f.vertices[0]]) > 0.0) g.normal = -g.normal;
  return g;
}

FacetGeometry facet_geometry(const Mesh &mesh, const std::array<int, 3> &face)
{
  const int idx = mesh.find_boundary_facet(face);
  if (idx < 0)
  {
    if (mesh.face_multiplicity(face) == 2)
      throw DomainError("facet_geometry called on an interior face");
    throw DomainError("facet_geometry: face is not part of the mesh");
  }
  return facet_geometry(mesh, idx);
}

}  // namespace spectra_shape
