#include "spectra_shape/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "spectra_shape/errors.hpp"

namespace spectra_shape
{

using nlohmann::json;

Pencil AbstractPencilSpec::pencil(double chi) const
{
  return Pencil::from_dense(k0 + chi * k1 + chi * chi * k2, m0 + chi * m1);
}

PencilDerivative AbstractPencilSpec::derivative(double chi, double direction) const
{
  return PencilDerivative::from_dense(direction * (k1 + 2.0 * chi * k2), direction * m1);
}

AbstractPencilSpec abstract_preset(const std::string &name)
{
  AbstractPencilSpec s;
  s.preset = name;
  if (name == "crossing2")
  {
    s.k0 = Eigen::Matrix2d::Identity();
    s.k1 = (Eigen::Matrix2d() << 0, 1, 1, 0).finished();
    s.m0 = Eigen::Matrix2d::Identity();
  }
  else if (name == "simple2")
  {
    s.k0 = Eigen::Vector2d(1.0, 2.0).asDiagonal();
    s.k1 = Eigen::Vector2d(1.0, 0.0).asDiagonal();
    s.m0 = Eigen::Matrix2d::Identity();
  }
  else if (name == "degenerate3")
  {
    s.k0 = Eigen::Vector4d(2.0, 2.0, 2.0, 6.0).asDiagonal();
    s.k1 = (Eigen::Matrix4d() << 1.0, 0.3, -0.2, 0.5,  //
            0.3, -0.5, 0.4, 0.1,                        //
            -0.2, 0.4, 0.2, -0.3,                       //
            0.5, 0.1, -0.3, 0.7)
               .finished();
    s.k2 = 0.1 * Eigen::Matrix4d::Identity();
    s.m0 = Eigen::Matrix4d::Identity();
    s.m1 = (Eigen::Matrix4d() << 0.2, 0.05, 0.0, 0.0,  //
            0.05, 0.1, 0.0, 0.0,                        //
            0.0, 0.0, -0.1, 0.02,                       //
            0.0, 0.0, 0.02, 0.3)
               .finished();
  }
  else
  {
    throw ConfigError("unknown abstract preset '" + name +
                      "' (expected crossing2, simple2 or degenerate3)");
  }
  const Eigen::Index n = s.k0.rows();
  if (s.k1.size() == 0) s.k1 = Eigen::MatrixXd::Zero(n, n);
  if (s.k2.size() == 0) s.k2 = Eigen::MatrixXd::Zero(n, n);
  if (s.m1.size() == 0) s.m1 = Eigen::MatrixXd::Zero(n, n);
  return s;
}

namespace
{

[[noreturn]] void fail(const std::string &path, const std::string &msg)
{
  throw ConfigError("config " + path + ": " + msg);
}

void check_keys(const json &obj, const std::string &path, std::initializer_list<const char *> allowed)
{
  if (!obj.is_object()) fail(path, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) fail(path, "unknown key '" + it.key() + "'");
}

double number(const json &j, const std::string &path)
{
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int integer(const json &j, const std::string &path)
{
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

Eigen::VectorXd vector(const json &j, const std::string &path)
{
  if (j.is_number()) return Eigen::VectorXd::Constant(1, j.get<double>());
  if (!j.is_array() || j.empty()) fail(path, "expected a number or a non-empty array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

Vec3 vec3(const json &j, const std::string &path)
{
  const Eigen::VectorXd v = vector(j, path);
  if (v.size() != 3) fail(path, "expected 3 entries");
  return v;
}

Eigen::MatrixXd matrix(const json &j, const std::string &path)
{
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(path, "expected rows as arrays");
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
  {
    if (!j[r].is_array() || j[r].size() != cols) fail(path, "ragged matrix");
    for (std::size_t c = 0; c < cols; ++c)
      m(r, c) = number(j[r][c], path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
  }
  return m;
}

Mat3 mat3(const json &j, const std::string &path)
{
  const Eigen::MatrixXd m = matrix(j, path);
  if (m.rows() != 3 || m.cols() != 3) fail(path, "expected a 3x3 matrix");
  return m;
}

json to_json(const Eigen::MatrixXd &m)
{
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
  {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json to_json_vec(const Eigen::VectorXd &v)
{
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

BoundaryTag tag(const json &j, const std::string &path)
{
  if (j == "T") return BoundaryTag::T;
  if (j == "N") return BoundaryTag::N;
  fail(path, "expected \"T\" or \"N\"");
}

BoxPartition parse_partition(const json &j, json &echo)
{
  BoxPartition p;
  if (j.is_string())
  {
    p = BoxPartition::all(tag(j, "partition"));
  }
  else
  {
    check_keys(j, "partition", {"default", "x0", "x1", "y0", "y1", "z0", "z1"});
    const BoundaryTag def = j.contains("default") ? tag(j["default"], "partition.default")
                                                  : BoundaryTag::T;
    static const char *names[6] = {"x0", "x1", "y0", "y1", "z0", "z1"};
    for (int f = 0; f < 6; ++f)
      p.faces[f] = j.contains(names[f]) ? tag(j[names[f]], std::string("partition.") + names[f])
                                        : def;
  }
  static const char *names[6] = {"x0", "x1", "y0", "y1", "z0", "z1"};
  echo = json::object();
  for (int f = 0; f < 6; ++f) echo[names[f]] = std::string(1, to_char(p.faces[f]));
  return p;
}

MatrixField parse_matrix_field(const json &j, const std::string &path, json &echo)
{
  if (!j.is_object() || !j.contains("kind")) fail(path, "expected an object with 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  echo = json::object();
  echo["kind"] = kind;
  if (kind == "identity")
  {
    check_keys(j, path, {"kind"});
    return MatrixField::identity();
  }
  if (kind == "constant")
  {
    check_keys(j, path, {"kind", "value"});
    if (!j.contains("value")) fail(path, "missing 'value'");
    const Mat3 v = j["value"].is_array() && j["value"].size() == 3 && j["value"][0].is_number()
                       ? Mat3(vec3(j["value"], path + ".value").asDiagonal())
                       : mat3(j["value"], path + ".value");
    echo["value"] = to_json(v);
    try
    {
      return MatrixField::constant(v);
    }
    catch (const Error &e)
    {
      fail(path, e.what());
    }
  }
  if (kind == "affine_diagonal")
  {
    check_keys(j, path, {"kind", "d0", "slopes"});
    if (!j.contains("d0") || !j.contains("slopes")) fail(path, "needs 'd0' and 'slopes'");
    const Vec3 d0 = vec3(j["d0"], path + ".d0");
    const Mat3 slopes = mat3(j["slopes"], path + ".slopes");
    echo["d0"] = to_json_vec(d0);
    echo["slopes"] = to_json(slopes);
    return MatrixField::affine_diagonal(d0, slopes);
  }
  if (kind == "scalar_affine")
  {
    check_keys(j, path, {"kind", "a", "g"});
    if (!j.contains("a")) fail(path, "missing 'a'");
    const double a = number(j["a"], path + ".a");
    const Vec3 g = j.contains("g") ? vec3(j["g"], path + ".g") : Vec3::Zero();
    echo["a"] = a;
    echo["g"] = to_json_vec(g);
    return MatrixField::scalar_affine(a, g);
  }
  fail(path, "unknown coefficient kind '" + kind +
                 "' (expected identity, constant, affine_diagonal or scalar_affine)");
}

ScalarField parse_scalar_field(const json &j, const std::string &path, json &echo)
{
  double a = 1.0;
  Vec3 g = Vec3::Zero();
  if (j.is_number())
  {
    a = j.get<double>();
  }
  else
  {
    check_keys(j, path, {"kind", "a", "g"});
    if (j.contains("kind") && j["kind"] != "constant" && j["kind"] != "affine")
      fail(path, "unknown scalar kind");
    if (j.contains("a")) a = number(j["a"], path + ".a");
    if (j.contains("g")) g = vec3(j["g"], path + ".g");
  }
  if (!(a > 0.0)) fail(path, "value at the origin must be positive");
  echo = {{"a", a}, {"g", to_json_vec(g)}};
  return ScalarField::affine(a, g);
}

VectorFieldTerm parse_field(const json &j, const std::string &path, json &echo)
{
  if (!j.is_object() || !j.contains("type")) fail(path, "expected an object with 'type'");
  const std::string type = j["type"].get<std::string>();
  echo = json::object();
  echo["type"] = type;
  if (type == "constant")
  {
    check_keys(j, path, {"type", "value"});
    const Vec3 b = vec3(j.value("value", json::array({0, 0, 0})), path + ".value");
    echo["value"] = to_json_vec(b);
    return VectorFieldTerm::constant(b);
  }
  if (type == "linear")
  {
    check_keys(j, path, {"type", "matrix"});
    if (!j.contains("matrix")) fail(path, "missing 'matrix'");
    const Mat3 g = mat3(j["matrix"], path + ".matrix");
    echo["matrix"] = to_json(g);
    return VectorFieldTerm::linear(g);
  }
  if (type == "sin")
  {
    check_keys(j, path, {"type", "axis", "dependsOn", "amplitude", "frequency"});
    const int axis = integer(j.value("axis", json(0)), path + ".axis");
    std::vector<int> depends;
    const json dep = j.value("dependsOn", json(axis));
    if (dep.is_array())
      for (std::size_t i = 0; i < dep.size(); ++i)
        depends.push_back(integer(dep[i], path + ".dependsOn"));
    else
      depends.push_back(integer(dep, path + ".dependsOn"));
    const double amplitude = number(j.value("amplitude", json(0.1)), path + ".amplitude");
    const double frequency = number(j.value("frequency", json(1.0)), path + ".frequency");
    if (axis < 0 || axis > 2) fail(path, "axis must be 0, 1 or 2");
    for (int d : depends)
      if (d < 0 || d > 2) fail(path, "dependsOn entries must be 0, 1 or 2");
    echo["axis"] = axis;
    echo["dependsOn"] = depends;
    echo["amplitude"] = amplitude;
    echo["frequency"] = frequency;
    return VectorFieldTerm::sine(axis, depends, amplitude, frequency);
  }
  fail(path, "unknown field type '" + type + "' (expected constant, linear or sin)");
}

TransformationFamily parse_family(const json &j, std::string &kind, json &echo)
{
  if (!j.is_object() || !j.contains("kind")) fail("family", "expected an object with 'kind'");
  kind = j["kind"].get<std::string>();
  echo = json::object();
  echo["kind"] = kind;
  TransformationFamily family;
  if (kind == "identity")
  {
    check_keys(j, "family", {"kind", "admissible"});
    family = TransformationFamily::identity();
  }
  else if (kind == "scaling")
  {
    check_keys(j, "family", {"kind", "admissible"});
    family = TransformationFamily::scaling();
  }
  else if (kind == "translation")
  {
    check_keys(j, "family", {"kind", "b", "admissible"});
    const Vec3 b = vec3(j.value("b", json::array({1, 0, 0})), "family.b");
    echo["b"] = to_json_vec(b);
    family = TransformationFamily::translation(b);
  }
  else if (kind == "stretch")
  {
    check_keys(j, "family", {"kind", "axis", "admissible"});
    const int axis = integer(j.value("axis", json(0)), "family.axis");
    if (axis < 0 || axis > 2) fail("family.axis", "must be 0, 1 or 2");
    echo["axis"] = axis;
    Mat3 a1 = Mat3::Zero();
    a1(axis, axis) = 1.0;
    family = TransformationFamily::affine(Mat3::Identity(), a1, Vec3::Zero(), Vec3::Zero());
  }
  else if (kind == "affine")
  {
    check_keys(j, "family", {"kind", "A0", "A1", "b0", "b1", "admissible"});
    const Mat3 a0 = j.contains("A0") ? mat3(j["A0"], "family.A0") : Mat3::Identity();
    const Mat3 a1 = j.contains("A1") ? mat3(j["A1"], "family.A1") : Mat3::Zero();
    const Vec3 b0 = j.contains("b0") ? vec3(j["b0"], "family.b0") : Vec3::Zero();
    const Vec3 b1 = j.contains("b1") ? vec3(j["b1"], "family.b1") : Vec3::Zero();
    echo["A0"] = to_json(a0);
    echo["A1"] = to_json(a1);
    echo["b0"] = to_json_vec(b0);
    echo["b1"] = to_json_vec(b1);
    family = TransformationFamily::affine(a0, a1, b0, b1);
  }
  else if (kind == "bump")
  {
    check_keys(j, "family", {"kind", "g", "admissible"});
    if (!j.contains("g")) fail("family", "bump needs 'g'");
    std::vector<VectorFieldTerm> terms;
    json fields = json::array();
    const json g = j["g"].is_array() ? j["g"] : json::array({j["g"]});
    for (std::size_t i = 0; i < g.size(); ++i)
    {
      json e;
      terms.push_back(parse_field(g[i], "family.g[" + std::to_string(i) + "]", e));
      fields.push_back(e);
    }
    echo["g"] = fields;
    family = TransformationFamily::bump(std::move(terms));
  }
  else
  {
    fail("family", "unknown kind '" + kind +
                       "' (expected identity, scaling, translation, stretch, affine or bump)");
  }
  if (j.contains("admissible"))
  {
    const Eigen::VectorXd iv = vector(j["admissible"], "family.admissible");
    if (iv.size() != 2 || !(iv(0) < iv(1))) fail("family.admissible", "expected [lo, hi] with lo < hi");
    family.set_admissible_interval(iv(0), iv(1));
    echo["admissible"] = to_json_vec(iv);
  }
  return family;
}

AbstractPencilSpec parse_abstract(const json &j, json &echo)
{
  check_keys(j, "abstract", {"preset", "K0", "K1", "K2", "M0", "M1"});
  AbstractPencilSpec s;
  if (j.contains("preset"))
  {
    if (j.size() != 1) fail("abstract", "'preset' excludes explicit matrices");
    s = abstract_preset(j["preset"].get<std::string>());
  }
  else
  {
    if (!j.contains("K0") || !j.contains("M0")) fail("abstract", "needs 'K0' and 'M0' or a preset");
    s.k0 = matrix(j["K0"], "abstract.K0");
    const Eigen::Index n = s.k0.rows();
    auto get = [&](const char *key) -> Eigen::MatrixXd {
      if (!j.contains(key)) return Eigen::MatrixXd::Zero(n, n);
      Eigen::MatrixXd m = matrix(j[key], std::string("abstract.") + key);
      if (m.rows() != n || m.cols() != n) fail(std::string("abstract.") + key, "size mismatch");
      return m;
    };
    s.k1 = get("K1");
    s.k2 = get("K2");
    s.m0 = get("M0");
    s.m1 = get("M1");
    if (s.k0.cols() != n) fail("abstract.K0", "must be square");
    for (const Eigen::MatrixXd *m : {&s.k0, &s.k1, &s.k2, &s.m0, &s.m1})
      if ((*m - m->transpose()).cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, m->cwiseAbs().maxCoeff()))
        fail("abstract", "matrices must be symmetric");
  }
  echo = json::object();
  if (!s.preset.empty()) echo["preset"] = s.preset;
  echo["K0"] = to_json(s.k0);
  echo["K1"] = to_json(s.k1);
  echo["K2"] = to_json(s.k2);
  echo["M0"] = to_json(s.m0);
  echo["M1"] = to_json(s.m1);
  return s;
}

}  // namespace

RunConfig parse_config(const std::string &text)
{
  json j;
  try
  {
    j = json::parse(text);
  }
  catch (const json::parse_error &e)
  {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try
  {
    check_keys(j, "root",
               {"problem", "mesh", "partition", "coefficients", "family", "chi", "direction",
                "eigen_range", "tolerances", "fd_steps", "refinement", "reference_eigenvalue",
                "quadrature_order", "mass", "nquad", "surface_trusted", "abstract",
                "description"});
    RunConfig c;
    json echo = json::object();

    const std::string problem = j.value("problem", std::string("helmholtz"));
    if (problem == "helmholtz")
      c.problem = ProblemKind::Helmholtz;
    else if (problem == "maxwell")
      c.problem = ProblemKind::Maxwell;
    else if (problem == "abstract-pencil" || problem == "abstract")
      c.problem = ProblemKind::Abstract;
    else
      fail("problem", "expected helmholtz, maxwell or abstract-pencil");
    echo["problem"] = to_string(c.problem);

    if (c.problem == ProblemKind::Abstract)
    {
      if (!j.contains("abstract")) fail("abstract", "abstract-pencil problems need an 'abstract' block");
      json e;
      c.abstract_spec = parse_abstract(j["abstract"], e);
      echo["abstract"] = e;
      for (const char *key : {"mesh", "partition", "coefficients", "family"})
        if (j.contains(key)) fail(key, "not used by abstract-pencil problems");
    }
    else
    {
      if (j.contains("abstract")) fail("abstract", "only valid for abstract-pencil problems");
      const json mesh = j.value("mesh", json::object());
      check_keys(mesh, "mesh", {"box", "file"});
      if (mesh.contains("file"))
      {
        if (mesh.contains("box")) fail("mesh", "give either 'box' or 'file'");
        c.mesh_file = mesh["file"].get<std::string>();
        echo["mesh"] = {{"file", *c.mesh_file}};
      }
      else
      {
        const json box = mesh.value("box", json::object());
        check_keys(box, "mesh.box", {"dims", "n", "split"});
        if (box.contains("dims")) c.box_dims = vec3(box["dims"], "mesh.box.dims");
        if (box.contains("n")) c.box_n = integer(box["n"], "mesh.box.n");
        if (c.box_n < 1) fail("mesh.box.n", "must be >= 1");
        if (!(c.box_dims.minCoeff() > 0.0)) fail("mesh.box.dims", "must be positive");
        const std::string split = box.value("split", std::string("kuhn"));
        if (split == "kuhn")
          c.box_split = BoxSplit::Kuhn;
        else if (split == "mirrored")
          c.box_split = BoxSplit::Mirrored;
        else
          fail("mesh.box.split", "expected \"kuhn\" or \"mirrored\"");
        echo["mesh"] = {
            {"box", {{"dims", to_json_vec(c.box_dims)}, {"n", c.box_n}, {"split", split}}}};
      }
      json pe;
      c.partition = parse_partition(j.value("partition", json("T")), pe);
      echo["partition"] = pe;

      const json coef = j.value("coefficients", json::object());
      check_keys(coef, "coefficients", {"epsilon", "mu_inv", "nu"});
      json ee, me, ne;
      c.epsilon = parse_matrix_field(coef.value("epsilon", json{{"kind", "identity"}}),
                                     "coefficients.epsilon", ee);
      c.mu_inv = parse_matrix_field(coef.value("mu_inv", json{{"kind", "identity"}}),
                                    "coefficients.mu_inv", me);
      c.nu = parse_scalar_field(coef.value("nu", json(1.0)), "coefficients.nu", ne);
      echo["coefficients"] = {{"epsilon", ee}, {"mu_inv", me}, {"nu", ne}};

      json fe;
      c.family = parse_family(j.value("family", json{{"kind", "identity"}}), c.family_kind, fe);
      echo["family"] = fe;
    }

    const int params = c.problem == ProblemKind::Abstract ? 1 : c.family.num_parameters();
    c.chi = j.contains("chi") ? vector(j["chi"], "chi") : ParamVec(ParamVec::Zero(params));
    c.direction = j.contains("direction") ? vector(j["direction"], "direction")
                                          : ParamVec(ParamVec::Ones(params));
    if (c.chi.size() != params) fail("chi", "expected " + std::to_string(params) + " entries");
    if (c.direction.size() != params)
      fail("direction", "expected " + std::to_string(params) + " entries");
    if (c.direction.norm() == 0.0) fail("direction", "must be nonzero");
    echo["chi"] = to_json_vec(c.chi);
    echo["direction"] = to_json_vec(c.direction);

    if (j.contains("eigen_range"))
    {
      const json &r = j["eigen_range"];
      if (r.is_number_integer())
        c.k_first = c.k_last = r.get<int>();
      else if (r.is_array() && r.size() == 2)
      {
        c.k_first = integer(r[0], "eigen_range[0]");
        c.k_last = integer(r[1], "eigen_range[1]");
      }
      else
        fail("eigen_range", "expected k or [k_first, k_last]");
      if (c.k_first < 1 || c.k_last < c.k_first) fail("eigen_range", "need 1 <= k_first <= k_last");
    }
    echo["eigen_range"] = {c.k_first, c.k_last};

    const json tol = j.value("tolerances", json::object());
    check_keys(tol, "tolerances", {"kernel_tol", "cluster_tol", "fd_step"});
    if (tol.contains("kernel_tol")) c.kernel_tol = number(tol["kernel_tol"], "tolerances.kernel_tol");
    if (tol.contains("cluster_tol"))
      c.cluster_tol = number(tol["cluster_tol"], "tolerances.cluster_tol");
    if (tol.contains("fd_step")) c.fd_step = number(tol["fd_step"], "tolerances.fd_step");
    if (!(c.kernel_tol > 0.0) || c.cluster_tol < 0.0 || !(c.fd_step > 0.0))
      fail("tolerances", "kernel_tol and fd_step must be positive, cluster_tol non-negative");
    echo["tolerances"] = {
        {"kernel_tol", c.kernel_tol}, {"cluster_tol", c.cluster_tol}, {"fd_step", c.fd_step}};

    if (j.contains("fd_steps"))
    {
      const Eigen::VectorXd s = vector(j["fd_steps"], "fd_steps");
      c.fd_steps.assign(s.data(), s.data() + s.size());
    }
    else
    {
      c.fd_steps = {2.0 * c.fd_step, c.fd_step, 0.5 * c.fd_step};
    }
    if (c.fd_steps.size() < 2) fail("fd_steps", "need at least two steps");
    for (std::size_t i = 0; i < c.fd_steps.size(); ++i)
    {
      if (!(c.fd_steps[i] > 0.0)) fail("fd_steps", "steps must be positive");
      if (i > 0 && !(c.fd_steps[i] < c.fd_steps[i - 1])) fail("fd_steps", "steps must decrease");
    }
    echo["fd_steps"] = c.fd_steps;

    if (j.contains("refinement"))
    {
      if (!j["refinement"].is_array()) fail("refinement", "expected an array of levels");
      for (std::size_t i = 0; i < j["refinement"].size(); ++i)
      {
        const int n = integer(j["refinement"][i], "refinement[" + std::to_string(i) + "]");
        if (n < 1) fail("refinement", "levels must be >= 1");
        c.refinement.push_back(n);
      }
    }
    echo["refinement"] = c.refinement;
    if (j.contains("reference_eigenvalue"))
    {
      c.reference_eigenvalue = number(j["reference_eigenvalue"], "reference_eigenvalue");
      echo["reference_eigenvalue"] = *c.reference_eigenvalue;
    }

    if (j.contains("quadrature_order"))
      c.quadrature_order = integer(j["quadrature_order"], "quadrature_order");
    if (c.quadrature_order < 0 || c.quadrature_order > 4)
      fail("quadrature_order", "must be 0 (automatic) or 1..4");
    echo["quadrature_order"] = c.quadrature_order;
    if (j.contains("mass"))
    {
      if (!j["mass"].is_string()) fail("mass", "expected \"consistent\" or \"lumped\"");
      const std::string mass = j["mass"].get<std::string>();
      if (mass == "lumped")
        c.lumped_mass = true;
      else if (mass != "consistent")
        fail("mass", "expected \"consistent\" or \"lumped\", got \"" + mass + "\"");
      if (c.lumped_mass && c.problem != ProblemKind::Helmholtz)
        fail("mass", "lumping is only defined for the helmholtz problem");
    }
    echo["mass"] = c.lumped_mass ? "lumped" : "consistent";
    if (j.contains("nquad")) c.nquad = integer(j["nquad"], "nquad");
    if (c.nquad < 4) fail("nquad", "must be >= 4");
    echo["nquad"] = c.nquad;
    if (j.contains("surface_trusted"))
    {
      if (!j["surface_trusted"].is_boolean()) fail("surface_trusted", "expected a boolean");
      c.surface_trusted = j["surface_trusted"].get<bool>();
    }
    echo["surface_trusted"] = c.surface_trusted;
    if (j.contains("description")) echo["description"] = j["description"];

    c.canonical_json = echo.dump();
    return c;
  }
  catch (const json::exception &e)
  {
    throw ConfigError(std::string("config has a value of the wrong type: ") + e.what());
  }
}

RunConfig load_config(const std::string &path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace spectra_shape
