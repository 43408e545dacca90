#include "spectra_shape/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <random>

#include "spectra_shape/errors.hpp"
#include "spectra_shape/hadamard.hpp"
#include "spectra_shape/perturbation.hpp"

extern "C" void openblas_set_num_threads(int);

namespace spectra_shape
{

using nlohmann::json;

namespace
{

/// Re-raises module errors with the stage that produced them.
template <typename Fn>
auto staged(const char *stage, Fn &&fn) -> decltype(fn())
{
  try
  {
    return fn();
  }
  catch (const Error &e)
  {
    e.rethrow_with(std::string(stage) + ": " + e.what());
    throw;
  }
}

json to_json(const Eigen::MatrixXd &m)
{
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
  {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Eigen::VectorXd &v)
{
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

double relative_gap(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b, double floor)
{
  return (a - b).norm() / std::max(b.norm(), floor);
}

Eigen::VectorXd sym_derivatives(double lambda_bar, int m, const Eigen::MatrixXd &matrix)
{
  Eigen::VectorXd d(m);
  for (int s = 1; s <= m; ++s) d(s - 1) = symmetric_function_derivative(lambda_bar, m, matrix, s);
  return d;
}

Eigen::VectorXd sorted(Eigen::VectorXd v)
{
  std::sort(v.data(), v.data() + v.size());
  return v;
}

void check_admissible(const TransformationFamily &family, const ParamVec &chi)
{
  const auto interval = family.admissible_interval();
  if (!interval) return;
  for (Eigen::Index i = 0; i < chi.size(); ++i)
    if (chi(i) < (*interval)[0] || chi(i) > (*interval)[1])
      throw InadmissibleParameter("chi = " + std::to_string(chi(i)) +
                                  " outside the admissible interval [" +
                                  std::to_string((*interval)[0]) + ", " +
                                  std::to_string((*interval)[1]) + "]");
}

double pair_residual(const Pencil &p, double lambda, const Eigen::VectorXd &v, double k_norm,
                     double m_norm)
{
  const Eigen::VectorXd r = p.K * v - lambda * (p.M * v);
  return r.norm() / ((k_norm + std::abs(lambda) * m_norm) * v.norm());
}

}  // namespace

// ---------------------------------------------------------------------------
// ProblemInstance

ProblemInstance::ProblemInstance(const RunConfig &config, int threads, std::optional<int> box_n)
  : config_(&config)
{
  options_.quadrature_order = config.quadrature_order;
  options_.lumped_mass = config.lumped_mass;
  options_.threads = std::max(1, threads);
  if (config.problem == ProblemKind::Abstract) return;
  mesh_ = staged("mesh", [&] {
    if (config.mesh_file)
    {
      if (box_n) throw ConfigError("refinement levels require a box mesh");
      return std::make_shared<const Mesh>(load_mesh(*config.mesh_file));
    }
    return std::make_shared<const Mesh>(
        build_box_mesh(config.box_dims, box_n.value_or(config.box_n), config.partition,
                       config.box_split));
  });
}

const Mesh &ProblemInstance::mesh() const
{
  if (!mesh_) throw ContractViolation("abstract pencil problems have no mesh");
  return *mesh_;
}

int ProblemInstance::quadrature_order() const
{
  if (!mesh_) return 0;
  return select_quadrature_order(config_->family, options_);
}

Pencil ProblemInstance::pencil(const ParamVec &chi) const
{
  return staged("assembly", [&] {
    const RunConfig &c = *config_;
    switch (c.problem)
    {
    case ProblemKind::Abstract:
      return c.abstract_spec.pencil(chi(0));
    case ProblemKind::Helmholtz:
      check_admissible(c.family, chi);
      return assemble_helmholtz(*mesh_, c.family, chi, c.epsilon, c.nu, options_);
    case ProblemKind::Maxwell:
      check_admissible(c.family, chi);
      return assemble_maxwell(*mesh_, c.family, chi, c.epsilon, c.mu_inv, options_);
    }
    throw ContractViolation("unknown problem kind");
  });
}

PencilDerivative ProblemInstance::derivative(const ParamVec &chi, const ParamVec &direction) const
{
  return staged("derivative assembly", [&] {
    const RunConfig &c = *config_;
    switch (c.problem)
    {
    case ProblemKind::Abstract:
      return c.abstract_spec.derivative(chi(0), direction(0));
    case ProblemKind::Helmholtz:
      check_admissible(c.family, chi);
      return assemble_helmholtz_derivative(*mesh_, c.family, chi, direction, c.epsilon, c.nu,
                                           options_);
    case ProblemKind::Maxwell:
      check_admissible(c.family, chi);
      return assemble_maxwell_derivative(*mesh_, c.family, chi, direction, c.epsilon, c.mu_inv,
                                         options_);
    }
    throw ContractViolation("unknown problem kind");
  });
}

Eigen::MatrixXd ProblemInstance::volume_matrix(const ParamVec &chi, const ParamVec &direction,
                                               const Eigen::MatrixXd &vectors,
                                               double lambda_bar) const
{
  return staged("volume form", [&] {
    const RunConfig &c = *config_;
    const ShapeSetting s{mesh(), c.family, chi, direction, options_};
    if (c.problem == ProblemKind::Helmholtz)
      return helmholtz_volume_matrix(s, c.epsilon, c.nu, vectors, lambda_bar);
    return maxwell_volume_matrix(s, c.epsilon, c.mu_inv, vectors, lambda_bar);
  });
}

Eigen::MatrixXd ProblemInstance::surface_matrix(const ParamVec &chi, const ParamVec &direction,
                                                const Eigen::MatrixXd &vectors,
                                                double lambda_bar) const
{
  return staged("surface form", [&] {
    const RunConfig &c = *config_;
    const ShapeSetting s{mesh(), c.family, chi, direction, options_};
    if (c.problem == ProblemKind::Helmholtz)
      return helmholtz_surface_matrix(s, c.epsilon, c.nu, vectors, lambda_bar);
    return maxwell_surface_matrix(s, c.epsilon, c.mu_inv, vectors, lambda_bar);
  });
}

long estimate_box_dofs(ProblemKind kind, int n)
{
  const long m = n;
  if (kind == ProblemKind::Helmholtz) return (m + 1) * (m + 1) * (m + 1);
  // axis edges, face diagonals and body diagonals of the Kuhn triangulation
  return 3 * m * (m + 1) * (m + 1) + 3 * m * m * (m + 1) + m * m * m;
}

// ---------------------------------------------------------------------------
// Spectrum and derivative routes

SpectrumResult compute_spectrum(const ProblemInstance &instance, const RunConfig &config)
{
  SpectrumResult out;
  const Pencil p = instance.pencil(config.chi);
  out.num_dofs = p.num_dofs();
  SolveOptions opts;
  opts.kernel_tol = config.kernel_tol;
  out.decomposition = staged("eigensolve", [&] { return solve_pencil(p, opts); });
  const auto &d = out.decomposition;
  if (config.k_last > d.last_index())
    throw DomainError("eigen range [" + std::to_string(config.k_first) + ", " +
                      std::to_string(config.k_last) + "] exceeds the " +
                      std::to_string(d.size()) + " positive eigenvalues");

  for (auto &c : cluster_spectrum(d, config.cluster_tol))
    if (c.last_index() >= config.k_first && c.first_index <= config.k_last)
      out.clusters.push_back(std::move(c));

  const double k_norm = p.K.norm(), m_norm = p.M.norm();
  int hi = config.k_last;
  for (const auto &c : out.clusters) hi = std::max(hi, c.last_index());
  int lo = std::min(config.k_first, out.clusters.front().first_index);
  for (int k = lo; k <= hi; ++k)
    out.max_residual = std::max(out.max_residual,
                                pair_residual(p, d.eigenvalue(k), d.eigenvector(k), k_norm, m_norm));
  if (out.max_residual > 1e-8)
    throw InvariantViolation("eigenpair residual " + std::to_string(out.max_residual) +
                             " exceeds 1e-8");
  for (const auto &c : out.clusters)
  {
    const Eigen::MatrixXd g = c.vectors.transpose() * (p.M * c.vectors);
    const double err =
        (g - Eigen::MatrixXd::Identity(c.multiplicity, c.multiplicity)).cwiseAbs().maxCoeff();
    if (err > 1e-10)
      throw InvariantViolation("cluster " + std::to_string(c.first_index) +
                               " eigenvectors are not M-orthonormal (" + std::to_string(err) + ")");
  }

  if (config.problem == ProblemKind::Maxwell)
  {
    const GradientBasis g = gradient_kernel_basis(instance.mesh());
    out.gradient_columns = static_cast<int>(g.columns.cols());
    out.gradient_rank = g.rank;
    out.harmonic_dim = d.kernel_dim - g.rank;
  }
  return out;
}

ClusterAnalysis analyze_cluster(const ProblemInstance &instance, const RunConfig &config,
                                const EigenCluster &cluster)
{
  ClusterAnalysis a;
  a.cluster = cluster;
  const int m = cluster.multiplicity;
  const double lam = cluster.mean;
  const PencilDerivative deriv = instance.derivative(config.chi, config.direction);
  a.rellich = rellich_matrix(deriv, cluster);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.rellich);
  a.slopes_rellich = es.eigenvalues();
  a.branch_basis = es.eigenvectors();
  a.sym_rellich = sym_derivatives(lam, m, a.rellich);
  if (m == 1) a.hellmann_feynman = hellmann_feynman(deriv, cluster);

  if (instance.has_mesh())
  {
    a.volume = instance.volume_matrix(config.chi, config.direction, cluster.vectors, lam);
    a.surface = instance.surface_matrix(config.chi, config.direction, cluster.vectors, lam);
    a.slopes_volume = branch_slopes(a.volume);
    a.slopes_surface = branch_slopes(a.surface);
    a.sym_volume = sym_derivatives(lam, m, a.volume);
    a.sym_surface = sym_derivatives(lam, m, a.surface);
    const double floor = 1e-12 * std::abs(lam);
    a.volume_vs_rellich = relative_gap(a.volume, a.rellich, floor);
    a.surface_vs_volume = relative_gap(a.surface, a.volume, floor);
  }
  return a;
}

// ---------------------------------------------------------------------------
// Finite differences

namespace
{

EigenDecomposition solve_shifted(const ProblemInstance &instance, const RunConfig &config,
                                 const ParamVec &chi, int k_hi, int kernel_hint)
{
  const Pencil p = instance.pencil(chi);
  SolveOptions opts;
  opts.kernel_tol = config.kernel_tol;
  return staged("finite-difference eigensolve", [&] {
    if (p.num_dofs() > 400 && kernel_hint + k_hi <= p.num_dofs())
      return solve_pencil_window(p, 1, k_hi, kernel_hint, opts);
    return solve_pencil(p, opts);
  });
}

struct Assignment
{
  std::vector<int> index;  ///< chosen eigenvalue index per branch
  double min_overlap = 1.0;
};

Assignment match_branches(const Eigen::MatrixXd &branches, const SparseMatrix &m0,
                          const EigenDecomposition &d, int lo, int hi)
{
  const int nb = static_cast<int>(branches.cols());
  const int nc = hi - lo + 1;
  Eigen::MatrixXd candidates(branches.rows(), nc);
  for (int i = 0; i < nc; ++i) candidates.col(i) = d.eigenvector(lo + i);
  Eigen::MatrixXd overlap = (branches.transpose() * (m0 * candidates)).cwiseAbs();
  Assignment a;
  a.index.assign(nb, -1);
  std::vector<bool> used(nc, false);
  for (int round = 0; round < nb; ++round)
  {
    double best = -1.0;
    int bj = -1, bi = -1;
    for (int j = 0; j < nb; ++j)
    {
      if (a.index[j] >= 0) continue;
      for (int i = 0; i < nc; ++i)
        if (!used[i] && overlap(j, i) > best)
        {
          best = overlap(j, i);
          bj = j;
          bi = i;
        }
    }
    a.index[bj] = lo + bi;
    used[bi] = true;
    a.min_overlap = std::min(a.min_overlap, best);
  }
  return a;
}

Eigen::VectorXd richardson(const Eigen::VectorXd &coarse, const Eigen::VectorXd &fine, double ratio)
{
  return fine + (fine - coarse) / (ratio * ratio - 1.0);
}

}  // namespace

ClusterFd fd_check(const ProblemInstance &instance, const RunConfig &config,
                   const ClusterAnalysis &analysis, const std::vector<double> &steps)
{
  if (steps.size() < 2) throw ConfigError("fd_check needs at least two steps");
  const EigenCluster &c = analysis.cluster;
  const int m = c.multiplicity;
  const Pencil base = instance.pencil(config.chi);
  SolveOptions opts;
  opts.kernel_tol = config.kernel_tol;
  const Eigen::VectorXd base_values = pencil_eigenvalues(base);
  int kernel_hint = 0;
  while (kernel_hint < base_values.size() &&
         base_values(kernel_hint) < config.kernel_tol * lambda_scale(base))
    ++kernel_hint;
  const int available = static_cast<int>(base_values.size()) - kernel_hint;
  const int k_hi = std::min(available, c.last_index() + 1);
  const int lo = std::max(1, c.first_index - 1);
  const Eigen::MatrixXd branches = c.vectors * analysis.branch_basis;

  ClusterFd out;
  for (double h : steps)
  {
    FdStep st;
    st.step = h;
    const ParamVec chi_p = config.chi + h * config.direction;
    const ParamVec chi_m = config.chi - h * config.direction;
    const auto dp = solve_shifted(instance, config, chi_p, k_hi, kernel_hint);
    const auto dm = solve_shifted(instance, config, chi_m, k_hi, kernel_hint);
    const int hi = std::min({k_hi, dp.last_index(), dm.last_index()});
    if (hi < c.last_index())
      throw DomainError("finite-difference solve lost eigenvalues of cluster " +
                        std::to_string(c.first_index));

    Eigen::VectorXd lp(m), lm(m);
    for (int j = 0; j < m; ++j)
    {
      lp(j) = dp.eigenvalue(c.first_index + j);
      lm(j) = dm.eigenvalue(c.first_index + j);
    }
    st.sorted_slopes = (lp - lm) / (2.0 * h);
    const Eigen::VectorXd ep = elementary_symmetric_all(lp), em = elementary_symmetric_all(lm);
    st.sym_slopes = (ep.tail(m) - em.tail(m)) / (2.0 * h);

    const Assignment ap = match_branches(branches, base.M, dp, lo, hi);
    const Assignment am = match_branches(branches, base.M, dm, lo, hi);
    auto inside = [&](const Assignment &a) {
      return std::all_of(a.index.begin(), a.index.end(),
                         [&](int k) { return k >= c.first_index && k <= c.last_index(); });
    };
    st.min_overlap = std::min(ap.min_overlap, am.min_overlap);
    st.tracked = inside(ap) && inside(am) && st.min_overlap >= 0.5;
    if (st.tracked)
    {
      st.branch_slopes.resize(m);
      for (int j = 0; j < m; ++j)
        st.branch_slopes(j) = (dp.eigenvalue(ap.index[j]) - dm.eigenvalue(am.index[j])) / (2.0 * h);
    }
    else
    {
      st.branch_slopes = sorted(st.sorted_slopes);
    }
    out.steps.push_back(std::move(st));
  }

  const std::size_t n = out.steps.size();
  const FdStep &a = out.steps[n - 2], &b = out.steps[n - 1];
  const double ratio = a.step / b.step;
  out.richardson_branch = richardson(a.branch_slopes, b.branch_slopes, ratio);
  out.richardson_sorted = richardson(a.sorted_slopes, b.sorted_slopes, ratio);
  out.richardson_sym = richardson(a.sym_slopes, b.sym_slopes, ratio);
  if (n >= 3)
  {
    const FdStep &z = out.steps[n - 3];
    const double d1 = (z.sorted_slopes - a.sorted_slopes).cwiseAbs().maxCoeff();
    const double d2 = (a.sorted_slopes - b.sorted_slopes).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, b.sorted_slopes.cwiseAbs().maxCoeff());
    if (d2 > 1e-9 * scale && d1 > d2) out.observed_order = std::log(d1 / d2) / std::log(z.step / a.step);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Refinement

RefinementTable refinement_study(const RunConfig &config, int threads)
{
  if (config.problem == ProblemKind::Abstract)
    throw ConfigError("refinement studies need a mesh-based problem");
  if (config.mesh_file) throw ConfigError("refinement studies need a box mesh");
  std::vector<int> levels = config.refinement;
  if (levels.empty()) levels.push_back(config.box_n);
  for (int n : levels)
    if (estimate_box_dofs(config.problem, n) > kMaxStudyDofs)
      throw SizeLimitError("refinement level n = " + std::to_string(n) + " needs about " +
                           std::to_string(estimate_box_dofs(config.problem, n)) +
                           " dofs; the limit is " + std::to_string(kMaxStudyDofs));

  RefinementTable table;
  for (int n : levels)
  {
    ProblemInstance instance(config, threads, n);
    const SpectrumResult spec = compute_spectrum(instance, config);
    const ClusterAnalysis a = analyze_cluster(instance, config, spec.clusters.front());
    RefinementLevel level;
    level.n = n;
    level.num_dofs = spec.num_dofs;
    level.eigenvalues.resize(config.k_last - config.k_first + 1);
    for (int k = config.k_first; k <= config.k_last; ++k)
      level.eigenvalues(k - config.k_first) = spec.decomposition.eigenvalue(k);
    level.route_discrepancy = a.volume_vs_rellich;
    level.surface_volume_gap = a.surface_vs_volume;
    level.surface_volume_abs = (a.surface - a.volume).norm() / a.cluster.mean;
    if (config.reference_eigenvalue)
      level.reference_error = std::abs(level.eigenvalues(0) - *config.reference_eigenvalue);
    table.levels.push_back(std::move(level));
  }
  for (std::size_t i = 1; i < table.levels.size(); ++i)
  {
    const auto &p = table.levels[i - 1], &q = table.levels[i];
    if (!(q.surface_volume_gap < p.surface_volume_gap)) table.gap_decreasing = false;
    if (!(q.eigenvalues(0) <= p.eigenvalues(0))) table.eigenvalues_decreasing = false;
  }
  const std::size_t n = table.levels.size();
  if (n >= 2 && config.reference_eigenvalue)
  {
    const auto &p = table.levels[n - 2], &q = table.levels[n - 1];
    if (*p.reference_error > 0.0 && *q.reference_error > 0.0 && p.n != q.n)
      table.observed_rate = std::log(*p.reference_error / *q.reference_error) /
                            std::log(static_cast<double>(q.n) / p.n);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Reports

Command parse_command(const std::string &name)
{
  if (name == "eig") return Command::Eig;
  if (name == "dshape") return Command::Dshape;
  if (name == "verify") return Command::Verify;
  if (name == "study") return Command::Study;
  if (name == "abstract") return Command::Abstract;
  throw ConfigError("unknown subcommand '" + name + "'");
}

const char *to_string(Command command)
{
  switch (command)
  {
  case Command::Eig: return "eig";
  case Command::Dshape: return "dshape";
  case Command::Verify: return "verify";
  case Command::Study: return "study";
  case Command::Abstract: return "abstract";
  }
  return "?";
}

namespace
{

std::string utc_timestamp()
{
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct CheckList
{
  json entries = json::array();
  bool passed = true;

  void add(const std::string &name, double value, double tolerance, const std::string &detail = {})
  {
    const bool ok = std::isfinite(value) && value <= tolerance;
    passed = passed && ok;
    json e = {{"name", name}, {"value", value}, {"tolerance", tolerance}, {"passed", ok}};
    if (!detail.empty()) e["detail"] = detail;
    entries.push_back(std::move(e));
  }
};

std::string cluster_label(const EigenCluster &c)
{
  return "F=[" + std::to_string(c.first_index) + "," + std::to_string(c.last_index()) + "]";
}

json cluster_json(const EigenCluster &c)
{
  return {{"indices", c.indices()},
          {"multiplicity", c.multiplicity},
          {"lambda_bar", c.mean},
          {"width", c.width},
          {"eigenvalues", to_json(c.values)}};
}

json analysis_json(const ClusterAnalysis &a, bool surface_trusted)
{
  json j = cluster_json(a.cluster);
  j["rellich_matrix"] = to_json(a.rellich);
  json slopes = {{"rellich", to_json(a.slopes_rellich)}};
  json sym = {{"rellich", to_json(a.sym_rellich)}};
  if (a.volume.size() > 0)
  {
    j["volume_matrix"] = to_json(a.volume);
    j["surface_matrix"] = to_json(a.surface);
    j["surface_form_trusted"] = surface_trusted;
    slopes["volume"] = to_json(a.slopes_volume);
    slopes["surface"] = to_json(a.slopes_surface);
    sym["volume"] = to_json(a.sym_volume);
    sym["surface"] = to_json(a.sym_surface);
    j["discrepancy"] = {{"volume_vs_rellich", a.volume_vs_rellich},
                        {"surface_vs_volume", a.surface_vs_volume}};
  }
  j["slopes"] = slopes;
  j["symmetric_function_derivatives"] = sym;
  j["hellmann_feynman"] = a.hellmann_feynman ? json(*a.hellmann_feynman) : json(nullptr);
  return j;
}

json fd_json(const ClusterFd &fd)
{
  json steps = json::array();
  for (const auto &s : fd.steps)
    steps.push_back({{"step", s.step},
                     {"branch_slopes", to_json(s.branch_slopes)},
                     {"sorted_slopes", to_json(s.sorted_slopes)},
                     {"symmetric_function_slopes", to_json(s.sym_slopes)},
                     {"tracking", s.tracked ? "overlap" : "sorted"},
                     {"min_overlap", s.min_overlap}});
  return {{"steps", steps},
          {"richardson",
           {{"branch_slopes", to_json(fd.richardson_branch)},
            {"sorted_slopes", to_json(fd.richardson_sorted)},
            {"symmetric_function_slopes", to_json(fd.richardson_sym)}}},
          {"observed_order", fd.observed_order ? json(*fd.observed_order) : json(nullptr)}};
}

/// Tolerance on d Lambda_{F,s}: relative for degenerate clusters, plus the
/// first-order effect of the cluster split otherwise.
double sym_tolerance(const ClusterAnalysis &a, const Eigen::VectorXd &fd_slopes, double mass_norm,
                     int s, double reference)
{
  const EigenCluster &c = a.cluster;
  const int m = c.multiplicity;
  const double lam = std::abs(c.mean);
  const double lmax = c.values.cwiseAbs().maxCoeff();
  double tol = std::max(1e-5 * std::abs(reference), 1e-8 * std::pow(std::max(1.0, lam), s));
  if (c.width > 1e-10 * lam)
  {
    const double binom = binomial(m - 1, s - 1);
    const double spread = (s - 1) * std::pow(lmax, std::max(0, s - 2)) * c.width *
                          fd_slopes.cwiseAbs().sum();
    const double mass = std::pow(lmax, s - 1) * c.width * mass_norm;
    tol += 2.0 * binom * (spread + mass);
  }
  return tol;
}

void validate_report(const json &report, double cluster_tol)
{
  const auto check_matrix = [](const json &m, const std::string &where) {
    const std::size_t n = m.size();
    double scale = 0.0, asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
      {
        scale = std::max(scale, std::abs(m[i][k].get<double>()));
        asym = std::max(asym, std::abs(m[i][k].get<double>() - m[k][i].get<double>()));
      }
    if (asym > 1e-10 * std::max(scale, 1e-300))
      throw ValidationError("report matrix " + where + " is not Hermitian");
  };
  if (!report.contains("clusters")) return;
  for (const auto &c : report["clusters"])
  {
    const std::string where = "cluster " + c["indices"].dump();
    for (const char *key : {"rellich_matrix", "volume_matrix", "surface_matrix"})
      if (c.contains(key)) check_matrix(c[key], where + " " + key);
    const int m = c["multiplicity"].get<int>();
    const double lam = std::abs(c["lambda_bar"].get<double>());
    double lmax = 0.0;
    for (const auto &v : c["eigenvalues"]) lmax = std::max(lmax, std::abs(v.get<double>()));
    if (c["width"].get<double>() > std::max(1, m - 1) * cluster_tol * lmax + 1e-14 * lam)
      throw ValidationError(where + " is wider than the cluster tolerance allows");
    if (c.contains("fd"))
      for (const auto &s : c["fd"]["steps"])
        if (!s.contains("step") || !(s["step"].get<double>() > 0.0))
          throw ValidationError(where + " has a finite-difference entry without a step");
  }
}

json environment_json(const ProblemInstance &instance, const RunConfig &config, int num_dofs)
{
  json env = {{"tolerances",
               {{"kernel_tol", config.kernel_tol},
                {"cluster_tol", config.cluster_tol},
                {"fd_step", config.fd_step},
                {"fd_steps", config.fd_steps}}},
              {"num_dofs", num_dofs},
              {"eigensolver", "dense generalized symmetric (LAPACK dsygvd)"}};
  if (instance.has_mesh())
  {
    const Mesh &mesh = instance.mesh();
    env["mesh"] = {{"vertices", mesh.num_vertices()},
                   {"tets", mesh.num_tets()},
                   {"edges", mesh.num_edges()},
                   {"boundary_facets", mesh.boundary_facets().size()}};
    env["quadrature"] = {{"tet_order", instance.quadrature_order()},
                         {"triangle_order", instance.quadrature_order()},
                         {"mass", config.lumped_mass ? "lumped" : "consistent"}};
  }
  return env;
}

json spectrum_json(const SpectrumResult &s, const RunConfig &config)
{
  const auto &d = s.decomposition;
  const int hi = std::min(d.last_index(), config.k_last);
  Eigen::VectorXd values(hi);
  for (int k = 1; k <= hi; ++k) values(k - 1) = d.eigenvalue(k);
  json j = {{"kernel_dim", d.kernel_dim},
            {"lambda_scale", d.lambda_scale},
            {"eigenvalues", to_json(values)},
            {"max_residual", s.max_residual}};
  json clusters = json::array();
  for (const auto &c : s.clusters) clusters.push_back(cluster_json(c));
  j["clusters"] = clusters;
  if (s.gradient_columns >= 0)
  {
    j["gradient_columns"] = s.gradient_columns;
    j["gradient_rank"] = s.gradient_rank;
    j["harmonic_dim"] = s.harmonic_dim;
  }
  return j;
}

json study_json(const RefinementTable &t)
{
  json levels = json::array();
  for (const auto &l : t.levels)
  {
    json e = {{"n", l.n},
              {"num_dofs", l.num_dofs},
              {"eigenvalues", to_json(l.eigenvalues)},
              {"route_discrepancy", l.route_discrepancy},
              {"surface_volume_gap", l.surface_volume_gap},
              {"surface_volume_abs", l.surface_volume_abs}};
    e["reference_error"] = l.reference_error ? json(*l.reference_error) : json(nullptr);
    levels.push_back(std::move(e));
  }
  return {{"levels", levels},
          {"surface_volume_gap_decreasing", t.gap_decreasing},
          {"eigenvalues_decreasing", t.eigenvalues_decreasing},
          {"observed_rate", t.observed_rate ? json(*t.observed_rate) : json(nullptr)}};
}

/// Random orthogonal m x m matrix from a seeded generator.
Eigen::MatrixXd random_orthogonal(int m, std::mt19937_64 &rng)
{
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(m, m);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) a(i, k) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
}

}  // namespace

RunResult run(const RunConfig &config, Command command, const RunOptions &options)
{
  openblas_set_num_threads(1);
  if (command == Command::Abstract && config.problem != ProblemKind::Abstract)
    throw ConfigError("the abstract subcommand needs problem = abstract-pencil");

  json report;
  report["schema_version"] = kReportSchemaVersion;
  report["command"] = to_string(command);
  if (options.include_timestamp) report["generated_at"] = utc_timestamp();
  report["seed"] = options.seed;
  report["config"] = json::parse(config.canonical_json);

  RunResult result;
  if (command == Command::Study)
  {
    const RefinementTable table = refinement_study(config, options.threads);
    report["study"] = study_json(table);
    report["environment"] = {{"tolerances",
                              {{"kernel_tol", config.kernel_tol}, {"cluster_tol", config.cluster_tol}}},
                             {"max_dofs", kMaxStudyDofs}};
    result.report = report.dump(2);
    return result;
  }

  const ProblemInstance instance(config, options.threads);
  const SpectrumResult spectrum = compute_spectrum(instance, config);
  report["environment"] = environment_json(instance, config, spectrum.num_dofs);
  report["spectrum"] = spectrum_json(spectrum, config);

  if (command != Command::Eig)
  {
    const bool verify = command == Command::Verify || command == Command::Abstract;
    CheckList checks;
    std::mt19937_64 rng(options.seed);
    std::vector<PencilDerivative> deriv_cache;
    json clusters = json::array();
    for (const auto &c : spectrum.clusters)
    {
      const ClusterAnalysis a = analyze_cluster(instance, config, c);
      json cj = analysis_json(a, config.surface_trusted);
      if (verify)
      {
        const std::string label = cluster_label(c);
        const double lam = std::abs(c.mean);
        if (deriv_cache.empty()) deriv_cache.push_back(instance.derivative(config.chi, config.direction));
        const PencilDerivative &deriv = deriv_cache.front();

        if (instance.has_mesh())
          checks.add(label + " route equivalence (volume vs Rellich)", a.volume_vs_rellich, 1e-10);

        const ClusterFd fd = staged("fd_check", [&] { return fd_check(instance, config, a, config.fd_steps); });
        cj["fd"] = fd_json(fd);

        const bool degenerate = c.width < 1e-10 * lam;
        const double slope_tol = degenerate ? std::max(1e-5 * lam, 1e-7)
                                            : std::max(1e-4 * lam, 2.0 * c.width);
        checks.add(label + " Rellich slopes vs FD branch slopes",
                   (sorted(fd.richardson_branch) - a.slopes_rellich).cwiseAbs().maxCoeff(), slope_tol,
                   degenerate ? (c.multiplicity == 1 ? "simple eigenvalue" : "exactly degenerate cluster")
                              : "split cluster: tolerance max(1e-4 lambda, 2 width)");
        if (a.hellmann_feynman)
          checks.add(label + " Hellmann-Feynman vs Richardson FD",
                     std::abs(*a.hellmann_feynman - fd.richardson_branch(0)), 1e-6 * lam);

        const Eigen::MatrixXd mass_block = c.vectors.transpose() * (deriv.dM * c.vectors);
        const double mass_norm = mass_block.norm();
        for (int s = 1; s <= c.multiplicity; ++s)
        {
          const double ref = fd.richardson_sym(s - 1);
          checks.add(label + " trace formula s=" + std::to_string(s) + " vs FD",
                     std::abs(a.sym_rellich(s - 1) - ref),
                     sym_tolerance(a, fd.richardson_sorted, mass_norm, s, ref));
        }

        if (c.multiplicity > 1)
        {
          const Eigen::MatrixXd q = random_orthogonal(c.multiplicity, rng);
          const Eigen::VectorXd rotated = branch_slopes(rellich_matrix(deriv, c.vectors * q, c.mean));
          checks.add(label + " Rellich basis covariance",
                     (rotated - a.slopes_rellich).cwiseAbs().maxCoeff(),
                     1e-10 * std::max(1.0, a.rellich.norm()));
        }
      }
      clusters.push_back(std::move(cj));
    }
    report["clusters"] = clusters;

    if (verify)
    {
      checks.add("eigenpair residual", spectrum.max_residual, 1e-8);
      if (config.problem == ProblemKind::Maxwell)
      {
        const GradientBasis g = gradient_kernel_basis(instance.mesh());
        const Pencil p = instance.pencil(config.chi);
        const double kg = (p.K * g.columns).cwiseAbs().maxCoeff();
        checks.add("gradient columns in the kernel of K", kg / p.K.norm(), 1e-12);
        const bool uniform = config.partition.faces == BoxPartition::all(BoundaryTag::T).faces ||
                             config.partition.faces == BoxPartition::all(BoundaryTag::N).faces;
        if (!config.mesh_file && uniform)
          checks.add("kernel dimension minus gradient rank", std::abs(spectrum.harmonic_dim), 0.0);
      }
      report["checks"] = checks.entries;
      report["passed"] = checks.passed;
      result.passed = checks.passed;
    }
  }

  validate_report(report, config.cluster_tol);
  result.report = report.dump(2);
  return result;
}

std::string strip_timestamp(const std::string &text)
{
  json j = json::parse(text);
  j.erase("generated_at");
  return j.dump(2);
}

}  // namespace spectra_shape
