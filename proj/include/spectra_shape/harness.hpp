#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spectra_shape/assembly.hpp"
#include "spectra_shape/config.hpp"
#include "spectra_shape/spectral.hpp"

namespace spectra_shape
{

/// Upper bound on dofs accepted by refinement studies.
inline constexpr long kMaxStudyDofs = 200000;

/// A configured problem at a fixed mesh resolution: pencils and derivative
/// forms along the line chi + tau * direction.
class ProblemInstance
{
public:
  explicit ProblemInstance(const RunConfig &config, int threads = 1,
                           std::optional<int> box_n = std::nullopt);

  ProblemKind kind() const { return config_->problem; }
  bool has_mesh() const { return static_cast<bool>(mesh_); }
  const Mesh &mesh() const;
  AssemblyOptions options() const { return options_; }
  int quadrature_order() const;

  Pencil pencil(const ParamVec &chi) const;
  PencilDerivative derivative(const ParamVec &chi, const ParamVec &direction) const;
  Eigen::MatrixXd volume_matrix(const ParamVec &chi, const ParamVec &direction,
                                const Eigen::MatrixXd &vectors, double lambda_bar) const;
  Eigen::MatrixXd surface_matrix(const ParamVec &chi, const ParamVec &direction,
                                 const Eigen::MatrixXd &vectors, double lambda_bar) const;

private:
  const RunConfig *config_;
  std::shared_ptr<const Mesh> mesh_;
  AssemblyOptions options_;
};

/// Dof count of a box problem at resolution n without building it.
long estimate_box_dofs(ProblemKind kind, int n);

struct SpectrumResult
{
  EigenDecomposition decomposition;
  std::vector<EigenCluster> clusters;  ///< clusters meeting the eigen range
  int num_dofs = 0;
  int gradient_columns = -1;  ///< Maxwell only
  int gradient_rank = -1;
  int harmonic_dim = -1;
  double max_residual = 0.0;  ///< relative eigenpair residual over the reported range
};

SpectrumResult compute_spectrum(const ProblemInstance &instance, const RunConfig &config);

struct ClusterAnalysis
{
  EigenCluster cluster;
  Eigen::MatrixXd rellich;
  Eigen::MatrixXd volume;   ///< empty for abstract pencils
  Eigen::MatrixXd surface;  ///< empty for abstract pencils
  Eigen::VectorXd slopes_rellich, slopes_volume, slopes_surface;
  /// Lambda_{F,s} derivatives for s = 1..m from the trace formula, per route.
  Eigen::VectorXd sym_rellich, sym_volume, sym_surface;
  std::optional<double> hellmann_feynman;
  double volume_vs_rellich = 0.0;   ///< ||V - R|| / ||R||
  double surface_vs_volume = 0.0;   ///< ||S - V|| / ||V||
  /// Rellich eigenvectors (columns ordered by slope) in the cluster basis.
  Eigen::MatrixXd branch_basis;
};

ClusterAnalysis analyze_cluster(const ProblemInstance &instance, const RunConfig &config,
                                const EigenCluster &cluster);

struct FdStep
{
  double step = 0.0;
  Eigen::VectorXd branch_slopes;  ///< tracked branches, ordered like the Rellich slopes
  Eigen::VectorXd sorted_slopes;  ///< slopes of the sorted cluster eigenvalues
  Eigen::VectorXd sym_slopes;     ///< Lambda_{F,s}, s = 1..m, from sorted eigenvalues
  bool tracked = true;            ///< false when overlap matching fell back to sorting
  double min_overlap = 1.0;
};

struct ClusterFd
{
  std::vector<FdStep> steps;
  Eigen::VectorXd richardson_branch;
  Eigen::VectorXd richardson_sorted;
  Eigen::VectorXd richardson_sym;
  std::optional<double> observed_order;
};

/// Central differences of the cluster eigenvalues along the direction for each
/// step, with Richardson extrapolation over the two smallest steps.
ClusterFd fd_check(const ProblemInstance &instance, const RunConfig &config,
                   const ClusterAnalysis &analysis, const std::vector<double> &steps);

struct RefinementLevel
{
  int n = 0;
  int num_dofs = 0;
  Eigen::VectorXd eigenvalues;  ///< eigen range
  double route_discrepancy = 0.0;
  double surface_volume_gap = 0.0;  ///< ||S - V|| / ||V|| of the first cluster
  double surface_volume_abs = 0.0;  ///< ||S - V|| / lambda_bar
  std::optional<double> reference_error;
};

struct RefinementTable
{
  std::vector<RefinementLevel> levels;
  bool gap_decreasing = true;
  bool eigenvalues_decreasing = true;
  std::optional<double> observed_rate;  ///< eigenvalue error rate in h
};

/// Refuses levels above kMaxStudyDofs with SizeLimitError.
RefinementTable refinement_study(const RunConfig &config, int threads = 1);

enum class Command
{
  Eig,
  Dshape,
  Verify,
  Study,
  Abstract
};

Command parse_command(const std::string &name);
const char *to_string(Command command);

struct RunOptions
{
  std::uint64_t seed = 0;
  int threads = 1;
  bool include_timestamp = true;
};

struct RunResult
{
  std::string report;  ///< JSON text
  bool passed = true;  ///< all verification checks passed (verify only)
};

inline constexpr const char *kReportSchemaVersion = "1.0";

/// Runs one subcommand and returns the validated JSON report.
RunResult run(const RunConfig &config, Command command, const RunOptions &options = {});

/// Removes the timestamp field from a report for comparisons.
std::string strip_timestamp(const std::string &report);

}  // namespace spectra_shape
