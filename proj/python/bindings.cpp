#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spectra_shape/config.hpp"
#include "spectra_shape/errors.hpp"
#include "spectra_shape/harness.hpp"
#include "spectra_shape/perturbation.hpp"
#include "spectra_shape/spectral.hpp"

namespace py = pybind11;
namespace ss = spectra_shape;

namespace
{

std::string run_command(const std::string &config_text, const std::string &command, int threads,
                        std::uint64_t seed, bool timestamp)
{
  const ss::RunConfig config = ss::parse_config(config_text);
  ss::RunOptions options;
  options.threads = threads;
  options.seed = seed;
  options.include_timestamp = timestamp;
  py::gil_scoped_release release;
  return ss::run(config, ss::parse_command(command), options).report;
}

py::tuple solve_dense(const Eigen::MatrixXd &k, const Eigen::MatrixXd &m, double kernel_tol)
{
  ss::SolveOptions opts;
  opts.kernel_tol = kernel_tol;
  const ss::EigenDecomposition d = ss::solve_pencil(ss::Pencil::from_dense(k, m), opts);
  return py::make_tuple(d.eigenvalues, d.eigenvectors, d.kernel_dim);
}

Eigen::MatrixXd rellich_dense(const Eigen::MatrixXd &dk, const Eigen::MatrixXd &dm,
                              const Eigen::MatrixXd &vectors, double lambda_bar)
{
  return ss::rellich_matrix(ss::PencilDerivative::from_dense(dk, dm), vectors, lambda_bar);
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Shape derivatives of Helmholtz and Maxwell eigenvalue clusters";

  auto base = py::register_exception<ss::Error>(m, "Error", PyExc_RuntimeError);
  auto config = py::register_exception<ss::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ss::ParseError>(m, "ParseError", config.ptr());
  py::register_exception<ss::InvalidGeometry>(m, "InvalidGeometry", config.ptr());
  py::register_exception<ss::DegenerateProblem>(m, "DegenerateProblem", base.ptr());
  py::register_exception<ss::InadmissibleParameter>(m, "InadmissibleParameter", base.ptr());
  py::register_exception<ss::PencilError>(m, "PencilError", base.ptr());
  py::register_exception<ss::NearSingularError>(m, "NearSingularError", base.ptr());
  py::register_exception<ss::ContourError>(m, "ContourError", base.ptr());
  py::register_exception<ss::MultiplicityError>(m, "MultiplicityError", base.ptr());
  py::register_exception<ss::DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ss::SizeLimitError>(m, "SizeLimitError", base.ptr());
  py::register_exception<ss::ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ss::ContractViolation>(m, "ContractViolation", base.ptr());
  py::register_exception<ss::InvariantViolation>(m, "InvariantViolation", base.ptr());

  m.attr("REPORT_SCHEMA_VERSION") = ss::kReportSchemaVersion;

  m.def("run", &run_command, py::arg("config"), py::arg("command"), py::arg("threads") = 1,
        py::arg("seed") = 0, py::arg("timestamp") = true,
        "Runs eig, dshape, verify, study or abstract on a JSON config text and returns the JSON report text.");
  m.def("strip_timestamp", &ss::strip_timestamp, py::arg("report"));
  m.def("validate_config", [](const std::string &text) { (void)ss::parse_config(text); },
        py::arg("config"), "Raises ConfigError when the JSON config text is invalid.");

  m.def("solve_pencil", &solve_dense, py::arg("K"), py::arg("M"), py::arg("kernel_tol") = 1e-8,
        "Generalized symmetric eigenpairs of K u = lambda M u with M-orthonormal vectors.");
  m.def("subspace_gap",
        py::overload_cast<const Eigen::MatrixXd &, const Eigen::MatrixXd &, const Eigen::MatrixXd &>(
            &ss::subspace_gap),
        py::arg("U"), py::arg("V"), py::arg("M"));
  m.def("rellich_matrix", &rellich_dense, py::arg("dK"), py::arg("dM"), py::arg("vectors"),
        py::arg("lambda_bar"));
  m.def("branch_slopes", &ss::branch_slopes, py::arg("rellich"));
  m.def("elementary_symmetric", &ss::elementary_symmetric_all, py::arg("values"));
  m.def("hat_lambda", &ss::hat_lambda_all, py::arg("values"));
  m.def("reconstruct_lambda", &ss::reconstruct_lambda, py::arg("hat_values"));
  m.def("binomial", &ss::binomial, py::arg("n"), py::arg("k"));
}
