// spectra-shape: eigenvalues and shape derivatives of Helmholtz and Maxwell
// problems on transformed domains.
//
//   spectra-shape <eig|dshape|verify|study|abstract> --config path.json
//                 [--out path] [--seed N] [--threads N]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 invariant violation (including failed verification checks).

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "spectra_shape/errors.hpp"
#include "spectra_shape/harness.hpp"

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInvariant = 4;

int exit_code(spectra_shape::ErrorCategory category)
{
  switch (category)
  {
  case spectra_shape::ErrorCategory::Config: return kExitConfig;
  case spectra_shape::ErrorCategory::Numerical: return kExitNumerical;
  case spectra_shape::ErrorCategory::Invariant: return kExitInvariant;
  }
  return kExitNumerical;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Eigenvalues and eigenvalue shape derivatives on transformed domains",
               "spectra-shape"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::uint64_t seed = 0;
  int threads = 1;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"eig", "spectrum of the configured pencil"},
      {"dshape", "Rellich, volume and surface derivative matrices"},
      {"verify", "derivative routes plus finite-difference and invariant checks"},
      {"study", "mesh refinement study"},
      {"abstract", "synthetic pencil demonstrations"}};
  for (const auto &[name, help] : commands)
  {
    CLI::App *sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_path, "report path (default: stdout)");
    sub->add_option("--seed", seed, "seed for randomized checks");
    sub->add_option("--threads", threads, "assembly worker threads")->check(CLI::PositiveNumber);
  }

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try
  {
    const auto config = spectra_shape::load_config(config_path);
    spectra_shape::RunOptions options;
    options.seed = seed;
    options.threads = threads;
    const auto result = spectra_shape::run(config, spectra_shape::parse_command(name), options);
    if (out_path.empty())
    {
      std::cout << result.report << '\n';
    }
    else
    {
      std::ofstream out(out_path);
      if (!out)
      {
        std::cerr << "spectra-shape: cannot write '" << out_path << "'\n";
        return kExitConfig;
      }
      out << result.report << '\n';
    }
    if (!result.passed)
    {
      std::cerr << "spectra-shape: verification checks failed (see report)\n";
      return kExitInvariant;
    }
    return kExitOk;
  }
  catch (const spectra_shape::Error &e)
  {
    std::cerr << "spectra-shape: " << e.what() << '\n';
    return exit_code(e.category());
  }
  catch (const std::exception &e)
  {
    std::cerr << "spectra-shape: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}
