#pragma once

#include <stdexcept>
#include <string>

namespace spectra_shape
{

// Error taxonomy. The CLI maps each category onto an exit code:
// configuration errors -> 2, numerical failures -> 3, invariant violations -> 4.
enum class ErrorCategory
{
  Config,
  Numerical,
  Invariant
};

class Error : public std::runtime_error
{
public:
  Error(ErrorCategory category, const std::string &what)
    : std::runtime_error(what), category_(category)
  {
  }

  ErrorCategory category() const noexcept { return category_; }

  /// Throws an error of the same dynamic type with a new message.
  [[noreturn]] virtual void rethrow_with(const std::string &what) const
  {
    throw Error(category_, what);
  }

private:
  ErrorCategory category_;
};

#define SPECTRA_SHAPE_ERROR(Name, Category)                                               \
  class Name : public Error                                                               \
  {                                                                                       \
  public:                                                                                 \
    explicit Name(const std::string &what) : Error(ErrorCategory::Category, what) {}      \
    [[noreturn]] void rethrow_with(const std::string &what) const override                \
    {                                                                                     \
      throw Name(what);                                                                   \
    }                                                                                     \
  }

SPECTRA_SHAPE_ERROR(ConfigError, Config);
SPECTRA_SHAPE_ERROR(ParseError, Config);
SPECTRA_SHAPE_ERROR(InvalidGeometry, Config);

SPECTRA_SHAPE_ERROR(InadmissibleParameter, Numerical);
SPECTRA_SHAPE_ERROR(DegenerateProblem, Numerical);
SPECTRA_SHAPE_ERROR(PencilError, Numerical);
SPECTRA_SHAPE_ERROR(NearSingularError, Numerical);
SPECTRA_SHAPE_ERROR(ContourError, Numerical);
SPECTRA_SHAPE_ERROR(MultiplicityError, Numerical);
SPECTRA_SHAPE_ERROR(DomainError, Numerical);
SPECTRA_SHAPE_ERROR(SizeLimitError, Numerical);

SPECTRA_SHAPE_ERROR(ValidationError, Invariant);
SPECTRA_SHAPE_ERROR(ContractViolation, Invariant);
SPECTRA_SHAPE_ERROR(InvariantViolation, Invariant);

#undef SPECTRA_SHAPE_ERROR

}  // namespace spectra_shape
