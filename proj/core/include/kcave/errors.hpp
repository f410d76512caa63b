#ifndef KCAVE_ERRORS_HPP
#define KCAVE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kcave {

// Coarse failure category, used by the CLI to pick an exit code.
enum class ErrorCategory {
  Input,   // bad data or configuration
  Solver,  // LP / numerical failure
};

class Error : public std::runtime_error {
public:
  Error(ErrorCategory cat, std::string what) : std::runtime_error(std::move(what)), cat_(cat) {}
  ErrorCategory category() const { return cat_; }

private:
  ErrorCategory cat_;
};

#define KCAVE_DEFINE_ERROR(Name, Cat)                                   \
  class Name : public Error {                                           \
  public:                                                               \
    explicit Name(const std::string& what)                              \
        : Error(ErrorCategory::Cat, std::string(#Name ": ") + what) {}  \
  }

KCAVE_DEFINE_ERROR(ParseError, Input);
KCAVE_DEFINE_ERROR(ValidationError, Input);
KCAVE_DEFINE_ERROR(ArbitrageError, Input);
KCAVE_DEFINE_ERROR(CenteringError, Input);
KCAVE_DEFINE_ERROR(CoverageError, Input);
KCAVE_DEFINE_ERROR(HorizonError, Input);
KCAVE_DEFINE_ERROR(SizeError, Input);
KCAVE_DEFINE_ERROR(RuleMismatchError, Input);

KCAVE_DEFINE_ERROR(InfeasibleError, Solver);
KCAVE_DEFINE_ERROR(UnboundedError, Solver);
KCAVE_DEFINE_ERROR(MaxIterationsError, Solver);
KCAVE_DEFINE_ERROR(NegativeMassError, Solver);
KCAVE_DEFINE_ERROR(ShapeError, Solver);
KCAVE_DEFINE_ERROR(RegularizationChangedLawError, Solver);

#undef KCAVE_DEFINE_ERROR

}  // namespace kcave

#endif
