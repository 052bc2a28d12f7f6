#include "dse/errors.hpp"

#include "dse/archmodel.hpp"

#include <string>

namespace dse {

ResolutionTooSmall::ResolutionTooSmall(int res)
    : Error("resolution too small: " + std::to_string(res) + " is below the minimum of " +
            std::to_string(Theta::kMinResolution)),
      resolution(res)
{}

NonPositiveInput::NonPositiveInput(std::string f, double v)
    : Error(f + " must be > 0 (got " + std::to_string(v) + ")"), field(std::move(f)), value(v)
{}

ParseError::ParseError(std::size_t r, const std::string &what)
    : Error("row " + std::to_string(r) + ": " + what), row(r)
{}

ValidationError::ValidationError(std::size_t r, const std::string &what)
    : Error("row " + std::to_string(r) + ": " + what), row(r)
{}

ProcessError::ProcessError(const std::string &what, int status)
    : EvaluatorError(what), exit_status(status)
{}

}  // namespace dse
