#include "sch/errors.hpp"

#include <sstream>

namespace sch {

namespace {

std::string mean_message(double mean, double tolerance)
{
    std::ostringstream os;
    os << "field mean " << mean << " exceeds tolerance " << tolerance
       << "; subtract the mean before applying the inverse Neumann operator";
    return os.str();
}

}  // namespace

NonZeroMean::NonZeroMean(double mean, double tolerance)
    : Error(mean_message(mean, tolerance)), mean_(mean) {}

NonFinite::NonFinite(const std::string& quantity, std::int64_t step_index)
    : Error("non-finite " + quantity + " at step " + std::to_string(step_index)),
      step_index_(step_index) {}

ParseError::ParseError(const std::string& message, int line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

}  // namespace sch
