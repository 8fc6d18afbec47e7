#pragma once

#include <stdexcept>
#include <string>

namespace heunbeta {

// Error hierarchy shared by every module. Each condition the library can
// reject maps to one concrete type so callers can dispatch on catch.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };          // argument outside the supported domain
struct ConvergenceError : Error { using Error::Error; };     // iteration cap hit before the stop rule
struct ConstraintViolation : Error { using Error::Error; };  // family applicability relation fails
struct PivotBreakdown : Error { using Error::Error; };       // recurrence pivot vanished (degenerate gamma)
struct NotTerminating : Error { using Error::Error; };       // closed form requested where none exists
struct StepBreakdown : Error { using Error::Error; };        // elementary-reduction step impossible
struct StepSizeError : Error { using Error::Error; };        // integrator step-size underflow
struct UnsupportedFamily : Error { using Error::Error; };    // operation not defined for this family
struct ParseError : Error { using Error::Error; };           // malformed parameter file or grid spec

} // namespace heunbeta
