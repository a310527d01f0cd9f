#pragma once

#include <stdexcept>
#include <string>

namespace mdcycles {

/// Base for every recoverable error raised by the library. The CLI maps these
/// to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define MDCYCLES_DEFINE_ERROR(Name)          \
    class Name : public Error {              \
    public:                                  \
        using Error::Error;                  \
    };

MDCYCLES_DEFINE_ERROR(RangeError)
MDCYCLES_DEFINE_ERROR(AlignmentError)
MDCYCLES_DEFINE_ERROR(OrderingError)
MDCYCLES_DEFINE_ERROR(LengthError)
MDCYCLES_DEFINE_ERROR(CoverageError)
MDCYCLES_DEFINE_ERROR(SchemaError)
MDCYCLES_DEFINE_ERROR(ParseError)
MDCYCLES_DEFINE_ERROR(IntegrityError)
MDCYCLES_DEFINE_ERROR(DomainError)
MDCYCLES_DEFINE_ERROR(SelectionError)
MDCYCLES_DEFINE_ERROR(ConfigError)

#undef MDCYCLES_DEFINE_ERROR

/// Raised when fewer than two peaks are available for a cycle. Carries the
/// rendered candidate list so callers can print it.
class InsufficiencyError : public Error {
public:
    InsufficiencyError(const std::string& what, std::string candidates)
        : Error(what), candidates_(std::move(candidates)) {}

    const std::string& candidates() const noexcept { return candidates_; }

private:
    std::string candidates_;
};

} // namespace mdcycles
