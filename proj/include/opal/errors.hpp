#pragma once

#include <stdexcept>
#include <string>

namespace opal {

// Every failure mode gets its own type so callers (and the CLI exit-code
// mapping) can dispatch on what went wrong rather than parsing messages.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define OPAL_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& what) : Error(#Name, what) {} \
    }

OPAL_DEFINE_ERROR(InvalidShape);
OPAL_DEFINE_ERROR(NotUnitary);
OPAL_DEFINE_ERROR(NotHermitian);
OPAL_DEFINE_ERROR(LabelMismatch);
OPAL_DEFINE_ERROR(InvalidDecomposition);
OPAL_DEFINE_ERROR(DecompositionFailed);
OPAL_DEFINE_ERROR(InternalInconsistency);
OPAL_DEFINE_ERROR(NotFound);
OPAL_DEFINE_ERROR(NotSeparable);
OPAL_DEFINE_ERROR(ThetaRequired);
OPAL_DEFINE_ERROR(EmptyTower);
OPAL_DEFINE_ERROR(Unsupported);
OPAL_DEFINE_ERROR(ParseError);
OPAL_DEFINE_ERROR(ValidationError);

#undef OPAL_DEFINE_ERROR

} // namespace opal
