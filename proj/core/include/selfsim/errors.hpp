#pragma once

#include <stdexcept>
#include <string>

namespace selfsim {

enum class ErrorCode {
    ParseError,
    PreconditionFailed,
    NotCommensurable,
    DimensionMismatch,
    SscUnverifiable,
    ContextMismatch,
    PrefixOverlap,
    EmptyIntersection,
    AddressTooShort,
    HypothesisNotApplicable,
    Infeasible,
    NoFeasibleC,
    ResourceLimit,
};

// Process exit classes used by the CLI: parse=2, precondition=3, infeasible=4, resource=5.
int exit_code_for(ErrorCode code);
const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

} // namespace selfsim
