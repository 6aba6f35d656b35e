#include "selfsim/errors.hpp"

namespace selfsim {

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::ParseError:
        return 2;
    case ErrorCode::PreconditionFailed:
    case ErrorCode::NotCommensurable:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::SscUnverifiable:
    case ErrorCode::ContextMismatch:
    case ErrorCode::PrefixOverlap:
    case ErrorCode::EmptyIntersection:
    case ErrorCode::AddressTooShort:
    case ErrorCode::HypothesisNotApplicable:
        return 3;
    case ErrorCode::Infeasible:
    case ErrorCode::NoFeasibleC:
        return 4;
    case ErrorCode::ResourceLimit:
        return 5;
    }
    return 1;
}

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::NotCommensurable: return "NotCommensurable";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SscUnverifiable: return "SscUnverifiable";
    case ErrorCode::ContextMismatch: return "ContextMismatch";
    case ErrorCode::PrefixOverlap: return "PrefixOverlap";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::AddressTooShort: return "AddressTooShort";
    case ErrorCode::HypothesisNotApplicable: return "HypothesisNotApplicable";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NoFeasibleC: return "NoFeasibleC";
    case ErrorCode::ResourceLimit: return "ResourceLimit";
    }
    return "Error";
}

void fail(ErrorCode code, const std::string& what) {
    throw Error(code, std::string(error_code_name(code)) + ": " + what);
}

} // namespace selfsim
