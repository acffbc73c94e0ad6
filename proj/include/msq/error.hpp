#pragma once

#include <stdexcept>
#include <string>

namespace msq {

// Every failure the library can diagnose carries one of these codes so
// callers (and the CLI) can react without parsing message text.
enum class ErrorCode {
    NonpositiveSize,
    ProbabilityMismatch,
    DuplicateStage,
    UnknownStage,
    CyclicGraph,
    UnreachableFinal,
    InvalidState,
    AgeBeyondSupport,
    BudgetExceeded,
    DegenerateJob,
    NegativeReward,
    Unstable,
    QuadratureBudgetExceeded,
    ParseError,
    InvalidArgument,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonpositiveSize: return "NonpositiveSize";
    case ErrorCode::ProbabilityMismatch: return "ProbabilityMismatch";
    case ErrorCode::DuplicateStage: return "DuplicateStage";
    case ErrorCode::UnknownStage: return "UnknownStage";
    case ErrorCode::CyclicGraph: return "CyclicGraph";
    case ErrorCode::UnreachableFinal: return "UnreachableFinal";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::AgeBeyondSupport: return "AgeBeyondSupport";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::DegenerateJob: return "DegenerateJob";
    case ErrorCode::NegativeReward: return "NegativeReward";
    case ErrorCode::Unstable: return "Unstable";
    case ErrorCode::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace msq
