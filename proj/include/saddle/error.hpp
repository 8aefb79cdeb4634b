#pragma once

#include <stdexcept>
#include <string>

namespace saddle {

// Failure categories; the CLI maps them 1:1 onto exit codes.
enum class ErrorCode {
    Internal = 1,
    InvalidInput = 2,
    SpecialDomain = 3,
    DivergenceDetected = 4,
    KrustFailure = 5,
    SolverFailure = 6,
    IoError = 7,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::Internal: return "internal";
        case ErrorCode::InvalidInput: return "invalid-input";
        case ErrorCode::SpecialDomain: return "special-domain";
        case ErrorCode::DivergenceDetected: return "divergence-detected";
        case ErrorCode::KrustFailure: return "krust-failure";
        case ErrorCode::SolverFailure: return "solver-failure";
        case ErrorCode::IoError: return "io-error";
    }
    return "unknown";
}

} // namespace saddle
