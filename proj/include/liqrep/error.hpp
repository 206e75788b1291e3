#pragma once

#include <stdexcept>
#include <string>

namespace liqrep {

enum class ErrorCode {
    NotPositiveDefinite,
    NotSymmetric,
    ZeroPaths,
    InvalidParams,
    DegenerateState,
    GridMismatch,
    MaturityPassed,
    SingularConfig,
    SingularSystem,
    MissingHatHedge,
    RegressionRankDeficient,
    PicardDiverged,
    NotSubmartingaleParams,
    MissingDerivative,
    InconsistentSeeds,
    ParseError,
    ValidationError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /// Validation-type failures map to CLI exit code 2, everything else to 3.
    bool is_validation() const noexcept {
        return code_ == ErrorCode::InvalidParams || code_ == ErrorCode::ParseError ||
               code_ == ErrorCode::ValidationError || code_ == ErrorCode::NotSymmetric ||
               code_ == ErrorCode::NotPositiveDefinite || code_ == ErrorCode::ZeroPaths ||
               code_ == ErrorCode::SingularConfig || code_ == ErrorCode::NotSubmartingaleParams;
    }

private:
    ErrorCode code_;
};

}  // namespace liqrep
