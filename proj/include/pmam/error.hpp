#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pmam {

enum class ErrorCode {
    SingularMatrix,
    DimensionMismatch,
    NonFinite,
    NotSubstochastic,
    NotStochastic,
    InvalidPartition,
    ResidualTooLarge,
    PeriodicChain,
    AnchorNotInA,
    DivergentForcing,
    NoConvergence,
    SingularPsi,
    TailMassTooLarge,
    UnstableR,
    StochasticityViolation,
    PathBudgetExceeded,
    InvalidModel,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for errors caused by malformed input (CLI exit code 2) rather than
/// by a numerical breakdown (exit code 3).
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace pmam
