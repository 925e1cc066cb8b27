#include "pmam/error.hpp"

namespace pmam {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::SingularMatrix: return "SingularMatrix";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::NotSubstochastic: return "NotSubstochastic";
        case ErrorCode::NotStochastic: return "NotStochastic";
        case ErrorCode::InvalidPartition: return "InvalidPartition";
        case ErrorCode::ResidualTooLarge: return "ResidualTooLarge";
        case ErrorCode::PeriodicChain: return "PeriodicChain";
        case ErrorCode::AnchorNotInA: return "AnchorNotInA";
        case ErrorCode::DivergentForcing: return "DivergentForcing";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::SingularPsi: return "SingularPsi";
        case ErrorCode::TailMassTooLarge: return "TailMassTooLarge";
        case ErrorCode::UnstableR: return "UnstableR";
        case ErrorCode::StochasticityViolation: return "StochasticityViolation";
        case ErrorCode::PathBudgetExceeded: return "PathBudgetExceeded";
        case ErrorCode::InvalidModel: return "InvalidModel";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DimensionMismatch:
        case ErrorCode::NonFinite:
        case ErrorCode::NotSubstochastic:
        case ErrorCode::NotStochastic:
        case ErrorCode::InvalidPartition:
        case ErrorCode::AnchorNotInA:
        case ErrorCode::StochasticityViolation:
        case ErrorCode::InvalidModel:
        case ErrorCode::InvalidArgument:
            return true;
        default:
            return false;
    }
}

}  // namespace pmam
