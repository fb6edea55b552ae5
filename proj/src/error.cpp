#include "amm/error.hpp"

namespace amm {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IdenticalAssets: return "IdenticalAssets";
        case ErrorCode::ReserveDepletion: return "ReserveDepletion";
        case ErrorCode::SupplyDepletion: return "SupplyDepletion";
        case ErrorCode::NonPositiveState: return "NonPositiveState";
        case ErrorCode::NoSolution: return "NoSolution";
        case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorCode::InvalidBracket: return "InvalidBracket";
        case ErrorCode::DegenerateGradient: return "DegenerateGradient";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::InfeasibleTrade: return "InfeasibleTrade";
        case ErrorCode::NotApplicable: return "NotApplicable";
    }
    return "Unknown";
}

}  // namespace amm
