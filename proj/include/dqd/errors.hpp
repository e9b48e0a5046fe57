#ifndef DQD_ERRORS_HPP
#define DQD_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace dqd {

enum class ErrorCode {
    InvalidSpec,
    EnergyOutOfBand,
    NotApplicable,
    NoSolution,
    OutOfBand,
    NumericalFailure,
    ZeroVector,
    DefectiveDecomposition,
    SingularResolvent,
    NoZeros,
    AmbiguousPair,
    UnknownFigure,
    ConfigError,
    IoFailure,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::EnergyOutOfBand: return "EnergyOutOfBand";
        case ErrorCode::NotApplicable: return "NotApplicable";
        case ErrorCode::NoSolution: return "NoSolution";
        case ErrorCode::OutOfBand: return "OutOfBand";
        case ErrorCode::NumericalFailure: return "NumericalFailure";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::DefectiveDecomposition: return "DefectiveDecomposition";
        case ErrorCode::SingularResolvent: return "SingularResolvent";
        case ErrorCode::NoZeros: return "NoZeros";
        case ErrorCode::AmbiguousPair: return "AmbiguousPair";
        case ErrorCode::UnknownFigure: return "UnknownFigure";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace dqd

#endif
