#include "svnet/error.hpp"

namespace svnet {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidChannel: return "InvalidChannel";
        case ErrorKind::InvalidTopology: return "InvalidTopology";
        case ErrorKind::CycleDetected: return "CycleDetected";
        case ErrorKind::MultipleParents: return "MultipleParents";
        case ErrorKind::BadSplitSum: return "BadSplitSum";
        case ErrorKind::NegativeFlux: return "NegativeFlux";
        case ErrorKind::SupercriticalState: return "SupercriticalState";
        case ErrorKind::SupercriticalStart: return "SupercriticalStart";
        case ErrorKind::SteadyStateBlowup: return "SteadyStateBlowup";
        case ErrorKind::FormMismatch: return "FormMismatch";
        case ErrorKind::NegativeDepth: return "NegativeDepth";
        case ErrorKind::DegenerateFlux: return "DegenerateFlux";
        case ErrorKind::RiccatiBlowup: return "RiccatiBlowup";
        case ErrorKind::EpsilonTooLarge: return "EpsilonTooLarge";
        case ErrorKind::ZeroW: return "ZeroW";
        case ErrorKind::MissingGain: return "MissingGain";
        case ErrorKind::ReflectionPole: return "ReflectionPole";
        case ErrorKind::NotAdmissibleInput: return "NotAdmissibleInput";
        case ErrorKind::CflViolation: return "CflViolation";
        case ErrorKind::SubcriticalLoss: return "SubcriticalLoss";
        case ErrorKind::JunctionDivergence: return "JunctionDivergence";
        case ErrorKind::RootSolveFailure: return "RootSolveFailure";
        case ErrorKind::TerminalSolveFailure: return "TerminalSolveFailure";
        case ErrorKind::NonPositiveV: return "NonPositiveV";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, int channel, double position, long cell)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind), channel_(channel), position_(position), cell_(cell) {}

}  // namespace svnet
