#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace svnet {

/** Failure categories raised by the library. */
enum class ErrorKind {
    InvalidChannel,
    InvalidTopology,
    CycleDetected,
    MultipleParents,
    BadSplitSum,
    NegativeFlux,
    SupercriticalState,
    SupercriticalStart,
    SteadyStateBlowup,
    FormMismatch,
    NegativeDepth,
    DegenerateFlux,
    RiccatiBlowup,
    EpsilonTooLarge,
    ZeroW,
    MissingGain,
    ReflectionPole,
    NotAdmissibleInput,
    CflViolation,
    SubcriticalLoss,
    JunctionDivergence,
    RootSolveFailure,
    TerminalSolveFailure,
    NonPositiveV,
};

const char* to_string(ErrorKind kind);

/**
 * Exception carrying a category plus optional location data.
 * `channel` is a channel id (-1 when not applicable), `position` a coordinate
 * in meters or a time in seconds depending on the category, `cell` a cell index.
 */
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, int channel = -1,
          double position = std::numeric_limits<double>::quiet_NaN(), long cell = -1);

    ErrorKind kind() const noexcept { return kind_; }
    int channel() const noexcept { return channel_; }
    double position() const noexcept { return position_; }
    long cell() const noexcept { return cell_; }

private:
    ErrorKind kind_;
    int channel_;
    double position_;
    long cell_;
};

}  // namespace svnet
