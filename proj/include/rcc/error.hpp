#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rcc {

enum class Errc {
    InvalidArgument,
    MissingFile,
    ParseError,
    DuplicateId,
    MixedOutputKinds,
    NonFiniteValue,
    RaggedRow,
    IoError,
    TooFewSamples,
    DegenerateDistances,
    KTooLarge,
    ConstantCurve,
    NoValidConfiguration,
    MinClusterSizeTooLarge,
    TooFewClusters,
    LayerNotFound,
    DimensionMismatch,
    EmptyAssignment,
    DeltaTooLarge,
    MissingKeypoints,
    OutOfBounds,
    InsufficientCorrectImages,
    NoClusters,
    NoScenarios,
    NothingCovered,
    StageFailure,
};

inline constexpr std::string_view errc_name(Errc c) {
    switch (c) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::MissingFile: return "MissingFile";
    case Errc::ParseError: return "ParseError";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::MixedOutputKinds: return "MixedOutputKinds";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::RaggedRow: return "RaggedRow";
    case Errc::IoError: return "IoError";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::DegenerateDistances: return "DegenerateDistances";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::ConstantCurve: return "ConstantCurve";
    case Errc::NoValidConfiguration: return "NoValidConfiguration";
    case Errc::MinClusterSizeTooLarge: return "MinClusterSizeTooLarge";
    case Errc::TooFewClusters: return "TooFewClusters";
    case Errc::LayerNotFound: return "LayerNotFound";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyAssignment: return "EmptyAssignment";
    case Errc::DeltaTooLarge: return "DeltaTooLarge";
    case Errc::MissingKeypoints: return "MissingKeypoints";
    case Errc::OutOfBounds: return "OutOfBounds";
    case Errc::InsufficientCorrectImages: return "InsufficientCorrectImages";
    case Errc::NoClusters: return "NoClusters";
    case Errc::NoScenarios: return "NoScenarios";
    case Errc::NothingCovered: return "NothingCovered";
    case Errc::StageFailure: return "StageFailure";
    }
    return "Unknown";
}

/// Library-wide exception. Every failure carries a machine-checkable code.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Failure inside a pipeline stage; wraps the original error with the stage name.
class StageError : public Error {
public:
    StageError(std::string stage, Errc inner, const std::string& what)
        : Error(Errc::StageFailure, stage + ": " + what), stage_(std::move(stage)), inner_(inner) {}

    const std::string& stage() const noexcept { return stage_; }
    Errc inner_code() const noexcept { return inner_; }

private:
    std::string stage_;
    Errc inner_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace rcc
