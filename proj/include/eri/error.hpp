#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eri {

/// Failure categories raised across the library. Every thrown eri::Error
/// carries exactly one of these.
enum class ErrorCode {
    EmptyInput,
    MissingCell,
    DuplicateEntry,
    NonPositivePrice,
    UnparseableDate,
    UnparseableNumber,
    MalformedCsv,
    TooFewDates,
    DimensionMismatch,
    InvalidWeights,
    InsufficientData,
    DegenerateTail,
    FractionOutOfRange,
    TooFewRows,
    EmptySample,
    EmptyTail,
    ZeroVolatility,
    NoRelevantAssets,
    InvalidSpec,
    DimensionTooLarge,
    DegeneratePortfolio,
    InvalidConfig,
    UnknownTicker,
};

inline constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::MissingCell: return "MissingCell";
        case ErrorCode::DuplicateEntry: return "DuplicateEntry";
        case ErrorCode::NonPositivePrice: return "NonPositivePrice";
        case ErrorCode::UnparseableDate: return "UnparseableDate";
        case ErrorCode::UnparseableNumber: return "UnparseableNumber";
        case ErrorCode::MalformedCsv: return "MalformedCsv";
        case ErrorCode::TooFewDates: return "TooFewDates";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidWeights: return "InvalidWeights";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::DegenerateTail: return "DegenerateTail";
        case ErrorCode::FractionOutOfRange: return "FractionOutOfRange";
        case ErrorCode::TooFewRows: return "TooFewRows";
        case ErrorCode::EmptySample: return "EmptySample";
        case ErrorCode::EmptyTail: return "EmptyTail";
        case ErrorCode::ZeroVolatility: return "ZeroVolatility";
        case ErrorCode::NoRelevantAssets: return "NoRelevantAssets";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
        case ErrorCode::DegeneratePortfolio: return "DegeneratePortfolio";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::UnknownTicker: return "UnknownTicker";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    /// Message without the code prefix.
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace eri
