#pragma once

#include <stdexcept>
#include <string>

namespace distress {

enum class ErrorCode {
    InvalidNumber,
    DivisionByZero,
    NotASquare,
    NotOnCurve,
    CannotCompressIdentity,
    InvalidPoint,
    EmbeddingFailed,
    InvalidFieldElement,
    InvalidLength,
    LayoutViolation,
    ContractViolation,
    InvalidSeed,
    DegenerateShare,
    MissingGroupOrder,
    ParamsInvalid,
    StoreCorrupt,
    MalformedMessage,
    SessionFailure,
    ScriptError,
    ProtocolRejected,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace distress
