#pragma once

#include <stdexcept>
#include <string>

namespace skeptic {

enum class ErrorKind {
    Config,
    Io,
    Auth,
    ExhaustedRetries,
    MalformedResponse,
    MockMiss,
    ScriptedFailure,
    CacheCorrupt,
    MissingVariable,
    UnknownTemplate,
    EmptyQuestionList,
    EmptyEvidence,
    EmptyDecomposition,
    LengthMismatch,
    SingleClassDataset,
    EmptyList,
    SchemaError,
    CountMismatch,
    InsufficientClass,
    InconsistentGrid,
    MissingQuestionSet,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace skeptic
