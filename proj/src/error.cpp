#include "skeptic/error.hpp"

namespace skeptic {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return "Config";
        case ErrorKind::Io: return "Io";
        case ErrorKind::Auth: return "Auth";
        case ErrorKind::ExhaustedRetries: return "ExhaustedRetries";
        case ErrorKind::MalformedResponse: return "MalformedResponse";
        case ErrorKind::MockMiss: return "MockMiss";
        case ErrorKind::ScriptedFailure: return "ScriptedFailure";
        case ErrorKind::CacheCorrupt: return "CacheCorrupt";
        case ErrorKind::MissingVariable: return "MissingVariable";
        case ErrorKind::UnknownTemplate: return "UnknownTemplate";
        case ErrorKind::EmptyQuestionList: return "EmptyQuestionList";
        case ErrorKind::EmptyEvidence: return "EmptyEvidence";
        case ErrorKind::EmptyDecomposition: return "EmptyDecomposition";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::SingleClassDataset: return "SingleClassDataset";
        case ErrorKind::EmptyList: return "EmptyList";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::CountMismatch: return "CountMismatch";
        case ErrorKind::InsufficientClass: return "InsufficientClass";
        case ErrorKind::InconsistentGrid: return "InconsistentGrid";
        case ErrorKind::MissingQuestionSet: return "MissingQuestionSet";
    }
    return "Unknown";
}

}  // namespace skeptic
