#include "netaipw/error.hpp"

namespace netaipw {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::SelfLoop: return "SelfLoop";
        case ErrorKind::InvalidProbability: return "InvalidProbability";
        case ErrorKind::InvalidParameter: return "InvalidParameter";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::InvalidSem: return "InvalidSem";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::NonFiniteInput: return "NonFiniteInput";
        case ErrorKind::InvalidEps: return "InvalidEps";
        case ErrorKind::InvalidK: return "InvalidK";
        case ErrorKind::CrossFitInfeasible: return "CrossFitInfeasible";
        case ErrorKind::DegeneratePropensity: return "DegeneratePropensity";
        case ErrorKind::EmptyRuns: return "EmptyRuns";
        case ErrorKind::DegenerateArms: return "DegenerateArms";
        case ErrorKind::AlphaTooLarge: return "AlphaTooLarge";
        case ErrorKind::Parse: return "Parse";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace netaipw
