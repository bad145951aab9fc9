#include "gdm/errors.hpp"

namespace gdm {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Topology: return "TopologyError";
    case ErrorKind::DegenerateCell: return "DegenerateCell";
    case ErrorKind::EigSolverFailure: return "EigSolverFailure";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::LinearSolverFailure: return "LinearSolverFailure";
    case ErrorKind::ViscosityRange: return "ViscosityRangeError";
    case ErrorKind::PicardDivergence: return "PicardDivergence";
    case ErrorKind::ZeroNorm: return "ZeroNormError";
    case ErrorKind::InsufficientLevels: return "InsufficientLevels";
    case ErrorKind::NonpositiveValue: return "NonpositiveValue";
    case ErrorKind::Config: return "ConfigError";
    }
    return "Error";
}

} // namespace gdm
