#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gdm {

enum class ErrorKind {
    Parse,
    Topology,
    DegenerateCell,
    EigSolverFailure,
    SingularGram,
    LinearSolverFailure,
    ViscosityRange,
    PicardDivergence,
    ZeroNorm,
    InsufficientLevels,
    NonpositiveValue,
    Config,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Library error. The kind is stable and machine-checkable; the message carries context.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message)
    {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

    /// Same kind, message prefixed with `where`.
    [[nodiscard]] Error with_context(const std::string& where) const { return Error(kind_, where + ": " + detail_); }

private:
    ErrorKind kind_;
    std::string detail_;
};

} // namespace gdm
