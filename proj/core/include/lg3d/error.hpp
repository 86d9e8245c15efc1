#pragma once

#include <stdexcept>
#include <string>

namespace lg3d {

// Error taxonomy. The CLI maps kinds to exit codes: config/validation/parse
// errors exit 2, everything else exits 3.
enum class ErrorKind {
    shape,       // operand dimensions disagree
    contract,    // precondition violated by the caller
    numeric,     // non-finite value where a finite one is required
    parse,       // malformed file
    validation,  // well-formed file with invalid content
    config,      // bad run configuration
    generation,  // scene generator could not satisfy constraints
    io,          // filesystem failure
    train,       // training aborted (divergence, bad checkpoint)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::shape: return "shape";
        case ErrorKind::contract: return "contract";
        case ErrorKind::numeric: return "numeric";
        case ErrorKind::parse: return "parse";
        case ErrorKind::validation: return "validation";
        case ErrorKind::config: return "config";
        case ErrorKind::generation: return "generation";
        case ErrorKind::io: return "io";
        case ErrorKind::train: return "train";
    }
    return "unknown";
}

}  // namespace lg3d
