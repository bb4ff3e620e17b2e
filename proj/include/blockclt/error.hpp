#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blockclt {

enum class ErrorKind {
    domain,
    out_of_range,
    infeasible,
    shape,
    insufficient_data,
    ingestion,
    unsupported,
    precision,
    resource,
    merge,
    config,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::out_of_range: return "out of range";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::shape: return "shape error";
    case ErrorKind::insufficient_data: return "insufficient data";
    case ErrorKind::ingestion: return "ingestion error";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::precision: return "precision error";
    case ErrorKind::resource: return "resource error";
    case ErrorKind::merge: return "merge error";
    case ErrorKind::config: return "config error";
    }
    return "error";
}

} // namespace blockclt
