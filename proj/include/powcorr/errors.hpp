#pragma once

#include <stdexcept>
#include <string>

namespace powcorr {

/// Failure categories. The CLI maps each one onto a distinct exit status.
enum class ErrorKind { usage, domain, numerical, resource, precision };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct UsageError : Error {
    explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

struct ResourceError : Error {
    explicit ResourceError(const std::string& what) : Error(ErrorKind::resource, what) {}
};

/// Thrown when the guard bits cannot certify the resolution a statistic needs.
struct PrecisionError : Error {
    PrecisionError(const std::string& what, int required_guard_bits)
        : Error(ErrorKind::precision, what), required_guard_bits(required_guard_bits) {}
    int required_guard_bits;
};

inline int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::usage: return 2;
    case ErrorKind::domain: return 3;
    case ErrorKind::numerical: return 4;
    case ErrorKind::resource: return 5;
    case ErrorKind::precision: return 6;
    }
    return 1;
}

}  // namespace powcorr
