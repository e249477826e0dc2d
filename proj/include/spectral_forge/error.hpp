#pragma once

#include <stdexcept>
#include <string>

namespace spectral_forge {

enum class ErrorKind {
    domain,             // argument outside the operation's domain
    unsupported,        // construction outside what the library implements
    split_unstable,     // zero extension class
    no_surjection,      // elementary modification has no target surjection
    puncture,           // bisection map evaluated at a zero or pole
    inconsistent_family,
    invalid_family,
    invariance_failure,
    cover_mismatch,
    schema,             // malformed scenario input
    internal
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::domain: return "domain";
        case ErrorKind::unsupported: return "unsupported";
        case ErrorKind::split_unstable: return "split_unstable";
        case ErrorKind::no_surjection: return "no_surjection";
        case ErrorKind::puncture: return "puncture";
        case ErrorKind::inconsistent_family: return "inconsistent_family";
        case ErrorKind::invalid_family: return "invalid_family";
        case ErrorKind::invariance_failure: return "invariance_failure";
        case ErrorKind::cover_mismatch: return "cover_mismatch";
        case ErrorKind::schema: return "schema";
        case ErrorKind::internal: return "internal";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace spectral_forge
