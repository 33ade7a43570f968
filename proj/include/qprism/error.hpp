#pragma once

#include <stdexcept>
#include <string>

namespace qprism {

enum class ErrorKind {
    RingMismatch,
    PrecisionExhausted,
    NotAUnit,
    NotInvertible,
    BudgetExceeded,
    DeltaIncoherent,
    NotDeltaCompatible,
    BadBeta,
    PreconditionViolated,
    BadCenter,
    DepthExceeded,
    WeightCapTooSmall,
    HostMismatch,
    FrobeniusRelationFailed,
    InvalidPullbackSpec,
    OrderViolation,
    NotQuasiNilpotent,
    AugmentationFailed,
    NotAComplex,
    BadInput,
};

const char* error_kind_name(ErrorKind k);

// process exit code of an error: 1 invariant violation, 2 bad input, 3 precision or budget exhausted
inline int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::BadInput:
        case ErrorKind::RingMismatch:
        case ErrorKind::HostMismatch:
        case ErrorKind::NotAUnit:
        case ErrorKind::NotInvertible:
            return 2;
        case ErrorKind::PrecisionExhausted:
        case ErrorKind::BudgetExceeded:
        case ErrorKind::WeightCapTooSmall:
        case ErrorKind::DepthExceeded:
            return 3;
        default:
            return 1;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

}  // namespace qprism
