#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ladic {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotAUnit : Error {
    NotAUnit() : Error("value is not a unit") {}
};

struct PreconditionViolated : Error {
    using Error::Error;
};

struct OddTrace : Error {
    OddTrace() : Error("trace is odd; theta undefined at l=2") {}
};

struct InvalidParams : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct CaseNotCovered : Error {
    using Error::Error;
};

struct UnclassifiableInternal : Error {
    using Error::Error;
};

struct MagnitudeOverflow : Error {
    using Error::Error;
};

struct CapExceeded : Error {
    explicit CapExceeded(std::uint64_t cap)
        : Error("closure exceeds cap of " + std::to_string(cap) + " elements"), cap(cap) {}
    std::uint64_t cap;
};

struct InsufficientPrecision : Error {
    explicit InsufficientPrecision(int required)
        : Error("precision too small, need N >= " + std::to_string(required)),
          required(required) {}
    int required;
};

} // namespace ladic
