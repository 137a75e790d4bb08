#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ubayes {

/**
 * Base class for all domain errors raised by the library.
 *
 * `name()` is a stable machine-readable identifier (e.g. "ZeroMarginal",
 * "NotEstimable") used by the CLI for structured error reporting; `what()`
 * carries the human-readable detail.
 */
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& message)
        : std::runtime_error(message), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

struct LengthMismatch : Error {
    explicit LengthMismatch(const std::string& m) : Error("LengthMismatch", m) {}
};

struct NonFiniteValue : Error {
    explicit NonFiniteValue(const std::string& m) : Error("NonFiniteValue", m) {}
};

struct NonIncreasingNodes : Error {
    explicit NonIncreasingNodes(const std::string& m) : Error("NonIncreasingNodes", m) {}
};

struct ZeroPriorWeight : Error {
    explicit ZeroPriorWeight(const std::string& m) : Error("ZeroPriorWeight", m) {}
};

struct PriorNotNormalized : Error {
    explicit PriorNotNormalized(const std::string& m) : Error("PriorNotNormalized", m) {}
};

struct NonStochasticRow : Error {
    explicit NonStochasticRow(const std::string& m) : Error("NonStochasticRow", m) {}
};

struct ZeroMarginal : Error {
    explicit ZeroMarginal(const std::string& m) : Error("ZeroMarginal", m) {}
};

struct DuplicateLabel : Error {
    explicit DuplicateLabel(const std::string& m) : Error("DuplicateLabel", m) {}
};

struct UnknownName : Error {
    explicit UnknownName(const std::string& m) : Error("UnknownName", m) {}
};

struct BadTolerance : Error {
    explicit BadTolerance(const std::string& m) : Error("BadTolerance", m) {}
};

struct DegreeTooHigh : Error {
    explicit DegreeTooHigh(const std::string& m) : Error("DegreeTooHigh", m) {}
};

struct DegreeMismatch : Error {
    explicit DegreeMismatch(const std::string& m) : Error("DegreeMismatch", m) {}
};

struct NMaxTooLarge : Error {
    explicit NMaxTooLarge(const std::string& m) : Error("NMaxTooLarge", m) {}
};

struct BadSpec : Error {
    explicit BadSpec(const std::string& m) : Error("BadSpec", m) {}
};

}  // namespace ubayes
