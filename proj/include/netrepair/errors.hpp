#pragma once

#include <stdexcept>
#include <string>

namespace netrepair {

// Base class for all library errors so callers can catch one type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Mismatched tensor/layer dimensions or malformed topology.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Unreadable or malformed input file (network, property, CSV).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Sampling could not find the required positive examples even after
// relaxing the input region through the whole delta schedule.
class PositivesUnavailable : public Error {
public:
    explicit PositivesUnavailable(const std::string& msg) : Error(msg) {}
};

// Label correction was asked to run with an empty positive set.
class CorrectionImpossible : public Error {
public:
    explicit CorrectionImpossible(const std::string& msg) : Error(msg) {}
};

// Training produced non-finite weights or losses.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& msg) : Error(msg) {}
};

// Invalid configuration value or argument combination.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

} // namespace netrepair
