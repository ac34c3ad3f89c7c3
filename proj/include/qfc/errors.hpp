#pragma once

#include <stdexcept>
#include <string>

namespace qfc {

/// Base class for all toolkit exceptions.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Operand dimensions are incompatible or not a power of two.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

/// A matrix failed a requested validity check (finiteness, Hermiticity,
/// positivity, trace bound, unitarity).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Bad qubit addressing: duplicate targets, out-of-range index, or a
/// malformed permutation.
class TargetError : public Error {
public:
    explicit TargetError(const std::string& what) : Error(what) {}
};

/// Gate name not present in the catalog.
class UnknownGateError : public Error {
public:
    explicit UnknownGateError(const std::string& what) : Error(what) {}
};

/// A run would exceed the configured qubit capacity.
class QubitCapExceeded : public Error {
public:
    explicit QubitCapExceeded(const std::string& what) : Error(what) {}
};

/// Bad run configuration (unusable input state, invalid option combination).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

} // namespace qfc
