#pragma once

#include <stdexcept>
#include <string>

namespace homogen {

// Base class for all toolkit errors so callers can catch in one place.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Geometry / grid errors
class UnresolvedSphere : public Error {
public:
    UnresolvedSphere(const std::string& msg, int suggested_n = 0)
        : Error(msg), suggested_n(suggested_n) {}
    int suggested_n;  // smallest per-axis cell count that would resolve the sphere
};

class EmptyDomain : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class SphereOutOfDomain : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

// Solver errors
class MaxIterExceeded : public Error {
public:
    using Error::Error;
};

class IndefiniteBreakdown : public Error {
public:
    using Error::Error;
};

class Stagnation : public Error {
public:
    using Error::Error;
};

class PicardDiverged : public Error {
public:
    using Error::Error;
};

class NonFiniteCoefficient : public Error {
public:
    using Error::Error;
};

// Algebraic / input errors
class ZeroGamma : public Error {
public:
    using Error::Error;
};

class ZeroGradient : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace homogen
