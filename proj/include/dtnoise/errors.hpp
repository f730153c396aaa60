#pragma once

#include <stdexcept>
#include <string>

namespace dtnoise {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class UnknownBand : public Error {
public:
    using Error::Error;
};

class InvalidParam : public Error {
public:
    using Error::Error;
};

class NotParaUnitary : public Error {
public:
    using Error::Error;
};

class QuadratureNonConvergent : public Error {
public:
    using Error::Error;
};

class InvalidBand : public Error {
public:
    using Error::Error;
};

class MissingLag : public Error {
public:
    using Error::Error;
};

class PhaseUnavailable : public Error {
public:
    using Error::Error;
};

class NotSeparable : public Error {
public:
    using Error::Error;
};

class NotIntegrable : public Error {
public:
    using Error::Error;
};

class GammaDomainExceeded : public Error {
public:
    using Error::Error;
};

class NonPositiveDefinite : public Error {
public:
    using Error::Error;
};

class InvalidSubband : public Error {
public:
    using Error::Error;
};

class UnknownTable : public Error {
public:
    using Error::Error;
};

class DegenerateFit : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace dtnoise
