#pragma once

#include <stdexcept>
#include <string>

namespace dccs {

// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class RoiOutOfBounds : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

class InvalidValue : public Error {
public:
    using Error::Error;
};

class SvdFailure : public Error {
public:
    using Error::Error;
};

// Raised when a CG iterate (or any solver iterate) contains NaN/Inf.
class NonFiniteIterate : public Error {
public:
    using Error::Error;
};

class ZeroReferenceFrame : public Error {
public:
    using Error::Error;
};

class EmptyMask : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace dccs
