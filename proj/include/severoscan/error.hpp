#pragma once

#include <stdexcept>
#include <string>

namespace severoscan {

// Base for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input could not be decoded or violates a format precondition.
class FormatError : public Error {
public:
    using Error::Error;
};

// The lung segmentation found no usable lung region.
class NoLungDetected : public Error {
public:
    NoLungDetected() : Error("no lung detected") {}
};

} // namespace severoscan
