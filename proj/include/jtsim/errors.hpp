#ifndef JTSIM_ERRORS_HPP
#define JTSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace jtsim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parameter outside the documented domain of an operation.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Population pushed into the top of a truncated Fock space.
class TruncationOverflow : public Error {
public:
    TruncationOverflow(const std::string& what, double leaked)
        : Error(what), leaked_(leaked) {}
    double leaked() const { return leaked_; }

private:
    double leaked_;
};

class IntegratorFailure : public Error {
public:
    using Error::Error;
};

class FitFailure : public Error {
public:
    using Error::Error;
};

class WindowTooNarrow : public Error {
public:
    using Error::Error;
};

class NoTailPoints : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace jtsim

#endif  // JTSIM_ERRORS_HPP
