#pragma once

#include <stdexcept>
#include <string>

namespace somkit {

// Exit-code category carried by every library error.
enum class ErrorKind { Usage = 1, Data = 2, Numeric = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

/// Throws the subclass matching `kind`.
[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& what) {
    switch (kind) {
    case ErrorKind::Usage:
        throw UsageError(what);
    case ErrorKind::Numeric:
        throw NumericError(what);
    case ErrorKind::Data:
        break;
    }
    throw DataError(what);
}

} // namespace somkit
