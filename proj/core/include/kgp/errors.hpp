#pragma once

#include <stdexcept>
#include <string>

namespace kgp {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Line-oriented parse failure (module files, shortcut files, configs).
class ParseError : public Error {
  public:
    ParseError(int line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}

    int line() const { return line_; }
    const std::string& reason() const { return reason_; }

  private:
    int line_;
    std::string reason_;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

} // namespace kgp
