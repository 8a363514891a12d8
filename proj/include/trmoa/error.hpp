#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trmoa {

// Base for every error the library throws. The C API maps subclasses onto
// status codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised when an exact search is asked to run outside its size limits.
class GuardRailExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace trmoa
