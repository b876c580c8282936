#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tsdet {

// Base of every exception thrown by the library. The CLI maps the concrete
// subclasses onto exit codes, so new error kinds should derive from one of
// these rather than from std::exception directly.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DegenerateGeometry : public Error {
public:
  using Error::Error;
};

class InvalidConfig : public Error {
public:
  using Error::Error;
};

class InvalidInput : public Error {
public:
  using Error::Error;
};

class NumericalRange : public Error {
public:
  using Error::Error;
};

class ImageTooSmall : public Error {
public:
  using Error::Error;
};

class PlacementFailure : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace tsdet
