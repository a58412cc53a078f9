#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skitrack
{

/// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Degenerate or non-finite box geometry.
class GeometryError : public Error
{
public:
  using Error::Error;
};

/// Box lies entirely outside the image rectangle.
class OutOfFrameError : public GeometryError
{
public:
  using GeometryError::GeometryError;
};

/// Inputs that are individually well formed but inconsistent with each other
/// (frame-domain mismatch, missing embedding, mismatched sequence sets...).
class InputError : public Error
{
public:
  using Error::Error;
};

/// Malformed file content. Carries file/line/field coordinates.
class ParseError : public InputError
{
public:
  ParseError(std::string file, std::size_t line, std::string field, const std::string& what)
    : InputError(file + ":" + std::to_string(line) + ": field '" + field + "': " + what),
      file_(std::move(file)), line_(line), field_(std::move(field))
  {
  }

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

private:
  std::string file_;
  std::size_t line_;
  std::string field_;
};

/// Numerical breakdown (singular innovation covariance, non-finite state).
class NumericalError : public Error
{
public:
  using Error::Error;
};

/// Invalid run configuration.
class ConfigError : public Error
{
public:
  using Error::Error;
};

}  // namespace skitrack
