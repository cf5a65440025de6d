#pragma once

#include <stdexcept>
#include <string>

namespace deeposg {

/// Base of every error thrown by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
public:
  enum class Kind { dimension, numeric, config, io, domain };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

/// Shape mismatch. `where` names the offending layer, block or burst.
class DimensionError : public Error {
public:
  DimensionError(std::string where, const std::string& what)
      : Error(Kind::dimension, where + ": " + what), where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

private:
  std::string where_;
};

/// Non-finite values, divergence, solver failure.
class NumericError : public Error {
public:
  explicit NumericError(const std::string& what) : Error(Kind::numeric, what) {}
};

/// Precondition on an argument value (empty box, bad fraction, log of zero...).
class DomainError : public Error {
public:
  explicit DomainError(const std::string& what) : Error(Kind::domain, what) {}
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(Kind::config, what) {}
};

class IoError : public Error {
public:
  IoError(std::string path, const std::string& what)
      : Error(Kind::io, path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

}  // namespace deeposg
