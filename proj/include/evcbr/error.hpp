#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evcbr {

/// Base class for every failure the engine reports to callers.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class QueryError : public Error {
 public:
  using Error::Error;
};

class SplitError : public Error {
 public:
  SplitError(const std::string& what, std::size_t selected) : Error(what), selected_(selected) {}

  std::size_t selected() const { return selected_; }

 private:
  std::size_t selected_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace evcbr
