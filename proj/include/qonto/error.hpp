#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qonto {

/// Base class for every error raised by the library. The message is
/// prefixed with the module that raised it, e.g. "corpus: line 3: ...".
class Error : public std::runtime_error {
 public:
  Error(const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(module) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Error tied to a line of an input document.
class ParseError : public Error {
 public:
  ParseError(const std::string& module, std::size_t line, const std::string& what)
      : Error(module, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qonto
