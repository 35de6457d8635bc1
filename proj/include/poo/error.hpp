#pragma once

#include <stdexcept>
#include <string>

namespace poo {

enum class ErrorKind {
  address,      // cell address outside the partitioning
  domain,       // point outside an objective's domain
  geometry,     // degenerate region
  empty,        // operation needs at least one evaluation
  not_ready,    // optimizer state cannot answer yet
  fit,          // not enough data to fit
  resource,     // enumeration guard exceeded
  capability,   // objective lacks a required rule
  config,       // invalid configuration
  io,           // file could not be read or written
  format,       // malformed checkpoint blob
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; the kind selects the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace poo
