#pragma once

#include <stdexcept>
#include <string>

namespace rulebench {

// Base of every error raised by the library. `kind()` is a stable,
// machine-readable tag used by the CLI error reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct RangeError : Error {
  explicit RangeError(const std::string& m) : Error("range_error", m) {}
};

struct LinkError : Error {
  explicit LinkError(const std::string& m) : Error("link_error", m) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error("parse_error", m) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& m) : Error("validation_error", m) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error("domain_error", m) {}
};

struct LookupError : Error {
  explicit LookupError(const std::string& m) : Error("lookup_error", m) {}
};

struct CapabilityError : Error {
  explicit CapabilityError(const std::string& m) : Error("capability_error", m) {}
};

struct GenerationError : Error {
  explicit GenerationError(const std::string& m) : Error("generation_error", m) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("config_error", m) {}
};

}  // namespace rulebench
