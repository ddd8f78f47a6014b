#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace covrage {

// Bad or inconsistent configuration (array sizes, partition factors, tables, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Geometric/model validity violations: invalid UV points, directions behind
// the array plane, degenerate beams.
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

class InvalidUvError : public DomainError {
 public:
  explicit InvalidUvError(const std::string& what) : DomainError(what) {}
};

// A direction (or trajectory sample) that falls outside the front hemisphere.
class HemisphereError : public DomainError {
 public:
  explicit HemisphereError(const std::string& what,
                           std::optional<std::size_t> sample = std::nullopt)
      : DomainError(sample ? what + " (sample " + std::to_string(*sample) + ")" : what),
        sample_index(sample) {}

  std::optional<std::size_t> sample_index;
};

}  // namespace covrage
